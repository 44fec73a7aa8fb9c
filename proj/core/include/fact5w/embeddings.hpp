#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "fact5w/corpus.hpp"

namespace fact5w::emb {

/// rows = tokens, cols = embedding dimension.
using Matrix = Eigen::MatrixXd;

enum class Field : int { Claim = 0, Evidence = 1, ClaimAnswer = 2, EvidenceAnswer = 3 };

inline constexpr int kFieldCount = 4;

std::string_view field_name(Field field);
Field parse_field(std::string_view name);

/// Per-field token budgets for the hash embedder.
struct TokenLimits {
    int claim = 128;
    int evidence = 512;
    int answer = 64;

    int for_field(Field field) const;
};

/// Frozen embedding source. Deterministic: identical (id, field, text, config)
/// yields bit-identical matrices across runs and platforms.
class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;

    virtual Matrix embed(std::string_view sample_id, Field field, std::string_view text) const = 0;
    virtual int dim() const = 0;

    /// Short config/fingerprint string for run manifests.
    virtual std::string describe() const = 0;
};

/// Offline substitute for frozen LLM embeddings: each token's vector comes
/// from a counter-based PRNG seeded with a 64-bit hash of the token string,
/// scaled to unit norm. Empty text yields a single zero row.
class HashEmbedder final : public EmbeddingProvider {
  public:
    HashEmbedder(int dim, std::uint64_t seed, TokenLimits limits = {});

    static Matrix embed_text(std::string_view text, int dim, int max_tokens, std::uint64_t seed);

    Matrix embed(std::string_view sample_id, Field field, std::string_view text) const override;
    int dim() const override { return dim_; }
    std::string describe() const override;

    std::uint64_t seed() const { return seed_; }

  private:
    int dim_;
    std::uint64_t seed_;
    TokenLimits limits_;
};

/// File-backed store of externally computed embeddings: a JSONL manifest plus
/// a raw little-endian float32 payload. Read-only after load; queries ignore
/// the text argument and are safe from multiple threads.
class FileEmbeddingStore final : public EmbeddingProvider {
  public:
    /// `expected_dim` > 0 enforces the configured input width at load time.
    static std::unique_ptr<FileEmbeddingStore> load(const std::filesystem::path& manifest_path,
                                                    int expected_dim = 0);
    ~FileEmbeddingStore() override;

    FileEmbeddingStore(const FileEmbeddingStore&) = delete;
    FileEmbeddingStore& operator=(const FileEmbeddingStore&) = delete;

    std::size_t entry_count() const { return entries_.size(); }
    bool contains(std::string_view sample_id, Field field) const;

    Matrix embed(std::string_view sample_id, Field field, std::string_view text) const override;
    int dim() const override { return dim_; }
    std::string describe() const override;

  private:
    FileEmbeddingStore() = default;

    struct Entry {
        std::int64_t offset = 0;
        int rows = 0;
    };

    int dim_ = 0;
    int fd_ = -1;
    std::string manifest_checksum_;
    std::map<std::pair<std::string, int>, Entry> entries_;
};

/// Streams matrices into the manifest + payload pair FileEmbeddingStore reads.
class EmbeddingWriter {
  public:
    EmbeddingWriter(std::filesystem::path manifest_path, int dim);
    ~EmbeddingWriter();

    void add(std::string_view sample_id, Field field, const Matrix& matrix);

    /// Renames the payload into place and writes the manifest atomically.
    void finish();

  private:
    std::filesystem::path manifest_path_;
    std::filesystem::path payload_path_;
    std::filesystem::path payload_tmp_;
    int dim_;
    std::int64_t offset_ = 0;
    std::string manifest_body_;
    std::unique_ptr<std::ofstream> payload_;
    bool finished_ = false;
};

/// The four per-sample sequences FakeNet consumes. Answer lists are joined
/// into one text per side before embedding.
struct EmbeddingSet {
    std::string id;
    Matrix claim;
    Matrix evidence;
    Matrix claim_answer;
    Matrix evidence_answer;

    const Matrix& field(Field f) const;
};

EmbeddingSet embed_sample(const EmbeddingProvider& provider, const corpus::Sample& sample);

} // namespace fact5w::emb
