#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fact5w/corpus.hpp"
#include "fact5w/embeddings.hpp"

namespace fact5w::sim {

// ---------------------------------------------------------------------------
// MT metrics
// ---------------------------------------------------------------------------

struct BleuOptions {
    /// Adds 1 to numerator and denominator of the modified precisions for
    /// n >= 2. Off by default: a zero precision zeroes the whole score.
    bool smoothing = false;
};

/// Sentence BLEU with 4-gram precision: geometric mean of clipped modified
/// n-gram precisions (n = 1..4) times the brevity penalty. The brevity
/// penalty uses the closest-length reference (ties to the shorter one).
/// Not symmetric in candidate/references.
double bleu4(std::string_view candidate, std::span<const std::string> references,
             const BleuOptions& options = {});

/// ROUGE-L F1: harmonic mean of LCS precision and recall over tokens.
/// Symmetric; 0 when either side is empty.
double rouge_l(std::string_view candidate, std::string_view reference);

/// 1 - Levenshtein(a, b) / max(|a|, |b|) over codepoints; 1.0 for two empty
/// strings. Symmetric.
double fuzzy_ratio(std::string_view a, std::string_view b);

// ---------------------------------------------------------------------------
// TF-IDF
// ---------------------------------------------------------------------------

/// Vocabulary + smoothed idf fitted on one corpus.
/// tf = raw term count, idf = ln((1 + N) / (1 + df)) + 1; cosine over
/// tf*idf vectors; out-of-vocabulary terms are ignored.
class TfidfIndex {
  public:
    static TfidfIndex fit(std::span<const std::string> corpus);

    double cosine(std::string_view a, std::string_view b) const;

    /// idf of a (lowercased) term; 0 when out of vocabulary.
    double idf_of(std::string_view term) const;

    std::size_t vocabulary_size() const { return vocab_.size(); }
    std::size_t document_count() const { return doc_count_; }

    /// FNV-1a over the fitted corpus (length-prefixed documents).
    std::string fingerprint() const { return fingerprint_; }

    std::string to_text() const;
    static TfidfIndex from_text(std::string_view text, std::string_view source_name);
    void save(const std::filesystem::path& path) const;
    static TfidfIndex load(const std::filesystem::path& path);

  private:
    std::unordered_map<std::string, int> vocab_;
    std::vector<double> idf_;
    std::size_t doc_count_ = 0;
    std::string fingerprint_;

    std::unordered_map<int, double> project(std::string_view text) const;
};

double tfidf_cosine(const TfidfIndex& index, std::string_view a, std::string_view b);

// ---------------------------------------------------------------------------
// Embedding cosine
// ---------------------------------------------------------------------------

/// One side of an embedding-cosine comparison: enough context for both the
/// hash provider (text) and the file-backed provider (id + field).
struct TextRef {
    std::string_view sample_id;
    emb::Field field = emb::Field::Claim;
    std::string_view text;
};

/// Cosine of mean-pooled token embeddings, clamped to [0, 1].
double embedding_cosine(const emb::EmbeddingProvider& provider, const TextRef& a, const TextRef& b);

// ---------------------------------------------------------------------------
// The 10 similarity features
// ---------------------------------------------------------------------------

/// Fixed layout, kernel-major over the two pairs
/// (claim, evidence) and (joined claim answers, joined evidence answers):
///   [emb_a.ce, emb_a.ans, emb_b.ce, emb_b.ans,
///    fuzzy.ce, fuzzy.ans, tfidf.ce, tfidf.ans, rouge_l.ce, rouge_l.ans]
struct SimilarityBundle {
    std::array<double, 10> values{};
};

SimilarityBundle similarity_bundle(const corpus::Sample& sample, const TfidfIndex& tfidf,
                                   const emb::EmbeddingProvider& provider_a,
                                   const emb::EmbeddingProvider& provider_b);

} // namespace fact5w::sim
