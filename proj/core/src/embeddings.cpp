#include "fact5w/embeddings.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "fact5w/error.hpp"
#include "fact5w/io.hpp"
#include "fact5w/rng.hpp"
#include "fact5w/textstats.hpp"
#include "fact5w/version.hpp"

namespace fact5w::emb {

namespace {

using json = nlohmann::json;

static_assert(sizeof(float) == 4, "payload format assumes 32-bit floats");

} // namespace

std::string_view field_name(Field field) {
    switch (field) {
        case Field::Claim: return "claim";
        case Field::Evidence: return "evidence";
        case Field::ClaimAnswer: return "claim_answer";
        case Field::EvidenceAnswer: return "evidence_answer";
    }
    throw DataError("invalid embedding field");
}

Field parse_field(std::string_view name) {
    for (int i = 0; i < kFieldCount; ++i) {
        const auto field = static_cast<Field>(i);
        if (field_name(field) == name) {
            return field;
        }
    }
    throw DataError("unknown embedding field: '" + std::string(name) + "'");
}

int TokenLimits::for_field(Field field) const {
    switch (field) {
        case Field::Claim: return claim;
        case Field::Evidence: return evidence;
        case Field::ClaimAnswer:
        case Field::EvidenceAnswer: return answer;
    }
    throw DataError("invalid embedding field");
}

// ---------------------------------------------------------------------------
// HashEmbedder
// ---------------------------------------------------------------------------

HashEmbedder::HashEmbedder(int dim, std::uint64_t seed, TokenLimits limits)
    : dim_(dim), seed_(seed), limits_(limits) {
    if (dim < 1) {
        throw ConfigError("embedding dimension must be >= 1");
    }
}

Matrix HashEmbedder::embed_text(std::string_view text, int dim, int max_tokens, std::uint64_t seed) {
    std::vector<std::string> tokens = text::tokenize(text);
    if (max_tokens > 0 && static_cast<int>(tokens.size()) > max_tokens) {
        tokens.resize(static_cast<std::size_t>(max_tokens));
    }
    if (tokens.empty()) {
        return Matrix::Zero(1, dim);
    }
    Matrix out(static_cast<Eigen::Index>(tokens.size()), dim);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        // Position-independent: the stream depends only on token text + seed.
        std::uint64_t state = fnv1a64_u64(seed, fnv1a64(tokens[static_cast<std::size_t>(r)]));
        double norm_sq = 0.0;
        for (int c = 0; c < dim; ++c) {
            const double v = 2.0 * u64_to_unit(splitmix64(state)) - 1.0;
            out(r, c) = v;
            norm_sq += v * v;
        }
        if (norm_sq > 0.0) {
            out.row(r) /= std::sqrt(norm_sq);
        }
    }
    return out;
}

Matrix HashEmbedder::embed(std::string_view sample_id, Field field, std::string_view text) const {
    (void)sample_id;
    return embed_text(text, dim_, limits_.for_field(field), seed_);
}

std::string HashEmbedder::describe() const {
    return "hash(dim=" + std::to_string(dim_) + ",seed=" + std::to_string(seed_) +
           ",max=" + std::to_string(limits_.claim) + "/" + std::to_string(limits_.evidence) + "/" +
           std::to_string(limits_.answer) + ")";
}

// ---------------------------------------------------------------------------
// FileEmbeddingStore
// ---------------------------------------------------------------------------

std::unique_ptr<FileEmbeddingStore> FileEmbeddingStore::load(const std::filesystem::path& manifest_path,
                                                             int expected_dim) {
    const std::string manifest_text = io::read_file(manifest_path);
    const std::vector<std::string> lines = io::split_lines(manifest_text);
    if (lines.empty()) {
        throw DataError(manifest_path.string() + ": empty embedding manifest");
    }

    json header;
    try {
        header = json::parse(lines[0]);
    } catch (const json::exception& e) {
        throw DataError(manifest_path.string() + ": bad manifest header: " + e.what());
    }
    if (header.value("format", "") != "fact5w-emb") {
        throw DataError(manifest_path.string() + ": not an embedding manifest");
    }
    if (header.value("version", 0) != static_cast<int>(kEmbeddingFormatVersion)) {
        throw DataError(manifest_path.string() + ": unsupported embedding format version " +
                        std::to_string(header.value("version", 0)) + " (supported: " +
                        std::to_string(kEmbeddingFormatVersion) + ")");
    }

    auto store = std::unique_ptr<FileEmbeddingStore>(new FileEmbeddingStore());
    store->dim_ = header.value("dim", 0);
    if (store->dim_ < 1) {
        throw DataError(manifest_path.string() + ": manifest missing a positive dim");
    }
    if (expected_dim > 0 && store->dim_ != expected_dim) {
        throw DataError(manifest_path.string() + ": embedding dim " + std::to_string(store->dim_) +
                        " does not match configured dim " + std::to_string(expected_dim));
    }

    const std::filesystem::path payload_path =
        manifest_path.parent_path() / header.value("payload", std::string());
    std::error_code ec;
    const std::int64_t payload_size =
        static_cast<std::int64_t>(std::filesystem::file_size(payload_path, ec));
    if (ec) {
        throw DataError(manifest_path.string() + ": missing payload file " + payload_path.string());
    }

    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        json row;
        try {
            row = json::parse(lines[i]);
        } catch (const json::exception& e) {
            throw DataError(manifest_path.string() + ":" + std::to_string(i + 1) +
                            ": bad manifest row: " + e.what());
        }
        const std::string id = row.value("id", "");
        const std::string field_str = row.value("field", "");
        const int rows = row.value("rows", 0);
        const int dim = row.value("dim", store->dim_);
        const std::int64_t offset = row.value("offset", static_cast<std::int64_t>(-1));
        if (id.empty() || rows < 1 || offset < 0) {
            throw DataError(manifest_path.string() + ":" + std::to_string(i + 1) +
                            ": manifest row missing id/rows/offset");
        }
        if (dim != store->dim_) {
            throw DataError(manifest_path.string() + ":" + std::to_string(i + 1) + ": entry dim " +
                            std::to_string(dim) + " does not match manifest dim " +
                            std::to_string(store->dim_));
        }
        const Field field = parse_field(field_str);
        const std::int64_t bytes = static_cast<std::int64_t>(rows) * store->dim_ * 4;
        if (offset + bytes > payload_size) {
            throw DataError(manifest_path.string() + ":" + std::to_string(i + 1) +
                            ": entry extends past the payload (truncated payload?)");
        }
        const auto key = std::make_pair(id, static_cast<int>(field));
        if (!store->entries_.emplace(key, Entry{offset, rows}).second) {
            throw DataError(manifest_path.string() + ":" + std::to_string(i + 1) +
                            ": duplicate entry for (" + id + ", " + field_str + ")");
        }
    }

    store->fd_ = ::open(payload_path.c_str(), O_RDONLY);
    if (store->fd_ < 0) {
        throw DataError("cannot open embedding payload: " + payload_path.string());
    }
    store->manifest_checksum_ = io::checksum_hex(fnv1a64(manifest_text));
    return store;
}

FileEmbeddingStore::~FileEmbeddingStore() {
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

bool FileEmbeddingStore::contains(std::string_view sample_id, Field field) const {
    return entries_.count(std::make_pair(std::string(sample_id), static_cast<int>(field))) > 0;
}

Matrix FileEmbeddingStore::embed(std::string_view sample_id, Field field, std::string_view text) const {
    (void)text;
    const auto it = entries_.find(std::make_pair(std::string(sample_id), static_cast<int>(field)));
    if (it == entries_.end()) {
        throw DataError("embedding missing for sample id '" + std::string(sample_id) + "' field '" +
                        std::string(field_name(field)) + "'");
    }
    const Entry& entry = it->second;
    const std::size_t count = static_cast<std::size_t>(entry.rows) * static_cast<std::size_t>(dim_);
    std::vector<float> buffer(count);
    std::size_t done = 0;
    while (done < count * 4) {
        const ssize_t got = ::pread(fd_, reinterpret_cast<char*>(buffer.data()) + done,
                                    count * 4 - done, entry.offset + static_cast<std::int64_t>(done));
        if (got <= 0) {
            throw DataError("embedding payload read failed for sample id '" + std::string(sample_id) +
                            "'");
        }
        done += static_cast<std::size_t>(got);
    }
    Matrix out(entry.rows, dim_);
    for (int r = 0; r < entry.rows; ++r) {
        for (int c = 0; c < dim_; ++c) {
            const double v = static_cast<double>(buffer[static_cast<std::size_t>(r) *
                                                            static_cast<std::size_t>(dim_) +
                                                        static_cast<std::size_t>(c)]);
            if (!std::isfinite(v)) {
                throw DataError("non-finite embedding value for sample id '" + std::string(sample_id) +
                                "'");
            }
            out(r, c) = v;
        }
    }
    return out;
}

std::string FileEmbeddingStore::describe() const {
    return "file(dim=" + std::to_string(dim_) + ",entries=" + std::to_string(entries_.size()) +
           ",manifest=" + manifest_checksum_ + ")";
}

// ---------------------------------------------------------------------------
// EmbeddingWriter
// ---------------------------------------------------------------------------

EmbeddingWriter::EmbeddingWriter(std::filesystem::path manifest_path, int dim)
    : manifest_path_(std::move(manifest_path)), dim_(dim) {
    if (dim_ < 1) {
        throw ConfigError("embedding dimension must be >= 1");
    }
    payload_path_ = manifest_path_;
    payload_path_ += ".bin";
    payload_tmp_ = payload_path_;
    payload_tmp_ += ".tmp";
    std::filesystem::path dir = manifest_path_.parent_path();
    if (!dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
    }
    payload_ = std::make_unique<std::ofstream>(payload_tmp_, std::ios::binary | std::ios::trunc);
    if (!*payload_) {
        throw DataError("cannot open for writing: " + payload_tmp_.string());
    }
    json header;
    header["format"] = "fact5w-emb";
    header["version"] = kEmbeddingFormatVersion;
    header["dim"] = dim_;
    header["payload"] = payload_path_.filename().string();
    manifest_body_ = header.dump();
    manifest_body_ += '\n';
}

EmbeddingWriter::~EmbeddingWriter() {
    if (!finished_) {
        payload_.reset();
        std::error_code ec;
        std::filesystem::remove(payload_tmp_, ec);
    }
}

void EmbeddingWriter::add(std::string_view sample_id, Field field, const Matrix& matrix) {
    if (finished_) {
        throw DataError("EmbeddingWriter::add after finish");
    }
    if (matrix.cols() != dim_) {
        throw DataError("matrix width " + std::to_string(matrix.cols()) + " does not match writer dim " +
                        std::to_string(dim_));
    }
    std::vector<float> buffer(static_cast<std::size_t>(matrix.rows()) * static_cast<std::size_t>(dim_));
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
        for (int c = 0; c < dim_; ++c) {
            buffer[static_cast<std::size_t>(r) * static_cast<std::size_t>(dim_) +
                   static_cast<std::size_t>(c)] = static_cast<float>(matrix(r, c));
        }
    }
    payload_->write(reinterpret_cast<const char*>(buffer.data()),
                    static_cast<std::streamsize>(buffer.size() * 4));
    if (!*payload_) {
        throw DataError("write failed: " + payload_tmp_.string());
    }
    json row;
    row["id"] = std::string(sample_id);
    row["field"] = std::string(field_name(field));
    row["rows"] = static_cast<int>(matrix.rows());
    row["dim"] = dim_;
    row["offset"] = offset_;
    manifest_body_ += row.dump();
    manifest_body_ += '\n';
    offset_ += static_cast<std::int64_t>(buffer.size() * 4);
}

void EmbeddingWriter::finish() {
    if (finished_) {
        return;
    }
    payload_->flush();
    if (!*payload_) {
        throw DataError("write failed: " + payload_tmp_.string());
    }
    payload_.reset();
    std::error_code ec;
    std::filesystem::rename(payload_tmp_, payload_path_, ec);
    if (ec) {
        throw DataError("rename failed: " + payload_tmp_.string() + ": " + ec.message());
    }
    io::atomic_write_file(manifest_path_, manifest_body_);
    finished_ = true;
}

// ---------------------------------------------------------------------------
// EmbeddingSet
// ---------------------------------------------------------------------------

const Matrix& EmbeddingSet::field(Field f) const {
    switch (f) {
        case Field::Claim: return claim;
        case Field::Evidence: return evidence;
        case Field::ClaimAnswer: return claim_answer;
        case Field::EvidenceAnswer: return evidence_answer;
    }
    throw DataError("invalid embedding field");
}

EmbeddingSet embed_sample(const EmbeddingProvider& provider, const corpus::Sample& sample) {
    EmbeddingSet set;
    set.id = sample.id;
    set.claim = provider.embed(sample.id, Field::Claim, sample.claim);
    set.evidence = provider.embed(sample.id, Field::Evidence, sample.evidence);
    const std::string ca = sample.claim_answers ? text::join_parts(*sample.claim_answers) : std::string();
    const std::string ea =
        sample.evidence_answers ? text::join_parts(*sample.evidence_answers) : std::string();
    set.claim_answer = provider.embed(sample.id, Field::ClaimAnswer, ca);
    set.evidence_answer = provider.embed(sample.id, Field::EvidenceAnswer, ea);
    return set;
}

} // namespace fact5w::emb
