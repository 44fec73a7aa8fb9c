#include "fact5w/features.hpp"

#include <algorithm>
#include <cmath>

#include "fact5w/error.hpp"
#include "fact5w/io.hpp"
#include "fact5w/rng.hpp"
#include "fact5w/version.hpp"

namespace fact5w::features {

namespace {

/// Similarity slot names: kernel-major over the two pairs.
constexpr std::array<const char*, kSimilarityCount> kSimNames = {
    "sim.emb_a.claim_evidence", "sim.emb_a.answers",  "sim.emb_b.claim_evidence", "sim.emb_b.answers",
    "sim.fuzzy.claim_evidence", "sim.fuzzy.answers",  "sim.tfidf.claim_evidence", "sim.tfidf.answers",
    "sim.rouge_l.claim_evidence", "sim.rouge_l.answers"};

} // namespace

const std::array<std::string, kFeatureCount>& feature_names() {
    static const std::array<std::string, kFeatureCount> names = [] {
        std::array<std::string, kFeatureCount> out;
        int k = 0;
        for (const char* source : kSourceNames) {
            for (const char* stat : text::kStatNames) {
                out[static_cast<std::size_t>(k++)] = std::string(source) + "." + stat;
            }
        }
        for (const char* sim : kSimNames) {
            out[static_cast<std::size_t>(k++)] = sim;
        }
        return out;
    }();
    return names;
}

FeatureVector build_feature_vector(const corpus::Sample& sample, std::span<const double> similarities) {
    if (similarities.size() != kSimilarityCount) {
        throw DataError("similarity vector must have " + std::to_string(kSimilarityCount) +
                        " entries, got " + std::to_string(similarities.size()));
    }
    const std::array<std::string, kSourceCount> sources = {
        sample.claim,
        sample.evidence,
        text::join_parts(sample.questions),
        sample.claim_answers ? text::join_parts(*sample.claim_answers) : std::string(),
        sample.evidence_answers ? text::join_parts(*sample.evidence_answers) : std::string(),
    };
    FeatureVector vec{};
    int k = 0;
    for (const std::string& source : sources) {
        const auto stats = text::compute_stats(source).as_array();
        for (std::int64_t count : stats) {
            vec[static_cast<std::size_t>(k++)] = static_cast<double>(count);
        }
    }
    for (double sim : similarities) {
        vec[static_cast<std::size_t>(k++)] = sim;
    }
    return vec;
}

FeatureScaler FeatureScaler::fit(std::span<const FeatureVector> train_vectors) {
    if (train_vectors.empty()) {
        throw DataError("scaler fit requires at least one feature vector");
    }
    FeatureScaler scaler;
    scaler.layout_version_ = kFeatureLayoutVersion;
    scaler.mins_.assign(kFeatureCount, std::numeric_limits<double>::infinity());
    scaler.maxs_.assign(kFeatureCount, -std::numeric_limits<double>::infinity());
    for (const FeatureVector& vec : train_vectors) {
        for (int i = 0; i < kFeatureCount; ++i) {
            const auto k = static_cast<std::size_t>(i);
            scaler.mins_[k] = std::min(scaler.mins_[k], vec[k]);
            scaler.maxs_[k] = std::max(scaler.maxs_[k], vec[k]);
        }
    }
    return scaler;
}

FeatureVector FeatureScaler::apply(const FeatureVector& vector) const {
    if (layout_version_ != kFeatureLayoutVersion) {
        throw DataError("scaler layout version '" + layout_version_ + "' does not match library layout '" +
                        kFeatureLayoutVersion + "'");
    }
    FeatureVector out{};
    for (int i = 0; i < kFeatureCount; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double lo = mins_[k];
        const double hi = maxs_[k];
        if (hi <= lo) {
            out[k] = 0.0; // constant training dimension
            continue;
        }
        const double unit = (vector[k] - lo) / (hi - lo);
        out[k] = std::clamp(2.0 * unit - 1.0, -1.0, 1.0);
    }
    return out;
}

std::string FeatureScaler::to_text() const {
    std::string out = "fact5w-scaler\tversion 1\n";
    out += "layout\t" + layout_version_ + "\n";
    const auto& names = feature_names();
    for (int i = 0; i < kFeatureCount; ++i) {
        const auto k = static_cast<std::size_t>(i);
        out += names[k] + "\t" + io::format_double(mins_[k]) + "\t" + io::format_double(maxs_[k]) + "\n";
    }
    return out;
}

FeatureScaler FeatureScaler::from_text(std::string_view text, std::string_view source_name) {
    const std::vector<std::string> lines = io::split_lines(text);
    if (lines.size() != kFeatureCount + 2 || lines[0] != "fact5w-scaler\tversion 1") {
        throw DataError(std::string(source_name) + ": not a scaler file");
    }
    const std::vector<std::string> layout_cells = io::split_tsv_line(lines[1]);
    if (layout_cells.size() != 2 || layout_cells[0] != "layout") {
        throw DataError(std::string(source_name) + ": missing layout line");
    }
    FeatureScaler scaler;
    scaler.layout_version_ = layout_cells[1];
    if (scaler.layout_version_ != kFeatureLayoutVersion) {
        throw DataError(std::string(source_name) + ": layout version '" + scaler.layout_version_ +
                        "' does not match library layout '" + kFeatureLayoutVersion + "'");
    }
    scaler.mins_.resize(kFeatureCount);
    scaler.maxs_.resize(kFeatureCount);
    for (int i = 0; i < kFeatureCount; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const std::vector<std::string> cells = io::split_tsv_line(lines[k + 2]);
        if (cells.size() != 3) {
            throw DataError(std::string(source_name) + ": malformed scaler row " + std::to_string(i));
        }
        scaler.mins_[k] = io::parse_double(cells[1], "scaler min");
        scaler.maxs_[k] = io::parse_double(cells[2], "scaler max");
        if (scaler.mins_[k] > scaler.maxs_[k]) {
            throw DataError(std::string(source_name) + ": min > max at dimension " + std::to_string(i));
        }
    }
    return scaler;
}

std::string FeatureScaler::fingerprint() const { return io::checksum_hex(fnv1a64(to_text())); }

void FeatureScaler::save(const std::filesystem::path& path) const { io::atomic_write_file(path, to_text()); }

FeatureScaler FeatureScaler::load(const std::filesystem::path& path) {
    return from_text(io::read_file(path), path.string());
}

} // namespace fact5w::features
