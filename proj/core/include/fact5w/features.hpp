#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fact5w/corpus.hpp"
#include "fact5w/textstats.hpp"

namespace fact5w::features {

inline constexpr int kStatCount = 11;
inline constexpr int kSourceCount = 5;
inline constexpr int kSimilarityCount = 10;
inline constexpr int kFeatureCount = kSourceCount * kStatCount + kSimilarityCount; // 65

/// Text sources in layout order.
inline constexpr std::array<const char*, kSourceCount> kSourceNames = {
    "claim", "evidence", "question", "claim_answer", "evidence_answer"};

/// Column names for the full 65-dimension layout, e.g. "claim.words" or
/// "sim.emb_a.claim_evidence".
const std::array<std::string, kFeatureCount>& feature_names();

using FeatureVector = std::array<double, kFeatureCount>;

/// Assembles the 65-dimension vector: 11 counters for each of the five text
/// sources followed by the 10 similarity values. Empty or absent answers
/// contribute all-zero counters.
FeatureVector build_feature_vector(const corpus::Sample& sample, std::span<const double> similarities);

/// Min-max scaler mapping each dimension to [-1, 1]. Fit on the training
/// split only; constant dimensions map to 0; out-of-range values clamp.
class FeatureScaler {
  public:
    static FeatureScaler fit(std::span<const FeatureVector> train_vectors);

    FeatureVector apply(const FeatureVector& vector) const;

    const std::string& layout_version() const { return layout_version_; }
    double min_at(int i) const { return mins_.at(static_cast<std::size_t>(i)); }
    double max_at(int i) const { return maxs_.at(static_cast<std::size_t>(i)); }

    /// FNV-1a over the serialized form; embedded in checkpoints.
    std::string fingerprint() const;

    std::string to_text() const;
    static FeatureScaler from_text(std::string_view text, std::string_view source_name);
    void save(const std::filesystem::path& path) const;
    static FeatureScaler load(const std::filesystem::path& path);

  private:
    std::string layout_version_;
    std::vector<double> mins_;
    std::vector<double> maxs_;
};

} // namespace fact5w::features
