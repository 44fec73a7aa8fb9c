#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fact5w/corpus.hpp"

namespace fact5w::ensemble {

using Triple = std::array<double, 3>; // (Support, Neutral, Refute)

// ---------------------------------------------------------------------------
// Probability tables
// ---------------------------------------------------------------------------

/// Per-sample label probabilities from one model. Rows are kept sorted by id;
/// triples must be non-negative and sum to 1 within 1e-4.
class ProbTable {
  public:
    ProbTable() = default;
    ProbTable(std::string model_name, std::vector<std::pair<std::string, Triple>> rows);

    static ProbTable load(const std::filesystem::path& path);
    static ProbTable from_text(std::string_view text, std::string_view source_name);
    std::string to_text() const;
    void save(const std::filesystem::path& path) const;

    const std::string& model_name() const { return name_; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<Triple>& triples() const { return triples_; }

  private:
    std::string name_;
    std::vector<std::string> ids_;     // sorted
    std::vector<Triple> triples_;      // aligned with ids_

    void validate() const;
};

// ---------------------------------------------------------------------------
// Ensemble specifications
// ---------------------------------------------------------------------------

enum class Method {
    WeightedSumLabels,      // 2 models, per-label weights
    PowerWeightedSumLabels, // 2 models, per-label weights and exponents
    PowerWeightedSum2,      // 2 models, per-model weights and exponents
    PowerWeightedSum3,      // 3 models, per-model weights and exponents
};

std::string_view method_name(Method method);
Method parse_method(std::string_view name);
int method_model_count(Method method);

struct EnsembleSpec {
    Method method = Method::PowerWeightedSum2;
    Triple label_weights{1.0, 1.0, 1.0};   // methods 1-2: W_s, W_n, W_r
    Triple label_exponents{1.0, 1.0, 1.0}; // method 2: E_s, E_n, E_r
    Triple model_weights{1.0, 0.0, 0.0};   // methods 3-4: W_1..W_3
    Triple model_exponents{1.0, 1.0, 1.0}; // methods 3-4: E_1..E_3

    void validate() const;

    /// The ordered parameter tuple used for deterministic tie-breaking.
    std::vector<double> parameter_tuple() const;

    std::string to_text() const;
    static EnsembleSpec from_text(std::string_view text, std::string_view source_name);
};

// ---------------------------------------------------------------------------
// Combination
// ---------------------------------------------------------------------------

/// Combined scores per sample. Scores are not renormalized; only the argmax
/// matters for accuracy. `normalized()` is available for reporting.
struct Combined {
    std::vector<std::string> ids;
    std::vector<Triple> scores;
    std::vector<corpus::Label> predictions;

    std::vector<Triple> normalized() const;
};

/// Requires identical id sets across tables and arity matching the method.
/// Argmax ties resolve in label order Support < Neutral < Refute.
Combined combine(const EnsembleSpec& spec, std::span<const ProbTable> tables);

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

struct GridConfig {
    double weight_step = 0.05; // weights walk [0, 1] in this step
    std::vector<double> exponents = {0.5, 0.75, 1.0, 1.25, 1.5, 2.0};
    int threads = 1;
};

struct SearchResult {
    EnsembleSpec best;
    double accuracy = 0.0;
    std::size_t evaluated = 0;
    std::size_t ties = 0; // specs sharing the best accuracy

    std::string to_text() const;
};

/// Exhaustive grid maximizing label accuracy against `gold`. Deterministic:
/// among equally accurate specs the lexicographically smallest parameter
/// tuple wins, regardless of thread count.
SearchResult search(Method method, std::span<const ProbTable> tables,
                    const std::map<std::string, corpus::Label>& gold, const GridConfig& grid);

} // namespace fact5w::ensemble
