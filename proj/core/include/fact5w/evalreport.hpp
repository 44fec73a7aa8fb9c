#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "fact5w/corpus.hpp"
#include "fact5w/qa.hpp"
#include "fact5w/similarity.hpp"

namespace fact5w::eval {

struct EvalConfig {
    /// The competition never published its threshold; this is a config
    /// default only and is echoed in every report.
    double bleu_threshold = 0.3;
    /// When false, the BLEU gate is skipped (label-only accuracy).
    bool require_answers = true;
    sim::BleuOptions bleu;

    void validate() const;
};

using Confusion = std::array<std::array<std::int64_t, 3>, 3>; // [gold][predicted]

struct EvalReport {
    double official_accuracy = 0.0;
    double label_accuracy = 0.0;
    double mean_bleu = 0.0;
    std::array<std::optional<double>, 3> per_label{}; // by gold label; absent class = nullopt
    Confusion confusion{};
    std::int64_t sample_count = 0;
    EvalConfig config;
};

/// Official metric: a sample counts iff its per-sample average answer BLEU
/// strictly exceeds the threshold AND the predicted label matches. In
/// label-only mode the BLEU gate always passes.
EvalReport official_accuracy(std::span<const corpus::PredictionRow> predictions,
                             const corpus::Dataset& gold, const EvalConfig& config);

/// Per-gold-label accuracy plus overall; classes absent from gold are nullopt.
struct PerLabelAccuracy {
    std::array<std::optional<double>, 3> per_label{};
    double overall = 0.0;
};

PerLabelAccuracy per_label_accuracy(std::span<const corpus::Label> predicted,
                                    std::span<const corpus::Label> gold);

Confusion confusion_matrix(std::span<const corpus::Label> predicted,
                           std::span<const corpus::Label> gold);

enum class ReportFormat { Table, Structured };

ReportFormat parse_report_format(std::string_view name);

/// Byte-stable renderers. The structured form round-trips through. Accuracies
/// render with four decimals; absent classes render as "n/a".
std::string render_report(const EvalReport& report, ReportFormat format);
EvalReport parse_structured(std::string_view text, std::string_view source_name);

} // namespace fact5w::eval
