#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fact5w::corpus {

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

enum class Label : int { Support = 0, Neutral = 1, Refute = 2 };

inline constexpr int kLabelCount = 3;

/// Case-insensitive; throws DataError on unknown strings.
Label parse_label(std::string_view text);

/// Canonical capitalized form: "Support" / "Neutral" / "Refute".
std::string_view label_name(Label label);

// ---------------------------------------------------------------------------
// Samples and datasets
// ---------------------------------------------------------------------------

enum class Split { Train, Validation, Test };

std::string_view split_name(Split split);
Split parse_split(std::string_view text);

struct Sample {
    std::string id;
    std::string claim;
    std::string evidence;
    std::vector<std::string> questions;
    std::optional<std::vector<std::string>> claim_answers;
    std::optional<std::vector<std::string>> evidence_answers;
    std::optional<Label> label;

    bool operator==(const Sample&) const = default;
};

struct Dataset {
    Split split = Split::Train;
    std::vector<Sample> samples;

    const Sample* find(std::string_view id) const;
};

/// Throws DataError describing the first violated invariant.
/// Train/validation samples must carry label + both answer lists; test
/// samples must not. Answer lists, when present, align with the questions.
void validate_sample(const Sample& sample, Split split);

/// Parses the TSV format described in the README (JSON arrays in list cells).
/// Unknown columns are ignored with a warning on stderr; malformed rows fail
/// with their line number.
Dataset parse_dataset(const std::filesystem::path& path, Split split);
Dataset parse_dataset_text(std::string_view text, Split split, std::string_view source_name);

/// Canonical serialization; parse_dataset_text(write_dataset_text(d)) == d.
std::string write_dataset_text(const Dataset& dataset);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Predictions
// ---------------------------------------------------------------------------

/// One row of a prediction / answer file. `label` is absent in answer-only
/// files (the qa-extract output reuses this schema with an empty label cell).
struct PredictionRow {
    std::string id;
    std::optional<Label> label;
    std::vector<std::string> claim_answers;
    std::vector<std::string> evidence_answers;

    bool operator==(const PredictionRow&) const = default;
};

/// Requires exactly one prediction per dataset sample id; output rows are
/// sorted by id, so identical inputs produce identical bytes.
std::string write_predictions_text(const Dataset& dataset, std::span<const PredictionRow> predictions);
void write_predictions(const Dataset& dataset, std::span<const PredictionRow> predictions,
                       const std::filesystem::path& path);

std::vector<PredictionRow> parse_predictions(const std::filesystem::path& path);
std::vector<PredictionRow> parse_predictions_text(std::string_view text, std::string_view source_name);

} // namespace fact5w::corpus
