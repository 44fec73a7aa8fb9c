#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fact5w/corpus.hpp"
#include "fact5w/similarity.hpp"

namespace fact5w::qa {

/// Extracted answers for one sample; list lengths equal its question count.
struct AnswerSet {
    std::string id;
    std::vector<std::string> claim_answers;
    std::vector<std::string> evidence_answers;

    bool operator==(const AnswerSet&) const = default;
};

struct SpanConfig {
    int max_window = 20; // window length in tokens
    bool idf_weighting = false;
    const sim::TfidfIndex* idf = nullptr; // required when idf_weighting is on

    void validate() const;
};

/// Question words and auxiliaries excluded from overlap scoring.
bool is_question_stopword(std::string_view word);

/// Token window (1..max_window) of `context` maximizing content-token overlap
/// with the question; ties resolve to the earliest start, then the shortest
/// span. Zero overlap everywhere falls back to the first token. The result is
/// always a verbatim contiguous substring of `context`.
std::string extract_answer(std::string_view context, std::string_view question, const SpanConfig& config);

/// Answers every question: claim answers from the claim, evidence answers
/// from the evidence.
std::vector<AnswerSet> answer_dataset(const corpus::Dataset& dataset, const SpanConfig& config,
                                      int threads = 1);

/// Returns a copy of the dataset with the answer lists filled in from the
/// answer sets (joined on id; lengths must match the question lists).
corpus::Dataset attach_answers(const corpus::Dataset& dataset, std::span<const AnswerSet> answers);

corpus::PredictionRow to_prediction_row(const AnswerSet& answers);
std::vector<AnswerSet> answer_sets_from_rows(std::span<const corpus::PredictionRow> rows);

// ---------------------------------------------------------------------------
// BLEU scoring
// ---------------------------------------------------------------------------

struct AnswerScore {
    std::string id;
    double average = 0.0;       // mean over all 2 * |questions| BLEU values
    double claim_side = 0.0;    // mean over claim answers only
    double evidence_side = 0.0; // mean over evidence answers only
};

struct ScoreSummary {
    std::vector<AnswerScore> per_sample;
    double mean_average = 0.0;
    double mean_claim = 0.0;
    double mean_evidence = 0.0;
};

/// BLEU-4 of each predicted answer against its gold counterpart, pooled per
/// sample as the arithmetic mean over both sides. Samples with no questions
/// score 0. Not symmetric in pred/gold (BLEU is candidate/reference).
ScoreSummary score_answers(std::span<const AnswerSet> predicted, std::span<const AnswerSet> gold,
                           const sim::BleuOptions& bleu = {});

} // namespace fact5w::qa
