#include "fact5w/qa.hpp"

#include <algorithm>
#include <map>
#include <thread>
#include <unordered_set>

#include "fact5w/error.hpp"
#include "fact5w/textstats.hpp"
#include "fact5w/unicode.hpp"

namespace fact5w::qa {

void SpanConfig::validate() const {
    if (max_window < 1) {
        throw ConfigError("max_window must be >= 1");
    }
    if (idf_weighting && idf == nullptr) {
        throw ConfigError("idf weighting requires a fitted TF-IDF index");
    }
}

bool is_question_stopword(std::string_view word) {
    static const std::unordered_set<std::string> stoplist = {
        // wh-words
        "who", "whom", "whose", "what", "which", "when", "where", "why", "how",
        // auxiliaries
        "am", "is", "are", "was", "were", "be", "been", "being", "do", "does", "did", "have", "has",
        "had", "having", "can", "could", "may", "might", "must", "shall", "should", "will", "would"};
    return stoplist.count(text::lower_copy(word)) > 0;
}

std::string extract_answer(std::string_view context, std::string_view question,
                           const SpanConfig& config) {
    config.validate();
    if (context.empty()) {
        throw DataError("extract_answer requires a non-empty context");
    }
    const std::vector<text::TokenSpan> tokens = text::tokenize_spans(context);
    if (tokens.empty()) {
        // Nothing tokenizable (all punctuation); the whole context is the
        // only verbatim span available.
        return std::string(context);
    }

    std::unordered_set<std::string> content;
    for (const std::string& tok : text::tokenize(question)) {
        if (!is_question_stopword(tok)) {
            content.insert(text::lower_copy(tok));
        }
    }

    const auto token_weight = [&](const std::string& token) -> double {
        const std::string lower = text::lower_copy(token);
        if (content.count(lower) == 0) {
            return 0.0;
        }
        if (config.idf_weighting) {
            // Out-of-vocabulary content tokens keep weight 1.
            const double idf = config.idf->idf_of(lower);
            return idf > 0.0 ? idf : 1.0;
        }
        return 1.0;
    };

    std::vector<double> weights(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        weights[i] = token_weight(tokens[i].text);
    }

    const std::size_t max_len = std::min<std::size_t>(static_cast<std::size_t>(config.max_window),
                                                      tokens.size());
    double best_score = 0.0;
    std::size_t best_start = 0;
    std::size_t best_len = 1;
    for (std::size_t start = 0; start < tokens.size(); ++start) {
        double score = 0.0;
        for (std::size_t len = 1; len <= max_len && start + len <= tokens.size(); ++len) {
            score += weights[start + len - 1];
            // Strictly-better keeps the earliest start, then the shortest span.
            if (score > best_score) {
                best_score = score;
                best_start = start;
                best_len = len;
            }
        }
    }
    const std::size_t lo = tokens[best_start].begin;
    const std::size_t hi = tokens[best_start + best_len - 1].end;
    return std::string(context.substr(lo, hi - lo));
}

std::vector<AnswerSet> answer_dataset(const corpus::Dataset& dataset, const SpanConfig& config,
                                      int threads) {
    config.validate();
    std::vector<AnswerSet> out(dataset.samples.size());
    const auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const corpus::Sample& sample = dataset.samples[i];
            AnswerSet& answers = out[i];
            answers.id = sample.id;
            answers.claim_answers.reserve(sample.questions.size());
            answers.evidence_answers.reserve(sample.questions.size());
            for (const std::string& question : sample.questions) {
                answers.claim_answers.push_back(extract_answer(sample.claim, question, config));
                answers.evidence_answers.push_back(extract_answer(sample.evidence, question, config));
            }
        }
    };
    const int workers = std::max(1, threads);
    if (workers == 1 || dataset.samples.size() < 2) {
        work(0, dataset.samples.size());
    } else {
        // Results land at fixed indices, so the output is identical for any
        // worker count.
        std::vector<std::thread> pool;
        const std::size_t per =
            (dataset.samples.size() + static_cast<std::size_t>(workers) - 1) /
            static_cast<std::size_t>(workers);
        for (int t = 0; t < workers; ++t) {
            const std::size_t lo = std::min(dataset.samples.size(), static_cast<std::size_t>(t) * per);
            const std::size_t hi = std::min(dataset.samples.size(), lo + per);
            if (lo < hi) {
                pool.emplace_back([&work, lo, hi] { work(lo, hi); });
            }
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    return out;
}

corpus::Dataset attach_answers(const corpus::Dataset& dataset, std::span<const AnswerSet> answers) {
    std::map<std::string_view, const AnswerSet*> by_id;
    for (const AnswerSet& set : answers) {
        if (!by_id.emplace(set.id, &set).second) {
            throw DataError("duplicate answer set for id '" + set.id + "'");
        }
    }
    corpus::Dataset out = dataset;
    for (corpus::Sample& sample : out.samples) {
        const auto it = by_id.find(sample.id);
        if (it == by_id.end()) {
            throw DataError("no answer set for sample id '" + sample.id + "'");
        }
        const AnswerSet& set = *it->second;
        if (set.claim_answers.size() != sample.questions.size() ||
            set.evidence_answers.size() != sample.questions.size()) {
            throw DataError("answer set for id '" + sample.id + "' does not match its question count");
        }
        sample.claim_answers = set.claim_answers;
        sample.evidence_answers = set.evidence_answers;
    }
    return out;
}

corpus::PredictionRow to_prediction_row(const AnswerSet& answers) {
    corpus::PredictionRow row;
    row.id = answers.id;
    row.claim_answers = answers.claim_answers;
    row.evidence_answers = answers.evidence_answers;
    return row;
}

std::vector<AnswerSet> answer_sets_from_rows(std::span<const corpus::PredictionRow> rows) {
    std::vector<AnswerSet> out;
    out.reserve(rows.size());
    for (const corpus::PredictionRow& row : rows) {
        AnswerSet set;
        set.id = row.id;
        set.claim_answers = row.claim_answers;
        set.evidence_answers = row.evidence_answers;
        out.push_back(std::move(set));
    }
    return out;
}

ScoreSummary score_answers(std::span<const AnswerSet> predicted, std::span<const AnswerSet> gold,
                           const sim::BleuOptions& bleu) {
    std::map<std::string_view, const AnswerSet*> gold_by_id;
    for (const AnswerSet& set : gold) {
        gold_by_id.emplace(set.id, &set);
    }
    if (gold_by_id.size() != gold.size()) {
        throw DataError("duplicate ids in gold answer sets");
    }
    if (predicted.size() != gold.size()) {
        throw DataError("prediction/gold answer sets differ in size (" +
                        std::to_string(predicted.size()) + " vs " + std::to_string(gold.size()) + ")");
    }

    ScoreSummary summary;
    summary.per_sample.reserve(predicted.size());
    double sum_avg = 0.0;
    double sum_claim = 0.0;
    double sum_evidence = 0.0;
    for (const AnswerSet& pred : predicted) {
        const auto it = gold_by_id.find(pred.id);
        if (it == gold_by_id.end()) {
            throw DataError("no gold answers for id '" + pred.id + "'");
        }
        const AnswerSet& ref = *it->second;
        if (pred.claim_answers.size() != ref.claim_answers.size() ||
            pred.evidence_answers.size() != ref.evidence_answers.size()) {
            throw DataError("answer list lengths for id '" + pred.id +
                            "' do not match the gold answer lists");
        }
        AnswerScore score;
        score.id = pred.id;
        const std::size_t q = ref.claim_answers.size();
        double claim_sum = 0.0;
        double evidence_sum = 0.0;
        for (std::size_t j = 0; j < q; ++j) {
            const std::vector<std::string> ref_ca = {ref.claim_answers[j]};
            const std::vector<std::string> ref_ea = {ref.evidence_answers[j]};
            claim_sum += sim::bleu4(pred.claim_answers[j], ref_ca, bleu);
            evidence_sum += sim::bleu4(pred.evidence_answers[j], ref_ea, bleu);
        }
        if (q > 0) {
            score.claim_side = claim_sum / static_cast<double>(q);
            score.evidence_side = evidence_sum / static_cast<double>(q);
            score.average = (claim_sum + evidence_sum) / static_cast<double>(2 * q);
        }
        sum_avg += score.average;
        sum_claim += score.claim_side;
        sum_evidence += score.evidence_side;
        summary.per_sample.push_back(std::move(score));
    }
    if (!summary.per_sample.empty()) {
        const double n = static_cast<double>(summary.per_sample.size());
        summary.mean_average = sum_avg / n;
        summary.mean_claim = sum_claim / n;
        summary.mean_evidence = sum_evidence / n;
    }
    return summary;
}

} // namespace fact5w::qa
