#include "fact5w/evalreport.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "fact5w/error.hpp"
#include "fact5w/io.hpp"

namespace fact5w::eval {

namespace {

const std::array<corpus::Label, 3> kLabelOrder = {corpus::Label::Support, corpus::Label::Neutral,
                                                  corpus::Label::Refute};

std::string fixed4(double v) { return io::format_fixed(v, 4); }

std::string label_row(std::string_view name, const std::optional<double>& value) {
    char buf[64];
    if (value) {
        std::snprintf(buf, sizeof(buf), "%-10s %.4f", std::string(name).c_str(), *value);
    } else {
        std::snprintf(buf, sizeof(buf), "%-10s n/a", std::string(name).c_str());
    }
    return std::string(buf);
}

} // namespace

void EvalConfig::validate() const {
    if (bleu_threshold < 0.0 || bleu_threshold > 1.0 || !std::isfinite(bleu_threshold)) {
        throw ConfigError("bleu threshold must lie in [0, 1]");
    }
}

PerLabelAccuracy per_label_accuracy(std::span<const corpus::Label> predicted,
                                    std::span<const corpus::Label> gold) {
    if (predicted.size() != gold.size()) {
        throw DataError("prediction/gold label lists differ in size");
    }
    std::array<std::int64_t, 3> totals{};
    std::array<std::int64_t, 3> correct{};
    std::int64_t all_correct = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const auto g = static_cast<std::size_t>(gold[i]);
        totals[g] += 1;
        if (predicted[i] == gold[i]) {
            correct[g] += 1;
            all_correct += 1;
        }
    }
    PerLabelAccuracy out;
    for (std::size_t k = 0; k < 3; ++k) {
        if (totals[k] > 0) {
            out.per_label[k] = static_cast<double>(correct[k]) / static_cast<double>(totals[k]);
        }
    }
    out.overall = gold.empty() ? 0.0 : static_cast<double>(all_correct) / static_cast<double>(gold.size());
    return out;
}

Confusion confusion_matrix(std::span<const corpus::Label> predicted,
                           std::span<const corpus::Label> gold) {
    if (predicted.size() != gold.size()) {
        throw DataError("prediction/gold label lists differ in size");
    }
    Confusion m{};
    for (std::size_t i = 0; i < gold.size(); ++i) {
        m[static_cast<std::size_t>(gold[i])][static_cast<std::size_t>(predicted[i])] += 1;
    }
    return m;
}

EvalReport official_accuracy(std::span<const corpus::PredictionRow> predictions,
                             const corpus::Dataset& gold, const EvalConfig& config) {
    config.validate();

    std::map<std::string_view, const corpus::PredictionRow*> by_id;
    for (const corpus::PredictionRow& row : predictions) {
        if (!by_id.emplace(row.id, &row).second) {
            throw DataError("duplicate prediction for id '" + row.id + "'");
        }
    }
    if (by_id.size() != gold.samples.size()) {
        for (const corpus::Sample& s : gold.samples) {
            if (by_id.count(s.id) == 0) {
                throw DataError("missing prediction for id '" + s.id + "'");
            }
        }
        throw DataError("predictions cover ids that are not in the gold dataset");
    }

    std::vector<corpus::Label> pred_labels;
    std::vector<corpus::Label> gold_labels;
    pred_labels.reserve(gold.samples.size());
    gold_labels.reserve(gold.samples.size());

    std::vector<qa::AnswerSet> pred_answers;
    std::vector<qa::AnswerSet> gold_answers;

    for (const corpus::Sample& sample : gold.samples) {
        const auto it = by_id.find(sample.id);
        if (it == by_id.end()) {
            throw DataError("missing prediction for id '" + sample.id + "'");
        }
        const corpus::PredictionRow& row = *it->second;
        if (!sample.label) {
            throw DataError("gold sample '" + sample.id + "' is unlabeled");
        }
        if (!row.label) {
            throw DataError("prediction for id '" + sample.id + "' has no label");
        }
        gold_labels.push_back(*sample.label);
        pred_labels.push_back(*row.label);
        if (config.require_answers) {
            if (!sample.claim_answers || !sample.evidence_answers) {
                throw DataError("gold sample '" + sample.id + "' has no answer lists");
            }
            qa::AnswerSet pred_set;
            pred_set.id = row.id;
            pred_set.claim_answers = row.claim_answers;
            pred_set.evidence_answers = row.evidence_answers;
            pred_answers.push_back(std::move(pred_set));
            qa::AnswerSet gold_set;
            gold_set.id = sample.id;
            gold_set.claim_answers = *sample.claim_answers;
            gold_set.evidence_answers = *sample.evidence_answers;
            gold_answers.push_back(std::move(gold_set));
        }
    }

    EvalReport report;
    report.config = config;
    report.sample_count = static_cast<std::int64_t>(gold.samples.size());

    std::vector<double> sample_bleu(gold.samples.size(), 0.0);
    if (config.require_answers) {
        const qa::ScoreSummary summary = qa::score_answers(pred_answers, gold_answers, config.bleu);
        for (std::size_t i = 0; i < summary.per_sample.size(); ++i) {
            sample_bleu[i] = summary.per_sample[i].average;
        }
        report.mean_bleu = summary.mean_average;
    }

    std::int64_t official_correct = 0;
    for (std::size_t i = 0; i < gold_labels.size(); ++i) {
        const bool label_ok = pred_labels[i] == gold_labels[i];
        // Strict inequality: a score equal to the threshold does not pass.
        const bool bleu_ok = !config.require_answers || sample_bleu[i] > config.bleu_threshold;
        if (label_ok && bleu_ok) {
            official_correct += 1;
        }
    }
    report.official_accuracy =
        gold_labels.empty()
            ? 0.0
            : static_cast<double>(official_correct) / static_cast<double>(gold_labels.size());

    const PerLabelAccuracy per_label = per_label_accuracy(pred_labels, gold_labels);
    report.label_accuracy = per_label.overall;
    report.per_label = per_label.per_label;
    report.confusion = confusion_matrix(pred_labels, gold_labels);
    return report;
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "table") {
        return ReportFormat::Table;
    }
    if (name == "structured") {
        return ReportFormat::Structured;
    }
    throw ConfigError("unknown report format: '" + std::string(name) + "' (expected table|structured)");
}

namespace {

std::string render_structured(const EvalReport& r) {
    std::string out = "fact5w-eval-report\tversion 1\n";
    out += "samples\t" + std::to_string(r.sample_count) + "\n";
    out += "bleu_threshold\t" + io::format_double(r.config.bleu_threshold) + "\n";
    out += std::string("label_only\t") + (r.config.require_answers ? "false" : "true") + "\n";
    out += std::string("bleu_smoothing\t") + (r.config.bleu.smoothing ? "true" : "false") + "\n";
    out += "official_accuracy\t" + io::format_double(r.official_accuracy) + "\n";
    out += "label_accuracy\t" + io::format_double(r.label_accuracy) + "\n";
    out += "mean_bleu\t" + io::format_double(r.mean_bleu) + "\n";
    for (std::size_t k = 0; k < 3; ++k) {
        out += "acc_" + std::string(corpus::label_name(kLabelOrder[k])) + "\t";
        out += r.per_label[k] ? io::format_double(*r.per_label[k]) : std::string("n/a");
        out += '\n';
    }
    for (std::size_t g = 0; g < 3; ++g) {
        for (std::size_t p = 0; p < 3; ++p) {
            out += "confusion\t" + std::string(corpus::label_name(kLabelOrder[g])) + "\t" +
                   std::string(corpus::label_name(kLabelOrder[p])) + "\t" +
                   std::to_string(r.confusion[g][p]) + "\n";
        }
    }
    return out;
}

std::string render_table(const EvalReport& r) {
    std::string out;
    out += "samples: " + std::to_string(r.sample_count) + "\n";
    out += "bleu threshold: " + fixed4(r.config.bleu_threshold) + " (label-only: " +
           (r.config.require_answers ? "off" : "on") + ", smoothing: " +
           (r.config.bleu.smoothing ? "on" : "off") + ")\n";
    out += "official accuracy: " + fixed4(r.official_accuracy) + "\n";
    out += "label accuracy:    " + fixed4(r.label_accuracy) + "\n";
    out += "mean answer BLEU:  " + fixed4(r.mean_bleu) + "\n";
    out += "\n";
    out += "label      accuracy\n";
    for (std::size_t k = 0; k < 3; ++k) {
        out += label_row(corpus::label_name(kLabelOrder[k]), r.per_label[k]) + "\n";
    }
    out += label_row("Total", r.label_accuracy) + "\n";
    out += "\n";
    out += "confusion (rows = gold, cols = predicted)\n";
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-10s %8s %8s %8s\n", "", "Support", "Neutral", "Refute");
    out += buf;
    for (std::size_t g = 0; g < 3; ++g) {
        std::snprintf(buf, sizeof(buf), "%-10s %8lld %8lld %8lld\n",
                      std::string(corpus::label_name(kLabelOrder[g])).c_str(),
                      static_cast<long long>(r.confusion[g][0]),
                      static_cast<long long>(r.confusion[g][1]),
                      static_cast<long long>(r.confusion[g][2]));
        out += buf;
    }
    return out;
}

} // namespace

std::string render_report(const EvalReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::Table: return render_table(report);
        case ReportFormat::Structured: return render_structured(report);
    }
    throw ConfigError("invalid report format");
}

EvalReport parse_structured(std::string_view text, std::string_view source_name) {
    const std::vector<std::string> lines = io::split_lines(text);
    if (lines.empty() || lines[0] != "fact5w-eval-report\tversion 1") {
        throw DataError(std::string(source_name) + ": not a structured eval report");
    }
    EvalReport report;
    const auto label_index = [](std::string_view name) -> std::size_t {
        return static_cast<std::size_t>(corpus::parse_label(name));
    };
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::vector<std::string> cells = io::split_tsv_line(lines[i]);
        if (cells.empty()) {
            continue;
        }
        const std::string& key = cells[0];
        const auto expect = [&](std::size_t n) {
            if (cells.size() != n) {
                throw DataError(std::string(source_name) + ":" + std::to_string(i + 1) +
                                ": malformed '" + key + "' line");
            }
        };
        if (key == "samples") {
            expect(2);
            report.sample_count = io::parse_int(cells[1], "samples");
        } else if (key == "bleu_threshold") {
            expect(2);
            report.config.bleu_threshold = io::parse_double(cells[1], "bleu_threshold");
        } else if (key == "label_only") {
            expect(2);
            report.config.require_answers = cells[1] != "true";
        } else if (key == "bleu_smoothing") {
            expect(2);
            report.config.bleu.smoothing = cells[1] == "true";
        } else if (key == "official_accuracy") {
            expect(2);
            report.official_accuracy = io::parse_double(cells[1], key);
        } else if (key == "label_accuracy") {
            expect(2);
            report.label_accuracy = io::parse_double(cells[1], key);
        } else if (key == "mean_bleu") {
            expect(2);
            report.mean_bleu = io::parse_double(cells[1], key);
        } else if (key.starts_with("acc_")) {
            expect(2);
            const std::size_t k = label_index(key.substr(4));
            if (cells[1] != "n/a") {
                report.per_label[k] = io::parse_double(cells[1], key);
            }
        } else if (key == "confusion") {
            expect(4);
            report.confusion[label_index(cells[1])][label_index(cells[2])] =
                io::parse_int(cells[3], "confusion count");
        } else {
            throw DataError(std::string(source_name) + ":" + std::to_string(i + 1) +
                            ": unknown report key '" + key + "'");
        }
    }
    return report;
}

} // namespace fact5w::eval
