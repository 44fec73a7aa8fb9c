#include "fact5w/corpus.hpp"

#include <algorithm>
#include <iostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "fact5w/error.hpp"
#include "fact5w/io.hpp"
#include "fact5w/unicode.hpp"

namespace fact5w::corpus {

namespace {

using json = nlohmann::json;

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return out;
}

std::string encode_list(const std::vector<std::string>& items) {
    json arr = json::array();
    for (const auto& item : items) {
        arr.push_back(item);
    }
    return arr.dump();
}

std::vector<std::string> decode_list(std::string_view cell, std::string_view where) {
    json arr;
    try {
        arr = json::parse(cell);
    } catch (const json::exception& e) {
        throw DataError(std::string(where) + ": list cell is not a JSON array: " + e.what());
    }
    if (!arr.is_array()) {
        throw DataError(std::string(where) + ": list cell is not a JSON array");
    }
    std::vector<std::string> items;
    items.reserve(arr.size());
    for (const auto& item : arr) {
        if (!item.is_string()) {
            throw DataError(std::string(where) + ": list cell contains a non-string entry");
        }
        items.push_back(item.get<std::string>());
    }
    return items;
}

std::string padded_index(std::size_t row) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06zu", row);
    return std::string(buf);
}

struct ColumnMap {
    int id = -1;
    int claim = -1;
    int evidence = -1;
    int questions = -1;
    int claim_answers = -1;
    int evidence_answers = -1;
    int label = -1;
};

ColumnMap map_columns(const std::vector<std::string>& header, std::string_view source,
                      const std::set<std::string>& known) {
    ColumnMap map;
    for (int i = 0; i < static_cast<int>(header.size()); ++i) {
        const std::string name = ascii_lower(header[static_cast<std::size_t>(i)]);
        if (name == "id") {
            map.id = i;
        } else if (name == "claim") {
            map.claim = i;
        } else if (name == "evidence") {
            map.evidence = i;
        } else if (name == "questions") {
            map.questions = i;
        } else if (name == "claim_answers") {
            map.claim_answers = i;
        } else if (name == "evidence_answers") {
            map.evidence_answers = i;
        } else if (name == "label") {
            map.label = i;
        } else if (known.count(name) == 0) {
            std::cerr << "[warn] " << source << ": ignoring unknown column '"
                      << header[static_cast<std::size_t>(i)] << "'\n";
        }
    }
    return map;
}

const std::string* cell_at(const std::vector<std::string>& cells, int index) {
    if (index < 0 || index >= static_cast<int>(cells.size())) {
        return nullptr;
    }
    return &cells[static_cast<std::size_t>(index)];
}

} // namespace

Label parse_label(std::string_view text) {
    const std::string lower = ascii_lower(text);
    if (lower == "support") {
        return Label::Support;
    }
    if (lower == "neutral") {
        return Label::Neutral;
    }
    if (lower == "refute") {
        return Label::Refute;
    }
    throw DataError("unknown label: '" + std::string(text) + "'");
}

std::string_view label_name(Label label) {
    switch (label) {
        case Label::Support: return "Support";
        case Label::Neutral: return "Neutral";
        case Label::Refute: return "Refute";
    }
    throw DataError("invalid label value");
}

std::string_view split_name(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Validation: return "validation";
        case Split::Test: return "test";
    }
    throw DataError("invalid split value");
}

Split parse_split(std::string_view text) {
    const std::string lower = ascii_lower(text);
    if (lower == "train") {
        return Split::Train;
    }
    if (lower == "validation" || lower == "val") {
        return Split::Validation;
    }
    if (lower == "test") {
        return Split::Test;
    }
    throw DataError("unknown split: '" + std::string(text) + "'");
}

const Sample* Dataset::find(std::string_view id) const {
    for (const Sample& s : samples) {
        if (s.id == id) {
            return &s;
        }
    }
    return nullptr;
}

void validate_sample(const Sample& sample, Split split) {
    const std::string where = "sample '" + sample.id + "'";
    if (sample.id.empty()) {
        throw DataError("sample with empty id");
    }
    if (sample.claim.empty()) {
        throw DataError(where + ": claim is empty");
    }
    if (sample.evidence.empty()) {
        throw DataError(where + ": evidence is empty");
    }
    const std::size_t q = sample.questions.size();
    if (sample.claim_answers && sample.claim_answers->size() != q) {
        throw DataError(where + ": claim_answers length " + std::to_string(sample.claim_answers->size()) +
                        " does not match question count " + std::to_string(q));
    }
    if (sample.evidence_answers && sample.evidence_answers->size() != q) {
        throw DataError(where + ": evidence_answers length " +
                        std::to_string(sample.evidence_answers->size()) +
                        " does not match question count " + std::to_string(q));
    }
    const bool labeled_split = split != Split::Test;
    if (labeled_split) {
        if (!sample.label) {
            throw DataError(where + ": missing label in " + std::string(split_name(split)) + " split");
        }
        if (!sample.claim_answers || !sample.evidence_answers) {
            throw DataError(where + ": missing answer lists in " + std::string(split_name(split)) + " split");
        }
    } else {
        if (sample.label || sample.claim_answers || sample.evidence_answers) {
            throw DataError(where + ": test split samples must not carry labels or answers");
        }
    }
}

Dataset parse_dataset_text(std::string_view text, Split split, std::string_view source_name) {
    const std::vector<std::string> lines = io::split_lines(text);
    if (lines.empty()) {
        throw DataError(std::string(source_name) + ": missing header row");
    }
    const std::vector<std::string> header = io::split_tsv_line(lines[0]);
    static const std::set<std::string> known = {"id",        "claim",         "evidence",
                                                "questions", "claim_answers", "evidence_answers",
                                                "label"};
    const ColumnMap cols = map_columns(header, source_name, known);
    if (cols.claim < 0 || cols.evidence < 0 || cols.questions < 0) {
        throw DataError(std::string(source_name) +
                        ": missing required column (need claim, evidence, questions)");
    }

    Dataset dataset;
    dataset.split = split;
    std::unordered_set<std::string> seen_ids;
    for (std::size_t row = 1; row < lines.size(); ++row) {
        const std::string where = std::string(source_name) + ":" + std::to_string(row + 1);
        if (lines[row].empty()) {
            continue;
        }
        const std::vector<std::string> cells = io::split_tsv_line(lines[row]);
        if (cells.size() != header.size()) {
            throw DataError(where + ": expected " + std::to_string(header.size()) + " cells, found " +
                            std::to_string(cells.size()));
        }
        Sample sample;
        if (const std::string* c = cell_at(cells, cols.id); c && !c->empty()) {
            sample.id = io::unescape_cell(*c);
        } else {
            sample.id = padded_index(row - 1);
        }
        sample.claim = io::unescape_cell(*cell_at(cells, cols.claim));
        sample.evidence = io::unescape_cell(*cell_at(cells, cols.evidence));
        sample.questions = decode_list(*cell_at(cells, cols.questions), where);
        if (const std::string* c = cell_at(cells, cols.claim_answers); c && !c->empty()) {
            sample.claim_answers = decode_list(*c, where);
        }
        if (const std::string* c = cell_at(cells, cols.evidence_answers); c && !c->empty()) {
            sample.evidence_answers = decode_list(*c, where);
        }
        if (const std::string* c = cell_at(cells, cols.label); c && !c->empty()) {
            try {
                sample.label = parse_label(*c);
            } catch (const DataError& e) {
                throw DataError(where + ": " + e.what());
            }
        }
        try {
            validate_sample(sample, split);
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        if (!seen_ids.insert(sample.id).second) {
            throw DataError(where + ": duplicate sample id '" + sample.id + "'");
        }
        dataset.samples.push_back(std::move(sample));
    }
    return dataset;
}

Dataset parse_dataset(const std::filesystem::path& path, Split split) {
    return parse_dataset_text(io::read_file(path), split, path.string());
}

std::string write_dataset_text(const Dataset& dataset) {
    std::string out = "id\tclaim\tevidence\tquestions\tclaim_answers\tevidence_answers\tlabel\n";
    for (const Sample& s : dataset.samples) {
        out += io::escape_cell(s.id);
        out += '\t';
        out += io::escape_cell(s.claim);
        out += '\t';
        out += io::escape_cell(s.evidence);
        out += '\t';
        out += encode_list(s.questions);
        out += '\t';
        out += s.claim_answers ? encode_list(*s.claim_answers) : std::string();
        out += '\t';
        out += s.evidence_answers ? encode_list(*s.evidence_answers) : std::string();
        out += '\t';
        if (s.label) {
            out += label_name(*s.label);
        }
        out += '\n';
    }
    return out;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    io::atomic_write_file(path, write_dataset_text(dataset));
}

std::string write_predictions_text(const Dataset& dataset, std::span<const PredictionRow> predictions) {
    std::unordered_set<std::string> dataset_ids;
    for (const Sample& s : dataset.samples) {
        dataset_ids.insert(s.id);
    }
    std::unordered_set<std::string> seen;
    for (const PredictionRow& row : predictions) {
        if (dataset_ids.count(row.id) == 0) {
            throw DataError("prediction id '" + row.id + "' not present in dataset");
        }
        if (!seen.insert(row.id).second) {
            throw DataError("duplicate prediction for id '" + row.id + "'");
        }
    }
    if (seen.size() != dataset_ids.size()) {
        for (const Sample& s : dataset.samples) {
            if (seen.count(s.id) == 0) {
                throw DataError("missing prediction for id '" + s.id + "'");
            }
        }
    }

    std::vector<const PredictionRow*> ordered;
    ordered.reserve(predictions.size());
    for (const PredictionRow& row : predictions) {
        ordered.push_back(&row);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const PredictionRow* a, const PredictionRow* b) { return a->id < b->id; });

    std::string out = "id\tlabel\tclaim_answers\tevidence_answers\n";
    for (const PredictionRow* row : ordered) {
        out += io::escape_cell(row->id);
        out += '\t';
        if (row->label) {
            out += label_name(*row->label);
        }
        out += '\t';
        out += encode_list(row->claim_answers);
        out += '\t';
        out += encode_list(row->evidence_answers);
        out += '\n';
    }
    return out;
}

void write_predictions(const Dataset& dataset, std::span<const PredictionRow> predictions,
                       const std::filesystem::path& path) {
    io::atomic_write_file(path, write_predictions_text(dataset, predictions));
}

std::vector<PredictionRow> parse_predictions_text(std::string_view text, std::string_view source_name) {
    const std::vector<std::string> lines = io::split_lines(text);
    if (lines.empty()) {
        throw DataError(std::string(source_name) + ": missing header row");
    }
    const std::vector<std::string> header = io::split_tsv_line(lines[0]);
    static const std::set<std::string> known = {"id", "label", "claim_answers", "evidence_answers"};
    const ColumnMap cols = map_columns(header, source_name, known);
    if (cols.id < 0 || cols.label < 0 || cols.claim_answers < 0 || cols.evidence_answers < 0) {
        throw DataError(std::string(source_name) +
                        ": missing required column (need id, label, claim_answers, evidence_answers)");
    }
    std::vector<PredictionRow> rows;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string where = std::string(source_name) + ":" + std::to_string(i + 1);
        if (lines[i].empty()) {
            continue;
        }
        const std::vector<std::string> cells = io::split_tsv_line(lines[i]);
        if (cells.size() != header.size()) {
            throw DataError(where + ": expected " + std::to_string(header.size()) + " cells, found " +
                            std::to_string(cells.size()));
        }
        PredictionRow row;
        row.id = io::unescape_cell(*cell_at(cells, cols.id));
        if (const std::string* c = cell_at(cells, cols.label); c && !c->empty()) {
            try {
                row.label = parse_label(*c);
            } catch (const DataError& e) {
                throw DataError(where + ": " + e.what());
            }
        }
        row.claim_answers = decode_list(*cell_at(cells, cols.claim_answers), where);
        row.evidence_answers = decode_list(*cell_at(cells, cols.evidence_answers), where);
        if (row.id.empty()) {
            throw DataError(where + ": empty id");
        }
        if (!seen.insert(row.id).second) {
            throw DataError(where + ": duplicate id '" + row.id + "'");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<PredictionRow> parse_predictions(const std::filesystem::path& path) {
    return parse_predictions_text(io::read_file(path), path.string());
}

} // namespace fact5w::corpus
