#include "fact5w/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "fact5w/error.hpp"
#include "fact5w/io.hpp"

namespace fact5w::ensemble {

namespace {

constexpr double kSumTolerance = 1e-4;

int argmax3(const Triple& t) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
        if (t[static_cast<std::size_t>(i)] > t[static_cast<std::size_t>(best)]) {
            best = i;
        }
    }
    return best;
}

/// pow with 0^e := 0 for the probability domain (exponents are validated > 0,
/// so this only sidesteps std::pow's 0^0 == 1 convention).
double prob_pow(double p, double e) { return p == 0.0 ? 0.0 : std::pow(p, e); }

} // namespace

// ---------------------------------------------------------------------------
// ProbTable
// ---------------------------------------------------------------------------

ProbTable::ProbTable(std::string model_name, std::vector<std::pair<std::string, Triple>> rows)
    : name_(std::move(model_name)) {
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    ids_.reserve(rows.size());
    triples_.reserve(rows.size());
    for (auto& [id, triple] : rows) {
        ids_.push_back(std::move(id));
        triples_.push_back(triple);
    }
    validate();
}

void ProbTable::validate() const {
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (i > 0 && ids_[i] == ids_[i - 1]) {
            throw DataError("prob table '" + name_ + "': duplicate id '" + ids_[i] + "'");
        }
        const Triple& t = triples_[i];
        double sum = 0.0;
        for (double v : t) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw DataError("prob table '" + name_ + "': negative or non-finite probability for id '" +
                                ids_[i] + "'");
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > kSumTolerance) {
            throw DataError("prob table '" + name_ + "': probabilities for id '" + ids_[i] +
                            "' sum to " + io::format_double(sum) + ", expected 1 within " +
                            io::format_double(kSumTolerance));
        }
    }
}

ProbTable ProbTable::from_text(std::string_view text, std::string_view source_name) {
    const std::vector<std::string> lines = io::split_lines(text);
    if (lines.empty()) {
        throw DataError(std::string(source_name) + ": missing header row");
    }
    const std::vector<std::string> header = io::split_tsv_line(lines[0]);
    if (header.size() != 4 || header[0] != "id" || header[1] != "p_support" ||
        header[2] != "p_neutral" || header[3] != "p_refute") {
        throw DataError(std::string(source_name) +
                        ": expected header 'id\tp_support\tp_neutral\tp_refute'");
    }
    std::vector<std::pair<std::string, Triple>> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        const std::vector<std::string> cells = io::split_tsv_line(lines[i]);
        if (cells.size() != 4) {
            throw DataError(std::string(source_name) + ":" + std::to_string(i + 1) +
                            ": expected 4 cells, found " + std::to_string(cells.size()));
        }
        Triple t{io::parse_double(cells[1], "p_support"), io::parse_double(cells[2], "p_neutral"),
                 io::parse_double(cells[3], "p_refute")};
        rows.emplace_back(io::unescape_cell(cells[0]), t);
    }
    return ProbTable(std::string(source_name), std::move(rows));
}

ProbTable ProbTable::load(const std::filesystem::path& path) {
    ProbTable table = from_text(io::read_file(path), path.string());
    table.name_ = path.stem().string();
    return table;
}

std::string ProbTable::to_text() const {
    std::string out = "id\tp_support\tp_neutral\tp_refute\n";
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        out += io::escape_cell(ids_[i]);
        for (double v : triples_[i]) {
            out += '\t';
            out += io::format_double(v);
        }
        out += '\n';
    }
    return out;
}

void ProbTable::save(const std::filesystem::path& path) const {
    io::atomic_write_file(path, to_text());
}

// ---------------------------------------------------------------------------
// Methods and specs
// ---------------------------------------------------------------------------

std::string_view method_name(Method method) {
    switch (method) {
        case Method::WeightedSumLabels: return "weighted-sum-labels";
        case Method::PowerWeightedSumLabels: return "power-weighted-sum-labels";
        case Method::PowerWeightedSum2: return "power-weighted-sum-2";
        case Method::PowerWeightedSum3: return "power-weighted-sum-3";
    }
    throw ConfigError("invalid ensemble method");
}

Method parse_method(std::string_view name) {
    for (const Method m : {Method::WeightedSumLabels, Method::PowerWeightedSumLabels,
                           Method::PowerWeightedSum2, Method::PowerWeightedSum3}) {
        if (method_name(m) == name) {
            return m;
        }
    }
    throw ConfigError("unknown ensemble method: '" + std::string(name) + "'");
}

int method_model_count(Method method) {
    return method == Method::PowerWeightedSum3 ? 3 : 2;
}

void EnsembleSpec::validate() const {
    const auto check_weights = [](const Triple& w, std::string_view what, int count) {
        for (int i = 0; i < count; ++i) {
            const double v = w[static_cast<std::size_t>(i)];
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw ConfigError(std::string(what) + " must be >= 0 and finite");
            }
        }
    };
    const auto check_exponents = [](const Triple& e, std::string_view what, int count) {
        for (int i = 0; i < count; ++i) {
            const double v = e[static_cast<std::size_t>(i)];
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw ConfigError(std::string(what) + " must be > 0 and finite");
            }
        }
    };
    switch (method) {
        case Method::WeightedSumLabels:
            check_weights(label_weights, "label weights", 3);
            for (double v : label_weights) {
                if (v > 1.0) {
                    throw ConfigError("label weights must lie in [0, 1]");
                }
            }
            break;
        case Method::PowerWeightedSumLabels:
            check_weights(label_weights, "label weights", 3);
            for (double v : label_weights) {
                if (v > 1.0) {
                    throw ConfigError("label weights must lie in [0, 1]");
                }
            }
            check_exponents(label_exponents, "label exponents", 3);
            break;
        case Method::PowerWeightedSum2:
            check_weights(model_weights, "model weights", 2);
            check_exponents(model_exponents, "model exponents", 2);
            break;
        case Method::PowerWeightedSum3:
            check_weights(model_weights, "model weights", 3);
            check_exponents(model_exponents, "model exponents", 3);
            break;
    }
}

std::vector<double> EnsembleSpec::parameter_tuple() const {
    switch (method) {
        case Method::WeightedSumLabels:
            return {label_weights[0], label_weights[1], label_weights[2]};
        case Method::PowerWeightedSumLabels:
            return {label_weights[0], label_weights[1],   label_weights[2],
                    label_exponents[0], label_exponents[1], label_exponents[2]};
        case Method::PowerWeightedSum2:
            return {model_weights[0], model_weights[1], model_exponents[0], model_exponents[1]};
        case Method::PowerWeightedSum3:
            return {model_weights[0],  model_weights[1],  model_weights[2],
                    model_exponents[0], model_exponents[1], model_exponents[2]};
    }
    throw ConfigError("invalid ensemble method");
}

std::string EnsembleSpec::to_text() const {
    const auto triple_text = [](const Triple& t) {
        return io::format_double(t[0]) + "\t" + io::format_double(t[1]) + "\t" + io::format_double(t[2]);
    };
    std::string out = "fact5w-ensemble-spec\tversion 1\n";
    out += "method\t" + std::string(method_name(method)) + "\n";
    out += "label_weights\t" + triple_text(label_weights) + "\n";
    out += "label_exponents\t" + triple_text(label_exponents) + "\n";
    out += "model_weights\t" + triple_text(model_weights) + "\n";
    out += "model_exponents\t" + triple_text(model_exponents) + "\n";
    return out;
}

EnsembleSpec EnsembleSpec::from_text(std::string_view text, std::string_view source_name) {
    const std::vector<std::string> lines = io::split_lines(text);
    if (lines.size() != 6 || lines[0] != "fact5w-ensemble-spec\tversion 1") {
        throw DataError(std::string(source_name) + ": not an ensemble spec file");
    }
    EnsembleSpec spec;
    const auto parse_triple = [&](const std::string& line, std::string_view key) {
        const std::vector<std::string> cells = io::split_tsv_line(line);
        if (cells.size() != 4 || cells[0] != key) {
            throw DataError(std::string(source_name) + ": malformed '" + std::string(key) + "' line");
        }
        return Triple{io::parse_double(cells[1], key), io::parse_double(cells[2], key),
                      io::parse_double(cells[3], key)};
    };
    const std::vector<std::string> method_cells = io::split_tsv_line(lines[1]);
    if (method_cells.size() != 2 || method_cells[0] != "method") {
        throw DataError(std::string(source_name) + ": malformed method line");
    }
    spec.method = parse_method(method_cells[1]);
    spec.label_weights = parse_triple(lines[2], "label_weights");
    spec.label_exponents = parse_triple(lines[3], "label_exponents");
    spec.model_weights = parse_triple(lines[4], "model_weights");
    spec.model_exponents = parse_triple(lines[5], "model_exponents");
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------
// Combine
// ---------------------------------------------------------------------------

namespace {

void check_tables(const EnsembleSpec& spec, std::span<const ProbTable> tables) {
    const int expected = method_model_count(spec.method);
    if (static_cast<int>(tables.size()) != expected) {
        throw ConfigError("method '" + std::string(method_name(spec.method)) + "' combines " +
                          std::to_string(expected) + " models, got " + std::to_string(tables.size()));
    }
    for (std::size_t t = 1; t < tables.size(); ++t) {
        if (tables[t].ids() != tables[0].ids()) {
            throw DataError("prob tables '" + tables[0].model_name() + "' and '" +
                            tables[t].model_name() + "' do not cover the same sample ids");
        }
    }
}

Triple combine_one(const EnsembleSpec& spec, std::span<const ProbTable> tables, std::size_t row) {
    Triple out{0.0, 0.0, 0.0};
    switch (spec.method) {
        case Method::WeightedSumLabels: {
            const Triple& p1 = tables[0].triples()[row];
            const Triple& p2 = tables[1].triples()[row];
            for (std::size_t x = 0; x < 3; ++x) {
                const double w = spec.label_weights[x];
                out[x] = w * p1[x] + (1.0 - w) * p2[x];
            }
            break;
        }
        case Method::PowerWeightedSumLabels: {
            const Triple& p1 = tables[0].triples()[row];
            const Triple& p2 = tables[1].triples()[row];
            for (std::size_t x = 0; x < 3; ++x) {
                const double w = spec.label_weights[x];
                const double e = spec.label_exponents[x];
                out[x] = w * prob_pow(p1[x], e) + (1.0 - w) * prob_pow(p2[x], 1.0 / e);
            }
            break;
        }
        case Method::PowerWeightedSum2:
        case Method::PowerWeightedSum3: {
            const int models = method_model_count(spec.method);
            for (int m = 0; m < models; ++m) {
                const Triple& p = tables[static_cast<std::size_t>(m)].triples()[row];
                const double w = spec.model_weights[static_cast<std::size_t>(m)];
                const double e = spec.model_exponents[static_cast<std::size_t>(m)];
                for (std::size_t x = 0; x < 3; ++x) {
                    out[x] += w * prob_pow(p[x], e);
                }
            }
            break;
        }
    }
    return out;
}

} // namespace

std::vector<Triple> Combined::normalized() const {
    std::vector<Triple> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double sum = scores[i][0] + scores[i][1] + scores[i][2];
        if (sum > 0.0) {
            out[i] = {scores[i][0] / sum, scores[i][1] / sum, scores[i][2] / sum};
        } else {
            out[i] = {0.0, 0.0, 0.0};
        }
    }
    return out;
}

Combined combine(const EnsembleSpec& spec, std::span<const ProbTable> tables) {
    spec.validate();
    check_tables(spec, tables);
    Combined result;
    result.ids = tables[0].ids();
    result.scores.resize(result.ids.size());
    result.predictions.resize(result.ids.size());
    for (std::size_t i = 0; i < result.ids.size(); ++i) {
        result.scores[i] = combine_one(spec, tables, i);
        result.predictions[i] = static_cast<corpus::Label>(argmax3(result.scores[i]));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

std::string SearchResult::to_text() const {
    std::string out = best.to_text();
    out += "accuracy\t" + io::format_double(accuracy) + "\n";
    out += "evaluated\t" + std::to_string(evaluated) + "\n";
    out += "ties\t" + std::to_string(ties) + "\n";
    return out;
}

namespace {

struct SearchState {
    double best_accuracy = -1.0;
    std::vector<double> best_tuple;
    EnsembleSpec best_spec;
    std::size_t evaluated = 0;
    std::size_t ties = 0;

    void offer(double accuracy, const EnsembleSpec& spec) {
        ++evaluated;
        if (accuracy > best_accuracy) {
            best_accuracy = accuracy;
            best_spec = spec;
            best_tuple = spec.parameter_tuple();
            ties = 1;
        } else if (accuracy == best_accuracy) {
            ++ties;
            const std::vector<double> tuple = spec.parameter_tuple();
            if (tuple < best_tuple) {
                best_tuple = tuple;
                best_spec = spec;
            }
        }
    }

    void merge(const SearchState& other) {
        evaluated += other.evaluated;
        if (other.best_accuracy > best_accuracy) {
            best_accuracy = other.best_accuracy;
            best_spec = other.best_spec;
            best_tuple = other.best_tuple;
            ties = other.ties;
        } else if (other.best_accuracy == best_accuracy) {
            ties += other.ties;
            if (best_tuple.empty() || (!other.best_tuple.empty() && other.best_tuple < best_tuple)) {
                best_tuple = other.best_tuple;
                best_spec = other.best_spec;
            }
        }
    }
};

/// Powered copies of each table: powered[m][e][3*i + x] = P_mx(i)^exponent[e].
using PoweredTables = std::vector<std::vector<std::vector<double>>>;

PoweredTables precompute_powers(std::span<const ProbTable> tables, std::span<const double> exponents) {
    PoweredTables powered(tables.size());
    for (std::size_t m = 0; m < tables.size(); ++m) {
        powered[m].resize(exponents.size());
        const auto& triples = tables[m].triples();
        for (std::size_t e = 0; e < exponents.size(); ++e) {
            auto& flat = powered[m][e];
            flat.resize(triples.size() * 3);
            for (std::size_t i = 0; i < triples.size(); ++i) {
                for (std::size_t x = 0; x < 3; ++x) {
                    flat[3 * i + x] = prob_pow(triples[i][x], exponents[e]);
                }
            }
        }
    }
    return powered;
}

std::vector<int> gold_indices(const ProbTable& table, const std::map<std::string, corpus::Label>& gold) {
    std::vector<int> out;
    out.reserve(table.size());
    for (const std::string& id : table.ids()) {
        const auto it = gold.find(id);
        if (it == gold.end()) {
            throw DataError("gold label missing for id '" + id + "'");
        }
        out.push_back(static_cast<int>(it->second));
    }
    return out;
}

std::vector<double> weight_grid(double step) {
    if (!(step > 0.0) || step > 1.0) {
        throw ConfigError("weight step must lie in (0, 1]");
    }
    const int n = static_cast<int>(std::lround(1.0 / step));
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        grid.push_back(std::min(1.0, static_cast<double>(i) * step));
    }
    return grid;
}

double accuracy_of(std::span<const int> predictions, std::span<const int> gold) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == gold[i]) {
            ++correct;
        }
    }
    return predictions.empty() ? 0.0
                               : static_cast<double>(correct) / static_cast<double>(predictions.size());
}

int argmax_flat(const double* t) {
    int best = 0;
    if (t[1] > t[best]) {
        best = 1;
    }
    if (t[2] > t[best]) {
        best = 2;
    }
    return best;
}

} // namespace

SearchResult search(Method method, std::span<const ProbTable> tables,
                    const std::map<std::string, corpus::Label>& gold, const GridConfig& grid) {
    const int expected = method_model_count(method);
    if (static_cast<int>(tables.size()) != expected) {
        throw ConfigError("method '" + std::string(method_name(method)) + "' searches over " +
                          std::to_string(expected) + " models, got " + std::to_string(tables.size()));
    }
    for (std::size_t t = 1; t < tables.size(); ++t) {
        if (tables[t].ids() != tables[0].ids()) {
            throw DataError("prob tables do not cover the same sample ids");
        }
    }
    if (tables[0].size() == 0) {
        throw DataError("cannot search over empty prob tables");
    }
    const std::vector<double> weights = weight_grid(grid.weight_step);
    std::vector<double> exponents = grid.exponents;
    const bool uses_exponents = method != Method::WeightedSumLabels;
    if (uses_exponents && exponents.empty()) {
        throw ConfigError("exponent grid is empty");
    }
    for (double e : exponents) {
        if (!(e > 0.0) || !std::isfinite(e)) {
            throw ConfigError("exponents must be > 0 and finite");
        }
    }
    if (!uses_exponents) {
        exponents = {1.0};
    }
    // Inverse exponents for the per-label power method's second model.
    std::vector<double> inv_exponents(exponents.size());
    for (std::size_t i = 0; i < exponents.size(); ++i) {
        inv_exponents[i] = 1.0 / exponents[i];
    }

    const std::vector<int> gold_idx = gold_indices(tables[0], gold);
    const std::size_t n = tables[0].size();

    const PoweredTables powered = precompute_powers(tables, exponents);
    const PoweredTables inv_powered = method == Method::PowerWeightedSumLabels
                                          ? precompute_powers(tables, inv_exponents)
                                          : PoweredTables{};

    const int threads = std::max(1, grid.threads);
    std::vector<SearchState> states(static_cast<std::size_t>(threads));

    // Work is split over the outermost tuple coordinate; each worker scans its
    // chunk in lexicographic order, so the merge below is deterministic.
    const auto run_workers = [&](auto&& body) {
        if (threads == 1) {
            body(0, 0, weights.size());
            return;
        }
        std::vector<std::thread> pool;
        const std::size_t per = (weights.size() + static_cast<std::size_t>(threads) - 1) /
                                static_cast<std::size_t>(threads);
        for (int t = 0; t < threads; ++t) {
            const std::size_t lo = std::min(weights.size(), static_cast<std::size_t>(t) * per);
            const std::size_t hi = std::min(weights.size(), lo + per);
            pool.emplace_back([&, t, lo, hi] { body(t, lo, hi); });
        }
        for (auto& th : pool) {
            th.join();
        }
    };

    std::vector<std::vector<int>> predictions(static_cast<std::size_t>(threads),
                                              std::vector<int>(n, 0));

    switch (method) {
        case Method::WeightedSumLabels: {
            run_workers([&](int tid, std::size_t lo, std::size_t hi) {
                SearchState& state = states[static_cast<std::size_t>(tid)];
                std::vector<int>& pred = predictions[static_cast<std::size_t>(tid)];
                const auto& p1 = powered[0][0];
                const auto& p2 = powered[1][0];
                for (std::size_t a = lo; a < hi; ++a) {
                    for (double wn : weights) {
                        for (double wr : weights) {
                            const double ws = weights[a];
                            for (std::size_t i = 0; i < n; ++i) {
                                double t[3];
                                t[0] = ws * p1[3 * i] + (1.0 - ws) * p2[3 * i];
                                t[1] = wn * p1[3 * i + 1] + (1.0 - wn) * p2[3 * i + 1];
                                t[2] = wr * p1[3 * i + 2] + (1.0 - wr) * p2[3 * i + 2];
                                pred[i] = argmax_flat(t);
                            }
                            EnsembleSpec spec;
                            spec.method = method;
                            spec.label_weights = {ws, wn, wr};
                            state.offer(accuracy_of(pred, gold_idx), spec);
                        }
                    }
                }
            });
            break;
        }
        case Method::PowerWeightedSumLabels: {
            run_workers([&](int tid, std::size_t lo, std::size_t hi) {
                SearchState& state = states[static_cast<std::size_t>(tid)];
                std::vector<int>& pred = predictions[static_cast<std::size_t>(tid)];
                for (std::size_t a = lo; a < hi; ++a) {
                    const double ws = weights[a];
                    for (double wn : weights) {
                        for (double wr : weights) {
                            for (std::size_t es = 0; es < exponents.size(); ++es) {
                                for (std::size_t en = 0; en < exponents.size(); ++en) {
                                    for (std::size_t er = 0; er < exponents.size(); ++er) {
                                        const double* p1s = powered[0][es].data();
                                        const double* p1n = powered[0][en].data();
                                        const double* p1r = powered[0][er].data();
                                        const double* p2s = inv_powered[1][es].data();
                                        const double* p2n = inv_powered[1][en].data();
                                        const double* p2r = inv_powered[1][er].data();
                                        for (std::size_t i = 0; i < n; ++i) {
                                            double t[3];
                                            t[0] = ws * p1s[3 * i] + (1.0 - ws) * p2s[3 * i];
                                            t[1] = wn * p1n[3 * i + 1] + (1.0 - wn) * p2n[3 * i + 1];
                                            t[2] = wr * p1r[3 * i + 2] + (1.0 - wr) * p2r[3 * i + 2];
                                            pred[i] = argmax_flat(t);
                                        }
                                        EnsembleSpec spec;
                                        spec.method = method;
                                        spec.label_weights = {ws, wn, wr};
                                        spec.label_exponents = {exponents[es], exponents[en],
                                                                exponents[er]};
                                        state.offer(accuracy_of(pred, gold_idx), spec);
                                    }
                                }
                            }
                        }
                    }
                }
            });
            break;
        }
        case Method::PowerWeightedSum2: {
            run_workers([&](int tid, std::size_t lo, std::size_t hi) {
                SearchState& state = states[static_cast<std::size_t>(tid)];
                std::vector<int>& pred = predictions[static_cast<std::size_t>(tid)];
                for (std::size_t a = lo; a < hi; ++a) {
                    const double w1 = weights[a];
                    for (double w2 : weights) {
                        for (std::size_t e1 = 0; e1 < exponents.size(); ++e1) {
                            for (std::size_t e2 = 0; e2 < exponents.size(); ++e2) {
                                const double* q1 = powered[0][e1].data();
                                const double* q2 = powered[1][e2].data();
                                for (std::size_t i = 0; i < n; ++i) {
                                    double t[3];
                                    for (std::size_t x = 0; x < 3; ++x) {
                                        t[x] = w1 * q1[3 * i + x] + w2 * q2[3 * i + x];
                                    }
                                    pred[i] = argmax_flat(t);
                                }
                                EnsembleSpec spec;
                                spec.method = method;
                                spec.model_weights = {w1, w2, 0.0};
                                spec.model_exponents = {exponents[e1], exponents[e2], 1.0};
                                state.offer(accuracy_of(pred, gold_idx), spec);
                            }
                        }
                    }
                }
            });
            break;
        }
        case Method::PowerWeightedSum3: {
            run_workers([&](int tid, std::size_t lo, std::size_t hi) {
                SearchState& state = states[static_cast<std::size_t>(tid)];
                std::vector<int>& pred = predictions[static_cast<std::size_t>(tid)];
                for (std::size_t a = lo; a < hi; ++a) {
                    const double w1 = weights[a];
                    for (double w2 : weights) {
                        for (double w3 : weights) {
                            for (std::size_t e1 = 0; e1 < exponents.size(); ++e1) {
                                for (std::size_t e2 = 0; e2 < exponents.size(); ++e2) {
                                    for (std::size_t e3 = 0; e3 < exponents.size(); ++e3) {
                                        const double* q1 = powered[0][e1].data();
                                        const double* q2 = powered[1][e2].data();
                                        const double* q3 = powered[2][e3].data();
                                        for (std::size_t i = 0; i < n; ++i) {
                                            double t[3];
                                            for (std::size_t x = 0; x < 3; ++x) {
                                                t[x] = w1 * q1[3 * i + x] + w2 * q2[3 * i + x] +
                                                       w3 * q3[3 * i + x];
                                            }
                                            pred[i] = argmax_flat(t);
                                        }
                                        EnsembleSpec spec;
                                        spec.method = method;
                                        spec.model_weights = {w1, w2, w3};
                                        spec.model_exponents = {exponents[e1], exponents[e2],
                                                                exponents[e3]};
                                        state.offer(accuracy_of(pred, gold_idx), spec);
                                    }
                                }
                            }
                        }
                    }
                }
            });
            break;
        }
    }

    SearchResult result;
    SearchState merged;
    for (const SearchState& state : states) {
        merged.merge(state);
    }
    result.best = merged.best_spec;
    result.accuracy = merged.best_accuracy;
    result.evaluated = merged.evaluated;
    result.ties = merged.ties;
    return result;
}

} // namespace fact5w::ensemble
