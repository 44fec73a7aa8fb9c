#include "fact5w/fakenet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <set>

#include <json.hpp>

#include "fact5w/error.hpp"
#include "fact5w/io.hpp"
#include "fact5w/rng.hpp"
#include "fact5w/version.hpp"

namespace fact5w::fakenet {

namespace {

using json = nlohmann::json;

constexpr double kLayerNormEpsilon = 1e-5;
constexpr double kProbabilityFloor = 1e-12;

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian platform");

// ---------------------------------------------------------------------------
// Primitive layers
// ---------------------------------------------------------------------------

Matrix linear_forward(const Matrix& x, const LinearLayer& layer) {
    Matrix y = x * layer.weight;
    y.rowwise() += layer.bias.row(0);
    return y;
}

/// Accumulates weight/bias gradients and returns dx.
Matrix linear_backward(const Matrix& x, const Matrix& dy, const LinearLayer& layer, LinearLayer& grad) {
    grad.weight += x.transpose() * dy;
    grad.bias += dy.colwise().sum();
    return dy * layer.weight.transpose();
}

struct LayerNormTrace {
    Matrix xhat;
    Eigen::VectorXd inv_sigma;
};

Matrix layer_norm_forward(const Matrix& x, const LayerNormParams& params, LayerNormTrace& trace) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    trace.xhat.resize(n, d);
    trace.inv_sigma.resize(n);
    Matrix y(n, d);
    for (Eigen::Index r = 0; r < n; ++r) {
        const double mu = x.row(r).mean();
        const double var = (x.row(r).array() - mu).square().mean();
        const double inv = 1.0 / std::sqrt(var + kLayerNormEpsilon);
        trace.inv_sigma(r) = inv;
        trace.xhat.row(r) = (x.row(r).array() - mu) * inv;
        y.row(r) = trace.xhat.row(r).cwiseProduct(params.gain.row(0)) + params.bias.row(0);
    }
    return y;
}

Matrix layer_norm_backward(const Matrix& dy, const LayerNormParams& params, const LayerNormTrace& trace,
                           LayerNormParams& grad) {
    const Eigen::Index n = dy.rows();
    const Eigen::Index d = dy.cols();
    grad.bias += dy.colwise().sum();
    grad.gain += dy.cwiseProduct(trace.xhat).colwise().sum();
    Matrix dx(n, d);
    for (Eigen::Index r = 0; r < n; ++r) {
        const Eigen::RowVectorXd dxhat = dy.row(r).cwiseProduct(params.gain.row(0));
        const double mean_dxhat = dxhat.mean();
        const double mean_proj = dxhat.cwiseProduct(trace.xhat.row(r)).mean();
        dx.row(r) = trace.inv_sigma(r) *
                    (dxhat.array() - mean_dxhat - trace.xhat.row(r).array() * mean_proj);
    }
    return dx;
}

Matrix softmax_rows(const Matrix& scores) {
    Matrix probs(scores.rows(), scores.cols());
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        const double mx = scores.row(r).maxCoeff();
        Eigen::ArrayXd e = (scores.row(r).array() - mx).exp();
        probs.row(r) = e / e.sum();
    }
    return probs;
}

// ---------------------------------------------------------------------------
// Attention direction: queries from X, keys/values from Y
// ---------------------------------------------------------------------------

struct DirectionTrace {
    Matrix q, k, v;
    std::vector<Matrix> attn; // per-head row-softmax weights, n x m
    Matrix concat;            // heads concatenated, n x d
    LayerNormTrace ln1;
    Matrix y1;
    Matrix ff_pre; // before ReLU
    Matrix ff_act;
    LayerNormTrace ln2;
    Matrix y2;
};

void direction_forward(const AttentionDirection& p, const Matrix& x, const Matrix& y, int heads,
                       DirectionTrace& t) {
    t.q = linear_forward(x, p.query);
    t.k = linear_forward(y, p.key);
    t.v = linear_forward(y, p.value);
    const Eigen::Index d = t.q.cols();
    const Eigen::Index dh = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    t.attn.assign(static_cast<std::size_t>(heads), Matrix());
    t.concat.resize(x.rows(), d);
    for (int h = 0; h < heads; ++h) {
        const Eigen::Index off = h * dh;
        const Matrix scores = scale * (t.q.middleCols(off, dh) * t.k.middleCols(off, dh).transpose());
        Matrix probs = softmax_rows(scores);
        t.concat.middleCols(off, dh) = probs * t.v.middleCols(off, dh);
        t.attn[static_cast<std::size_t>(h)] = std::move(probs);
    }
    const Matrix z1 = x + linear_forward(t.concat, p.output);
    t.y1 = layer_norm_forward(z1, p.norm_attn, t.ln1);
    t.ff_pre = linear_forward(t.y1, p.ff_in);
    t.ff_act = t.ff_pre.cwiseMax(0.0);
    const Matrix z2 = t.y1 + linear_forward(t.ff_act, p.ff_out);
    t.y2 = layer_norm_forward(z2, p.norm_ff, t.ln2);
}

/// dpooled is the gradient of the mean-pooled output (1 x d).
/// Returns (dx, dy) and accumulates parameter gradients.
std::pair<Matrix, Matrix> direction_backward(const AttentionDirection& p, const Matrix& x,
                                             const Matrix& y, int heads, const DirectionTrace& t,
                                             const Eigen::RowVectorXd& dpooled,
                                             AttentionDirection& grad) {
    const Eigen::Index n = t.y2.rows();
    const Eigen::Index d = t.y2.cols();
    const Eigen::Index dh = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    const Matrix dy2 = (dpooled / static_cast<double>(n)).replicate(n, 1);
    const Matrix dz2 = layer_norm_backward(dy2, p.norm_ff, t.ln2, grad.norm_ff);

    Matrix dy1 = dz2;
    const Matrix dff_act = linear_backward(t.ff_act, dz2, p.ff_out, grad.ff_out);
    const Matrix dff_pre = ((t.ff_pre.array() > 0.0).cast<double>() * dff_act.array()).matrix();
    dy1 += linear_backward(t.y1, dff_pre, p.ff_in, grad.ff_in);

    const Matrix dz1 = layer_norm_backward(dy1, p.norm_attn, t.ln1, grad.norm_attn);

    Matrix dx = dz1;
    const Matrix dconcat = linear_backward(t.concat, dz1, p.output, grad.output);

    Matrix dq = Matrix::Zero(n, d);
    Matrix dk = Matrix::Zero(y.rows(), d);
    Matrix dv = Matrix::Zero(y.rows(), d);
    for (int h = 0; h < heads; ++h) {
        const Eigen::Index off = h * dh;
        const Matrix& probs = t.attn[static_cast<std::size_t>(h)];
        const Matrix d_out = dconcat.middleCols(off, dh);
        const Matrix dprobs = d_out * t.v.middleCols(off, dh).transpose();
        dv.middleCols(off, dh) = probs.transpose() * d_out;
        Matrix dscores(probs.rows(), probs.cols());
        for (Eigen::Index r = 0; r < probs.rows(); ++r) {
            const double dot = dprobs.row(r).dot(probs.row(r));
            dscores.row(r) = probs.row(r).cwiseProduct(dprobs.row(r).array() - dot);
        }
        dscores *= scale;
        dq.middleCols(off, dh) = dscores * t.k.middleCols(off, dh);
        dk.middleCols(off, dh) = dscores.transpose() * t.q.middleCols(off, dh);
    }
    dx += linear_backward(x, dq, p.query, grad.query);
    Matrix dy = linear_backward(y, dk, p.key, grad.key);
    dy += linear_backward(y, dv, p.value, grad.value);
    return {std::move(dx), std::move(dy)};
}

// ---------------------------------------------------------------------------
// Whole-model forward trace
// ---------------------------------------------------------------------------

struct SampleTrace {
    std::array<Matrix, emb::kFieldCount> projected;
    std::array<DirectionTrace, 6> dir_ab;
    std::array<DirectionTrace, 6> dir_ba;
    Eigen::RowVectorXd features_in;
    Eigen::RowVectorXd fused;
    Eigen::RowVectorXd feature_embedding;
    Eigen::RowVectorXd z;
    Eigen::RowVectorXd hidden_pre;
    Eigen::RowVectorXd hidden_act;
    Eigen::RowVectorXd logits;
    Eigen::Vector3d probs;
};

void check_finite(const Matrix& m, const char* layer) {
    if (!m.allFinite()) {
        throw NumericError(std::string("non-finite activations in layer '") + layer + "'");
    }
}

void forward_trace(const FakeNetModel& model, const emb::EmbeddingSet& set,
                   const Eigen::RowVectorXd& features, SampleTrace& t) {
    const FakeNetConfig& cfg = model.config;
    for (int f = 0; f < emb::kFieldCount; ++f) {
        const Matrix& raw = set.field(static_cast<emb::Field>(f));
        if (raw.cols() != cfg.d_in) {
            throw DataError("embedding width " + std::to_string(raw.cols()) +
                            " does not match configured d_in " + std::to_string(cfg.d_in) +
                            " (sample '" + set.id + "')");
        }
        if (raw.rows() < 1) {
            throw DataError("embedding for sample '" + set.id + "' has no rows");
        }
        if (!raw.allFinite()) {
            throw NumericError("non-finite embedding input (sample '" + set.id + "')");
        }
        t.projected[static_cast<std::size_t>(f)] = linear_forward(raw, model.projection);
        check_finite(t.projected[static_cast<std::size_t>(f)], "projection");
    }
    Eigen::RowVectorXd pair_sum = Eigen::RowVectorXd::Zero(cfg.d_model);
    for (std::size_t k = 0; k < kCoAttentionPairs.size(); ++k) {
        const auto [fa, fb] = kCoAttentionPairs[k];
        const Matrix& a = t.projected[static_cast<std::size_t>(fa)];
        const Matrix& b = t.projected[static_cast<std::size_t>(fb)];
        direction_forward(model.blocks[k].ab, a, b, cfg.heads, t.dir_ab[k]);
        direction_forward(model.blocks[k].ba, b, a, cfg.heads, t.dir_ba[k]);
        pair_sum += 0.5 * (t.dir_ab[k].y2.colwise().mean() + t.dir_ba[k].y2.colwise().mean());
    }
    t.fused = pair_sum / static_cast<double>(kCoAttentionPairs.size());
    check_finite(t.fused, "co-attention");

    if (features.size() != features::kFeatureCount) {
        throw DataError("feature vector must have " + std::to_string(features::kFeatureCount) +
                        " entries");
    }
    t.features_in = features;
    t.feature_embedding = linear_forward(features, model.feature_map);

    t.z.resize(cfg.d_model + cfg.d_fe);
    t.z << t.fused, t.feature_embedding;
    t.hidden_pre = linear_forward(t.z, model.classifier_hidden_layer);
    t.hidden_act = t.hidden_pre.cwiseMax(0.0);
    t.logits = linear_forward(t.hidden_act, model.classifier_out);
    check_finite(t.logits, "classifier");

    const Matrix probs = softmax_rows(t.logits);
    t.probs = Eigen::Vector3d(probs(0, 0), probs(0, 1), probs(0, 2));
}

void backward_trace(const FakeNetModel& model, const emb::EmbeddingSet& set, const SampleTrace& t,
                    const Eigen::RowVectorXd& dlogits, FakeNetModel& grad) {
    const FakeNetConfig& cfg = model.config;
    const Eigen::RowVectorXd dhidden_act =
        linear_backward(t.hidden_act, dlogits, model.classifier_out, grad.classifier_out);
    const Eigen::RowVectorXd dhidden_pre =
        ((t.hidden_pre.array() > 0.0).cast<double>() * dhidden_act.array()).matrix();
    const Eigen::RowVectorXd dz =
        linear_backward(t.z, dhidden_pre, model.classifier_hidden_layer, grad.classifier_hidden_layer);

    const Eigen::RowVectorXd dfused = dz.head(cfg.d_model);
    const Eigen::RowVectorXd dfeat = dz.tail(cfg.d_fe);
    linear_backward(t.features_in, dfeat, model.feature_map, grad.feature_map);

    std::array<Matrix, emb::kFieldCount> dproj;
    for (int f = 0; f < emb::kFieldCount; ++f) {
        const auto& p = t.projected[static_cast<std::size_t>(f)];
        dproj[static_cast<std::size_t>(f)] = Matrix::Zero(p.rows(), p.cols());
    }
    const Eigen::RowVectorXd dpool = dfused * (0.5 / static_cast<double>(kCoAttentionPairs.size()));
    for (std::size_t k = 0; k < kCoAttentionPairs.size(); ++k) {
        const auto [fa, fb] = kCoAttentionPairs[k];
        const Matrix& a = t.projected[static_cast<std::size_t>(fa)];
        const Matrix& b = t.projected[static_cast<std::size_t>(fb)];
        auto [dxa, dyb] =
            direction_backward(model.blocks[k].ab, a, b, cfg.heads, t.dir_ab[k], dpool, grad.blocks[k].ab);
        dproj[static_cast<std::size_t>(fa)] += dxa;
        dproj[static_cast<std::size_t>(fb)] += dyb;
        auto [dxb, dya] =
            direction_backward(model.blocks[k].ba, b, a, cfg.heads, t.dir_ba[k], dpool, grad.blocks[k].ba);
        dproj[static_cast<std::size_t>(fb)] += dxb;
        dproj[static_cast<std::size_t>(fa)] += dya;
    }
    for (int f = 0; f < emb::kFieldCount; ++f) {
        const Matrix& raw = set.field(static_cast<emb::Field>(f));
        linear_backward(raw, dproj[static_cast<std::size_t>(f)], model.projection, grad.projection);
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

void FakeNetConfig::validate() const {
    if (d_in < 1 || d_model < 1 || d_fe < 1 || heads < 1 || classifier_hidden < 1 || ff_multiplier < 1) {
        throw ConfigError("all FakeNet widths must be >= 1");
    }
    if (d_model % heads != 0) {
        throw ConfigError("d_model (" + std::to_string(d_model) + ") must be divisible by heads (" +
                          std::to_string(heads) + ")");
    }
    if (batch_size < 1) {
        throw ConfigError("batch_size must be >= 1");
    }
    // learning_rate == 0 is permitted: it is the documented no-op optimizer.
    if (learning_rate < 0.0 || !std::isfinite(learning_rate)) {
        throw ConfigError("learning_rate must be finite and >= 0");
    }
    if (epochs < 1) {
        throw ConfigError("epochs must be >= 1");
    }
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
        throw ConfigError("moment decays must lie in [0, 1)");
    }
    if (adam_epsilon <= 0.0) {
        throw ConfigError("adam_epsilon must be > 0");
    }
}

namespace {

json config_to_json(const FakeNetConfig& c) {
    json j;
    j["d_in"] = c.d_in;
    j["d_model"] = c.d_model;
    j["d_fe"] = c.d_fe;
    j["heads"] = c.heads;
    j["classifier_hidden"] = c.classifier_hidden;
    j["ff_multiplier"] = c.ff_multiplier;
    j["batch_size"] = c.batch_size;
    j["learning_rate"] = c.learning_rate;
    j["epochs"] = c.epochs;
    j["seed"] = c.seed;
    j["beta1"] = c.beta1;
    j["beta2"] = c.beta2;
    j["adam_epsilon"] = c.adam_epsilon;
    return j;
}

FakeNetConfig config_from_json(const json& j, std::string_view source) {
    FakeNetConfig c;
    try {
        c.d_in = j.at("d_in").get<int>();
        c.d_model = j.at("d_model").get<int>();
        c.d_fe = j.at("d_fe").get<int>();
        c.heads = j.at("heads").get<int>();
        c.classifier_hidden = j.at("classifier_hidden").get<int>();
        c.ff_multiplier = j.at("ff_multiplier").get<int>();
        c.batch_size = j.at("batch_size").get<int>();
        c.learning_rate = j.at("learning_rate").get<double>();
        c.epochs = j.at("epochs").get<int>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.beta1 = j.at("beta1").get<double>();
        c.beta2 = j.at("beta2").get<double>();
        c.adam_epsilon = j.at("adam_epsilon").get<double>();
    } catch (const json::exception& e) {
        throw DataError(std::string(source) + ": bad checkpoint config: " + e.what());
    }
    return c;
}

FakeNetModel make_shaped(const FakeNetConfig& cfg) {
    cfg.validate();
    FakeNetModel m;
    m.config = cfg;
    const int d = cfg.d_model;
    const int ff = cfg.ff_multiplier * cfg.d_model;
    const auto zero_linear = [](int in, int out) {
        return LinearLayer{Matrix::Zero(in, out), Matrix::Zero(1, out)};
    };
    const auto zero_norm = [&] {
        return LayerNormParams{Matrix::Zero(1, d), Matrix::Zero(1, d)};
    };
    m.projection = zero_linear(cfg.d_in, d);
    for (auto& block : m.blocks) {
        for (AttentionDirection* dir : {&block.ab, &block.ba}) {
            dir->query = zero_linear(d, d);
            dir->key = zero_linear(d, d);
            dir->value = zero_linear(d, d);
            dir->output = zero_linear(d, d);
            dir->norm_attn = zero_norm();
            dir->ff_in = zero_linear(d, ff);
            dir->ff_out = zero_linear(ff, d);
            dir->norm_ff = zero_norm();
        }
    }
    m.feature_map = zero_linear(features::kFeatureCount, cfg.d_fe);
    m.classifier_hidden_layer = zero_linear(d + cfg.d_fe, cfg.classifier_hidden);
    m.classifier_out = zero_linear(cfg.classifier_hidden, corpus::kLabelCount);
    return m;
}

template <typename ModelT, typename MatrixT>
std::vector<std::pair<std::string, MatrixT*>> collect_tensors(ModelT& m) {
    std::vector<std::pair<std::string, MatrixT*>> out;
    const auto add_linear = [&](const std::string& base, auto& layer) {
        out.emplace_back(base + ".weight", &layer.weight);
        out.emplace_back(base + ".bias", &layer.bias);
    };
    const auto add_norm = [&](const std::string& base, auto& norm) {
        out.emplace_back(base + ".gain", &norm.gain);
        out.emplace_back(base + ".bias", &norm.bias);
    };
    add_linear("projection", m.projection);
    for (std::size_t k = 0; k < m.blocks.size(); ++k) {
        auto& block = m.blocks[k];
        const std::string prefix = "block" + std::to_string(k);
        const auto add_direction = [&](const std::string& tag, auto& dir) {
            add_linear(prefix + "." + tag + ".query", dir.query);
            add_linear(prefix + "." + tag + ".key", dir.key);
            add_linear(prefix + "." + tag + ".value", dir.value);
            add_linear(prefix + "." + tag + ".output", dir.output);
            add_norm(prefix + "." + tag + ".norm_attn", dir.norm_attn);
            add_linear(prefix + "." + tag + ".ff_in", dir.ff_in);
            add_linear(prefix + "." + tag + ".ff_out", dir.ff_out);
            add_norm(prefix + "." + tag + ".norm_ff", dir.norm_ff);
        };
        add_direction("ab", block.ab);
        add_direction("ba", block.ba);
    }
    add_linear("feature_map", m.feature_map);
    add_linear("classifier_hidden", m.classifier_hidden_layer);
    add_linear("classifier_out", m.classifier_out);
    return out;
}

} // namespace

FakeNetModel FakeNetModel::init(const FakeNetConfig& config) {
    FakeNetModel m = make_shaped(config);
    Rng rng(config.seed);
    for (auto& [name, tensor] : m.named_tensors()) {
        if (name.ends_with(".gain")) {
            tensor->setOnes();
        } else if (name.ends_with(".weight")) {
            const double fan_in = static_cast<double>(tensor->rows());
            const double fan_out = static_cast<double>(tensor->cols());
            const double bound = std::sqrt(6.0 / (fan_in + fan_out));
            for (Eigen::Index r = 0; r < tensor->rows(); ++r) {
                for (Eigen::Index c = 0; c < tensor->cols(); ++c) {
                    (*tensor)(r, c) = rng.uniform(-bound, bound);
                }
            }
        }
        // biases stay zero
    }
    return m;
}

FakeNetModel FakeNetModel::zeros_like() const { return make_shaped(config); }

std::vector<std::pair<std::string, Matrix*>> FakeNetModel::named_tensors() {
    return collect_tensors<FakeNetModel, Matrix>(*this);
}

std::vector<std::pair<std::string, const Matrix*>> FakeNetModel::named_tensors() const {
    return collect_tensors<const FakeNetModel, const Matrix>(*this);
}

std::size_t FakeNetModel::parameter_count() const {
    std::size_t count = 0;
    for (const auto& [name, tensor] : named_tensors()) {
        count += static_cast<std::size_t>(tensor->size());
    }
    return count;
}

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

Eigen::RowVectorXd coattend(const CoAttentionBlock& block, const Matrix& a, const Matrix& b, int heads) {
    if (a.rows() < 1 || b.rows() < 1) {
        throw DataError("coattend requires at least one row per side");
    }
    if (!a.allFinite() || !b.allFinite()) {
        throw NumericError("non-finite co-attention input");
    }
    DirectionTrace tab;
    DirectionTrace tba;
    direction_forward(block.ab, a, b, heads, tab);
    direction_forward(block.ba, b, a, heads, tba);
    return 0.5 * (tab.y2.colwise().mean() + tba.y2.colwise().mean());
}

Eigen::Vector3d forward(const FakeNetModel& model, const emb::EmbeddingSet& embeddings,
                        const features::FeatureVector& scaled_features) {
    Eigen::RowVectorXd feat(features::kFeatureCount);
    for (int i = 0; i < features::kFeatureCount; ++i) {
        feat(i) = scaled_features[static_cast<std::size_t>(i)];
    }
    SampleTrace trace;
    forward_trace(model, embeddings, feat, trace);
    return trace.probs;
}

corpus::Label predict_label(const Eigen::Vector3d& probabilities) {
    int best = 0;
    for (int i = 1; i < corpus::kLabelCount; ++i) {
        if (probabilities(i) > probabilities(best)) {
            best = i;
        }
    }
    return static_cast<corpus::Label>(best);
}

// ---------------------------------------------------------------------------
// Batch loss / gradient
// ---------------------------------------------------------------------------

Example make_example(const emb::EmbeddingProvider& provider, const corpus::Sample& sample,
                     const features::FeatureVector& scaled_features) {
    if (!sample.label) {
        throw DataError("sample '" + sample.id + "' is unlabeled");
    }
    Example ex;
    ex.embeddings = emb::embed_sample(provider, sample);
    ex.features.resize(features::kFeatureCount);
    for (int i = 0; i < features::kFeatureCount; ++i) {
        ex.features(i) = scaled_features[static_cast<std::size_t>(i)];
    }
    ex.label = *sample.label;
    return ex;
}

namespace {

double batch_loss_impl(const FakeNetModel& model, std::span<const Example* const> batch,
                       FakeNetModel* gradient) {
    if (batch.empty()) {
        throw DataError("empty batch");
    }
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double loss_sum = 0.0;
    SampleTrace trace;
    for (const Example* ex : batch) {
        forward_trace(model, ex->embeddings, ex->features, trace);
        const int y = static_cast<int>(ex->label);
        loss_sum += -std::log(std::max(trace.probs(y), kProbabilityFloor));
        if (gradient != nullptr) {
            Eigen::RowVectorXd dlogits(corpus::kLabelCount);
            for (int i = 0; i < corpus::kLabelCount; ++i) {
                dlogits(i) = (trace.probs(i) - (i == y ? 1.0 : 0.0)) * inv_n;
            }
            backward_trace(model, ex->embeddings, trace, dlogits, *gradient);
        }
    }
    return loss_sum * inv_n;
}

} // namespace

double batch_loss(const FakeNetModel& model, std::span<const Example> batch) {
    std::vector<const Example*> ptrs;
    ptrs.reserve(batch.size());
    for (const Example& ex : batch) {
        ptrs.push_back(&ex);
    }
    return batch_loss_impl(model, ptrs, nullptr);
}

double batch_loss_and_gradient(const FakeNetModel& model, std::span<const Example> batch,
                               FakeNetModel& gradient) {
    std::vector<const Example*> ptrs;
    ptrs.reserve(batch.size());
    for (const Example& ex : batch) {
        ptrs.push_back(&ex);
    }
    return batch_loss_impl(model, ptrs, &gradient);
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

std::string TrainReport::to_text() const {
    std::string out = "fact5w-train-report\tversion 1\n";
    out += "seed\t" + std::to_string(seed) + "\n";
    out += "best_epoch\t" + std::to_string(best_epoch) + "\n";
    out += "epoch\ttrain_loss\ttrain_accuracy\tval_accuracy\n";
    for (std::size_t i = 0; i < train_loss.size(); ++i) {
        out += std::to_string(i) + "\t" + io::format_double(train_loss[i]) + "\t" +
               io::format_double(train_accuracy[i]) + "\t" + io::format_double(val_accuracy[i]) + "\n";
    }
    return out;
}

namespace {

std::vector<Example> build_examples(const emb::EmbeddingProvider& provider, const LabeledData& data) {
    std::vector<Example> examples;
    examples.reserve(data.dataset->samples.size());
    for (std::size_t i = 0; i < data.dataset->samples.size(); ++i) {
        examples.push_back(make_example(provider, data.dataset->samples[i], data.features[i]));
    }
    return examples;
}

void check_labeled_data(const LabeledData& data, std::string_view what) {
    if (data.dataset == nullptr) {
        throw DataError(std::string(what) + " dataset missing");
    }
    if (data.dataset->samples.size() != data.features.size()) {
        throw DataError(std::string(what) + " feature count " + std::to_string(data.features.size()) +
                        " does not match sample count " +
                        std::to_string(data.dataset->samples.size()));
    }
}

double accuracy_over(const FakeNetModel& model, std::span<const Example> examples) {
    if (examples.empty()) {
        return 0.0;
    }
    std::size_t correct = 0;
    for (const Example& ex : examples) {
        SampleTrace trace;
        forward_trace(model, ex.embeddings, ex.features, trace);
        if (predict_label(trace.probs) == ex.label) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(examples.size());
}

} // namespace

double evaluate_accuracy(const FakeNetModel& model, const emb::EmbeddingProvider& provider,
                         const LabeledData& data) {
    check_labeled_data(data, "evaluation");
    const std::vector<Example> examples = build_examples(provider, data);
    return accuracy_over(model, examples);
}

std::pair<FakeNetModel, TrainReport> train(const FakeNetConfig& config,
                                           const emb::EmbeddingProvider& provider,
                                           const LabeledData& train_data, const LabeledData& val_data) {
    config.validate();
    check_labeled_data(train_data, "train");
    check_labeled_data(val_data, "validation");
    if (train_data.dataset->samples.empty()) {
        throw DataError("empty training set");
    }

    // Examples are materialized up front when caching; otherwise features and
    // labels are fixed and embeddings are fetched per batch.
    std::vector<Example> train_examples;
    std::vector<Example> val_examples;
    if (config.cache_embeddings) {
        train_examples = build_examples(provider, train_data);
        val_examples = build_examples(provider, val_data);
    }

    FakeNetModel model = FakeNetModel::init(config);
    FakeNetModel gradient = model.zeros_like();
    FakeNetModel moment1 = model.zeros_like();
    FakeNetModel moment2 = model.zeros_like();
    auto model_tensors = model.named_tensors();
    auto grad_tensors = gradient.named_tensors();
    auto m1_tensors = moment1.named_tensors();
    auto m2_tensors = moment2.named_tensors();

    TrainReport report;
    report.seed = config.seed;

    Rng shuffle_rng(fnv1a64_u64(config.seed, fnv1a64("shuffle-schedule")));
    std::vector<std::size_t> order(train_data.dataset->samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }

    FakeNetModel best_model = model;
    double best_val = -1.0;
    long long adam_step = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            std::vector<Example> lazy_storage;
            std::vector<const Example*> batch;
            batch.reserve(stop - start);
            if (config.cache_embeddings) {
                for (std::size_t i = start; i < stop; ++i) {
                    batch.push_back(&train_examples[order[i]]);
                }
            } else {
                lazy_storage.reserve(stop - start);
                for (std::size_t i = start; i < stop; ++i) {
                    const std::size_t idx = order[i];
                    lazy_storage.push_back(make_example(provider, train_data.dataset->samples[idx],
                                                        train_data.features[idx]));
                }
                for (const Example& ex : lazy_storage) {
                    batch.push_back(&ex);
                }
            }

            for (auto& [name, tensor] : grad_tensors) {
                tensor->setZero();
            }
            const double loss = batch_loss_impl(model, batch, &gradient);
            if (!std::isfinite(loss)) {
                throw NumericError("training diverged: non-finite loss at epoch " +
                                   std::to_string(epoch) + ", batch starting at sample " +
                                   std::to_string(start));
            }
            epoch_loss_sum += loss * static_cast<double>(batch.size());

            // Adam update.
            ++adam_step;
            const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(adam_step));
            const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(adam_step));
            for (std::size_t i = 0; i < model_tensors.size(); ++i) {
                auto& theta = *model_tensors[i].second;
                auto& g = *grad_tensors[i].second;
                auto& m1 = *m1_tensors[i].second;
                auto& m2 = *m2_tensors[i].second;
                m1 = config.beta1 * m1 + (1.0 - config.beta1) * g;
                m2 = (config.beta2 * m2.array() + (1.0 - config.beta2) * g.array().square()).matrix();
                theta.array() -= config.learning_rate * (m1.array() / bc1) /
                                 ((m2.array() / bc2).sqrt() + config.adam_epsilon);
            }
        }

        report.train_loss.push_back(epoch_loss_sum / static_cast<double>(order.size()));
        double train_acc = 0.0;
        double val_acc = 0.0;
        if (config.cache_embeddings) {
            train_acc = accuracy_over(model, train_examples);
            val_acc = accuracy_over(model, val_examples);
        } else {
            train_acc = evaluate_accuracy(model, provider, train_data);
            val_acc = evaluate_accuracy(model, provider, val_data);
        }
        report.train_accuracy.push_back(train_acc);
        report.val_accuracy.push_back(val_acc);
        if (val_acc > best_val) {
            best_val = val_acc;
            report.best_epoch = epoch;
            best_model = model;
        }
    }
    return {std::move(best_model), std::move(report)};
}

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------

std::string GradCheckReport::to_text() const {
    std::string out = "fact5w-gradient-check\tversion 1\n";
    out += "checked\t" + std::to_string(checked) + "\n";
    out += "epsilon\t" + io::format_double(epsilon) + "\n";
    out += "tolerance\t" + io::format_double(tolerance) + "\n";
    out += "max_relative_error\t" + io::format_double(max_relative_error) + "\n";
    out += "worst_tensor\t" + worst_tensor + "\n";
    out += std::string("passed\t") + (passed ? "true" : "false") + "\n";
    return out;
}

GradCheckReport gradient_check(FakeNetModel& model, std::span<const Example> batch,
                               const GradCheckOptions& options) {
    GradCheckReport report;
    report.epsilon = options.epsilon;
    report.tolerance = options.tolerance;

    FakeNetModel analytic = model.zeros_like();
    if (options.gradient_override == nullptr) {
        batch_loss_and_gradient(model, batch, analytic);
    }
    const FakeNetModel& grad =
        options.gradient_override != nullptr ? *options.gradient_override : analytic;

    auto model_tensors = model.named_tensors();
    auto grad_tensors = grad.named_tensors();

    std::vector<std::size_t> tensor_offsets;
    std::size_t total = 0;
    for (const auto& [name, tensor] : model_tensors) {
        tensor_offsets.push_back(total);
        total += static_cast<std::size_t>(tensor->size());
    }

    Rng rng(options.seed);
    std::set<std::size_t> chosen;
    const std::size_t want = std::min(static_cast<std::size_t>(options.parameter_samples), total);
    while (chosen.size() < want) {
        chosen.insert(static_cast<std::size_t>(rng.uniform_int(total)));
    }

    for (const std::size_t flat : chosen) {
        // Locate (tensor, element).
        std::size_t tensor_idx = tensor_offsets.size() - 1;
        for (std::size_t i = 1; i < tensor_offsets.size(); ++i) {
            if (tensor_offsets[i] > flat) {
                tensor_idx = i - 1;
                break;
            }
        }
        Matrix& theta = *model_tensors[tensor_idx].second;
        const Eigen::Index element = static_cast<Eigen::Index>(flat - tensor_offsets[tensor_idx]);
        double* slot = theta.data() + element;

        const double original = *slot;
        *slot = original + options.epsilon;
        const double loss_plus = batch_loss(model, batch);
        *slot = original - options.epsilon;
        const double loss_minus = batch_loss(model, batch);
        *slot = original;

        const double fd = (loss_plus - loss_minus) / (2.0 * options.epsilon);
        const double an = (*grad_tensors[tensor_idx].second).data()[element];
        const double rel =
            std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-5});
        if (rel > report.max_relative_error) {
            report.max_relative_error = rel;
            report.worst_tensor = model_tensors[tensor_idx].first;
        }
        ++report.checked;
    }
    report.passed = report.max_relative_error < options.tolerance;
    return report;
}

// ---------------------------------------------------------------------------
// Checkpointing
// ---------------------------------------------------------------------------

namespace {

constexpr char kCheckpointMagic[8] = {'F', '5', 'W', 'C', 'K', 'P', 'T', '\0'};

void put_u32(std::string& out, std::uint32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.append(buf, 4);
}

void put_u64(std::string& out, std::uint64_t v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.append(buf, 8);
}

void put_f64(std::string& out, double v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.append(buf, 8);
}

void put_string(std::string& out, std::string_view s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.append(s);
}

class Reader {
  public:
    Reader(std::string_view data, std::string_view source) : data_(data), source_(source) {}

    std::string_view take(std::size_t n) {
        if (pos_ + n > data_.size()) {
            throw DataError(std::string(source_) + ": truncated checkpoint");
        }
        std::string_view out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    std::uint32_t u32() {
        std::uint32_t v = 0;
        std::memcpy(&v, take(4).data(), 4);
        return v;
    }

    std::uint64_t u64() {
        std::uint64_t v = 0;
        std::memcpy(&v, take(8).data(), 8);
        return v;
    }

    double f64() {
        double v = 0;
        std::memcpy(&v, take(8).data(), 8);
        return v;
    }

    std::string str() {
        const std::uint32_t n = u32();
        return std::string(take(n));
    }

    std::size_t position() const { return pos_; }

  private:
    std::string_view data_;
    std::string_view source_;
    std::size_t pos_ = 0;
};

} // namespace

std::string serialize_model(const FakeNetModel& model) {
    std::string out;
    out.append(kCheckpointMagic, sizeof(kCheckpointMagic));
    put_u32(out, kCheckpointFormatVersion);
    put_string(out, config_to_json(model.config).dump());
    put_string(out, kFeatureLayoutVersion);
    put_string(out, model.scaler_fingerprint);
    put_string(out, model.tfidf_fingerprint);
    const auto tensors = model.named_tensors();
    put_u64(out, tensors.size());
    for (const auto& [name, tensor] : tensors) {
        put_string(out, name);
        put_u64(out, static_cast<std::uint64_t>(tensor->rows()));
        put_u64(out, static_cast<std::uint64_t>(tensor->cols()));
        for (Eigen::Index r = 0; r < tensor->rows(); ++r) {
            for (Eigen::Index c = 0; c < tensor->cols(); ++c) {
                put_f64(out, (*tensor)(r, c));
            }
        }
    }
    put_u64(out, fnv1a64(out));
    return out;
}

FakeNetModel deserialize_model(std::string_view bytes, std::string_view source_name) {
    if (bytes.size() < sizeof(kCheckpointMagic) + 12 ||
        std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
        throw DataError(std::string(source_name) + ": not a FakeNet checkpoint");
    }
    {
        std::uint64_t declared = 0;
        std::memcpy(&declared, bytes.data() + bytes.size() - 8, 8);
        const std::uint64_t actual = fnv1a64(bytes.substr(0, bytes.size() - 8));
        if (declared != actual) {
            throw DataError(std::string(source_name) + ": checkpoint checksum mismatch (corrupt file)");
        }
    }

    Reader reader(bytes.substr(0, bytes.size() - 8), source_name);
    reader.take(sizeof(kCheckpointMagic));
    const std::uint32_t version = reader.u32();
    if (version != kCheckpointFormatVersion) {
        throw DataError(std::string(source_name) + ": checkpoint format version " +
                        std::to_string(version) + " is not supported (supported: " +
                        std::to_string(kCheckpointFormatVersion) + ")");
    }
    json cfg_json;
    try {
        cfg_json = json::parse(reader.str());
    } catch (const json::exception& e) {
        throw DataError(std::string(source_name) + ": bad checkpoint config: " + e.what());
    }
    const FakeNetConfig config = config_from_json(cfg_json, source_name);
    const std::string layout = reader.str();
    if (layout != kFeatureLayoutVersion) {
        throw DataError(std::string(source_name) + ": checkpoint feature layout '" + layout +
                        "' does not match library layout '" + kFeatureLayoutVersion + "'");
    }

    FakeNetModel model = make_shaped(config);
    model.scaler_fingerprint = reader.str();
    model.tfidf_fingerprint = reader.str();

    auto tensors = model.named_tensors();
    const std::uint64_t count = reader.u64();
    if (count != tensors.size()) {
        throw DataError(std::string(source_name) + ": checkpoint holds " + std::to_string(count) +
                        " tensors, expected " + std::to_string(tensors.size()));
    }
    for (auto& [name, tensor] : tensors) {
        const std::string stored_name = reader.str();
        if (stored_name != name) {
            throw DataError(std::string(source_name) + ": checkpoint tensor '" + stored_name +
                            "' does not match expected '" + name + "'");
        }
        const std::uint64_t rows = reader.u64();
        const std::uint64_t cols = reader.u64();
        if (rows != static_cast<std::uint64_t>(tensor->rows()) ||
            cols != static_cast<std::uint64_t>(tensor->cols())) {
            throw DataError(std::string(source_name) + ": tensor '" + name + "' has shape " +
                            std::to_string(rows) + "x" + std::to_string(cols) + ", expected " +
                            std::to_string(tensor->rows()) + "x" + std::to_string(tensor->cols()));
        }
        for (Eigen::Index r = 0; r < tensor->rows(); ++r) {
            for (Eigen::Index c = 0; c < tensor->cols(); ++c) {
                const double v = reader.f64();
                if (!std::isfinite(v)) {
                    throw DataError(std::string(source_name) + ": non-finite parameter in tensor '" +
                                    name + "'");
                }
                (*tensor)(r, c) = v;
            }
        }
    }
    return model;
}

void save_model(const FakeNetModel& model, const std::filesystem::path& path) {
    io::atomic_write_file(path, serialize_model(model));
}

FakeNetModel load_model(const std::filesystem::path& path) {
    return deserialize_model(io::read_file(path), path.string());
}

} // namespace fact5w::fakenet
