#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fact5w/corpus.hpp"
#include "fact5w/embeddings.hpp"
#include "fact5w/features.hpp"

namespace fact5w::fakenet {

using Matrix = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct FakeNetConfig {
    int d_in = 1024;           // frozen embedding width
    int d_model = 256;         // projected width (d_PLM)
    int d_fe = 32;             // feature embedding width
    int heads = 2;             // co-attention heads
    int classifier_hidden = 128;
    int ff_multiplier = 4;     // feed-forward width = ff_multiplier * d_model
    int batch_size = 24;
    double learning_rate = 5e-5;
    int epochs = 30;
    std::uint64_t seed = 0;
    double beta1 = 0.9;        // first-moment decay
    double beta2 = 0.999;      // second-moment decay
    double adam_epsilon = 1e-8;
    bool cache_embeddings = true;

    void validate() const;

    bool operator==(const FakeNetConfig&) const = default;
};

/// The six co-attended field pairs, in fixed order.
inline constexpr std::array<std::pair<emb::Field, emb::Field>, 6> kCoAttentionPairs = {{
    {emb::Field::Claim, emb::Field::Evidence},
    {emb::Field::Claim, emb::Field::ClaimAnswer},
    {emb::Field::Claim, emb::Field::EvidenceAnswer},
    {emb::Field::Evidence, emb::Field::ClaimAnswer},
    {emb::Field::Evidence, emb::Field::EvidenceAnswer},
    {emb::Field::ClaimAnswer, emb::Field::EvidenceAnswer},
}};

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// y = x * weight + bias; bias is 1 x out and broadcasts over rows.
struct LinearLayer {
    Matrix weight;
    Matrix bias;
};

struct LayerNormParams {
    Matrix gain; // 1 x d
    Matrix bias; // 1 x d
};

/// One attention direction: queries from X, keys/values from Y, then the
/// post-norm encoder tail (residual, layer norm, feed-forward, residual,
/// layer norm).
struct AttentionDirection {
    LinearLayer query;
    LinearLayer key;
    LinearLayer value;
    LinearLayer output;
    LayerNormParams norm_attn;
    LinearLayer ff_in;
    LinearLayer ff_out;
    LayerNormParams norm_ff;
};

/// A co-attention block holds two mirrored parameter sets, one per direction.
struct CoAttentionBlock {
    AttentionDirection ab; // first field attends to second
    AttentionDirection ba; // second field attends to first
};

class FakeNetModel {
  public:
    FakeNetConfig config;
    LinearLayer projection;                    // d_in -> d_model, shared by all fields
    std::array<CoAttentionBlock, 6> blocks;    // one per kCoAttentionPairs entry
    LinearLayer feature_map;                   // 65 -> d_fe
    LinearLayer classifier_hidden_layer;       // (d_model + d_fe) -> hidden
    LinearLayer classifier_out;                // hidden -> 3
    std::string scaler_fingerprint;
    std::string tfidf_fingerprint;

    /// Fan-in/fan-out scaled uniform init from the config seed; biases and
    /// layer-norm biases zero, layer-norm gains one.
    static FakeNetModel init(const FakeNetConfig& config);

    /// Same shapes, all parameters zero. Used for gradients and Adam moments.
    FakeNetModel zeros_like() const;

    /// Stable enumeration of every parameter tensor. Order defines the
    /// initialization stream, the optimizer walk and the checkpoint layout.
    std::vector<std::pair<std::string, Matrix*>> named_tensors();
    std::vector<std::pair<std::string, const Matrix*>> named_tensors() const;

    std::size_t parameter_count() const;
};

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

/// Cross-attends both directions of one pair and returns the pair vector:
/// the mean of the two mean-pooled encoder outputs (1 x d_model).
Eigen::RowVectorXd coattend(const CoAttentionBlock& block, const Matrix& a, const Matrix& b, int heads);

/// Full forward pass: probabilities over (Support, Neutral, Refute).
/// `scaled_features` must already be scaled to [-1, 1].
Eigen::Vector3d forward(const FakeNetModel& model, const emb::EmbeddingSet& embeddings,
                        const features::FeatureVector& scaled_features);

/// Argmax with ties resolved in label order Support < Neutral < Refute.
corpus::Label predict_label(const Eigen::Vector3d& probabilities);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct Example {
    emb::EmbeddingSet embeddings;
    Eigen::RowVectorXd features; // 1 x 65, scaled
    corpus::Label label = corpus::Label::Support;
};

/// Throws DataError if the sample is unlabeled.
Example make_example(const emb::EmbeddingProvider& provider, const corpus::Sample& sample,
                     const features::FeatureVector& scaled_features);

/// Mean cross-entropy over the batch, with a 1e-12 probability floor inside
/// the log (the floor guards the value only; gradients use the exact
/// softmax-cross-entropy form).
double batch_loss(const FakeNetModel& model, std::span<const Example> batch);

/// Runs forward + backward over the batch; adds gradients into `gradient`
/// (a zeros_like twin) and returns the batch loss.
double batch_loss_and_gradient(const FakeNetModel& model, std::span<const Example> batch,
                               FakeNetModel& gradient);

/// A labeled dataset plus its scaled feature vectors, aligned by index.
struct LabeledData {
    const corpus::Dataset* dataset = nullptr;
    std::vector<features::FeatureVector> features;
};

struct TrainReport {
    std::vector<double> train_loss;
    std::vector<double> train_accuracy;
    std::vector<double> val_accuracy;
    int best_epoch = -1;
    std::uint64_t seed = 0;

    std::string to_text() const;
};

/// Deterministic mini-batch Adam training; returns the best-validation-epoch
/// model. Single-threaded by contract: byte-identical checkpoints per seed.
std::pair<FakeNetModel, TrainReport> train(const FakeNetConfig& config,
                                           const emb::EmbeddingProvider& provider,
                                           const LabeledData& train_data, const LabeledData& val_data);

double evaluate_accuracy(const FakeNetModel& model, const emb::EmbeddingProvider& provider,
                         const LabeledData& data);

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------

struct GradCheckOptions {
    double epsilon = 1e-5;
    double tolerance = 1e-4;
    int parameter_samples = 200;
    std::uint64_t seed = 1;
    /// Testing hook: use this gradient instead of the analytic one.
    const FakeNetModel* gradient_override = nullptr;
};

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::string worst_tensor;
    int checked = 0;
    double epsilon = 0.0;
    double tolerance = 0.0;
    bool passed = false;

    std::string to_text() const;
};

/// Central finite differences on randomly selected parameters. The model is
/// perturbed in place and restored exactly.
GradCheckReport gradient_check(FakeNetModel& model, std::span<const Example> batch,
                               const GradCheckOptions& options = {});

// ---------------------------------------------------------------------------
// Checkpointing
// ---------------------------------------------------------------------------

std::string serialize_model(const FakeNetModel& model);
FakeNetModel deserialize_model(std::string_view bytes, std::string_view source_name);
void save_model(const FakeNetModel& model, const std::filesystem::path& path);
FakeNetModel load_model(const std::filesystem::path& path);

} // namespace fact5w::fakenet
