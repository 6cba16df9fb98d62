#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "fednids/dataio.hpp"
#include "fednids/preprocess.hpp"
#include "fednids/random.hpp"

namespace fednids {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Layer widths of the intrusion-detection DNN: 39 inputs, ReLU hidden
/// layers of 12, 6 and 3 units, one sigmoid output.
inline constexpr std::array<int, 5> kDnnWidths{39, 12, 6, 3, 1};

/// Affine map: out = in * weights + bias, weights is fan_in x fan_out.
struct DenseLayer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;

  Eigen::Index fan_in() const { return weights.rows(); }
  Eigen::Index fan_out() const { return weights.cols(); }
  bool operator==(const DenseLayer& o) const {
    return weights.rows() == o.weights.rows() && weights.cols() == o.weights.cols() &&
           weights == o.weights && bias.size() == o.bias.size() && bias == o.bias;
  }
};

/// Ordered dense layers. Shared shape logic for parameters, gradients and
/// Adam moments.
struct LayerStack {
  std::vector<DenseLayer> layers;

  std::size_t parameter_count() const;
  bool same_shape(const LayerStack& other) const;
  bool all_finite() const;
  /// Layer order, weights row-major then bias.
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> values);
  /// Zero-valued stack mirroring `shape`.
  static LayerStack zeros_like(const LayerStack& shape);

  bool operator==(const LayerStack&) const = default;
};

struct ModelParameters : LayerStack {};
struct GradientSet : LayerStack {};

/// Glorot-uniform weights, zero biases.
ModelParameters init_model(std::uint64_t seed, std::span<const int> widths = kDnnWidths);

/// Throws ModelError unless params has exactly the kDnnWidths shapes and
/// finite entries.
void check_dnn_shape(const ModelParameters& params);

/// Dropout is applied to the outputs of every hidden layer except the last
/// (hidden layers 1 and 2 for the DNN). Masks hold 0 or 1 / (1 - rate).
struct DropoutMasks {
  std::vector<Eigen::MatrixXd> masks;  // one per dropout site, rows x width
};

std::size_t dropout_site_count(const ModelParameters& params);

DropoutMasks sample_dropout_masks(const ModelParameters& params, Eigen::Index rows, double rate,
                                  Rng& rng);

/// Intermediate values of one forward pass, consumed by backward().
struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre_activations;  // z per layer
  std::vector<Eigen::MatrixXd> activations;      // a[0] = input, a[l+1] = layer l output
  Eigen::VectorXd probabilities;
};

/// Inference mode when masks is null; train mode otherwise.
ForwardCache forward(const ModelParameters& params, const Eigen::Ref<const FeatureMatrix>& batch,
                     const DropoutMasks* masks = nullptr);

/// Sigmoid outputs in inference mode.
Eigen::VectorXd predict(const ModelParameters& params,
                        const Eigen::Ref<const FeatureMatrix>& batch);

inline constexpr double kProbabilityClip = 1e-7;

/// Mean binary cross-entropy with probabilities clipped to
/// [kProbabilityClip, 1 - kProbabilityClip].
double loss_bce(const Eigen::Ref<const Eigen::VectorXd>& probabilities, std::span<const int> labels);

/// Gradient of the mean BCE w.r.t. every parameter. The output delta is
/// (p - y) / n, the derivative of the unclipped loss.
GradientSet backward(const ModelParameters& params, const Eigen::Ref<const FeatureMatrix>& batch,
                     std::span<const int> labels, const ForwardCache& cache,
                     const DropoutMasks* masks = nullptr);

struct AdamConstants {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

struct OptimizerState {
  GradientSet first_moment;
  GradientSet second_moment;
  std::int64_t step_count = 0;

  static OptimizerState fresh(const ModelParameters& params);
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(OptimizerState& state, ModelParameters& params, const GradientSet& grads,
               const AdamConstants& constants);

struct TrainingConfig {
  int local_epochs = 3;
  int batch_size = 2048;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  double dropout_rate = 0.4;
  std::uint64_t seed = 0;

  void validate() const;
  AdamConstants adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

struct LocalTrainingResult {
  ModelParameters params;
  double wall_time_s = 0.0;
};

/// E epochs of shuffled mini-batch Adam (final short batch kept) with a
/// fresh optimizer state. Bitwise deterministic in (params, data, config).
LocalTrainingResult train_local(ModelParameters params, const PreparedDataset& data,
                                const TrainingConfig& config);

/// Checkpoint: "FNIDSCK1", u32 layer count, u32 (fan_in, fan_out) per
/// layer, then flatten() as little-endian IEEE-754 doubles.
std::vector<std::uint8_t> serialize_parameters(const ModelParameters& params);
ModelParameters deserialize_parameters(std::span<const std::uint8_t> bytes);
void save_checkpoint(const ModelParameters& params, const std::filesystem::path& path);
ModelParameters load_checkpoint(const std::filesystem::path& path);

}  // namespace fednids
