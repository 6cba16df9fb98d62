#include "fednids/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fednids/metrics.hpp"

namespace fednids {

std::size_t LayerStack::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

bool LayerStack::same_shape(const LayerStack& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& a = layers[i];
    const auto& b = other.layers[i];
    if (a.weights.rows() != b.weights.rows() || a.weights.cols() != b.weights.cols() ||
        a.bias.size() != b.bias.size()) {
      return false;
    }
  }
  return true;
}

bool LayerStack::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

std::vector<double> LayerStack::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) out.push_back(l.weights(r, c));
    }
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return out;
}

void LayerStack::assign_flat(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw ModelError("assign_flat: expected " + std::to_string(parameter_count()) +
                     " values, got " + std::to_string(values.size()));
  }
  std::size_t k = 0;
  for (auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = values[k++];
    }
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = values[k++];
  }
}

LayerStack LayerStack::zeros_like(const LayerStack& shape) {
  LayerStack out;
  out.layers.reserve(shape.layers.size());
  for (const auto& l : shape.layers) {
    out.layers.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                          Eigen::VectorXd::Zero(l.bias.size())});
  }
  return out;
}

ModelParameters init_model(std::uint64_t seed, std::span<const int> widths) {
  if (widths.size() < 2) throw ModelError("init_model: need at least input and output widths");
  Rng rng(seed);
  ModelParameters p;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const int fan_in = widths[i];
    const int fan_out = widths[i + 1];
    if (fan_in < 1 || fan_out < 1) throw ModelError("init_model: widths must be positive");
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer layer{Eigen::MatrixXd(fan_in, fan_out), Eigen::VectorXd::Zero(fan_out)};
    for (Eigen::Index r = 0; r < fan_in; ++r) {
      for (Eigen::Index c = 0; c < fan_out; ++c) layer.weights(r, c) = rng.uniform(-limit, limit);
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

void check_dnn_shape(const ModelParameters& params) {
  if (params.layers.size() != kDnnWidths.size() - 1) {
    throw ModelError("model must have " + std::to_string(kDnnWidths.size() - 1) + " layers, has " +
                     std::to_string(params.layers.size()));
  }
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto& l = params.layers[i];
    if (l.fan_in() != kDnnWidths[i] || l.fan_out() != kDnnWidths[i + 1] ||
        l.bias.size() != kDnnWidths[i + 1]) {
      throw ModelError("layer " + std::to_string(i + 1) + " has shape " +
                       std::to_string(l.fan_in()) + "x" + std::to_string(l.fan_out()) +
                       ", expected " + std::to_string(kDnnWidths[i]) + "x" +
                       std::to_string(kDnnWidths[i + 1]));
    }
  }
  if (!params.all_finite()) throw ModelError("model has non-finite parameters");
}

std::size_t dropout_site_count(const ModelParameters& params) {
  // Hidden layers are all but the last; the last hidden output is not dropped.
  return params.layers.size() >= 2 ? params.layers.size() - 2 : 0;
}

DropoutMasks sample_dropout_masks(const ModelParameters& params, Eigen::Index rows, double rate,
                                  Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ModelError("dropout rate must lie in [0, 1)");
  const double keep_scale = 1.0 / (1.0 - rate);
  DropoutMasks out;
  for (std::size_t s = 0; s < dropout_site_count(params); ++s) {
    Eigen::MatrixXd m(rows, params.layers[s].fan_out());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        m(r, c) = rng.uniform() < rate ? 0.0 : keep_scale;
      }
    }
    out.masks.push_back(std::move(m));
  }
  return out;
}

ForwardCache forward(const ModelParameters& params, const Eigen::Ref<const FeatureMatrix>& batch,
                     const DropoutMasks* masks) {
  if (params.layers.empty()) throw ModelError("forward: empty model");
  if (batch.cols() != params.layers.front().fan_in()) {
    throw ModelError("forward: batch has " + std::to_string(batch.cols()) +
                     " columns, model expects " + std::to_string(params.layers.front().fan_in()));
  }
  if (!batch.allFinite()) throw ModelError("forward: non-finite input");
  if (masks && masks->masks.size() != dropout_site_count(params)) {
    throw ModelError("forward: wrong number of dropout masks");
  }

  const auto n_layers = params.layers.size();
  ForwardCache cache;
  cache.pre_activations.reserve(n_layers);
  cache.activations.reserve(n_layers + 1);
  cache.activations.emplace_back(batch);

  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = params.layers[l];
    Eigen::MatrixXd z = cache.activations.back() * layer.weights;
    z.rowwise() += layer.bias.transpose();
    if (l + 1 < n_layers) {
      Eigen::MatrixXd a = z.cwiseMax(0.0);
      if (masks && l < masks->masks.size()) {
        const auto& m = masks->masks[l];
        if (m.rows() != a.rows() || m.cols() != a.cols()) {
          throw ModelError("forward: dropout mask shape mismatch at site " + std::to_string(l));
        }
        a.array() *= m.array();
      }
      cache.activations.push_back(std::move(a));
    } else {
      cache.activations.push_back(
          (1.0 / (1.0 + (-z.array()).exp())).matrix());
    }
    cache.pre_activations.push_back(std::move(z));
  }
  cache.probabilities = cache.activations.back().col(0);
  return cache;
}

Eigen::VectorXd predict(const ModelParameters& params,
                        const Eigen::Ref<const FeatureMatrix>& batch) {
  return forward(params, batch).probabilities;
}

double loss_bce(const Eigen::Ref<const Eigen::VectorXd>& probabilities,
                std::span<const int> labels) {
  if (static_cast<std::size_t>(probabilities.size()) != labels.size()) {
    throw ModelError("loss_bce: length mismatch");
  }
  if (labels.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p =
        std::clamp(probabilities[static_cast<Eigen::Index>(i)], kProbabilityClip,
                   1.0 - kProbabilityClip);
    sum += labels[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  return sum / static_cast<double>(labels.size());
}

GradientSet backward(const ModelParameters& params, const Eigen::Ref<const FeatureMatrix>& batch,
                     std::span<const int> labels, const ForwardCache& cache,
                     const DropoutMasks* masks) {
  const auto n_layers = params.layers.size();
  const auto n = batch.rows();
  if (cache.pre_activations.size() != n_layers || cache.activations.size() != n_layers + 1 ||
      cache.activations.front().rows() != n) {
    throw ModelError("backward: cache does not match parameters/batch");
  }
  if (static_cast<std::size_t>(n) != labels.size()) throw ModelError("backward: label count mismatch");
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (cache.pre_activations[l].cols() != params.layers[l].fan_out()) {
      throw ModelError("backward: cache shape mismatch at layer " + std::to_string(l));
    }
  }

  GradientSet grads{LayerStack::zeros_like(params)};
  Eigen::MatrixXd delta(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    delta(i, 0) = (cache.probabilities[i] - labels[static_cast<std::size_t>(i)]) /
                  static_cast<double>(n);
  }

  for (std::size_t l = n_layers; l-- > 0;) {
    auto& g = grads.layers[l];
    g.weights.noalias() = cache.activations[l].transpose() * delta;
    g.bias = delta.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::MatrixXd upstream = delta * params.layers[l].weights.transpose();
    const auto site = l - 1;
    if (masks && site < masks->masks.size()) upstream.array() *= masks->masks[site].array();
    delta = (cache.pre_activations[l - 1].array() > 0.0).select(upstream, 0.0);
  }
  return grads;
}

OptimizerState OptimizerState::fresh(const ModelParameters& params) {
  return {GradientSet{LayerStack::zeros_like(params)}, GradientSet{LayerStack::zeros_like(params)},
          0};
}

void adam_step(OptimizerState& state, ModelParameters& params, const GradientSet& grads,
               const AdamConstants& k) {
  if (!params.same_shape(grads) || !params.same_shape(state.first_moment) ||
      !params.same_shape(state.second_moment)) {
    throw ModelError("adam_step: shape mismatch");
  }
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(k.beta1, t);
  const double c2 = 1.0 - std::pow(k.beta2, t);

  auto update = [&](auto& w, auto& m, auto& v, const auto& g) {
    m = k.beta1 * m + (1.0 - k.beta1) * g;
    v = k.beta2 * v + (1.0 - k.beta2) * g.cwiseProduct(g);
    w.array() -= k.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + k.epsilon);
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& m = state.first_moment.layers[l];
    auto& v = state.second_moment.layers[l];
    const auto& g = grads.layers[l];
    update(params.layers[l].weights, m.weights, v.weights, g.weights);
    update(params.layers[l].bias, m.bias, v.bias, g.bias);
  }
}

void TrainingConfig::validate() const {
  if (local_epochs < 1) throw ModelError("local epochs must be >= 1");
  if (batch_size < 1) throw ModelError("batch size must be >= 1");
  if (!(learning_rate > 0.0)) throw ModelError("learning rate must be > 0");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ModelError("dropout rate must lie in [0, 1)");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw ModelError("Adam constants out of range");
  }
}

LocalTrainingResult train_local(ModelParameters params, const PreparedDataset& data,
                                const TrainingConfig& config) {
  config.validate();
  if (data.rows() == 0) throw ModelError("train_local: empty dataset");
  if (!params.layers.empty() && static_cast<Eigen::Index>(data.feature_dim()) != params.layers.front().fan_in()) {
    throw ModelError("train_local: dataset has " + std::to_string(data.feature_dim()) +
                     " features, model expects " + std::to_string(params.layers.front().fan_in()));
  }

  const double seconds = measure_time([&] {
    Rng rng(config.seed);
    auto state = OptimizerState::fresh(params);
    const auto adam = config.adam();
    const auto n = data.rows();
    const auto batch_size = static_cast<std::size_t>(config.batch_size);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    FeatureMatrix batch;
    std::vector<int> labels;
    for (int epoch = 0; epoch < config.local_epochs; ++epoch) {
      rng.shuffle(order.begin(), order.end());
      for (std::size_t start = 0; start < n; start += batch_size) {
        const auto rows = std::min(batch_size, n - start);
        batch.resize(static_cast<Eigen::Index>(rows), data.features.cols());
        labels.resize(rows);
        for (std::size_t r = 0; r < rows; ++r) {
          const auto src = order[start + r];
          batch.row(static_cast<Eigen::Index>(r)) = data.features.row(static_cast<Eigen::Index>(src));
          labels[r] = data.labels[src];
        }
        if (config.dropout_rate > 0.0) {
          const auto masks = sample_dropout_masks(params, batch.rows(), config.dropout_rate, rng);
          const auto cache = forward(params, batch, &masks);
          adam_step(state, params, backward(params, batch, labels, cache, &masks), adam);
        } else {
          const auto cache = forward(params, batch);
          adam_step(state, params, backward(params, batch, labels, cache), adam);
        }
      }
    }
  });
  return {std::move(params), seconds};
}

}  // namespace fednids
