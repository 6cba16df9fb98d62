#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "fednids/random.hpp"
#include "fednids/experiment.hpp"

namespace fednids::testing {
namespace {

// Layer-by-layer evaluation; `hidden` collects pre-activations if non-null.
std::vector<double> run_reference(const ModelParameters& params, const FeatureMatrix& batch,
                                  std::vector<double>* hidden) {
  std::vector<double> out;
  const auto n_layers = params.layers.size();
  for (Eigen::Index r = 0; r < batch.rows(); ++r) {
    std::vector<long double> a(static_cast<std::size_t>(batch.cols()));
    for (Eigen::Index c = 0; c < batch.cols(); ++c) a[static_cast<std::size_t>(c)] = batch(r, c);
    for (std::size_t l = 0; l < n_layers; ++l) {
      const auto& w = params.layers[l].weights;
      const auto& b = params.layers[l].bias;
      std::vector<long double> z(static_cast<std::size_t>(w.cols()));
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        long double s = b[j];
        for (Eigen::Index i = 0; i < w.rows(); ++i) s += a[static_cast<std::size_t>(i)] * w(i, j);
        z[static_cast<std::size_t>(j)] = s;
      }
      if (l + 1 < n_layers) {
        for (auto& v : z) {
          if (hidden) hidden->push_back(static_cast<double>(v));
          v = v > 0 ? v : 0;
        }
      } else {
        for (auto& v : z) v = 1.0L / (1.0L + std::exp(-v));
      }
      a = std::move(z);
    }
    out.push_back(static_cast<double>(a[0]));
  }
  return out;
}

}  // namespace

std::vector<double> reference_forward(const ModelParameters& params, const FeatureMatrix& batch) {
  return run_reference(params, batch, nullptr);
}

std::vector<double> reference_hidden_preactivations(const ModelParameters& params,
                                                    const FeatureMatrix& batch) {
  std::vector<double> hidden;
  run_reference(params, batch, &hidden);
  return hidden;
}

double reference_bce(std::span<const double> probabilities, std::span<const int> labels) {
  long double sum = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const long double p = std::clamp<long double>(probabilities[i], 1e-7L, 1.0L - 1e-7L);
    sum -= labels[i] == 1 ? std::log(p) : std::log(1.0L - p);
  }
  return static_cast<double>(sum / static_cast<long double>(labels.size()));
}

std::vector<double> finite_difference_gradient(const ModelParameters& params,
                                               const FeatureMatrix& batch,
                                               std::span<const int> labels, double step) {
  auto flat = params.flatten();
  ModelParameters probe = params;
  auto loss_at = [&](const std::vector<double>& values) {
    probe.assign_flat(values);
    return reference_bce(reference_forward(probe, batch), labels);
  };
  std::vector<double> grad(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double saved = flat[i];
    flat[i] = saved + step;
    const double up = loss_at(flat);
    flat[i] = saved - step;
    const double down = loss_at(flat);
    flat[i] = saved;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

std::vector<double> brute_force_fedavg(std::span<const ClientUpdate> updates) {
  long double total = 0;
  for (const auto& u : updates) total += static_cast<long double>(u.sample_count);
  std::vector<long double> acc(updates.front().params.parameter_count(), 0.0L);
  for (const auto& u : updates) {
    const auto flat = u.params.flatten();
    const long double w = static_cast<long double>(u.sample_count) / total;
    for (std::size_t i = 0; i < flat.size(); ++i) acc[i] += w * flat[i];
  }
  return {acc.begin(), acc.end()};
}

double pairwise_auc(std::span<const int> labels, std::span<const double> scores) {
  // Counts are whole or half integers, exact in double; one final division.
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1;
      if (scores[i] > scores[j]) wins += 1;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

ModelParameters random_parameters(std::span<const int> widths, double scale, Rng& rng) {
  ModelParameters p;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer{Eigen::MatrixXd(widths[l], widths[l + 1]), Eigen::VectorXd(widths[l + 1])};
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
      layer.weights.data()[i] = rng.uniform(-scale, scale);
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = rng.uniform(-scale, scale);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

FeatureMatrix random_batch(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  FeatureMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform();
  return m;
}

FlowTable small_flow_table(std::size_t benign, std::size_t attack, std::uint64_t seed,
                           std::vector<std::string> attack_categories) {
  auto schema = FlowSchema::netflow_v2();
  const auto n = benign + attack;
  Rng rng(seed);
  FeatureMatrix features(static_cast<Eigen::Index>(n),
                         static_cast<Eigen::Index>(schema.feature_names.size()));
  std::vector<int> labels;
  std::vector<std::string> categories;
  for (std::size_t i = 0; i < n; ++i) {
    const bool is_attack = i >= benign;
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      features(static_cast<Eigen::Index>(i), c) =
          std::floor(rng.uniform(0.0, 1000.0)) + (is_attack ? 500.0 : 0.0);
    }
    labels.push_back(is_attack ? 1 : 0);
    categories.push_back(is_attack ? attack_categories[(i - benign) % attack_categories.size()]
                                   : schema.benign_marker);
  }
  return make_flow_table(std::move(schema), std::move(features), std::move(labels),
                         std::move(categories));
}

FlowTable single_column_table(std::vector<double> values, std::vector<int> labels) {
  FlowSchema schema;
  schema.feature_names = {"x"};
  FeatureMatrix features(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) features(static_cast<Eigen::Index>(i), 0) = values[i];
  std::vector<std::string> categories;
  for (const int y : labels) categories.push_back(y == 1 ? "Attack" : "Benign");
  return make_flow_table(std::move(schema), std::move(features), std::move(labels),
                         std::move(categories));
}

TempDir::TempDir(const std::string& tag) {
  static int counter = 0;
  path_ = std::filesystem::temp_directory_path() /
          ("fednids-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace fednids::testing

namespace fednids::testing {

std::filesystem::path write_synthetic_experiment(const std::filesystem::path& dir, int orgs,
                                                 std::size_t rows, double separation,
                                                 std::uint64_t seed, const std::string& settings) {
  std::filesystem::create_directories(dir);
  std::string cfg = settings;
  for (int k = 1; k <= orgs; ++k) {
    const auto id = "org" + std::to_string(k);
    const auto table = make_synthetic_flows(rows / 2, rows - rows / 2, separation,
                                            derive_seed(seed, "synth/" + id));
    write_flow_table(table, dir / (id + ".csv"));
    cfg += "org." + id + ".path = " + id + ".csv\n";
  }
  const auto path = dir / "experiment.cfg";
  std::ofstream(path) << cfg;
  return path;
}

std::string mask_wall_times(const std::filesystem::path& metric_file) {
  const auto text = read_file(metric_file);
  std::string out;
  if (metric_file.extension() == ".csv") {
    // round_time_s is the last column.
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      out += line.substr(0, line.rfind(',')) + ",<time>\n";
    }
    return out;
  }
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    out += line.find("\"train_time_s\"") != std::string::npos ? "<time>" : line;
    out += '\n';
  }
  return out;
}

}  // namespace fednids::testing
