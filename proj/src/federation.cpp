#include "fednids/federation.hpp"

#include <algorithm>
#include <future>
#include <numeric>
#include <set>

#include "fednids/random.hpp"

namespace fednids {
namespace {

void check_orgs(std::span<const Organisation> orgs) {
  if (orgs.empty()) throw FederationError("no organisations");
  std::set<std::string> ids;
  for (const auto& org : orgs) {
    if (!ids.insert(org.id).second) throw FederationError("duplicate organisation id '" + org.id + "'");
    if (org.train.rows() == 0) throw FederationError("organisation '" + org.id + "' has no training rows");
    if (org.train.feature_dim() != kRetainedFeatureCount ||
        org.test.feature_dim() != kRetainedFeatureCount) {
      throw FederationError("organisation '" + org.id + "' has " +
                            std::to_string(org.train.feature_dim()) + " features, expected " +
                            std::to_string(kRetainedFeatureCount));
    }
  }
}

std::vector<std::size_t> order_by_id(std::span<const Organisation> orgs) {
  std::vector<std::size_t> order(orgs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return orgs[a].id < orgs[b].id; });
  return order;
}

}  // namespace

Organisation make_organisation(std::string id, FlowTable train, FlowTable test) {
  const auto scaler = fit_scaler(train);
  Organisation org;
  org.id = std::move(id);
  org.train = apply_scaler(scaler, train);
  org.test = apply_scaler(scaler, test);
  org.raw_train = std::move(train);
  org.raw_test = std::move(test);
  return org;
}

void FederatedConfig::validate() const {
  if (rounds < 1) throw FederationError("federated rounds must be >= 1");
  if (!(server_learning_rate > 0.0)) throw FederationError("server learning rate must be > 0");
  if (!(server_beta1 >= 0.0 && server_beta1 < 1.0) || !(server_beta2 >= 0.0 && server_beta2 < 1.0) ||
      !(server_epsilon > 0.0)) {
    throw FederationError("server Adam constants out of range");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) throw FederationError("threshold must lie in (0, 1)");
  local.validate();
}

ModelParameters fedavg_aggregate(std::span<const ClientUpdate> updates) {
  if (updates.empty()) throw FederationError("fedavg_aggregate: no updates");
  std::vector<std::size_t> order(updates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return updates[a].org_id < updates[b].org_id; });

  const auto& reference = updates[order.front()].params;
  double total = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& u = updates[order[i]];
    if (i > 0 && u.org_id == updates[order[i - 1]].org_id) {
      throw FederationError("fedavg_aggregate: duplicate organisation id '" + u.org_id + "'");
    }
    if (!u.params.same_shape(reference)) {
      throw FederationError("fedavg_aggregate: parameter shapes differ for '" + u.org_id + "'");
    }
    if (u.sample_count == 0) {
      throw FederationError("fedavg_aggregate: organisation '" + u.org_id + "' reports 0 samples");
    }
    total += static_cast<double>(u.sample_count);
  }
  if (!(total > 0.0)) throw FederationError("fedavg_aggregate: zero total weight");

  ModelParameters out{LayerStack::zeros_like(reference)};
  for (std::size_t l = 0; l < out.layers.size(); ++l) {
    auto& w = out.layers[l].weights;
    auto& b = out.layers[l].bias;
    Eigen::MatrixXd w_lo = reference.layers[l].weights;
    Eigen::MatrixXd w_hi = w_lo;
    Eigen::VectorXd b_lo = reference.layers[l].bias;
    Eigen::VectorXd b_hi = b_lo;
    for (const auto idx : order) {
      const auto& src = updates[idx].params.layers[l];
      const double weight = static_cast<double>(updates[idx].sample_count) / total;
      w += weight * src.weights;
      b += weight * src.bias;
      w_lo = w_lo.cwiseMin(src.weights);
      w_hi = w_hi.cwiseMax(src.weights);
      b_lo = b_lo.cwiseMin(src.bias);
      b_hi = b_hi.cwiseMax(src.bias);
    }
    // A convex combination lies within the client range; clamping removes
    // rounding drift so identical inputs reproduce exactly.
    w = w.cwiseMax(w_lo).cwiseMin(w_hi);
    b = b.cwiseMax(b_lo).cwiseMin(b_hi);
  }
  return out;
}

void server_update(ModelParameters& global, const ModelParameters& aggregated,
                   OptimizerState& state, const FederatedConfig& config) {
  if (!global.same_shape(aggregated)) throw FederationError("server_update: shape mismatch");
  if (config.server_optimizer == ServerOptimizer::Assign) {
    global = aggregated;
    return;
  }
  GradientSet pseudo_gradient{LayerStack::zeros_like(global)};
  for (std::size_t l = 0; l < global.layers.size(); ++l) {
    pseudo_gradient.layers[l].weights = global.layers[l].weights - aggregated.layers[l].weights;
    pseudo_gradient.layers[l].bias = global.layers[l].bias - aggregated.layers[l].bias;
  }
  adam_step(state, global, pseudo_gradient, config.server_adam());
}

std::uint64_t client_seed(const FederatedConfig& config, int round, const std::string& org_id) {
  return derive_seed(config.seed, "round/" + std::to_string(round) + "/org/" + org_id);
}

std::uint64_t init_seed(std::uint64_t seed) { return derive_seed(seed, "init"); }

ClientUpdate local_organisation_update(const Organisation& org, const ModelParameters& global,
                                       const TrainingConfig& config) {
  auto result = train_local(global, org.train, config);
  return {org.id, std::move(result.params), org.sample_count(), result.wall_time_s};
}

EvaluationReport evaluate(const ModelParameters& params, const PreparedDataset& data,
                          double threshold) {
  const auto probabilities = predict(params, data.features);
  return evaluate_predictions(data.labels, probabilities, data.categories, threshold,
                              data.benign_marker);
}

std::vector<RoundReport> run_federated(std::span<const Organisation> orgs,
                                       const FederatedConfig& config) {
  config.validate();
  check_orgs(orgs);

  ModelParameters global = init_model(init_seed(config.seed));
  auto server_state = OptimizerState::fresh(global);
  std::vector<RoundReport> reports;
  reports.reserve(static_cast<std::size_t>(config.rounds));

  for (int round = 1; round <= config.rounds; ++round) {
    // Each client sees the broadcast global model and its own data; only
    // ClientUpdate values come back across this boundary.
    std::vector<std::future<ClientUpdate>> pending;
    pending.reserve(orgs.size());
    for (const auto& org : orgs) {
      TrainingConfig local = config.local;
      local.seed = client_seed(config, round, org.id);
      pending.push_back(std::async(orgs.size() > 1 ? std::launch::async : std::launch::deferred,
                                   [&org, &global, local] {
                                     return local_organisation_update(org, global, local);
                                   }));
    }
    std::vector<ClientUpdate> updates;
    updates.reserve(orgs.size());
    double slowest_client = 0.0;
    for (auto& f : pending) {
      updates.push_back(f.get());
      slowest_client = std::max(slowest_client, updates.back().wall_time_s);
    }

    const double server_time = measure_time([&] {
      const auto aggregated = fedavg_aggregate(updates);
      server_update(global, aggregated, server_state, config);
    });

    RoundReport report;
    report.round_index = round;
    report.global = std::make_shared<const ModelParameters>(global);
    report.wall_time_s = slowest_client + server_time;
    for (const auto& org : orgs) {
      report.evaluations.push_back({org.id, evaluate(global, org.test, config.threshold)});
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

CentralisedResult run_centralised(std::span<const Organisation> orgs, const TrainingConfig& config,
                                  double threshold) {
  config.validate();
  check_orgs(orgs);

  std::vector<const FlowTable*> tables;
  for (const auto idx : order_by_id(orgs)) tables.push_back(&orgs[idx].raw_train);
  const auto pooled = concatenate(tables);
  const auto scaler = fit_scaler(pooled);
  const auto data = apply_scaler(scaler, pooled);

  auto trained = train_local(init_model(init_seed(config.seed)), data, config);
  CentralisedResult result;
  result.pooled_rows = data.rows();
  result.train_time_s = trained.wall_time_s;
  for (const auto& org : orgs) {
    auto report = evaluate(trained.params, apply_scaler(scaler, org.raw_test), threshold);
    report.train_time_s = trained.wall_time_s;
    result.evaluations.push_back({org.id, std::move(report)});
  }
  result.params = std::move(trained.params);
  return result;
}

LocalisedResult run_localised(std::span<const Organisation> orgs, const TrainingConfig& config,
                              double threshold) {
  config.validate();
  check_orgs(orgs);

  const auto initial = init_model(init_seed(config.seed));
  LocalisedResult result;
  for (const auto& source : orgs) {
    auto trained = train_local(initial, source.train, config);
    std::vector<LocalisedCell> row;
    for (const auto& target : orgs) {
      auto report = evaluate(trained.params, target.test, threshold);
      report.train_time_s = trained.wall_time_s;
      row.push_back({source.id, target.id, std::move(report)});
    }
    result.grid.push_back(std::move(row));
    result.models.push_back(std::move(trained.params));
  }
  return result;
}

}  // namespace fednids
