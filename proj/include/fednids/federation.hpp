#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fednids/dataio.hpp"
#include "fednids/metrics.hpp"
#include "fednids/model.hpp"
#include "fednids/preprocess.hpp"

namespace fednids {

class FederationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One participant. `train`/`test` are scaled with the organisation's own
/// scaler; the unscaled splits are kept for the centralised baseline, which
/// refits a pooled scaler.
struct Organisation {
  std::string id;
  FlowTable raw_train;
  FlowTable raw_test;
  PreparedDataset train;
  PreparedDataset test;

  std::size_t sample_count() const { return train.rows(); }
};

/// Fits the local scaler on `train` and applies it to both splits.
Organisation make_organisation(std::string id, FlowTable train, FlowTable test);

enum class ServerOptimizer {
  Adam,    // Adam step on the pseudo-gradient (global - aggregate)
  Assign,  // global = aggregate, plain FedAvg
};

struct FederatedConfig {
  int rounds = 10;
  double server_learning_rate = 0.05;
  double server_beta1 = 0.9;
  double server_beta2 = 0.999;
  double server_epsilon = 1e-7;
  ServerOptimizer server_optimizer = ServerOptimizer::Adam;
  TrainingConfig local;
  std::uint64_t seed = 0;
  double threshold = kDefaultThreshold;

  void validate() const;
  AdamConstants server_adam() const {
    return {server_learning_rate, server_beta1, server_beta2, server_epsilon};
  }
};

/// What an organisation sends to the server: parameters and a sample count,
/// never data.
struct ClientUpdate {
  std::string org_id;
  ModelParameters params;
  std::size_t sample_count = 0;
  double wall_time_s = 0.0;
};

struct OrgEvaluation {
  std::string org_id;
  EvaluationReport report;
};

struct RoundReport {
  int round_index = 0;  // 1-based
  std::vector<OrgEvaluation> evaluations;
  std::shared_ptr<const ModelParameters> global;
  double wall_time_s = 0.0;  // max client time + server time
};

/// Sample-weighted mean of the client parameters, summed in ascending
/// org_id order so the result does not depend on arrival order.
ModelParameters fedavg_aggregate(std::span<const ClientUpdate> updates);

/// Replaces `global` with the server step toward `aggregated`.
void server_update(ModelParameters& global, const ModelParameters& aggregated,
                   OptimizerState& state, const FederatedConfig& config);

/// Training seed used by organisation `org_id` in round `round` (1-based).
std::uint64_t client_seed(const FederatedConfig& config, int round, const std::string& org_id);

/// Seed for the initial global model, shared by all three scenarios.
std::uint64_t init_seed(std::uint64_t seed);

/// Local Organisation Update: runs on one organisation's data only.
ClientUpdate local_organisation_update(const Organisation& org, const ModelParameters& global,
                                       const TrainingConfig& config);

EvaluationReport evaluate(const ModelParameters& params, const PreparedDataset& data,
                          double threshold = kDefaultThreshold);

/// FedAvg with a server optimizer for config.rounds rounds; the global model
/// is evaluated on every organisation's test split after each round.
std::vector<RoundReport> run_federated(std::span<const Organisation> orgs,
                                       const FederatedConfig& config);

struct CentralisedResult {
  std::vector<OrgEvaluation> evaluations;
  ModelParameters params;
  std::size_t pooled_rows = 0;
  double train_time_s = 0.0;
};

/// Pools every training split (re-scaled with a pooled scaler), trains
/// once, evaluates on each organisation's test split.
CentralisedResult run_centralised(std::span<const Organisation> orgs, const TrainingConfig& config,
                                  double threshold = kDefaultThreshold);

struct LocalisedCell {
  std::string trained_on;
  std::string evaluated_on;
  EvaluationReport report;
};

struct LocalisedResult {
  std::vector<std::vector<LocalisedCell>> grid;  // [trained_on][evaluated_on]
  std::vector<ModelParameters> models;           // one per organisation
};

/// One model per organisation, each evaluated on every organisation's test
/// split as that organisation prepared it (its own local scaler).
LocalisedResult run_localised(std::span<const Organisation> orgs, const TrainingConfig& config,
                              double threshold = kDefaultThreshold);

/// k organisations, each with a benign Gaussian cluster at the origin and
/// an attack cluster `separation` away along its own random direction, in
/// 39 unit-variance dimensions; balanced, split 70/30.
std::vector<Organisation> make_synthetic_orgs(int k, std::size_t n_per_org, double separation,
                                              std::uint64_t seed);

/// Raw NetFlow-v2-schema flows (identifiers included) drawn from the same
/// cluster model, for exercising the file-based pipeline.
FlowTable make_synthetic_flows(std::size_t benign_rows, std::size_t attack_rows, double separation,
                               std::uint64_t seed);

}  // namespace fednids
