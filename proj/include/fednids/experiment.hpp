#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fednids/dataio.hpp"
#include "fednids/federation.hpp"

namespace fednids {

/// Invalid or incomplete experiment configuration (exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scenario { Federated, Centralised, Localised };

std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view text);

struct OrgSource {
  std::string id;
  std::filesystem::path path;
  FlowSchema schema = FlowSchema::netflow_v2();
};

/// Resolved experiment settings. Defaults follow the published setup:
/// E = 3, B = 2048, local lr 0.001, T = 10, server Adam lr 0.05.
struct ExperimentConfig {
  Scenario scenario = Scenario::Federated;
  std::vector<OrgSource> orgs;  // ascending id order
  FederatedConfig federated;    // federated.local holds the training config
  std::optional<std::size_t> subsample_cap = 20000;
  double train_fraction = 0.7;
  std::uint64_t seed = 42;
  std::filesystem::path output_dir = "fednids-out";

  void validate() const;
};

/// Flat `key = value` text, `#` comments, dotted section keys:
///
///   scenario = federated
///   seed = 7
///   org.unsw.path = data/NF-UNSW-NB15-v2.csv
///   federated.rounds = 10
///
/// Unknown keys are errors.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every setting, defaults expanded, in parse_config syntax.
std::map<std::string, std::string> config_entries(const ExperimentConfig& config);
std::string render_config(const ExperimentConfig& config);

/// Stage seeds fanned out from the master seed.
struct StageSeeds {
  std::map<std::string, std::uint64_t> sample;   // per org id, used when capped
  std::map<std::string, std::uint64_t> balance;  // per org id
  std::map<std::string, std::uint64_t> split;    // per org id
  std::uint64_t model = 0;                       // federated/training seed
};
StageSeeds stage_seeds(const ExperimentConfig& config);

/// One (scenario, model, organisation) result block.
struct ReportBlock {
  std::string scenario;
  std::string model = "DNN";
  std::string trained_on;
  std::string evaluated_on;
  EvaluationReport report;
};

/// CSV: round,org_id,accuracy,auc,f1,dr,far,round_time_s; 6 significant
/// digits.
std::string format_round_table(std::span<const RoundReport> reports);
void emit_round_table(std::span<const RoundReport> reports, const std::filesystem::path& path);

/// JSON document with one block per report.
std::string format_final_report(std::span<const ReportBlock> blocks);
void emit_final_report(std::span<const ReportBlock> blocks, const std::filesystem::path& path);

/// Writes `contents` to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

struct PreparedOrganisations {
  std::vector<Organisation> orgs;
  std::map<std::string, double> stage_times_s;
};

/// load -> drop identifiers -> balance -> cap -> split -> local scaling.
PreparedOrganisations prepare_organisations(const ExperimentConfig& config);

/// Runs the configured scenario end to end and writes manifest.json,
/// resolved.cfg, report.json, rounds.csv (federated) and model checkpoints
/// into config.output_dir. Returns 0 on success, 2 for configuration or
/// input errors, 1 for other failures; errors are printed with their stage.
int run_experiment(const ExperimentConfig& config);

std::string_view version();

/// Writes org1.csv .. orgK.csv (NetFlow v2 layout, synthetic flows) and an
/// experiment.cfg naming them into `dir`; returns the config path.
std::filesystem::path write_synthetic_datasets(const std::filesystem::path& dir, int orgs,
                                               std::size_t rows, double separation,
                                               std::uint64_t seed);

}  // namespace fednids
