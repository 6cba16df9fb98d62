#include "fednids/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <system_error>

#include <json.hpp>

#include "fednids/preprocess.hpp"
#include "fednids/random.hpp"

#ifndef FEDNIDS_VERSION
#define FEDNIDS_VERSION "0.0.0"
#endif

namespace fednids {
namespace {

using json = nlohmann::ordered_json;

std::string sig6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Error wrapper carrying the pipeline stage and the exit status to use.
struct StageFailure {
  std::string stage;
  std::string message;
  int status;
};

json report_json(const ReportBlock& b) {
  const auto& r = b.report;
  json per_category = json::object();
  for (const auto& [name, dr] : r.per_category.rates) per_category[name] = dr;
  return {
      {"scenario", b.scenario},
      {"model", b.model},
      {"trained_on", b.trained_on},
      {"evaluated_on", b.evaluated_on},
      {"accuracy", r.accuracy},
      {"auc", r.auc},
      {"f1", r.f1},
      {"detection_rate", r.detection_rate},
      {"false_alarm_rate", r.false_alarm_rate},
      {"train_time_s", r.train_time_s},
      {"confusion",
       {{"tp", r.confusion.tp}, {"tn", r.confusion.tn}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn}}},
      {"per_category_dr", per_category},
      {"per_category_average", r.per_category.average},
  };
}

void check_category_average(const ReportBlock& b) {
  const auto& pc = b.report.per_category;
  if (pc.rates.empty()) return;
  double sum = 0.0;
  for (const auto& [name, dr] : pc.rates) sum += dr;
  const double mean = sum / static_cast<double>(pc.rates.size());
  if (std::abs(mean - pc.average) > 1e-9) {
    throw std::logic_error("report for '" + b.evaluated_on +
                           "': per-category average disagrees with its categories");
  }
}

}  // namespace

std::string_view version() { return FEDNIDS_VERSION; }

std::filesystem::path write_synthetic_datasets(const std::filesystem::path& dir, int orgs,
                                               std::size_t rows, double separation,
                                               std::uint64_t seed) {
  if (orgs < 1 || rows < 4) throw std::invalid_argument("synthetic datasets need >= 1 org and >= 4 rows");
  std::filesystem::create_directories(dir);
  std::string cfg = "scenario = federated\nseed = " + std::to_string(seed) + "\n";
  for (int k = 1; k <= orgs; ++k) {
    const auto id = "org" + std::to_string(k);
    const auto table =
        make_synthetic_flows(rows / 2, rows - rows / 2, separation, derive_seed(seed, "synth/" + id));
    write_flow_table(table, dir / (id + ".csv"));
    cfg += "org." + id + ".path = " + id + ".csv\n";
  }
  write_file_atomic(dir / "experiment.cfg", cfg);
  return dir / "experiment.cfg";
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move '" + tmp.string() + "' to '" + path.string() +
                             "': " + ec.message());
  }
}

std::string format_round_table(std::span<const RoundReport> reports) {
  if (reports.empty()) throw std::invalid_argument("round table: no reports");
  std::string out = "round,org_id,accuracy,auc,f1,dr,far,round_time_s\n";
  for (const auto& round : reports) {
    for (const auto& e : round.evaluations) {
      const auto& r = e.report;
      out += std::to_string(round.round_index) + ',' + e.org_id + ',' + sig6(r.accuracy) + ',' +
             sig6(r.auc) + ',' + sig6(r.f1) + ',' + sig6(r.detection_rate) + ',' +
             sig6(r.false_alarm_rate) + ',' + sig6(round.wall_time_s) + '\n';
    }
  }
  return out;
}

void emit_round_table(std::span<const RoundReport> reports, const std::filesystem::path& path) {
  write_file_atomic(path, format_round_table(reports));
}

std::string format_final_report(std::span<const ReportBlock> blocks) {
  if (blocks.empty()) throw std::invalid_argument("final report: no blocks");
  json doc;
  doc["format"] = "fednids-report/1";
  doc["blocks"] = json::array();
  for (const auto& b : blocks) {
    check_category_average(b);
    doc["blocks"].push_back(report_json(b));
  }
  return doc.dump(2) + "\n";
}

void emit_final_report(std::span<const ReportBlock> blocks, const std::filesystem::path& path) {
  write_file_atomic(path, format_final_report(blocks));
}

PreparedOrganisations prepare_organisations(const ExperimentConfig& config) {
  const auto seeds = stage_seeds(config);
  PreparedOrganisations out;
  for (const auto& src : config.orgs) {
    FlowTable raw;
    out.stage_times_s["load/" + src.id] =
        measure_time([&] {
          // With a cap, only cap/2 rows per class can survive balancing, so a
          // per-class reservoir keeps memory bounded on very large captures.
          raw = config.subsample_cap
                    ? load_flow_table_sampled(src.path, src.schema, *config.subsample_cap / 2,
                                              seeds.sample.at(src.id))
                    : load_flow_table(src.path, src.schema);
          raw = drop_identifiers(raw);
        });
    out.stage_times_s["preprocess/" + src.id] = measure_time([&] {
      auto balanced = balance_classes(raw, seeds.balance.at(src.id));
      if (config.subsample_cap) balanced = cap_balanced(balanced, *config.subsample_cap);
      auto split = split_train_test(balanced, config.train_fraction, seeds.split.at(src.id));
      out.orgs.push_back(make_organisation(src.id, std::move(split.train), std::move(split.test)));
    });
  }
  return out;
}

int run_experiment(const ExperimentConfig& config) {
  std::string stage = "config";
  try {
    try {
      config.validate();
      for (const auto& o : config.orgs) {
        if (!std::filesystem::is_regular_file(o.path)) {
          throw ConfigError("dataset for organisation '" + o.id + "' not found: " + o.path.string());
        }
      }
    } catch (const ConfigError& e) {
      throw StageFailure{stage, e.what(), 2};
    }

    stage = "output";
    std::filesystem::create_directories(config.output_dir);

    stage = "prepare";
    PreparedOrganisations prepared;
    try {
      prepared = prepare_organisations(config);
    } catch (const DataError& e) {
      throw StageFailure{stage, e.what(), 2};
    }
    const auto& orgs = prepared.orgs;
    auto stage_times = prepared.stage_times_s;

    const auto seeds = stage_seeds(config);
    FederatedConfig fed = config.federated;
    fed.seed = seeds.model;
    fed.local.seed = seeds.model;

    const auto scenario = std::string(to_string(config.scenario));
    std::vector<ReportBlock> blocks;
    stage = scenario;
    switch (config.scenario) {
      case Scenario::Federated: {
        std::vector<RoundReport> rounds;
        stage_times["train"] = measure_time([&] { rounds = run_federated(orgs, fed); });
        double total_time = 0.0;
        for (const auto& r : rounds) total_time += r.wall_time_s;
        for (const auto& e : rounds.back().evaluations) {
          auto report = e.report;
          report.train_time_s = total_time;
          blocks.push_back({scenario, "DNN", "federation", e.org_id, std::move(report)});
        }
        stage = "write";
        emit_round_table(rounds, config.output_dir / "rounds.csv");
        const auto bytes = serialize_parameters(*rounds.back().global);
        write_file_atomic(config.output_dir / "model.ckpt",
                          {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
        break;
      }
      case Scenario::Centralised: {
        CentralisedResult result;
        stage_times["train"] = measure_time([&] { result = run_centralised(orgs, fed.local, fed.threshold); });
        for (const auto& e : result.evaluations) {
          blocks.push_back({scenario, "DNN", "pooled", e.org_id, e.report});
        }
        stage = "write";
        const auto bytes = serialize_parameters(result.params);
        write_file_atomic(config.output_dir / "model.ckpt",
                          {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
        break;
      }
      case Scenario::Localised: {
        LocalisedResult result;
        stage_times["train"] = measure_time([&] { result = run_localised(orgs, fed.local, fed.threshold); });
        for (const auto& row : result.grid) {
          for (const auto& cell : row) {
            blocks.push_back({scenario, "DNN", cell.trained_on, cell.evaluated_on, cell.report});
          }
        }
        stage = "write";
        for (std::size_t i = 0; i < orgs.size(); ++i) {
          const auto bytes = serialize_parameters(result.models[i]);
          write_file_atomic(config.output_dir / ("model_" + orgs[i].id + ".ckpt"),
                            {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
        }
        break;
      }
    }

    stage = "write";
    emit_final_report(blocks, config.output_dir / "report.json");
    write_file_atomic(config.output_dir / "resolved.cfg", render_config(config));

    json manifest;
    manifest["software"] = "fednids " + std::string(version());
    manifest["config"] = config_entries(config);
    json seed_doc;
    seed_doc["master"] = config.seed;
    if (config.subsample_cap) seed_doc["sample"] = seeds.sample;
    seed_doc["balance"] = seeds.balance;
    seed_doc["split"] = seeds.split;
    seed_doc["model"] = seeds.model;
    manifest["seeds"] = seed_doc;
    json rows = json::object();
    for (const auto& o : orgs) {
      rows[o.id] = {{"train", o.train.rows()}, {"test", o.test.rows()}};
    }
    manifest["rows"] = rows;
    manifest["stage_times_s"] = stage_times;
    write_file_atomic(config.output_dir / "manifest.json", manifest.dump(2) + "\n");
    return 0;
  } catch (const StageFailure& f) {
    std::cerr << "fednids: " << f.stage << ": " << f.message << '\n';
    return f.status;
  } catch (const std::exception& e) {
    std::cerr << "fednids: " << stage << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace fednids
