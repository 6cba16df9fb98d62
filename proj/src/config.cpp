#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fednids/experiment.hpp"
#include "fednids/random.hpp"

namespace fednids {
namespace {

std::string_view strip(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  while (true) {
    const auto pos = s.find(',');
    const auto item = strip(s.substr(0, pos));
    if (!item.empty()) out.emplace_back(item);
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& i : items) {
    if (!out.empty()) out += ',';
    out += i;
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_integer(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + std::string(key) + "': '" + std::string(value) +
                      "' is not an integer");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + std::string(key) + "': '" + std::string(value) +
                      "' is not a number");
  }
  return out;
}

ServerOptimizer parse_server_optimizer(std::string_view value) {
  if (value == "adam") return ServerOptimizer::Adam;
  if (value == "assign") return ServerOptimizer::Assign;
  throw ConfigError("federated.server_optimizer must be 'adam' or 'assign', got '" +
                    std::string(value) + "'");
}

OrgSource& org_entry(ExperimentConfig& cfg, const std::string& id) {
  for (auto& o : cfg.orgs) {
    if (o.id == id) return o;
  }
  cfg.orgs.push_back({id, {}, FlowSchema::netflow_v2()});
  return cfg.orgs.back();
}

void apply_org_key(ExperimentConfig& cfg, std::string_view key, std::string_view value,
                   const std::filesystem::path& base_dir) {
  // org.<id>.<field>; ids may not contain dots.
  const auto rest = key.substr(4);
  const auto dot = rest.find('.');
  if (dot == std::string_view::npos || dot == 0) {
    throw ConfigError("config key '" + std::string(key) + "': expected org.<id>.<field>");
  }
  const std::string id(rest.substr(0, dot));
  const auto field = rest.substr(dot + 1);
  auto& org = org_entry(cfg, id);
  if (field == "path") {
    std::filesystem::path p{std::string(value)};
    org.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  } else if (field == "label_column") {
    org.schema.label_column = value;
  } else if (field == "category_column") {
    org.schema.category_column = value;
  } else if (field == "benign_marker") {
    org.schema.benign_marker = value;
  } else if (field == "identifiers") {
    org.schema.identifier_names = split_list(value);
  } else if (field == "features") {
    org.schema.feature_names = split_list(value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::Federated: return "federated";
    case Scenario::Centralised: return "centralised";
    case Scenario::Localised: return "localised";
  }
  return "?";
}

Scenario parse_scenario(std::string_view text) {
  if (text == "federated") return Scenario::Federated;
  if (text == "centralised" || text == "centralized") return Scenario::Centralised;
  if (text == "localised" || text == "localized") return Scenario::Localised;
  throw ConfigError("unknown scenario '" + std::string(text) +
                    "' (expected federated, centralised or localised)");
}

void ExperimentConfig::validate() const {
  if (orgs.empty()) throw ConfigError("config defines no organisations (org.<id>.path)");
  for (const auto& o : orgs) {
    if (o.path.empty()) throw ConfigError("organisation '" + o.id + "' has no path");
    try {
      o.schema.validate();
    } catch (const DataError& e) {
      throw ConfigError("organisation '" + o.id + "': " + e.what());
    }
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1)");
  }
  if (subsample_cap && *subsample_cap < 4) throw ConfigError("subsample_cap must be >= 4");
  try {
    federated.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = strip(line.substr(0, eq));
    const auto value = strip(line.substr(eq + 1));
    const std::string k(key);

    if (k == "scenario") cfg.scenario = parse_scenario(value);
    else if (k == "seed") cfg.seed = parse_integer<std::uint64_t>(k, value);
    else if (k == "output_dir") cfg.output_dir = std::string(value);
    else if (k == "subsample_cap") {
      if (value == "none" || value == "0") cfg.subsample_cap.reset();
      else cfg.subsample_cap = parse_integer<std::size_t>(k, value);
    }
    else if (k == "train_fraction") cfg.train_fraction = parse_real(k, value);
    else if (k == "threshold") cfg.federated.threshold = parse_real(k, value);
    else if (k == "local.epochs") cfg.federated.local.local_epochs = parse_integer<int>(k, value);
    else if (k == "local.batch_size") cfg.federated.local.batch_size = parse_integer<int>(k, value);
    else if (k == "local.learning_rate") cfg.federated.local.learning_rate = parse_real(k, value);
    else if (k == "local.beta1") cfg.federated.local.beta1 = parse_real(k, value);
    else if (k == "local.beta2") cfg.federated.local.beta2 = parse_real(k, value);
    else if (k == "local.epsilon") cfg.federated.local.epsilon = parse_real(k, value);
    else if (k == "local.dropout_rate") cfg.federated.local.dropout_rate = parse_real(k, value);
    else if (k == "federated.rounds") cfg.federated.rounds = parse_integer<int>(k, value);
    else if (k == "federated.server_optimizer") cfg.federated.server_optimizer = parse_server_optimizer(value);
    else if (k == "federated.server_learning_rate") cfg.federated.server_learning_rate = parse_real(k, value);
    else if (k == "federated.server_beta1") cfg.federated.server_beta1 = parse_real(k, value);
    else if (k == "federated.server_beta2") cfg.federated.server_beta2 = parse_real(k, value);
    else if (k == "federated.server_epsilon") cfg.federated.server_epsilon = parse_real(k, value);
    else if (k.starts_with("org.")) apply_org_key(cfg, k, value, base_dir);
    else throw ConfigError("unknown config key '" + k + "' on line " + std::to_string(line_no));
  }
  std::sort(cfg.orgs.begin(), cfg.orgs.end(),
            [](const OrgSource& a, const OrgSource& b) { return a.id < b.id; });
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::map<std::string, std::string> config_entries(const ExperimentConfig& cfg) {
  const auto& f = cfg.federated;
  const auto& l = f.local;
  std::map<std::string, std::string> e;
  e["scenario"] = std::string(to_string(cfg.scenario));
  e["seed"] = std::to_string(cfg.seed);
  e["output_dir"] = cfg.output_dir.string();
  e["subsample_cap"] = cfg.subsample_cap ? std::to_string(*cfg.subsample_cap) : "none";
  e["train_fraction"] = format_double(cfg.train_fraction);
  e["threshold"] = format_double(f.threshold);
  e["local.epochs"] = std::to_string(l.local_epochs);
  e["local.batch_size"] = std::to_string(l.batch_size);
  e["local.learning_rate"] = format_double(l.learning_rate);
  e["local.beta1"] = format_double(l.beta1);
  e["local.beta2"] = format_double(l.beta2);
  e["local.epsilon"] = format_double(l.epsilon);
  e["local.dropout_rate"] = format_double(l.dropout_rate);
  e["federated.rounds"] = std::to_string(f.rounds);
  e["federated.server_optimizer"] = f.server_optimizer == ServerOptimizer::Adam ? "adam" : "assign";
  e["federated.server_learning_rate"] = format_double(f.server_learning_rate);
  e["federated.server_beta1"] = format_double(f.server_beta1);
  e["federated.server_beta2"] = format_double(f.server_beta2);
  e["federated.server_epsilon"] = format_double(f.server_epsilon);
  for (const auto& o : cfg.orgs) {
    const auto prefix = "org." + o.id + ".";
    e[prefix + "path"] = o.path.string();
    e[prefix + "label_column"] = o.schema.label_column;
    e[prefix + "category_column"] = o.schema.category_column;
    e[prefix + "benign_marker"] = o.schema.benign_marker;
    e[prefix + "identifiers"] = join_list(o.schema.identifier_names);
    e[prefix + "features"] = join_list(o.schema.feature_names);
  }
  return e;
}

std::string render_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [k, v] : config_entries(config)) out += k + " = " + v + "\n";
  return out;
}

StageSeeds stage_seeds(const ExperimentConfig& config) {
  StageSeeds s;
  for (const auto& o : config.orgs) {
    s.sample[o.id] = derive_seed(config.seed, "sample/" + o.id);
    s.balance[o.id] = derive_seed(config.seed, "balance/" + o.id);
    s.split[o.id] = derive_seed(config.seed, "split/" + o.id);
  }
  s.model = derive_seed(config.seed, "model");
  return s;
}

}  // namespace fednids
