#include "fednids/dataio.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "fednids/random.hpp"

namespace fednids {
namespace {

std::atomic<std::size_t> g_concatenate_calls{0};

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

bool parse_ipv4(std::string_view s, double& out) {
  std::uint32_t value = 0;
  int octets = 0;
  while (octets < 4) {
    unsigned part = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), part);
    if (ec != std::errc{} || part > 255) return false;
    value = (value << 8) | part;
    ++octets;
    s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
    if (octets < 4) {
      if (s.empty() || s.front() != '.') return false;
      s.remove_prefix(1);
    }
  }
  if (!s.empty()) return false;
  out = static_cast<double>(value);
  return true;
}

void check_table(const FlowTable& t) {
  const auto n = t.labels.size();
  if (static_cast<std::size_t>(t.features.rows()) != n || t.categories.size() != n) {
    throw DataError("flow table: feature, label and category counts differ");
  }
  if (t.feature_dim() != t.schema.feature_names.size()) {
    throw DataError("flow table: feature matrix has " + std::to_string(t.feature_dim()) +
                    " columns but schema lists " +
                    std::to_string(t.schema.feature_names.size()));
  }
  if (!t.features.allFinite()) throw DataError("flow table: non-finite feature value");
  for (std::size_t i = 0; i < n; ++i) {
    const int y = t.labels[i];
    if (y != 0 && y != 1) {
      throw DataError("flow table: row " + std::to_string(i) + " has label " +
                      std::to_string(y) + " (expected 0 or 1)");
    }
    if ((y == 0) != (t.categories[i] == t.schema.benign_marker)) {
      throw DataError("flow table: row " + std::to_string(i) + " label " + std::to_string(y) +
                      " disagrees with category '" + t.categories[i] + "'");
    }
  }
}

}  // namespace

FlowSchema FlowSchema::netflow_v2() {
  FlowSchema s;
  s.feature_names = {
      "IPV4_SRC_ADDR",
      "L4_SRC_PORT",
      "IPV4_DST_ADDR",
      "L4_DST_PORT",
      "PROTOCOL",
      "L7_PROTO",
      "IN_BYTES",
      "IN_PKTS",
      "OUT_BYTES",
      "OUT_PKTS",
      "TCP_FLAGS",
      "CLIENT_TCP_FLAGS",
      "SERVER_TCP_FLAGS",
      "FLOW_DURATION_MILLISECONDS",
      "DURATION_IN",
      "DURATION_OUT",
      "MIN_TTL",
      "MAX_TTL",
      "LONGEST_FLOW_PKT",
      "SHORTEST_FLOW_PKT",
      "MIN_IP_PKT_LEN",
      "MAX_IP_PKT_LEN",
      "SRC_TO_DST_SECOND_BYTES",
      "DST_TO_SRC_SECOND_BYTES",
      "RETRANSMITTED_IN_BYTES",
      "RETRANSMITTED_IN_PKTS",
      "RETRANSMITTED_OUT_BYTES",
      "RETRANSMITTED_OUT_PKTS",
      "SRC_TO_DST_AVG_THROUGHPUT",
      "DST_TO_SRC_AVG_THROUGHPUT",
      "NUM_PKTS_UP_TO_128_BYTES",
      "NUM_PKTS_128_TO_256_BYTES",
      "NUM_PKTS_256_TO_512_BYTES",
      "NUM_PKTS_512_TO_1024_BYTES",
      "NUM_PKTS_1024_TO_1514_BYTES",
      "TCP_WIN_MAX_IN",
      "TCP_WIN_MAX_OUT",
      "ICMP_TYPE",
      "ICMP_IPV4_TYPE",
      "DNS_QUERY_ID",
      "DNS_QUERY_TYPE",
      "DNS_TTL_ANSWER",
      "FTP_COMMAND_RET_CODE",
  };
  s.identifier_names = {"IPV4_SRC_ADDR", "L4_SRC_PORT", "IPV4_DST_ADDR", "L4_DST_PORT"};
  return s;
}

std::vector<std::string> FlowSchema::retained_features() const {
  std::vector<std::string> out;
  out.reserve(feature_names.size());
  for (const auto& f : feature_names) {
    if (std::find(identifier_names.begin(), identifier_names.end(), f) == identifier_names.end()) {
      out.push_back(f);
    }
  }
  return out;
}

void FlowSchema::validate(std::size_t retained_dim) const {
  const std::set<std::string> unique(feature_names.begin(), feature_names.end());
  if (unique.size() != feature_names.size()) throw DataError("schema: duplicate feature name");
  if (!identifier_names.empty() && identifier_names.size() != kIdentifierCount) {
    throw DataError("schema: expected " + std::to_string(kIdentifierCount) +
                    " identifier columns, got " + std::to_string(identifier_names.size()));
  }
  for (const auto& id : identifier_names) {
    if (!unique.contains(id)) throw DataError("schema: identifier '" + id + "' is not a feature");
  }
  const auto retained = retained_features().size();
  if (retained != retained_dim) {
    throw DataError("schema: " + std::to_string(retained) + " retained features, expected " +
                    std::to_string(retained_dim));
  }
  if (unique.contains(label_column) || unique.contains(category_column)) {
    throw DataError("schema: label/category column listed as a feature");
  }
  if (label_column == category_column) throw DataError("schema: label and category coincide");
}

FlowTable FlowTable::select_rows(std::span<const std::size_t> indices) const {
  FlowTable out;
  out.schema = schema;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
  out.labels.reserve(indices.size());
  out.categories.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = indices[r];
    if (src >= rows()) throw DataError("select_rows: index out of range");
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(src));
    out.labels.push_back(labels[src]);
    out.categories.push_back(categories[src]);
  }
  return out;
}

bool FlowTable::operator==(const FlowTable& other) const {
  return schema == other.schema && features.rows() == other.features.rows() &&
         features.cols() == other.features.cols() && features == other.features &&
         labels == other.labels && categories == other.categories;
}

FlowTable make_flow_table(FlowSchema schema, FeatureMatrix features, std::vector<int> labels,
                          std::vector<std::string> categories) {
  FlowTable t{std::move(schema), std::move(features), std::move(labels), std::move(categories)};
  check_table(t);
  return t;
}

namespace {

/// Column positions resolved from a header row against a schema.
class CsvReader {
 public:
  CsvReader(const std::filesystem::path& path, const FlowSchema& schema)
      : path_(path), schema_(schema), in_(path) {
    if (!in_) throw DataError("cannot open dataset '" + path.string() + "'");
    std::string line;
    if (!std::getline(in_, line)) throw DataError("'" + path.string() + "': empty file");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    resolve_header(split_fields(line));
  }

  /// Next non-blank data row, split into fields; false at end of file.
  bool next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (trim(line_).empty()) continue;
      fields = split_fields(line_);
      if (fields.size() != header_size_) {
        throw DataError(where() + ": expected " + std::to_string(header_size_) + " fields, got " +
                        std::to_string(fields.size()));
      }
      return true;
    }
    return false;
  }

  int parse_label(const std::vector<std::string_view>& fields) const {
    const auto cell = fields[label_pos_];
    if (cell.empty()) throw DataError(where() + ": missing label");
    if (fields[category_pos_].empty()) throw DataError(where() + ": missing category");
    double label = 0.0;
    if (!parse_double(cell, label) || (label != 0.0 && label != 1.0)) {
      throw DataError(where() + ", column " + schema_.label_column + ": label '" +
                      std::string(cell) + "' is not 0 or 1");
    }
    return static_cast<int>(label);
  }

  std::string_view category(const std::vector<std::string_view>& fields) const {
    return fields[category_pos_];
  }

  void parse_features(const std::vector<std::string_view>& fields, double* out) const {
    for (std::size_t j = 0; j < feature_pos_.size(); ++j) {
      const auto cell = fields[feature_pos_[j]];
      double v = 0.0;
      const bool ok = parse_double(cell, v) || (is_identifier_[j] && parse_ipv4(cell, v));
      if (!ok || !std::isfinite(v)) {
        throw DataError(where() + ", column " + schema_.feature_names[j] + ": cannot parse '" +
                        std::string(cell) + "' as a finite number");
      }
      out[j] = v;
    }
  }

  std::size_t feature_count() const { return feature_pos_.size(); }

  FlowTable finish(std::vector<double>& values, std::vector<int> labels,
                   std::vector<std::string> categories) const {
    FeatureMatrix features =
        Eigen::Map<FeatureMatrix>(values.data(), static_cast<Eigen::Index>(labels.size()),
                                  static_cast<Eigen::Index>(feature_count()));
    try {
      return make_flow_table(schema_, std::move(features), std::move(labels),
                             std::move(categories));
    } catch (const DataError& e) {
      throw DataError("'" + path_.string() + "': " + e.what());
    }
  }

 private:
  std::string where() const { return "'" + path_.string() + "' line " + std::to_string(line_no_); }

  void resolve_header(const std::vector<std::string_view>& header) {
    header_size_ = header.size();
    std::vector<std::string> expected = schema_.feature_names;
    expected.push_back(schema_.label_column);
    expected.push_back(schema_.category_column);

    std::unordered_map<std::string, std::size_t> position;
    std::vector<std::string> unexpected;
    for (std::size_t i = 0; i < header.size(); ++i) {
      const std::string name(header[i]);
      if (!position.emplace(name, i).second) {
        throw DataError("'" + path_.string() + "': duplicate header column " + name);
      }
      if (std::find(expected.begin(), expected.end(), name) == expected.end()) {
        unexpected.push_back(name);
      }
    }
    std::vector<std::string> missing;
    for (const auto& name : expected) {
      if (!position.contains(name)) missing.push_back(name);
    }
    if (!missing.empty() || !unexpected.empty()) {
      std::string msg = "'" + path_.string() + "': header does not match schema";
      if (!missing.empty()) msg += "; missing columns: " + join(missing);
      if (!unexpected.empty()) msg += "; unexpected columns: " + join(unexpected);
      throw DataError(msg);
    }

    for (const auto& name : schema_.feature_names) {
      feature_pos_.push_back(position.at(name));
      is_identifier_.push_back(std::find(schema_.identifier_names.begin(),
                                         schema_.identifier_names.end(),
                                         name) != schema_.identifier_names.end());
    }
    label_pos_ = position.at(schema_.label_column);
    category_pos_ = position.at(schema_.category_column);
  }

  std::filesystem::path path_;
  const FlowSchema& schema_;
  std::ifstream in_;
  std::string line_;
  std::size_t line_no_ = 1;
  std::size_t header_size_ = 0;
  std::vector<std::size_t> feature_pos_;
  std::vector<bool> is_identifier_;
  std::size_t label_pos_ = 0;
  std::size_t category_pos_ = 0;
};

}  // namespace

FlowTable load_flow_table(const std::filesystem::path& path, const FlowSchema& schema) {
  CsvReader reader(path, schema);
  const auto width = reader.feature_count();
  std::vector<double> values;
  std::vector<int> labels;
  std::vector<std::string> categories;
  std::vector<std::string_view> fields;
  while (reader.next(fields)) {
    labels.push_back(reader.parse_label(fields));
    categories.emplace_back(reader.category(fields));
    values.resize(values.size() + width);
    reader.parse_features(fields, values.data() + values.size() - width);
  }
  return reader.finish(values, std::move(labels), std::move(categories));
}

FlowTable load_flow_table_sampled(const std::filesystem::path& path, const FlowSchema& schema,
                                  std::size_t per_class_limit, std::uint64_t seed) {
  CsvReader reader(path, schema);
  const auto width = reader.feature_count();
  struct Reservoir {
    std::vector<double> values;
    std::vector<std::string> categories;
    std::size_t seen = 0;
  };
  Reservoir reservoirs[2];
  Rng rng(seed);
  std::vector<std::string_view> fields;
  while (reader.next(fields)) {
    const int label = reader.parse_label(fields);
    auto& r = reservoirs[label];
    ++r.seen;
    std::size_t slot = 0;
    if (r.categories.size() < per_class_limit) {
      slot = r.categories.size();
      r.categories.emplace_back();
      r.values.resize(r.values.size() + width);
    } else {
      // Algorithm R: keep the row with probability limit / seen.
      slot = rng.below(r.seen);
      if (slot >= per_class_limit) continue;
    }
    r.categories[slot] = reader.category(fields);
    reader.parse_features(fields, r.values.data() + slot * width);
  }

  std::vector<double> values;
  std::vector<int> labels;
  std::vector<std::string> categories;
  for (int label = 0; label < 2; ++label) {
    auto& r = reservoirs[label];
    values.insert(values.end(), r.values.begin(), r.values.end());
    labels.insert(labels.end(), r.categories.size(), label);
    categories.insert(categories.end(), std::make_move_iterator(r.categories.begin()),
                      std::make_move_iterator(r.categories.end()));
  }
  return reader.finish(values, std::move(labels), std::move(categories));
}

void write_flow_table(const FlowTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  const auto& s = table.schema;
  for (const auto& f : s.feature_names) out << f << ',';
  out << s.label_column << ',' << s.category_column << '\n';
  char buf[64];
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.features.cols(); ++c) {
      const auto [ptr, ec] =
          std::to_chars(buf, buf + sizeof buf, table.features(static_cast<Eigen::Index>(r), c));
      out.write(buf, ptr - buf);
      out << ',';
    }
    out << table.labels[r] << ',' << table.categories[r] << '\n';
  }
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

FlowTable drop_identifiers(const FlowTable& table) {
  const auto& schema = table.schema;
  if (schema.identifier_names.empty()) {
    throw DataError("drop_identifiers: table has no identifier columns (already stripped?)");
  }
  std::vector<Eigen::Index> keep;
  for (std::size_t j = 0; j < schema.feature_names.size(); ++j) {
    const auto& name = schema.feature_names[j];
    if (std::find(schema.identifier_names.begin(), schema.identifier_names.end(), name) ==
        schema.identifier_names.end()) {
      keep.push_back(static_cast<Eigen::Index>(j));
    }
  }
  for (const auto& id : schema.identifier_names) {
    if (std::find(schema.feature_names.begin(), schema.feature_names.end(), id) ==
        schema.feature_names.end()) {
      throw DataError("drop_identifiers: identifier column '" + id + "' absent");
    }
  }

  FlowTable out;
  out.schema = schema;
  out.schema.feature_names = schema.retained_features();
  out.schema.identifier_names.clear();
  out.features = table.features(Eigen::all, keep);
  out.labels = table.labels;
  out.categories = table.categories;
  return out;
}

ClassCounts class_counts(const FlowTable& table) {
  ClassCounts c;
  for (const int y : table.labels) (y == 1 ? c.attack : c.benign)++;
  return c;
}

FlowTable concatenate(std::span<const FlowTable* const> tables) {
  g_concatenate_calls.fetch_add(1, std::memory_order_relaxed);
  if (tables.empty()) throw DataError("concatenate: no tables");
  const auto& schema = tables.front()->schema;
  Eigen::Index total = 0;
  for (const auto* t : tables) {
    if (!(t->schema.feature_names == schema.feature_names)) {
      throw DataError("concatenate: feature columns differ between tables");
    }
    total += static_cast<Eigen::Index>(t->rows());
  }
  FlowTable out;
  out.schema = schema;
  out.features.resize(total, static_cast<Eigen::Index>(schema.feature_names.size()));
  Eigen::Index row = 0;
  for (const auto* t : tables) {
    out.features.middleRows(row, t->features.rows()) = t->features;
    row += t->features.rows();
    out.labels.insert(out.labels.end(), t->labels.begin(), t->labels.end());
    out.categories.insert(out.categories.end(), t->categories.begin(), t->categories.end());
  }
  return out;
}

namespace audit {
std::size_t concatenate_calls() { return g_concatenate_calls.load(std::memory_order_relaxed); }
}  // namespace audit

}  // namespace fednids
