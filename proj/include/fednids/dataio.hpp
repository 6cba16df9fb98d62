#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fednids {

/// Row-major dense matrix used for every feature table.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Number of model input features after the flow identifiers are removed.
inline constexpr std::size_t kRetainedFeatureCount = 39;
/// Number of flow-key columns removed before training.
inline constexpr std::size_t kIdentifierCount = 4;

/// Raised for malformed input files, schema violations and bad table shapes.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Column layout of a NetFlow-format dataset.
///
/// `feature_names` lists every numeric column in table order, identifiers
/// included; `identifier_names` is the subset removed by drop_identifiers.
struct FlowSchema {
  std::vector<std::string> feature_names;
  std::vector<std::string> identifier_names;
  std::string label_column = "Label";
  std::string category_column = "Attack";
  std::string benign_marker = "Benign";

  /// The 43-column NetFlow v9 feature set shared by the NF-*-v2 datasets,
  /// with the four flow-key columns marked as identifiers.
  static FlowSchema netflow_v2();

  /// feature_names with identifier_names removed, order preserved.
  std::vector<std::string> retained_features() const;

  /// Throws DataError unless the schema has either 4 identifiers (raw) or
  /// none (stripped), every identifier is a feature, the retained feature
  /// count equals `retained_dim`, and label/category are not features.
  void validate(std::size_t retained_dim = kRetainedFeatureCount) const;

  bool operator==(const FlowSchema&) const = default;
};

/// Labelled flow records. Immutable by convention once built.
struct FlowTable {
  FlowSchema schema;
  FeatureMatrix features;  // rows x schema.feature_names.size()
  std::vector<int> labels;  // 0 = benign, 1 = attack
  std::vector<std::string> categories;

  std::size_t rows() const { return labels.size(); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features.cols()); }

  /// New table holding the given rows, in the given order.
  FlowTable select_rows(std::span<const std::size_t> indices) const;

  bool operator==(const FlowTable& other) const;
};

/// Assembles a table and checks its invariants: aligned lengths, finite
/// values, labels in {0,1}, and label == 0 exactly for the benign marker.
FlowTable make_flow_table(FlowSchema schema, FeatureMatrix features, std::vector<int> labels,
                          std::vector<std::string> categories);

/// Reads a comma-separated file whose header matches the schema columns as
/// a set. Identifier columns also accept dotted-quad IPv4 addresses, which
/// are stored as their 32-bit integer value.
FlowTable load_flow_table(const std::filesystem::path& path, const FlowSchema& schema);

/// Memory-bounded variant of load_flow_table: keeps a seeded uniform
/// reservoir sample of at most `per_class_limit` rows per label, benign rows
/// first. Feature cells of rows that are never kept are not parsed.
FlowTable load_flow_table_sampled(const std::filesystem::path& path, const FlowSchema& schema,
                                  std::size_t per_class_limit, std::uint64_t seed);

/// Writes a table in the format load_flow_table reads (schema column order,
/// then label and category).
void write_flow_table(const FlowTable& table, const std::filesystem::path& path);

/// Removes the schema's identifier columns.
FlowTable drop_identifiers(const FlowTable& table);

struct ClassCounts {
  std::size_t benign = 0;
  std::size_t attack = 0;
  bool operator==(const ClassCounts&) const = default;
};

ClassCounts class_counts(const FlowTable& table);

/// Stacks tables with identical schemas, in the order given. This is the
/// only operation that combines rows from different sources.
FlowTable concatenate(std::span<const FlowTable* const> tables);

namespace audit {
/// Number of concatenate() calls made by this process. Lets tests prove
/// that a code path never pools two organisations' records.
std::size_t concatenate_calls();
}  // namespace audit

}  // namespace fednids
