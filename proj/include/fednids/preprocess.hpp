#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fednids/dataio.hpp"

namespace fednids {

/// Per-feature extrema fitted on training rows.
struct ScalerParams {
  Eigen::VectorXd minimum;
  Eigen::VectorXd maximum;

  std::size_t dim() const { return static_cast<std::size_t>(minimum.size()); }
  bool operator==(const ScalerParams& o) const {
    return minimum.size() == o.minimum.size() && minimum == o.minimum && maximum == o.maximum;
  }
};

/// Scaled feature matrix ready for the model, with labels and categories
/// carried through for evaluation.
struct PreparedDataset {
  FeatureMatrix features;
  std::vector<int> labels;
  std::vector<std::string> categories;
  std::string benign_marker = "Benign";
  ScalerParams scaler;

  std::size_t rows() const { return labels.size(); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features.cols()); }
};

/// Keeps every minority-class row plus an equal-size uniform sample (without
/// replacement) of the majority class, then shuffles. One Rng drives both.
FlowTable balance_classes(const FlowTable& table, std::uint64_t seed);

/// Keeps the first cap/2 rows of each class, preserving row order. Applied
/// to balanced, shuffled tables, this is a uniform subsample that keeps the
/// classes equal.
FlowTable cap_balanced(const FlowTable& table, std::size_t cap);

struct TrainTestSplit {
  FlowTable train;
  FlowTable test;
};

/// Seeded shuffle, then the first round(train_fraction * n) rows train.
TrainTestSplit split_train_test(const FlowTable& table, double train_fraction, std::uint64_t seed);

/// Column-wise minimum and maximum of the table's features.
ScalerParams fit_scaler(const FlowTable& train);

/// (x - min) / (max - min) per column, 0 where max == min, no clamping.
PreparedDataset apply_scaler(const ScalerParams& scaler, const FlowTable& table);

}  // namespace fednids
