#include "fednids/preprocess.hpp"

#include <cmath>
#include <numeric>

#include "fednids/random.hpp"

namespace fednids {

FlowTable balance_classes(const FlowTable& table, std::uint64_t seed) {
  std::vector<std::size_t> benign;
  std::vector<std::size_t> attack;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    (table.labels[i] == 1 ? attack : benign).push_back(i);
  }
  if (benign.empty() || attack.empty()) {
    throw DataError("balance_classes: need both classes (benign " +
                    std::to_string(benign.size()) + ", attack " + std::to_string(attack.size()) +
                    ")");
  }

  Rng rng(seed);
  auto& majority = benign.size() >= attack.size() ? benign : attack;
  const auto& minority = benign.size() >= attack.size() ? attack : benign;
  const auto keep = minority.size();

  // Partial Fisher-Yates: the first `keep` slots become a uniform sample.
  for (std::size_t i = 0; i < keep; ++i) {
    const auto j = i + rng.below(majority.size() - i);
    std::swap(majority[i], majority[j]);
  }
  majority.resize(keep);

  std::vector<std::size_t> rows(minority);
  rows.insert(rows.end(), majority.begin(), majority.end());
  rng.shuffle(rows.begin(), rows.end());
  return table.select_rows(rows);
}

FlowTable cap_balanced(const FlowTable& table, std::size_t cap) {
  const auto per_class = cap / 2;
  std::size_t taken[2] = {0, 0};
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    auto& n = taken[table.labels[i] == 1 ? 1 : 0];
    if (n < per_class) {
      rows.push_back(i);
      ++n;
    }
  }
  return table.select_rows(rows);
}

TrainTestSplit split_train_test(const FlowTable& table, double train_fraction,
                                std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw DataError("split_train_test: train fraction must lie in (0, 1)");
  }
  const auto n = table.rows();
  if (n < 2) throw DataError("split_train_test: need at least 2 rows, got " + std::to_string(n));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());

  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  const std::span<const std::size_t> all(order);
  return {table.select_rows(all.first(n_train)), table.select_rows(all.subspan(n_train))};
}

ScalerParams fit_scaler(const FlowTable& train) {
  if (train.rows() == 0) throw DataError("fit_scaler: empty training table");
  return {train.features.colwise().minCoeff().transpose(),
          train.features.colwise().maxCoeff().transpose()};
}

PreparedDataset apply_scaler(const ScalerParams& scaler, const FlowTable& table) {
  if (scaler.dim() != table.feature_dim()) {
    throw DataError("apply_scaler: scaler has " + std::to_string(scaler.dim()) +
                    " features, table has " + std::to_string(table.feature_dim()));
  }
  PreparedDataset out;
  out.features.resize(table.features.rows(), table.features.cols());
  for (Eigen::Index c = 0; c < table.features.cols(); ++c) {
    const double lo = scaler.minimum[c];
    const double range = scaler.maximum[c] - lo;
    if (range > 0.0) {
      out.features.col(c) = (table.features.col(c).array() - lo) / range;
    } else {
      out.features.col(c).setZero();
    }
  }
  out.labels = table.labels;
  out.categories = table.categories;
  out.benign_marker = table.schema.benign_marker;
  out.scaler = scaler;
  return out;
}

}  // namespace fednids
