#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace fednids {

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultThreshold = 0.5;

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Detection-rate metrics, all in percent.
struct BinaryMetrics {
  double accuracy = 0.0;
  double detection_rate = 0.0;
  double false_alarm_rate = 0.0;
  double f1 = 0.0;
};

struct CategoryDetection {
  std::map<std::string, double> rates;  // percent, attack categories only
  double average = 0.0;                 // unweighted mean of `rates`
};

/// Everything reported for one (model, test set) pair.
struct EvaluationReport {
  double accuracy = 0.0;
  double detection_rate = 0.0;
  double false_alarm_rate = 0.0;
  double auc = 0.0;  // [0, 1]
  double f1 = 0.0;
  ConfusionMatrix confusion;
  CategoryDetection per_category;
  double train_time_s = 0.0;
};

/// Predicted attack iff probability >= threshold.
ConfusionMatrix confusion(std::span<const int> labels,
                          const Eigen::Ref<const Eigen::VectorXd>& probabilities,
                          double threshold = kDefaultThreshold);

/// Accuracy, DR, FAR and F1 from the confusion counts; 0/0 terms are 0.
BinaryMetrics binary_metrics(const ConfusionMatrix& cm);

/// Area under the ROC curve: one point per distinct score, trapezoidal area.
double auc(std::span<const int> labels, const Eigen::Ref<const Eigen::VectorXd>& scores);

/// Detection rate of each non-benign category plus their unweighted mean.
CategoryDetection per_category_dr(const Eigen::Ref<const Eigen::VectorXd>& probabilities,
                                  std::span<const std::string> categories,
                                  double threshold = kDefaultThreshold,
                                  const std::string& benign_marker = "Benign");

/// Full report for a set of model outputs. Both classes must be present
/// (AUC is undefined otherwise).
EvaluationReport evaluate_predictions(std::span<const int> labels,
                                      const Eigen::Ref<const Eigen::VectorXd>& probabilities,
                                      std::span<const std::string> categories,
                                      double threshold = kDefaultThreshold,
                                      const std::string& benign_marker = "Benign");

/// Monotonic wall-clock seconds spent in `work()`.
template <typename Work>
double measure_time(Work&& work) {
  const auto start = std::chrono::steady_clock::now();
  std::forward<Work>(work)();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace fednids
