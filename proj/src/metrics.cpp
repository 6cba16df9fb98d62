#include "fednids/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace fednids {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void require_same_length(std::size_t a, Eigen::Index b, const char* what) {
  if (a != static_cast<std::size_t>(b)) throw MetricsError(std::string(what) + ": length mismatch");
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> labels,
                          const Eigen::Ref<const Eigen::VectorXd>& probabilities,
                          double threshold) {
  require_same_length(labels.size(), probabilities.size(), "confusion");
  if (!(threshold > 0.0 && threshold < 1.0)) throw MetricsError("confusion: threshold outside (0, 1)");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted_attack = probabilities[static_cast<Eigen::Index>(i)] >= threshold;
    if (labels[i] == 1) {
      (predicted_attack ? cm.tp : cm.fn)++;
    } else {
      (predicted_attack ? cm.fp : cm.tn)++;
    }
  }
  return cm;
}

BinaryMetrics binary_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw MetricsError("binary_metrics: empty confusion matrix");
  BinaryMetrics m;
  m.accuracy = 100.0 * ratio(cm.tp + cm.tn, cm.total());
  const double recall = ratio(cm.tp, cm.tp + cm.fn);
  const double precision = ratio(cm.tp, cm.tp + cm.fp);
  m.detection_rate = 100.0 * recall;
  m.false_alarm_rate = 100.0 * ratio(cm.fp, cm.fp + cm.tn);
  m.f1 = recall + precision == 0.0 ? 0.0 : 100.0 * 2.0 * recall * precision / (recall + precision);
  return m;
}

double auc(std::span<const int> labels, const Eigen::Ref<const Eigen::VectorXd>& scores) {
  require_same_length(labels.size(), scores.size(), "auc");
  const auto n = labels.size();
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const auto negatives = n - positives;
  if (positives == 0 || negatives == 0) throw MetricsError("auc: both classes must be present");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[static_cast<Eigen::Index>(a)] > scores[static_cast<Eigen::Index>(b)];
  });

  // Walk thresholds from high to low; each group of tied scores adds one
  // ROC point, and the area accumulates in integer-count units.
  double area = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < n;) {
    const double s = scores[static_cast<Eigen::Index>(order[i])];
    std::size_t dtp = 0;
    std::size_t dfp = 0;
    for (; i < n && scores[static_cast<Eigen::Index>(order[i])] == s; ++i) {
      (labels[order[i]] == 1 ? dtp : dfp)++;
    }
    area += static_cast<double>(dfp) * (static_cast<double>(tp) + 0.5 * static_cast<double>(dtp));
    tp += dtp;
    fp += dfp;
  }
  return area / (static_cast<double>(positives) * static_cast<double>(negatives));
}

CategoryDetection per_category_dr(const Eigen::Ref<const Eigen::VectorXd>& probabilities,
                                  std::span<const std::string> categories, double threshold,
                                  const std::string& benign_marker) {
  require_same_length(categories.size(), probabilities.size(), "per_category_dr");
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // detected, total
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == benign_marker) continue;
    auto& [detected, total] = tally[categories[i]];
    ++total;
    if (probabilities[static_cast<Eigen::Index>(i)] >= threshold) ++detected;
  }
  if (tally.empty()) throw MetricsError("per_category_dr: no attack categories present");

  CategoryDetection out;
  double sum = 0.0;
  for (const auto& [name, counts] : tally) {
    const double dr = 100.0 * ratio(counts.first, counts.second);
    out.rates.emplace(name, dr);
    sum += dr;
  }
  out.average = sum / static_cast<double>(out.rates.size());
  return out;
}

EvaluationReport evaluate_predictions(std::span<const int> labels,
                                      const Eigen::Ref<const Eigen::VectorXd>& probabilities,
                                      std::span<const std::string> categories, double threshold,
                                      const std::string& benign_marker) {
  EvaluationReport r;
  r.confusion = confusion(labels, probabilities, threshold);
  const auto m = binary_metrics(r.confusion);
  r.accuracy = m.accuracy;
  r.detection_rate = m.detection_rate;
  r.false_alarm_rate = m.false_alarm_rate;
  r.f1 = m.f1;
  r.auc = auc(labels, probabilities);
  r.per_category = per_category_dr(probabilities, categories, threshold, benign_marker);
  return r;
}

}  // namespace fednids
