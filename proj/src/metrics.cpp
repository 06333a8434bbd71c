#include "sddete/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sddete/errors.hpp"

namespace sddete {

ConfusionMatrix confusion(const std::vector<int>& predicted,
                          const std::vector<int>& actual) {
  if (predicted.size() != actual.size())
    throw ShapeError("confusion: predicted and actual lengths differ");
  if (predicted.empty()) throw ShapeError("confusion: empty input");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    int p = predicted[i];
    int a = actual[i];
    if ((p != 0 && p != 1) || (a != 0 && a != 1))
      throw ShapeError("confusion: labels must be 0 or 1");
    if (a == 1)
      ++(p == 1 ? cm.tp : cm.fn);
    else
      ++(p == 1 ? cm.fp : cm.tn);
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw MetricError("accuracy: empty confusion matrix");
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

double tpr(const ConfusionMatrix& cm) {
  if (cm.actual_positive() == 0) throw MetricError("tpr: no positive records");
  return static_cast<double>(cm.tp) / static_cast<double>(cm.actual_positive());
}

double tnr(const ConfusionMatrix& cm) {
  if (cm.actual_negative() == 0) throw MetricError("tnr: no negative records");
  return static_cast<double>(cm.tn) / static_cast<double>(cm.actual_negative());
}

double gm(const ConfusionMatrix& cm) {
  if (cm.actual_positive() == 0 || cm.actual_negative() == 0)
    throw MetricError("gm: both classes must be present");
  return std::sqrt(tpr(cm) * tnr(cm));
}

double auc_balanced(const ConfusionMatrix& cm) {
  if (cm.actual_positive() == 0 || cm.actual_negative() == 0)
    throw MetricError("auc_balanced: both classes must be present");
  return 0.5 * (tpr(cm) + tnr(cm));
}

double auroc(const std::vector<ScoredPrediction>& scored) {
  std::size_t n = scored.size();
  std::size_t pos = 0;
  for (const auto& s : scored) {
    if (s.label != 0 && s.label != 1) throw ShapeError("auroc: labels must be 0 or 1");
    pos += static_cast<std::size_t>(s.label);
  }
  if (pos == 0 || pos == n) throw MetricError("auroc: both classes must be present");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scored[a].score < scored[b].score;
  });

  // Sum of positive ranks with ties averaged; 1-based ranks.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scored[order[j]].score == scored[order[i]].score) ++j;
    double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of i+1 .. j
    for (std::size_t t = i; t < j; ++t)
      if (scored[order[t]].label == 1) rank_sum += avg_rank;
    i = j;
  }
  double np = static_cast<double>(pos);
  double nn = static_cast<double>(n - pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

}  // namespace sddete
