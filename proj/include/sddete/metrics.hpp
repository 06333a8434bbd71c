#pragma once

#include <cstddef>
#include <vector>

namespace sddete {

// Label 1 is the positive class throughout.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fn + fp + tn; }
  std::size_t actual_positive() const { return tp + fn; }
  std::size_t actual_negative() const { return fp + tn; }

  bool operator==(const ConfusionMatrix&) const = default;
};

struct ScoredPrediction {
  double score = 0.0;  // higher means more positive
  int label = 0;       // true label
};

// Throws ShapeError if the vectors differ in length or are empty.
ConfusionMatrix confusion(const std::vector<int>& predicted,
                          const std::vector<int>& actual);

double accuracy(const ConfusionMatrix& cm);

// True positive rate (recall on the positive class).
double tpr(const ConfusionMatrix& cm);

// True negative rate.
double tnr(const ConfusionMatrix& cm);

// Geometric mean of TPR and TNR. Requires both classes present in the
// actual labels (MetricError otherwise).
double gm(const ConfusionMatrix& cm);

// Arithmetic mean of TPR and TNR; same precondition as gm.
double auc_balanced(const ConfusionMatrix& cm);

// Area under the ROC curve from scores, computed by average ranks so ties
// contribute one half. Requires both classes present.
double auroc(const std::vector<ScoredPrediction>& scored);

}  // namespace sddete
