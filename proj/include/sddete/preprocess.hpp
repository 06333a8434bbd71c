#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sddete/data.hpp"
#include "sddete/rng.hpp"

namespace sddete {

// Random discretization: per-feature thresholds taken from `cuts - 1`
// randomly selected records, giving every feature `cuts` buckets.
struct RdModel {
  int cuts = 0;
  std::vector<std::vector<double>> thresholds;  // per feature, sorted ascending

  std::size_t arity() const { return thresholds.size(); }

  bool operator==(const RdModel&) const = default;
};

// Selects cuts - 1 distinct records; feature j's thresholds are those
// records' j-th values sorted ascending (duplicates kept). Requires
// cuts >= 2 and at least cuts - 1 records.
RdModel fit_rd(const PTable<LabeledPoint>& data, int cuts, RngStream& rng);

// Bucket index per feature: the number of thresholds <= value, in [0, cuts).
std::vector<int> apply_rd(const RdModel& model, std::span<const double> point);

// Whole-table variant; bucket indices become the features, labels carry over.
PTable<LabeledPoint> apply_rd_table(const RdModel& model, const PTable<LabeledPoint>& data);

struct PcaModel {
  std::vector<double> mean;                     // length T
  std::vector<std::vector<double>> components;  // k rows of length T
  std::vector<double> explained_variance;       // k eigenvalues, descending

  std::size_t arity() const { return mean.size(); }
  std::size_t k() const { return components.size(); }

  bool operator==(const PcaModel&) const = default;
};

// Principal components of the feature matrix: covariance with n - 1 in the
// denominator, accumulated per partition and combined in partition order,
// then an exact symmetric eigendecomposition. Each component's sign is
// fixed so its largest-magnitude coordinate is positive. Requires
// 1 <= k <= T - 1 and at least two records.
PcaModel fit_pca(const PTable<LabeledPoint>& data, int k);

// Projects a point onto the k components after centering.
std::vector<double> apply_pca(const PcaModel& model, std::span<const double> point);

PTable<LabeledPoint> apply_pca_table(const PcaModel& model, const PTable<LabeledPoint>& data);

// Concatenates each record's discretized features (cast to double) with its
// projected features. Inputs must be positionally aligned views of the same
// rows; a label disagreement is reported as misalignment.
PTable<LabeledPoint> join_features(const PTable<LabeledPoint>& discretized,
                                   const PTable<LabeledPoint>& projected);

}  // namespace sddete
