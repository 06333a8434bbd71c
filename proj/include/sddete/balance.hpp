#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sddete/data.hpp"
#include "sddete/rng.hpp"

namespace sddete {

struct ClusterBalance {
  int cluster_id = 0;
  ClassStats before;
  ClassStats after;
};

struct SamplerReport {
  ClassStats before;
  ClassStats after;
  std::vector<ClusterBalance> per_cluster;  // cluster-wise sampler only
};

// Random oversampling: appends uniformly redrawn copies of minority records
// until the classes are equal. Originals keep their positions; replicas
// follow in global order. Balanced input is returned unchanged.
PTable<LabeledPoint> ros(const PTable<LabeledPoint>& data, RngStream& rng,
                         SamplerReport* report = nullptr);

// Random undersampling: keeps every minority record and a uniform subset of
// majority records of equal size, preserving input order.
PTable<LabeledPoint> rus(const PTable<LabeledPoint>& data, RngStream& rng,
                         SamplerReport* report = nullptr);

// Exact k-nearest minority neighbors (Euclidean, self excluded), each list
// sorted by distance then index. Used by smote; exposed for verification.
std::vector<std::vector<std::size_t>> knn_exact(
    const std::vector<std::vector<double>>& points, std::size_t k);

// Synthetic minority oversampling: each synthetic record interpolates
// between a minority record (taken round-robin in global order) and one of
// its k nearest minority neighbors at a uniform position on the segment.
// Requires at least two minority records; k is clamped to n_minority - 1.
PTable<LabeledPoint> smote(const PTable<LabeledPoint>& data, int k, RngStream& rng,
                           SamplerReport* report = nullptr);

// Cluster-wise random oversampling: records are grouped by their aligned
// cluster assignment; every cluster containing both classes is balanced by
// ros with a stream forked on the cluster id, single-class clusters pass
// through untouched, and the groups are concatenated in ascending cluster
// id order.
PTable<LabeledPoint> cros(const PTable<LabeledPoint>& data, const PTable<int>& clusters,
                          RngStream& rng, SamplerReport* report = nullptr);

}  // namespace sddete
