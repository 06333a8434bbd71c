#pragma once

#include <span>
#include <vector>

#include "sddete/ptable.hpp"
#include "sddete/rng.hpp"

namespace sddete {

struct ClusterNode {
  std::vector<double> centroid;
  std::size_t size = 0;  // training records under this node
  int left = -1;
  int right = -1;
  int leaf_id = -1;  // set on leaves only

  bool is_leaf() const { return left < 0; }
};

// Binary split tree from bisecting k-means. Leaf ids are assigned by a
// left-first depth-first walk, so they are stable for a given model.
struct ClusterModel {
  std::vector<ClusterNode> nodes;  // index 0 is the root
  int requested = 0;
  int leaf_count = 0;

  std::size_t arity() const { return nodes.empty() ? 0 : nodes[0].centroid.size(); }

  // Descends from the root, at each split taking the child with the nearer
  // centroid (ties go to the left child); returns the leaf id.
  int assign(std::span<const double> point) const;
};

// Repeatedly bisects the largest divisible leaf (ties: the earliest
// created) with 2-means until k leaves exist or nothing can be split.
// Each bisection seeds one centroid at a uniformly drawn member and the
// other at the member farthest from it, then runs Lloyd passes up to
// max_iter, reassigning the farthest point whenever a side empties.
// A leaf is divisible iff it holds at least two distinct points.
ClusterModel fit_bisecting_kmeans(const PTable<std::vector<double>>& points, int k,
                                  RngStream& rng, int max_iter = 20);

// Leaf id per record, aligned with the input table.
PTable<int> assign_clusters(const ClusterModel& model,
                            const PTable<std::vector<double>>& points);

}  // namespace sddete
