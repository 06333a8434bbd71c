#pragma once

#include <array>
#include <span>
#include <vector>

#include "sddete/data.hpp"
#include "sddete/rng.hpp"

namespace sddete {

struct TreeParams {
  int max_depth = 5;  // root is at depth 0
  int max_bins = 32;  // cap on candidate thresholds per feature per node
  double min_info_gain = 0.0;
  int min_instances_per_node = 1;

  bool operator==(const TreeParams&) const = default;
};

struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::array<std::size_t, 2> counts{0, 0};  // training labels reaching the node

  bool is_leaf() const { return left < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct TreeModel {
  TreeParams params;
  std::size_t arity = 0;
  std::vector<TreeNode> nodes;  // preorder, nodes[0] is the root

  int depth() const;
  std::size_t leaf_count() const;

  bool operator==(const TreeModel&) const = default;
};

// Gini impurity of a class-count vector; 0 for empty counts.
double gini(std::span<const std::size_t> counts);

// Grows a CART classifier. Candidate thresholds at a node are midpoints
// between adjacent distinct feature values; when a feature has more than
// max_bins distinct values the candidates are taken at evenly spaced
// quantile positions instead. The best split maximizes gini gain, ties
// resolved toward the lowest feature index then the lowest threshold.
// Splitting stops at max_depth, on pure nodes, when no split leaves
// min_instances_per_node on both sides, or when the best gain is zero or
// below min_info_gain. Induction is fully deterministic.
TreeModel fit_tree(const PTable<LabeledPoint>& data, const TreeParams& params);

// Class-probability vector of the leaf the point routes to (x <= threshold
// descends left). Components are nonnegative and sum to one.
std::array<double, 2> predict_scores_tree(const TreeModel& model,
                                          std::span<const double> point);

// Argmax of the scores; ties go to the lower class.
int predict_tree(const TreeModel& model, std::span<const double> point);

struct ForestParams {
  int n_trees = 200;
  TreeParams tree{.max_depth = 4, .max_bins = 32};
  bool bootstrap = true;            // sample n rows with replacement per tree
  bool feature_subsampling = true;  // ceil(sqrt(T)) features per node

  bool operator==(const ForestParams&) const = default;
};

struct ForestModel {
  ForestParams params;
  std::size_t arity = 0;
  std::vector<TreeModel> trees;

  bool operator==(const ForestModel&) const = default;
};

// Trees are grown from streams forked per tree index, so the forest is a
// pure function of (data, params, rng seed). With n_trees = 1, bootstrap
// off and feature subsampling off it reduces to fit_tree.
ForestModel fit_random_forest(const PTable<LabeledPoint>& data, const ForestParams& params,
                              RngStream& rng);

// Mean of the per-tree probability vectors.
std::array<double, 2> predict_scores_forest(const ForestModel& model,
                                            std::span<const double> point);

// Majority vote over per-tree argmax labels; vote ties fall back to the
// summed probability vectors, then to the lower class.
int predict_forest(const ForestModel& model, std::span<const double> point);

}  // namespace sddete
