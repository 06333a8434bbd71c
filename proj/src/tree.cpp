#include "sddete/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sddete/errors.hpp"
#include "sddete/parallel.hpp"

namespace sddete {

namespace {

struct Flat {
  std::size_t n = 0;
  std::size_t arity = 0;
  std::vector<double> x;  // row-major
  std::vector<std::uint8_t> y;

  double at(std::size_t row, std::size_t col) const { return x[row * arity + col]; }
};

Flat flatten(const PTable<LabeledPoint>& data) {
  if (data.empty()) throw ParameterError("fit_tree: empty table");
  Flat f;
  f.n = data.size();
  f.arity = data.global_at(0).features.size();
  if (f.arity == 0) throw ParameterError("fit_tree: records have no features");
  f.x.reserve(f.n * f.arity);
  f.y.reserve(f.n);
  for (std::size_t q = 0; q < data.partition_count(); ++q)
    for (const auto& r : data.partition(q)) {
      if (r.features.size() != f.arity)
        throw ShapeError("fit_tree: records have differing arity");
      if (r.label != 0 && r.label != 1)
        throw DataError("fit_tree: label out of range: " + std::to_string(r.label));
      f.x.insert(f.x.end(), r.features.begin(), r.features.end());
      f.y.push_back(static_cast<std::uint8_t>(r.label));
    }
  return f;
}

double gini2(std::size_t c0, std::size_t c1) {
  std::size_t n = c0 + c1;
  if (n == 0) return 0.0;
  double p0 = static_cast<double>(c0) / static_cast<double>(n);
  double p1 = static_cast<double>(c1) / static_cast<double>(n);
  return 1.0 - (p0 * p0 + p1 * p1);
}

struct BestSplit {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

class Builder {
 public:
  Builder(const Flat& flat, const TreeParams& params, bool subsample_features,
          RngStream* rng)
      : flat_(flat), params_(params), subsample_(subsample_features), rng_(rng) {
    if (params.max_depth < 1) throw ParameterError("fit_tree: max_depth must be positive");
    if (params.max_bins < 2) throw ParameterError("fit_tree: max_bins must be at least 2");
    if (params.min_instances_per_node < 1)
      throw ParameterError("fit_tree: min_instances_per_node must be positive");
    if (subsample_) {
      subset_size_ = static_cast<std::size_t>(
          std::ceil(std::sqrt(static_cast<double>(flat.arity))));
      feature_pool_.resize(flat.arity);
      std::iota(feature_pool_.begin(), feature_pool_.end(), 0u);
    }
  }

  TreeModel run() {
    TreeModel model;
    model.params = params_;
    model.arity = flat_.arity;
    // Per-feature row indices sorted by (value, row); kept sorted through
    // stable child partitioning so each node's scan is linear.
    std::vector<std::vector<std::uint32_t>> order(flat_.arity);
    for (std::size_t j = 0; j < flat_.arity; ++j) {
      auto& ord = order[j];
      ord.resize(flat_.n);
      std::iota(ord.begin(), ord.end(), 0u);
      std::sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
        double va = flat_.at(a, j);
        double vb = flat_.at(b, j);
        return va < vb || (va == vb && a < b);
      });
    }
    nodes_ = &model.nodes;
    build(std::move(order), 0);
    return model;
  }

 private:
  std::array<std::size_t, 2> count_labels(const std::vector<std::uint32_t>& rows) const {
    std::array<std::size_t, 2> c{0, 0};
    for (std::uint32_t r : rows) ++c[flat_.y[r]];
    return c;
  }

  // Candidate thresholds for one feature, evaluated in ascending order.
  // Returns true if it found a split improving on `best`.
  bool scan_feature(std::size_t j, const std::vector<std::uint32_t>& ord,
                    std::size_t c0, std::size_t c1, BestSplit& best) {
    std::size_t n = ord.size();
    run_val_.clear();
    run_n_.clear();
    run_c1_.clear();
    run_start_.clear();
    for (std::size_t i = 0; i < n;) {
      double v = flat_.at(ord[i], j);
      std::size_t c1_run = 0;
      std::size_t start = i;
      while (i < n && flat_.at(ord[i], j) == v) {
        c1_run += flat_.y[ord[i]];
        ++i;
      }
      run_val_.push_back(v);
      run_n_.push_back(i - start);
      run_c1_.push_back(c1_run);
      run_start_.push_back(start);
    }
    std::size_t runs = run_val_.size();
    if (runs < 2) return false;

    cand_.clear();
    std::size_t bins = static_cast<std::size_t>(params_.max_bins);
    if (runs <= bins) {
      for (std::size_t r = 0; r + 1 < runs; ++r) cand_.push_back(r);
    } else {
      // Evenly spaced quantile positions over the sorted values.
      for (std::size_t i = 1; i < bins; ++i) {
        std::size_t pos = i * n / bins;
        auto it = std::upper_bound(run_start_.begin(), run_start_.end(), pos);
        std::size_t r = static_cast<std::size_t>(it - run_start_.begin()) - 1;
        if (r + 1 < runs) cand_.push_back(r);
      }
      cand_.erase(std::unique(cand_.begin(), cand_.end()), cand_.end());
    }

    double parent = gini2(c0, c1);
    double dn = static_cast<double>(n);
    bool improved = false;
    std::size_t min_inst = static_cast<std::size_t>(params_.min_instances_per_node);
    std::size_t acc_n = 0;
    std::size_t acc_c1 = 0;
    std::size_t next_run = 0;
    for (std::size_t r : cand_) {
      while (next_run <= r) {
        acc_n += run_n_[next_run];
        acc_c1 += run_c1_[next_run];
        ++next_run;
      }
      std::size_t nl = acc_n;
      std::size_t nr = n - nl;
      if (nl < min_inst || nr < min_inst) continue;
      std::size_t l1 = acc_c1;
      std::size_t l0 = nl - l1;
      std::size_t r1 = c1 - l1;
      std::size_t r0 = nr - r1;
      double gain = parent -
                    (static_cast<double>(nl) / dn) * gini2(l0, l1) -
                    (static_cast<double>(nr) / dn) * gini2(r0, r1);
      if (gain > best.gain) {
        best.gain = gain;
        best.feature = static_cast<int>(j);
        best.threshold = 0.5 * (run_val_[r] + run_val_[r + 1]);
        improved = true;
      }
    }
    return improved;
  }

  int build(std::vector<std::vector<std::uint32_t>> order, int depth) {
    int my = static_cast<int>(nodes_->size());
    nodes_->emplace_back();
    auto counts = count_labels(order[0]);
    (*nodes_)[static_cast<std::size_t>(my)].counts = counts;

    std::size_t n = order[0].size();
    bool pure = counts[0] == 0 || counts[1] == 0;
    if (depth >= params_.max_depth || pure || n < 2) return my;

    BestSplit best;
    if (subsample_) {
      // Fresh uniform feature subset per node, evaluated in ascending order.
      for (std::size_t i = 0; i < subset_size_; ++i) {
        std::size_t j = i + rng_->uniform_index(feature_pool_.size() - i);
        std::swap(feature_pool_[i], feature_pool_[j]);
      }
      subset_.assign(feature_pool_.begin(),
                     feature_pool_.begin() + static_cast<std::ptrdiff_t>(subset_size_));
      std::sort(subset_.begin(), subset_.end());
      for (std::uint32_t j : subset_) scan_feature(j, order[j], counts[0], counts[1], best);
    } else {
      for (std::size_t j = 0; j < flat_.arity; ++j)
        scan_feature(j, order[j], counts[0], counts[1], best);
    }
    if (best.feature < 0 || best.gain <= 0.0 || best.gain < params_.min_info_gain)
      return my;

    auto bf = static_cast<std::size_t>(best.feature);
    double bt = best.threshold;
    std::vector<std::vector<std::uint32_t>> left(flat_.arity), right(flat_.arity);
    for (std::size_t j = 0; j < flat_.arity; ++j) {
      for (std::uint32_t row : order[j])
        (flat_.at(row, bf) <= bt ? left[j] : right[j]).push_back(row);
      order[j].clear();
      order[j].shrink_to_fit();
    }

    int l = build(std::move(left), depth + 1);
    int r = build(std::move(right), depth + 1);
    auto& node = (*nodes_)[static_cast<std::size_t>(my)];
    node.feature = best.feature;
    node.threshold = bt;
    node.left = l;
    node.right = r;
    return my;
  }

  const Flat& flat_;
  TreeParams params_;
  bool subsample_;
  RngStream* rng_;
  std::size_t subset_size_ = 0;
  std::vector<std::uint32_t> feature_pool_;
  std::vector<std::uint32_t> subset_;
  std::vector<TreeNode>* nodes_ = nullptr;
  // Reused scan buffers.
  std::vector<double> run_val_;
  std::vector<std::size_t> run_n_;
  std::vector<std::size_t> run_c1_;
  std::vector<std::size_t> run_start_;
  std::vector<std::size_t> cand_;
};

int node_depth(const std::vector<TreeNode>& nodes, int idx) {
  const auto& n = nodes[static_cast<std::size_t>(idx)];
  if (n.is_leaf()) return 0;
  return 1 + std::max(node_depth(nodes, n.left), node_depth(nodes, n.right));
}

}  // namespace

int TreeModel::depth() const {
  if (nodes.empty()) return 0;
  return node_depth(nodes, 0);
}

std::size_t TreeModel::leaf_count() const {
  std::size_t c = 0;
  for (const auto& n : nodes) c += n.is_leaf();
  return c;
}

double gini(std::span<const std::size_t> counts) {
  std::size_t n = 0;
  for (std::size_t c : counts) n += c;
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t c : counts) {
    double p = static_cast<double>(c) / static_cast<double>(n);
    acc += p * p;
  }
  return 1.0 - acc;
}

TreeModel fit_tree(const PTable<LabeledPoint>& data, const TreeParams& params) {
  Flat flat = flatten(data);
  Builder builder(flat, params, false, nullptr);
  return builder.run();
}

std::array<double, 2> predict_scores_tree(const TreeModel& model,
                                          std::span<const double> point) {
  if (model.nodes.empty()) throw ParameterError("predict_scores_tree: empty model");
  if (point.size() != model.arity)
    throw ShapeError("predict_scores_tree: point arity " + std::to_string(point.size()) +
                     " differs from model arity " + std::to_string(model.arity));
  const TreeNode* node = &model.nodes[0];
  while (!node->is_leaf()) {
    int next = point[static_cast<std::size_t>(node->feature)] <= node->threshold
                   ? node->left
                   : node->right;
    node = &model.nodes[static_cast<std::size_t>(next)];
  }
  double total = static_cast<double>(node->counts[0] + node->counts[1]);
  return {static_cast<double>(node->counts[0]) / total,
          static_cast<double>(node->counts[1]) / total};
}

int predict_tree(const TreeModel& model, std::span<const double> point) {
  auto s = predict_scores_tree(model, point);
  return s[1] > s[0] ? 1 : 0;
}

ForestModel fit_random_forest(const PTable<LabeledPoint>& data, const ForestParams& params,
                              RngStream& rng) {
  if (params.n_trees < 1)
    throw ParameterError("fit_random_forest: n_trees must be positive");
  Flat flat = flatten(data);

  ForestModel model;
  model.params = params;
  model.arity = flat.arity;
  model.trees.resize(static_cast<std::size_t>(params.n_trees));
  parallel::parallel_for(model.trees.size(), [&](std::size_t t) {
    RngStream stream = rng.fork(t, "tree");
    const Flat* source = &flat;
    Flat sample;
    if (params.bootstrap) {
      sample.n = flat.n;
      sample.arity = flat.arity;
      sample.x.reserve(flat.n * flat.arity);
      sample.y.reserve(flat.n);
      for (std::size_t i = 0; i < flat.n; ++i) {
        std::size_t row = stream.uniform_index(flat.n);
        sample.x.insert(sample.x.end(), flat.x.begin() + static_cast<std::ptrdiff_t>(row * flat.arity),
                        flat.x.begin() + static_cast<std::ptrdiff_t>((row + 1) * flat.arity));
        sample.y.push_back(flat.y[row]);
      }
      source = &sample;
    }
    Builder builder(*source, params.tree, params.feature_subsampling,
                    params.feature_subsampling ? &stream : nullptr);
    model.trees[t] = builder.run();
  });
  return model;
}

std::array<double, 2> predict_scores_forest(const ForestModel& model,
                                            std::span<const double> point) {
  if (model.trees.empty()) throw ParameterError("predict_scores_forest: empty model");
  std::array<double, 2> sum{0.0, 0.0};
  for (const auto& tree : model.trees) {
    auto s = predict_scores_tree(tree, point);
    sum[0] += s[0];
    sum[1] += s[1];
  }
  double n = static_cast<double>(model.trees.size());
  return {sum[0] / n, sum[1] / n};
}

int predict_forest(const ForestModel& model, std::span<const double> point) {
  if (model.trees.empty()) throw ParameterError("predict_forest: empty model");
  std::size_t votes[2] = {0, 0};
  std::array<double, 2> sum{0.0, 0.0};
  for (const auto& tree : model.trees) {
    auto s = predict_scores_tree(tree, point);
    ++votes[s[1] > s[0] ? 1 : 0];
    sum[0] += s[0];
    sum[1] += s[1];
  }
  if (votes[0] != votes[1]) return votes[1] > votes[0] ? 1 : 0;
  return sum[1] > sum[0] ? 1 : 0;
}

}  // namespace sddete
