#include "sddete/ensemble.hpp"

#include <string>

#include "sddete/balance.hpp"
#include "sddete/errors.hpp"
#include "sddete/parallel.hpp"

namespace sddete {

namespace {

void validate(const DeteParams& p) {
  if (p.iter < 1) throw ParameterError("fit_sd_dete: iter must be positive");
  if (p.cuts < 2) throw ParameterError("fit_sd_dete: cuts must be at least 2");
  if (p.max_clust < 1) throw ParameterError("fit_sd_dete: max_clust must be positive");
  if (p.tree_depth < 1) throw ParameterError("fit_sd_dete: tree_depth must be positive");
  if (p.max_bins < 2) throw ParameterError("fit_sd_dete: max_bins must be at least 2");
  if (p.kmeans_max_iter < 1)
    throw ParameterError("fit_sd_dete: kmeans_max_iter must be positive");
}

}  // namespace

DeteModel fit_sd_dete(const PTable<LabeledPoint>& data, const DeteParams& params) {
  validate(params);
  ClassStats stats = class_stats(data);
  if (stats.ir_infinite) throw BalanceError("fit_sd_dete: input holds a single class");
  std::size_t arity = data.global_at(0).features.size();
  if (arity < 2)
    throw ParameterError("fit_sd_dete: need at least two features for projection");

  DeteModel model;
  model.iter = params.iter;
  model.iterations.resize(static_cast<std::size_t>(params.iter));

  parallel::parallel_for(model.iterations.size(), [&](std::size_t i) {
    RngStream rd_rng = substream(params.seed, i, "rd");
    RdModel rd = fit_rd(data, params.cuts, rd_rng);
    PTable<LabeledPoint> discretized = apply_rd_table(rd, data);

    int k = 1 + static_cast<int>(substream(params.seed, i, "k").uniform_index(arity - 1));
    PcaModel pca = fit_pca(data, k);
    PTable<LabeledPoint> projected = apply_pca_table(pca, data);

    PTable<LabeledPoint> joined = join_features(discretized, projected);

    PTable<LabeledPoint> smart;
    if (params.balancer == DeteParams::Balancer::cluster_ros) {
      int c = 1 + static_cast<int>(
                      substream(params.seed, i, "c").uniform_index(
                          static_cast<std::uint64_t>(params.max_clust)));
      RngStream km_rng = substream(params.seed, i, "kmeans");
      auto features = pmap(joined, [](const LabeledPoint& r) { return r.features; });
      ClusterModel cm = fit_bisecting_kmeans(features, c, km_rng, params.kmeans_max_iter);
      PTable<int> assignments = assign_clusters(cm, features);
      RngStream cros_rng = substream(params.seed, i, "cros");
      smart = cros(joined, assignments, cros_rng);
    } else {
      RngStream ros_rng = substream(params.seed, i, "ros");
      smart = ros(joined, ros_rng);
    }

    TreeParams tp;
    tp.max_depth = params.tree_depth;
    tp.max_bins = params.max_bins;
    model.iterations[i].rd = std::move(rd);
    model.iterations[i].pca = std::move(pca);
    model.iterations[i].tree = fit_tree(smart, tp);
  });
  return model;
}

std::array<double, 2> predict_scores(const DeteModel& model, std::span<const double> point) {
  if (model.iterations.empty()) throw ParameterError("predict_scores: empty model");
  if (point.size() != model.arity())
    throw ShapeError("predict_scores: point arity " + std::to_string(point.size()) +
                     " differs from model arity " + std::to_string(model.arity()));
  std::array<double, 2> total{0.0, 0.0};
  std::vector<double> joined;
  for (const auto& it : model.iterations) {
    auto bins = apply_rd(it.rd, point);
    auto proj = apply_pca(it.pca, point);
    joined.clear();
    joined.reserve(bins.size() + proj.size());
    joined.insert(joined.end(), bins.begin(), bins.end());
    joined.insert(joined.end(), proj.begin(), proj.end());
    auto s = predict_scores_tree(it.tree, joined);
    total[0] += s[0];
    total[1] += s[1];
  }
  return total;
}

int predict(const DeteModel& model, std::span<const double> point) {
  auto s = predict_scores(model, point);
  return s[1] > s[0] ? 1 : 0;
}

PTable<int> predict_table(const DeteModel& model, const PTable<LabeledPoint>& data) {
  return pmap(data, [&model](const LabeledPoint& r) { return predict(model, r.features); });
}

}  // namespace sddete
