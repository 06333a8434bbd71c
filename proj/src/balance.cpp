#include "sddete/balance.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "sddete/errors.hpp"

namespace sddete {

namespace {

ClassStats stats_or_throw(const PTable<LabeledPoint>& data, const char* who) {
  ClassStats s = class_stats(data);
  if (s.ir_infinite)
    throw BalanceError(std::string(who) + ": input holds a single class");
  return s;
}

std::vector<std::size_t> global_indices_of_class(const PTable<LabeledPoint>& data, int cls) {
  std::vector<std::size_t> out;
  std::size_t i = 0;
  for (std::size_t q = 0; q < data.partition_count(); ++q)
    for (const auto& r : data.partition(q)) {
      if (r.label == cls) out.push_back(i);
      ++i;
    }
  return out;
}

// Order-preserving filter by global record index.
PTable<LabeledPoint> keep_indices(const PTable<LabeledPoint>& data,
                                  const std::vector<char>& keep) {
  std::vector<std::vector<LabeledPoint>> parts(data.partition_count());
  std::size_t i = 0;
  for (std::size_t q = 0; q < data.partition_count(); ++q)
    for (const auto& r : data.partition(q)) {
      if (keep[i]) parts[q].push_back(r);
      ++i;
    }
  return PTable<LabeledPoint>(std::move(parts));
}

void fill_report(SamplerReport* report, const ClassStats& before,
                 const PTable<LabeledPoint>& result) {
  if (!report) return;
  report->before = before;
  report->after = class_stats(result);
}

}  // namespace

PTable<LabeledPoint> ros(const PTable<LabeledPoint>& data, RngStream& rng,
                         SamplerReport* report) {
  ClassStats before = stats_or_throw(data, "ros");
  std::size_t need = before.count(before.majority) - before.count(before.minority);
  if (need == 0) {
    fill_report(report, before, data);
    return data;
  }
  auto minority_idx = global_indices_of_class(data, before.minority);
  std::vector<LabeledPoint> replicas;
  replicas.reserve(need);
  for (std::size_t r = 0; r < need; ++r)
    replicas.push_back(data.global_at(minority_idx[rng.uniform_index(minority_idx.size())]));
  auto result = punion(data, PTable<LabeledPoint>::from_records(std::move(replicas), 1));
  fill_report(report, before, result);
  return result;
}

PTable<LabeledPoint> rus(const PTable<LabeledPoint>& data, RngStream& rng,
                         SamplerReport* report) {
  ClassStats before = stats_or_throw(data, "rus");
  std::size_t n_min = before.count(before.minority);
  std::size_t n_maj = before.count(before.majority);
  if (n_min == n_maj) {
    fill_report(report, before, data);
    return data;
  }
  auto majority_idx = global_indices_of_class(data, before.majority);
  // Uniform n_min-subset of the majority via partial Fisher-Yates.
  for (std::size_t i = 0; i < n_min; ++i) {
    std::size_t j = i + rng.uniform_index(n_maj - i);
    std::swap(majority_idx[i], majority_idx[j]);
  }
  std::vector<char> keep(data.size(), 0);
  for (std::size_t i = 0; i < n_min; ++i) keep[majority_idx[i]] = 1;
  for (std::size_t i : global_indices_of_class(data, before.minority)) keep[i] = 1;
  auto result = keep_indices(data, keep);
  fill_report(report, before, result);
  return result;
}

std::vector<std::vector<std::size_t>> knn_exact(
    const std::vector<std::vector<double>>& points, std::size_t k) {
  std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> out(n);
  if (n == 0) return out;
  std::vector<std::pair<double, std::size_t>> dists;
  for (std::size_t i = 0; i < n; ++i) {
    dists.clear();
    dists.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double d = 0.0;
      for (std::size_t t = 0; t < points[i].size(); ++t) {
        double diff = points[i][t] - points[j][t];
        d += diff * diff;
      }
      dists.emplace_back(d, j);
    }
    std::size_t take = std::min(k, dists.size());
    std::partial_sort(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(take),
                      dists.end());
    out[i].reserve(take);
    for (std::size_t t = 0; t < take; ++t) out[i].push_back(dists[t].second);
  }
  return out;
}

PTable<LabeledPoint> smote(const PTable<LabeledPoint>& data, int k, RngStream& rng,
                           SamplerReport* report) {
  if (k < 1) throw ParameterError("smote: k must be positive");
  ClassStats before = stats_or_throw(data, "smote");
  std::size_t n_min = before.count(before.minority);
  std::size_t n_maj = before.count(before.majority);
  if (n_min < 2)
    throw BalanceError("smote: need at least two minority records to interpolate");
  if (n_min == n_maj) {
    fill_report(report, before, data);
    return data;
  }

  auto minority_idx = global_indices_of_class(data, before.minority);
  std::vector<std::vector<double>> minority_pts;
  minority_pts.reserve(n_min);
  for (std::size_t i : minority_idx) minority_pts.push_back(data.global_at(i).features);
  std::size_t k_eff = std::min<std::size_t>(static_cast<std::size_t>(k), n_min - 1);
  auto neighbors = knn_exact(minority_pts, k_eff);

  std::size_t need = n_maj - n_min;
  std::vector<LabeledPoint> synthetic;
  synthetic.reserve(need);
  for (std::size_t s = 0; s < need; ++s) {
    std::size_t base = s % n_min;
    const auto& x = minority_pts[base];
    const auto& nn = minority_pts[neighbors[base][rng.uniform_index(k_eff)]];
    double u = rng.uniform_real();
    LabeledPoint p;
    p.features.resize(x.size());
    for (std::size_t d = 0; d < x.size(); ++d)
      p.features[d] = x[d] + u * (nn[d] - x[d]);
    p.label = before.minority;
    synthetic.push_back(std::move(p));
  }
  auto result = punion(data, PTable<LabeledPoint>::from_records(std::move(synthetic), 1));
  fill_report(report, before, result);
  return result;
}

PTable<LabeledPoint> cros(const PTable<LabeledPoint>& data, const PTable<int>& clusters,
                          RngStream& rng, SamplerReport* report) {
  ClassStats before = stats_or_throw(data, "cros");
  auto zipped = pzip(data, clusters);  // validates alignment

  std::set<int> ids;
  for (std::size_t q = 0; q < clusters.partition_count(); ++q)
    for (int c : clusters.partition(q)) ids.insert(c);

  PTable<LabeledPoint> result;
  bool first = true;
  for (int id : ids) {
    auto group = pmap(
        pfilter(zipped, [id](const std::pair<LabeledPoint, int>& pr) { return pr.second == id; }),
        [](const std::pair<LabeledPoint, int>& pr) { return pr.first; });
    ClassStats group_before = class_stats(group);
    PTable<LabeledPoint> balanced;
    if (group_before.ir_infinite) {
      balanced = group;  // single-class cluster passes through
    } else {
      RngStream local = rng.fork(static_cast<std::uint64_t>(id), "ros");
      balanced = ros(group, local);
    }
    if (report) {
      ClusterBalance cb;
      cb.cluster_id = id;
      cb.before = group_before;
      cb.after = class_stats(balanced);
      report->per_cluster.push_back(cb);
    }
    result = first ? balanced : punion(result, balanced);
    first = false;
  }
  if (report) {
    report->before = before;
    report->after = class_stats(result);
  }
  return result;
}

}  // namespace sddete
