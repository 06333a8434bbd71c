#include "sddete/preprocess.hpp"

#include <algorithm>
#include <set>
#include <string>

#include <Eigen/Dense>

#include "sddete/errors.hpp"

namespace sddete {

namespace {

std::size_t table_arity(const PTable<LabeledPoint>& data) {
  if (data.empty()) throw ParameterError("empty table");
  return data.global_at(0).features.size();
}

// cuts - 1 distinct global indices, deterministic in the stream's draws.
std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t want, RngStream& rng) {
  std::vector<std::size_t> picked;
  picked.reserve(want);
  if (want * 2 >= n) {
    // Dense case: partial Fisher-Yates over all indices.
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    for (std::size_t i = 0; i < want; ++i) {
      std::size_t j = i + rng.uniform_index(n - i);
      std::swap(all[i], all[j]);
      picked.push_back(all[i]);
    }
  } else {
    std::set<std::size_t> seen;
    while (seen.size() < want) {
      std::size_t i = rng.uniform_index(n);
      if (seen.insert(i).second) picked.push_back(i);
    }
  }
  return picked;
}

}  // namespace

RdModel fit_rd(const PTable<LabeledPoint>& data, int cuts, RngStream& rng) {
  if (cuts < 2) throw ParameterError("fit_rd: cuts must be at least 2");
  std::size_t arity = table_arity(data);
  std::size_t n = data.size();
  std::size_t want = static_cast<std::size_t>(cuts - 1);
  if (want > n)
    throw DataError("fit_rd: need " + std::to_string(want) + " records, have " +
                    std::to_string(n));

  auto picked = sample_distinct(n, want, rng);
  RdModel model;
  model.cuts = cuts;
  model.thresholds.assign(arity, {});
  for (auto& t : model.thresholds) t.reserve(want);
  for (std::size_t idx : picked) {
    const LabeledPoint& r = data.global_at(idx);
    if (r.features.size() != arity) throw ShapeError("fit_rd: records have differing arity");
    for (std::size_t j = 0; j < arity; ++j) model.thresholds[j].push_back(r.features[j]);
  }
  for (auto& t : model.thresholds) std::sort(t.begin(), t.end());
  return model;
}

std::vector<int> apply_rd(const RdModel& model, std::span<const double> point) {
  if (point.size() != model.arity())
    throw ShapeError("apply_rd: point arity " + std::to_string(point.size()) +
                     " differs from model arity " + std::to_string(model.arity()));
  std::vector<int> bins(point.size());
  for (std::size_t j = 0; j < point.size(); ++j) {
    const auto& t = model.thresholds[j];
    bins[j] = static_cast<int>(std::upper_bound(t.begin(), t.end(), point[j]) - t.begin());
  }
  return bins;
}

PTable<LabeledPoint> apply_rd_table(const RdModel& model, const PTable<LabeledPoint>& data) {
  return pmap(data, [&model](const LabeledPoint& r) {
    auto bins = apply_rd(model, r.features);
    LabeledPoint out;
    out.features.assign(bins.begin(), bins.end());
    out.label = r.label;
    return out;
  });
}

PcaModel fit_pca(const PTable<LabeledPoint>& data, int k) {
  std::size_t arity = table_arity(data);
  std::size_t n = data.size();
  if (n < 2) throw DataError("fit_pca: need at least two records");
  if (k < 1 || static_cast<std::size_t>(k) > arity - 1)
    throw ParameterError("fit_pca: k must be in [1, arity - 1]");

  // Per-partition first and second moments, combined in partition order so
  // the sums are bit-stable for a fixed partition layout.
  struct Moments {
    std::size_t n = 0;
    Eigen::VectorXd sum;
    Eigen::MatrixXd outer;
  };
  const auto t = static_cast<Eigen::Index>(arity);
  Moments init;
  init.sum = Eigen::VectorXd::Zero(t);
  init.outer = Eigen::MatrixXd::Zero(t, t);
  Moments total = preduce(
      data, init,
      [&](const std::vector<LabeledPoint>& part) {
        Moments m;
        m.sum = Eigen::VectorXd::Zero(t);
        m.outer = Eigen::MatrixXd::Zero(t, t);
        for (const auto& r : part) {
          if (r.features.size() != arity)
            throw ShapeError("fit_pca: records have differing arity");
          Eigen::Map<const Eigen::VectorXd> x(r.features.data(), t);
          m.sum += x;
          m.outer.selfadjointView<Eigen::Lower>().rankUpdate(x);
          ++m.n;
        }
        return m;
      },
      [](Moments a, Moments b) {
        a.n += b.n;
        a.sum += b.sum;
        a.outer += b.outer;
        return a;
      });

  Eigen::VectorXd mean = total.sum / static_cast<double>(n);
  Eigen::MatrixXd cov = Eigen::MatrixXd(total.outer.selfadjointView<Eigen::Lower>());
  cov -= static_cast<double>(n) * mean * mean.transpose();
  cov /= static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("fit_pca: eigendecomposition failed");

  PcaModel model;
  model.mean.assign(mean.data(), mean.data() + arity);
  model.components.resize(static_cast<std::size_t>(k));
  model.explained_variance.resize(static_cast<std::size_t>(k));
  // Eigenvalues come back ascending; take the top k in descending order.
  for (int c = 0; c < k; ++c) {
    Eigen::Index col = t - 1 - c;
    Eigen::VectorXd v = solver.eigenvectors().col(col);
    // Sign convention: the largest-magnitude coordinate is positive (first
    // such coordinate wins on exact ties).
    Eigen::Index top = 0;
    for (Eigen::Index i = 1; i < t; ++i)
      if (std::abs(v[i]) > std::abs(v[top])) top = i;
    if (v[top] < 0) v = -v;
    model.components[static_cast<std::size_t>(c)].assign(v.data(), v.data() + arity);
    model.explained_variance[static_cast<std::size_t>(c)] = solver.eigenvalues()[col];
  }
  return model;
}

std::vector<double> apply_pca(const PcaModel& model, std::span<const double> point) {
  if (point.size() != model.arity())
    throw ShapeError("apply_pca: point arity " + std::to_string(point.size()) +
                     " differs from model arity " + std::to_string(model.arity()));
  std::vector<double> out(model.k(), 0.0);
  for (std::size_t c = 0; c < model.k(); ++c) {
    const auto& comp = model.components[c];
    double acc = 0.0;
    for (std::size_t j = 0; j < point.size(); ++j)
      acc += comp[j] * (point[j] - model.mean[j]);
    out[c] = acc;
  }
  return out;
}

PTable<LabeledPoint> apply_pca_table(const PcaModel& model, const PTable<LabeledPoint>& data) {
  return pmap(data, [&model](const LabeledPoint& r) {
    LabeledPoint out;
    out.features = apply_pca(model, r.features);
    out.label = r.label;
    return out;
  });
}

PTable<LabeledPoint> join_features(const PTable<LabeledPoint>& discretized,
                                   const PTable<LabeledPoint>& projected) {
  auto zipped = pzip(discretized, projected);
  return pmap(zipped, [](const std::pair<LabeledPoint, LabeledPoint>& pr) {
    if (pr.first.label != pr.second.label)
      throw ShapeError("join_features: label mismatch, inputs are misaligned");
    LabeledPoint out;
    out.features.reserve(pr.first.features.size() + pr.second.features.size());
    out.features.insert(out.features.end(), pr.first.features.begin(), pr.first.features.end());
    out.features.insert(out.features.end(), pr.second.features.begin(), pr.second.features.end());
    out.label = pr.first.label;
    return out;
  });
}

}  // namespace sddete
