#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sddete/cluster.hpp"
#include "sddete/preprocess.hpp"
#include "sddete/tree.hpp"

namespace sddete {

struct DeteParams {
  int iter = 10;        // trees in the ensemble
  int cuts = 5;         // discretization buckets per feature
  int max_clust = 10;   // upper bound on clusters per iteration
  int tree_depth = 10;
  std::uint64_t seed = 0;
  int max_bins = 32;
  int kmeans_max_iter = 20;

  // plain_ros skips clustering and balances each iteration's joined data
  // globally; used to measure what cluster-wise balancing contributes.
  enum class Balancer { cluster_ros, plain_ros };
  Balancer balancer = Balancer::cluster_ros;

  bool operator==(const DeteParams&) const = default;
};

struct IterationModel {
  RdModel rd;
  PcaModel pca;
  TreeModel tree;

  bool operator==(const IterationModel&) const = default;
};

struct DeteModel {
  int format_version = 1;
  int iter = 0;
  int num_classes = 2;
  std::vector<IterationModel> iterations;

  std::size_t arity() const {
    return iterations.empty() ? 0 : iterations[0].rd.arity();
  }

  bool operator==(const DeteModel&) const = default;
};

// Learns one tree per iteration: discretize with per-iteration random
// thresholds, project onto a random number of principal components, join
// both views, split the joined records into clusters, balance each cluster
// locally, and grow a tree on the result. Every random choice comes from a
// substream keyed by (seed, iteration, purpose), so the model is a pure
// function of data and params; iterations may be fit concurrently.
DeteModel fit_sd_dete(const PTable<LabeledPoint>& data, const DeteParams& params);

// Sum over iterations of each tree's leaf probability vector for the point,
// after applying that iteration's discretization and projection. The two
// components sum to the iteration count.
std::array<double, 2> predict_scores(const DeteModel& model, std::span<const double> point);

// Argmax of predict_scores; ties go to the lower class.
int predict(const DeteModel& model, std::span<const double> point);

PTable<int> predict_table(const DeteModel& model, const PTable<LabeledPoint>& data);

// Single JSON document with every threshold, component, and tree node at
// full precision; save followed by load reproduces the model exactly, and
// the bytes are identical across runs and worker counts. Unversioned or
// truncated files fail with PersistenceError before any model is returned.
void save_model(const DeteModel& model, const std::filesystem::path& path);
DeteModel load_model(const std::filesystem::path& path);

}  // namespace sddete
