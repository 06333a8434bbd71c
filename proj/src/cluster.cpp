#include "sddete/cluster.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "sddete/errors.hpp"

namespace sddete {

namespace {

double sqdist(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

std::vector<double> mean_of(const std::vector<std::vector<double>>& pts,
                            const std::vector<std::uint32_t>& members,
                            const std::vector<char>& side, char which) {
  std::vector<double> m(pts[members[0]].size(), 0.0);
  std::size_t count = 0;
  for (std::size_t j = 0; j < members.size(); ++j) {
    if (side[j] != which) continue;
    const auto& p = pts[members[j]];
    for (std::size_t d = 0; d < m.size(); ++d) m[d] += p[d];
    ++count;
  }
  for (auto& v : m) v /= static_cast<double>(count);
  return m;
}

}  // namespace

int ClusterModel::assign(std::span<const double> point) const {
  if (nodes.empty()) throw ParameterError("assign: empty model");
  if (point.size() != arity())
    throw ShapeError("assign: point arity " + std::to_string(point.size()) +
                     " differs from model arity " + std::to_string(arity()));
  int idx = 0;
  while (!nodes[static_cast<std::size_t>(idx)].is_leaf()) {
    const auto& node = nodes[static_cast<std::size_t>(idx)];
    double dl = sqdist(point, nodes[static_cast<std::size_t>(node.left)].centroid);
    double dr = sqdist(point, nodes[static_cast<std::size_t>(node.right)].centroid);
    idx = dl <= dr ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(idx)].leaf_id;
}

ClusterModel fit_bisecting_kmeans(const PTable<std::vector<double>>& points, int k,
                                  RngStream& rng, int max_iter) {
  if (k < 1) throw ParameterError("fit_bisecting_kmeans: k must be positive");
  if (max_iter < 1) throw ParameterError("fit_bisecting_kmeans: max_iter must be positive");
  if (points.empty()) throw ParameterError("fit_bisecting_kmeans: empty input");

  std::vector<std::vector<double>> pts = points.to_records();
  std::size_t arity = pts[0].size();
  for (const auto& p : pts)
    if (p.size() != arity) throw ShapeError("fit_bisecting_kmeans: points have differing arity");

  ClusterModel model;
  model.requested = k;
  std::vector<std::vector<std::uint32_t>> members(1);
  std::vector<char> indivisible(1, 0);
  {
    members[0].resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) members[0][i] = static_cast<std::uint32_t>(i);
    ClusterNode root;
    root.centroid.assign(arity, 0.0);
    for (const auto& p : pts)
      for (std::size_t d = 0; d < arity; ++d) root.centroid[d] += p[d];
    for (auto& v : root.centroid) v /= static_cast<double>(pts.size());
    root.size = pts.size();
    model.nodes.push_back(std::move(root));
  }

  int leaves = 1;
  while (leaves < k) {
    // Largest splittable leaf; ties go to the earliest created node.
    int pick = -1;
    std::size_t best_size = 0;
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
      const auto& node = model.nodes[i];
      if (!node.is_leaf() || indivisible[i] || node.size < 2) continue;
      if (node.size > best_size) {
        best_size = node.size;
        pick = static_cast<int>(i);
      }
    }
    if (pick < 0) break;

    auto& mem = members[static_cast<std::size_t>(pick)];
    std::vector<double> c1 = pts[mem[rng.uniform_index(mem.size())]];
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t j = 0; j < mem.size(); ++j) {
      double d = sqdist(pts[mem[j]], c1);
      if (d > far_d) {
        far_d = d;
        far = j;
      }
    }
    if (far_d == 0.0) {
      indivisible[static_cast<std::size_t>(pick)] = 1;  // all members coincide
      continue;
    }
    std::vector<double> c2 = pts[mem[far]];

    std::vector<char> side(mem.size(), 2);
    for (int it = 0; it < max_iter; ++it) {
      bool changed = false;
      std::size_t n0 = 0;
      for (std::size_t j = 0; j < mem.size(); ++j) {
        const auto& p = pts[mem[j]];
        char s = sqdist(p, c1) <= sqdist(p, c2) ? 0 : 1;
        if (s != side[j]) changed = true;
        side[j] = s;
        n0 += (s == 0);
      }
      if (n0 == 0 || n0 == mem.size()) {
        // One side emptied: hand it the point farthest from the surviving
        // centroid.
        const auto& surviving = n0 == 0 ? c2 : c1;
        std::size_t move = 0;
        double move_d = -1.0;
        for (std::size_t j = 0; j < mem.size(); ++j) {
          double d = sqdist(pts[mem[j]], surviving);
          if (d > move_d) {
            move_d = d;
            move = j;
          }
        }
        side[move] = n0 == 0 ? 0 : 1;
        changed = true;
      }
      c1 = mean_of(pts, mem, side, 0);
      c2 = mean_of(pts, mem, side, 1);
      if (!changed) break;
    }

    std::vector<std::uint32_t> left_members, right_members;
    for (std::size_t j = 0; j < mem.size(); ++j)
      (side[j] == 0 ? left_members : right_members).push_back(mem[j]);

    int left_idx = static_cast<int>(model.nodes.size());
    ClusterNode left;
    left.centroid = std::move(c1);
    left.size = left_members.size();
    model.nodes.push_back(std::move(left));
    members.push_back(std::move(left_members));
    indivisible.push_back(0);

    int right_idx = static_cast<int>(model.nodes.size());
    ClusterNode right;
    right.centroid = std::move(c2);
    right.size = right_members.size();
    model.nodes.push_back(std::move(right));
    members.push_back(std::move(right_members));
    indivisible.push_back(0);

    model.nodes[static_cast<std::size_t>(pick)].left = left_idx;
    model.nodes[static_cast<std::size_t>(pick)].right = right_idx;
    members[static_cast<std::size_t>(pick)].clear();
    members[static_cast<std::size_t>(pick)].shrink_to_fit();
    ++leaves;
  }

  // Leaf ids by left-first depth-first order.
  int next_id = 0;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int idx = stack.back();
    stack.pop_back();
    auto& node = model.nodes[static_cast<std::size_t>(idx)];
    if (node.is_leaf()) {
      node.leaf_id = next_id++;
    } else {
      stack.push_back(node.right);
      stack.push_back(node.left);
    }
  }
  model.leaf_count = next_id;
  return model;
}

PTable<int> assign_clusters(const ClusterModel& model,
                            const PTable<std::vector<double>>& points) {
  return pmap(points, [&model](const std::vector<double>& p) { return model.assign(p); });
}

}  // namespace sddete
