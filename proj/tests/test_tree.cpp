#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "sddete/errors.hpp"
#include "sddete/parallel.hpp"
#include "sddete/rng.hpp"
#include "sddete/tree.hpp"

using namespace sddete;

namespace {

PTable<LabeledPoint> labeled(std::vector<std::pair<std::vector<double>, int>> rows,
                             std::size_t partitions = 3) {
  std::vector<LabeledPoint> records;
  for (auto& [f, y] : rows) records.push_back({std::move(f), y});
  return PTable<LabeledPoint>::from_records(std::move(records), partitions);
}

// Two unit-variance Gaussian classes at x0 = 0 and x0 = sep, other dims noise.
PTable<LabeledPoint> gaussian_pair(std::size_t per_class, double sep,
                                   std::size_t dims, RngStream& rng) {
  std::vector<LabeledPoint> records;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    int y = i < per_class ? 0 : 1;
    std::vector<double> f(dims);
    for (auto& v : f) v = rng.normal();
    if (y == 1) f[0] += sep;
    records.push_back({std::move(f), y});
  }
  return PTable<LabeledPoint>::from_records(std::move(records), 4);
}

double training_accuracy(const TreeModel& model, const PTable<LabeledPoint>& data) {
  std::size_t hit = 0;
  auto rows = data.to_records();
  for (const auto& r : rows) hit += predict_tree(model, r.features) == r.label;
  return static_cast<double>(hit) / static_cast<double>(rows.size());
}

}  // namespace

TEST_CASE("gini impurity anchor values") {
  std::vector<std::size_t> even{5, 5};
  CHECK(gini(even) == doctest::Approx(0.5));
  std::vector<std::size_t> skew{9, 1};
  CHECK(gini(skew) == doctest::Approx(0.18));
  std::vector<std::size_t> pure{7, 0};
  CHECK(gini(pure) == doctest::Approx(0.0));
  std::vector<std::size_t> empty;
  CHECK(gini(empty) == 0.0);
}

TEST_CASE("a separable value range produces one midpoint split") {
  auto data = labeled({{{1.0}, 0}, {{2.0}, 0}, {{3.0}, 0}, {{7.0}, 1}, {{8.0}, 1}});
  auto model = fit_tree(data, TreeParams{});

  REQUIRE(model.nodes.size() == 3);
  const auto& root = model.nodes[0];
  CHECK_FALSE(root.is_leaf());
  CHECK(root.feature == 0);
  CHECK(root.threshold == doctest::Approx(5.0));  // midpoint of 3 and 7
  CHECK(root.counts == std::array<std::size_t, 2>{3, 2});

  CHECK(model.nodes[root.left].counts == std::array<std::size_t, 2>{3, 0});
  CHECK(model.nodes[root.right].counts == std::array<std::size_t, 2>{0, 2});
  CHECK(training_accuracy(model, data) == 1.0);

  // Boundary routing: x <= threshold goes left.
  CHECK(predict_tree(model, std::vector<double>{5.0}) == 0);
  CHECK(predict_tree(model, std::vector<double>{5.0001}) == 1);
}

TEST_CASE("single-label data collapses to one leaf") {
  auto data = labeled({{{1.0}, 1}, {{5.0}, 1}, {{9.0}, 1}});
  auto model = fit_tree(data, TreeParams{});
  REQUIRE(model.nodes.size() == 1);
  CHECK(model.nodes[0].is_leaf());
  CHECK(model.depth() == 0);
  CHECK(model.leaf_count() == 1);
  auto scores = predict_scores_tree(model, std::vector<double>{2.0});
  CHECK(scores[1] == 1.0);
  CHECK(scores[0] == 0.0);
}

TEST_CASE("depth cap limits the tree to one split") {
  RngStream rng(3);
  auto data = gaussian_pair(50, 1.0, 2, rng);
  auto model = fit_tree(data, TreeParams{.max_depth = 1});
  CHECK(model.nodes.size() <= 3);
  CHECK(model.depth() <= 1);
}

TEST_CASE("leaf scores are the training class fractions") {
  // Only one possible threshold (values 1 and 5): left leaf holds 3:1.
  auto data = labeled({{{1.0}, 0}, {{1.0}, 0}, {{1.0}, 0}, {{1.0}, 1}, {{5.0}, 1}});
  auto model = fit_tree(data, TreeParams{});
  REQUIRE(model.nodes.size() == 3);
  CHECK(model.nodes[0].threshold == doctest::Approx(3.0));
  auto scores = predict_scores_tree(model, std::vector<double>{0.0});
  CHECK(scores[0] == doctest::Approx(0.75));
  CHECK(scores[1] == doctest::Approx(0.25));
  auto right = predict_scores_tree(model, std::vector<double>{5.0});
  CHECK(right[1] == doctest::Approx(1.0));
}

TEST_CASE("scores always sum to one at any depth") {
  RngStream rng(7);
  auto data = gaussian_pair(80, 0.7, 3, rng);
  auto model = fit_tree(data, TreeParams{.max_depth = 6});
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> q{rng.normal() * 2, rng.normal() * 2, rng.normal() * 2};
    auto s = predict_scores_tree(model, q);
    CHECK(s[0] + s[1] == doctest::Approx(1.0));
    CHECK(s[0] >= 0.0);
    CHECK(s[1] >= 0.0);
  }
}

TEST_CASE("every training point lands in a leaf that counted it") {
  RngStream rng(11);
  auto data = gaussian_pair(60, 1.2, 2, rng);
  auto model = fit_tree(data, TreeParams{.max_depth = 4});
  CHECK(model.depth() <= 4);

  // Routing all training rows reproduces each leaf's recorded counts.
  std::vector<std::array<std::size_t, 2>> seen(model.nodes.size(), {0, 0});
  for (const auto& r : data.to_records()) {
    std::size_t at = 0;
    while (!model.nodes[at].is_leaf()) {
      const auto& n = model.nodes[at];
      at = r.features[n.feature] <= n.threshold ? n.left : n.right;
    }
    ++seen[at][r.label];
  }
  for (std::size_t i = 0; i < model.nodes.size(); ++i)
    if (model.nodes[i].is_leaf()) CHECK(seen[i] == model.nodes[i].counts);
}

TEST_CASE("split structure depends only on value order") {
  // Exponentiating the feature preserves ranks, so both trees classify the
  // training values (and anything beyond the value range) identically.
  std::vector<double> values{-2.0, -1.0, 0.5, 1.0, 2.0};
  std::vector<int> classes{0, 0, 1, 1, 0};
  std::vector<std::pair<std::vector<double>, int>> plain, expd;
  for (std::size_t i = 0; i < values.size(); ++i) {
    plain.push_back({{values[i]}, classes[i]});
    expd.push_back({{std::exp(values[i])}, classes[i]});
  }
  TreeParams params{.max_depth = 3};
  auto m1 = fit_tree(labeled(std::move(plain)), params);
  auto m2 = fit_tree(labeled(std::move(expd)), params);
  for (double x : values)
    CHECK(predict_tree(m1, std::vector<double>{x}) ==
          predict_tree(m2, std::vector<double>{std::exp(x)}));
  CHECK(predict_tree(m1, std::vector<double>{-9.0}) ==
        predict_tree(m2, std::vector<double>{std::exp(-9.0)}));
  CHECK(predict_tree(m1, std::vector<double>{9.0}) ==
        predict_tree(m2, std::vector<double>{std::exp(9.0)}));
  CHECK(m1.leaf_count() == m2.leaf_count());
}

TEST_CASE("candidate capping snaps to quantile positions") {
  // 1000 distinct values, class flips at 500. With max_bins 8 the nearest
  // candidate sits between sorted positions 500 and 501, so one point is
  // conceded.
  std::vector<std::pair<std::vector<double>, int>> rows;
  for (int i = 0; i < 1000; ++i) rows.push_back({{double(i)}, i <= 500 ? 0 : 1});
  auto data = labeled(std::move(rows), 4);
  auto model = fit_tree(data, TreeParams{.max_depth = 1, .max_bins = 8});
  REQUIRE(model.nodes.size() == 3);
  CHECK(model.nodes[0].threshold == doctest::Approx(500.5));
  CHECK(training_accuracy(model, data) == 1.0);
}

TEST_CASE("min_instances_per_node is respected") {
  RngStream rng(13);
  auto data = gaussian_pair(40, 1.0, 2, rng);
  auto model = fit_tree(data, TreeParams{.max_depth = 8, .min_instances_per_node = 10});
  for (const auto& n : model.nodes)
    CHECK(n.counts[0] + n.counts[1] >= 10);
}

TEST_CASE("tree induction validates parameters and input") {
  auto data = labeled({{{1.0}, 0}, {{2.0}, 1}});
  CHECK_THROWS_AS(fit_tree(data, TreeParams{.max_depth = 0}), ParameterError);
  CHECK_THROWS_AS(fit_tree(data, TreeParams{.max_bins = 1}), ParameterError);
  CHECK_THROWS_AS(fit_tree(data, TreeParams{.min_instances_per_node = 0}), ParameterError);
  auto empty = PTable<LabeledPoint>::from_records({}, 2);
  CHECK_THROWS_AS(fit_tree(empty, TreeParams{}), ParameterError);
}

TEST_CASE("tree induction is deterministic") {
  RngStream rng(17);
  auto data = gaussian_pair(100, 0.8, 3, rng);
  auto m1 = fit_tree(data, TreeParams{});
  auto m2 = fit_tree(data, TreeParams{});
  CHECK(m1 == m2);
}

TEST_CASE("a single plain tree forest reduces to fit_tree") {
  RngStream rng(19);
  auto data = gaussian_pair(60, 1.0, 2, rng);
  ForestParams params;
  params.n_trees = 1;
  params.bootstrap = false;
  params.feature_subsampling = false;
  params.tree = TreeParams{};
  RngStream fit_rng(5);
  auto forest = fit_random_forest(data, params, fit_rng);
  REQUIRE(forest.trees.size() == 1);
  CHECK(forest.trees[0] == fit_tree(data, params.tree));
}

TEST_CASE("forests separate what a stump separates") {
  RngStream rng(23);
  auto data = gaussian_pair(100, 4.0, 3, rng);
  ForestParams params;
  params.n_trees = 15;
  RngStream fit_rng(7);
  auto forest = fit_random_forest(data, params, fit_rng);
  CHECK(forest.arity == 3);

  std::size_t hit = 0;
  for (const auto& r : data.to_records())
    hit += predict_forest(forest, r.features) == r.label;
  CHECK(static_cast<double>(hit) / 200.0 > 0.95);

  // Scores average the member trees.
  std::vector<double> q{2.0, 0.0, 0.0};
  auto s = predict_scores_forest(forest, q);
  double s0 = 0.0, s1 = 0.0;
  for (const auto& t : forest.trees) {
    auto ts = predict_scores_tree(t, q);
    s0 += ts[0];
    s1 += ts[1];
  }
  CHECK(s[0] == doctest::Approx(s0 / 15.0));
  CHECK(s[1] == doctest::Approx(s1 / 15.0));
  CHECK(s[0] + s[1] == doctest::Approx(1.0));
}

TEST_CASE("unanimous trees decide the vote") {
  auto data = labeled({{{1.0}, 0}, {{2.0}, 0}, {{8.0}, 1}, {{9.0}, 1}});
  ForestParams params;
  params.n_trees = 9;
  params.feature_subsampling = false;
  RngStream rng(29);
  auto forest = fit_random_forest(data, params, rng);
  // With one feature and clean separation every bootstrap keeps both
  // classes apart when it sees them; spot-check far ends.
  CHECK(predict_forest(forest, std::vector<double>{0.0}) == 0);
  CHECK(predict_forest(forest, std::vector<double>{10.0}) == 1);
}

TEST_CASE("forests are identical across worker counts") {
  RngStream rng(31);
  auto data = gaussian_pair(50, 1.0, 2, rng);
  ForestParams params;
  params.n_trees = 8;

  parallel::set_worker_count(1);
  RngStream r1(41);
  auto f1 = fit_random_forest(data, params, r1);
  parallel::set_worker_count(8);
  RngStream r8(41);
  auto f8 = fit_random_forest(data, params, r8);
  parallel::set_worker_count(1);
  CHECK(f1 == f8);
}

TEST_CASE("forest parameter validation") {
  auto data = labeled({{{1.0}, 0}, {{2.0}, 1}});
  ForestParams bad;
  bad.n_trees = 0;
  RngStream rng(1);
  CHECK_THROWS_AS(fit_random_forest(data, bad, rng), ParameterError);
}
