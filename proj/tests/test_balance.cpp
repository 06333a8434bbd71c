#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "sddete/balance.hpp"
#include "sddete/errors.hpp"
#include "sddete/rng.hpp"

#include "oracles.hpp"

using namespace sddete;

namespace {

// n0 majority (label 0) then n1 minority (label 1), distinct feature values.
PTable<LabeledPoint> imbalanced(std::size_t n0, std::size_t n1,
                                std::size_t partitions = 4) {
  std::vector<LabeledPoint> records;
  for (std::size_t i = 0; i < n0; ++i)
    records.push_back({{static_cast<double>(i), 0.0}, 0});
  for (std::size_t i = 0; i < n1; ++i)
    records.push_back({{static_cast<double>(1000 + i), 1.0}, 1});
  return PTable<LabeledPoint>::from_records(std::move(records), partitions);
}

std::multiset<std::vector<double>> feature_multiset(const PTable<LabeledPoint>& t,
                                                    int label) {
  std::multiset<std::vector<double>> out;
  for (const auto& r : t.to_records())
    if (r.label == label) out.insert(r.features);
  return out;
}

}  // namespace

TEST_CASE("ros balances by appending redrawn minority copies") {
  auto data = imbalanced(10, 3);
  RngStream rng(7);
  SamplerReport report;
  auto out = ros(data, rng, &report);

  auto s = class_stats(out);
  CHECK(s.count(0) == 10);
  CHECK(s.count(1) == 10);
  CHECK(out.size() == 20);

  // Originals first, in their input order.
  auto rows = out.to_records();
  auto original = data.to_records();
  for (std::size_t i = 0; i < 13; ++i) CHECK(rows[i] == original[i]);

  // Every replica is a copy of some minority original.
  auto originals = feature_multiset(data, 1);
  for (std::size_t i = 13; i < 20; ++i) {
    CHECK(rows[i].label == 1);
    CHECK(originals.count(rows[i].features) == 1);
  }

  CHECK(report.before.count(1) == 3);
  CHECK(report.after.count(1) == 10);
}

TEST_CASE("ros leaves balanced input unchanged") {
  auto data = imbalanced(4, 4);
  RngStream rng(7);
  auto out = ros(data, rng);
  CHECK(out.to_records() == data.to_records());
}

TEST_CASE("ros draws differ across streams but reproduce within one") {
  auto data = imbalanced(50, 5);
  RngStream a(1), b(1), c(2);
  auto ra = ros(data, a).to_records();
  auto rb = ros(data, b).to_records();
  auto rc = ros(data, c).to_records();
  CHECK(ra == rb);
  CHECK(ra != rc);
}

TEST_CASE("rus keeps the minority and a uniform majority subset") {
  auto data = imbalanced(10, 3);
  RngStream rng(13);
  SamplerReport report;
  auto out = rus(data, rng, &report);

  auto s = class_stats(out);
  CHECK(s.count(0) == 3);
  CHECK(s.count(1) == 3);

  // Output is a subsequence of the input.
  auto rows = out.to_records();
  auto original = data.to_records();
  std::size_t pos = 0;
  for (const auto& r : rows) {
    while (pos < original.size() && !(original[pos] == r)) ++pos;
    REQUIRE(pos < original.size());
    ++pos;
  }

  // All three minority records survive.
  CHECK(feature_multiset(out, 1) == feature_multiset(data, 1));
  CHECK(report.before.count(0) == 10);
  CHECK(report.after.count(0) == 3);
}

TEST_CASE("rus leaves balanced input unchanged") {
  auto data = imbalanced(4, 4);
  RngStream rng(13);
  CHECK(rus(data, rng).to_records() == data.to_records());
}

TEST_CASE("samplers reject single-class input") {
  std::vector<LabeledPoint> records{{{1.0}, 0}, {{2.0}, 0}};
  auto data = PTable<LabeledPoint>::from_records(records, 2);
  RngStream rng(1);
  CHECK_THROWS_AS(ros(data, rng), BalanceError);
  CHECK_THROWS_AS(rus(data, rng), BalanceError);
  CHECK_THROWS_AS(smote(data, 3, rng), BalanceError);
}

TEST_CASE("knn_exact agrees with the brute-force oracle") {
  RngStream rng(29);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 30; ++i) pts.push_back({rng.normal(), rng.normal(), rng.normal()});
  for (std::size_t k : {1u, 3u, 7u, 29u, 40u}) {
    auto got = knn_exact(pts, k);
    auto want = oracle::brute_knn(pts, k);
    CHECK(got == want);
  }
}

TEST_CASE("knn_exact breaks distance ties by index") {
  // Four corners of a square: each point has two neighbors at equal
  // distance; the lower index must come first.
  std::vector<std::vector<double>> pts{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  auto got = knn_exact(pts, 2);
  CHECK(got[0] == std::vector<std::size_t>{1, 2});
  CHECK(got[3] == std::vector<std::size_t>{1, 2});
}

TEST_CASE("smote with two minority points interpolates their segment") {
  std::vector<LabeledPoint> records;
  for (int i = 0; i < 6; ++i) records.push_back({{10.0 + i, 5.0}, 0});
  records.push_back({{0.0, 0.0}, 1});
  records.push_back({{1.0, 1.0}, 1});
  auto data = PTable<LabeledPoint>::from_records(std::move(records), 3);

  RngStream rng(37);
  auto out = smote(data, 5, rng);  // k clamps to 1
  auto s = class_stats(out);
  CHECK(s.count(0) == 6);
  CHECK(s.count(1) == 6);

  auto rows = out.to_records();
  for (std::size_t i = 8; i < rows.size(); ++i) {
    REQUIRE(rows[i].label == 1);
    double x = rows[i].features[0], y = rows[i].features[1];
    CHECK(x == doctest::Approx(y));  // on the segment (0,0)-(1,1)
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
}

TEST_CASE("smote synthetics stay inside the minority bounding box") {
  RngStream data_rng(41);
  std::vector<LabeledPoint> records;
  for (int i = 0; i < 100; ++i)
    records.push_back({{data_rng.normal(), data_rng.normal()}, 0});
  double lo0 = 1e300, hi0 = -1e300, lo1 = 1e300, hi1 = -1e300;
  for (int i = 0; i < 20; ++i) {
    double a = 5.0 + data_rng.uniform_real();
    double b = -3.0 + 2.0 * data_rng.uniform_real();
    lo0 = std::min(lo0, a), hi0 = std::max(hi0, a);
    lo1 = std::min(lo1, b), hi1 = std::max(hi1, b);
    records.push_back({{a, b}, 1});
  }
  auto data = PTable<LabeledPoint>::from_records(std::move(records), 4);

  RngStream rng(43);
  SamplerReport report;
  auto out = smote(data, 5, rng, &report);
  CHECK(out.size() == 200);
  CHECK(report.after.count(1) == 100);

  auto rows = out.to_records();
  // Originals preserved in place, 80 synthetics appended.
  auto original_minority = feature_multiset(data, 1);
  for (std::size_t i = 120; i < 200; ++i) {
    REQUIRE(rows[i].label == 1);
    CHECK(rows[i].features[0] >= lo0);
    CHECK(rows[i].features[0] <= hi0);
    CHECK(rows[i].features[1] >= lo1);
    CHECK(rows[i].features[1] <= hi1);
  }
  for (std::size_t i = 0; i < 120; ++i) CHECK(rows[i] == data.to_records()[i]);
}

TEST_CASE("smote needs at least two minority records and a positive k") {
  std::vector<LabeledPoint> records{{{1.0}, 0}, {{2.0}, 0}, {{3.0}, 1}};
  auto data = PTable<LabeledPoint>::from_records(records, 2);
  RngStream rng(1);
  CHECK_THROWS_AS(smote(data, 5, rng), BalanceError);
  auto ok = imbalanced(5, 2);
  CHECK_THROWS_AS(smote(ok, 0, rng), ParameterError);
}

TEST_CASE("cros with a single cluster reduces to plain ros") {
  auto data = imbalanced(12, 4);
  auto clusters = pmap(data, [](const LabeledPoint&) { return 0; });
  RngStream s1(55);
  auto via_cros = cros(data, clusters, s1);
  RngStream s2(55);
  auto forked = s2.fork(0, "ros");
  auto via_ros = ros(data, forked);
  CHECK(via_cros.to_records() == via_ros.to_records());
}

TEST_CASE("cros balances each mixed cluster separately") {
  // Cluster 0: 8 majority, 2 minority. Cluster 1: 2 majority, 8 minority.
  std::vector<LabeledPoint> records;
  std::vector<int> ids;
  for (int i = 0; i < 8; ++i) records.push_back({{double(i), 0.0}, 0}), ids.push_back(0);
  for (int i = 0; i < 2; ++i) records.push_back({{double(100 + i), 0.0}, 1}), ids.push_back(0);
  for (int i = 0; i < 2; ++i) records.push_back({{double(200 + i), 1.0}, 0}), ids.push_back(1);
  for (int i = 0; i < 8; ++i) records.push_back({{double(300 + i), 1.0}, 1}), ids.push_back(1);
  auto data = PTable<LabeledPoint>::from_records(std::move(records), 3);
  auto clusters = PTable<int>::from_records(std::move(ids), 3);

  RngStream rng(77);
  SamplerReport report;
  auto out = cros(data, clusters, rng, &report);

  // Each cluster balances to 8/8 -> 32 records total.
  CHECK(out.size() == 32);
  auto s = class_stats(out);
  CHECK(s.count(0) == 16);
  CHECK(s.count(1) == 16);

  // Cluster 0's records (feature[1] == 0) come first: 16 of them.
  auto rows = out.to_records();
  for (std::size_t i = 0; i < 16; ++i) CHECK(rows[i].features[1] == 0.0);
  for (std::size_t i = 16; i < 32; ++i) CHECK(rows[i].features[1] == 1.0);

  REQUIRE(report.per_cluster.size() == 2);
  CHECK(report.per_cluster[0].cluster_id == 0);
  CHECK(report.per_cluster[0].before.count(0) == 8);
  CHECK(report.per_cluster[0].before.count(1) == 2);
  CHECK(report.per_cluster[0].after.count(1) == 8);
  CHECK(report.per_cluster[1].cluster_id == 1);
  CHECK(report.per_cluster[1].before.count(0) == 2);
  CHECK(report.per_cluster[1].after.count(0) == 8);
  CHECK(report.before.total() == 20);
  CHECK(report.after.total() == 32);
}

TEST_CASE("cros passes single-class clusters through untouched") {
  std::vector<LabeledPoint> records;
  std::vector<int> ids;
  // Cluster 0: majority only. Cluster 1: mixed 4/1.
  for (int i = 0; i < 5; ++i) records.push_back({{double(i)}, 0}), ids.push_back(0);
  for (int i = 0; i < 4; ++i) records.push_back({{double(50 + i)}, 0}), ids.push_back(1);
  records.push_back({{99.0}, 1}), ids.push_back(1);
  auto data = PTable<LabeledPoint>::from_records(std::move(records), 2);
  auto clusters = PTable<int>::from_records(std::move(ids), 2);

  RngStream rng(88);
  SamplerReport report;
  auto out = cros(data, clusters, rng, &report);

  auto rows = out.to_records();
  // Cluster 0 comes through as-is.
  for (int i = 0; i < 5; ++i) {
    CHECK(rows[i].features[0] == double(i));
    CHECK(rows[i].label == 0);
  }
  // Cluster 1 balances 4/4.
  auto s = class_stats(out);
  CHECK(s.count(0) == 9);
  CHECK(s.count(1) == 4);
  CHECK(out.size() == 13);

  // Minority originals all survive as a sub-multiset.
  auto before_min = feature_multiset(data, 1);
  auto after_min = feature_multiset(out, 1);
  for (const auto& f : before_min) CHECK(after_min.count(f) >= 1);
}

TEST_CASE("cros rejects misaligned cluster tables") {
  auto data = imbalanced(6, 2, 2);
  auto clusters = PTable<int>::from_records(std::vector<int>(7, 0), 2);
  RngStream rng(1);
  CHECK_THROWS_AS(cros(data, clusters, rng), ShapeError);
}

TEST_CASE("cros is reproducible") {
  auto data = imbalanced(40, 7, 5);
  auto clusters = pmap(data, [](const LabeledPoint& r) {
    return static_cast<int>(r.features[0]) % 3;
  });
  RngStream a(3), b(3);
  CHECK(cros(data, clusters, a).to_records() == cros(data, clusters, b).to_records());
}
