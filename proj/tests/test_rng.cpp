#include <doctest.h>

#include <cmath>
#include <vector>

#include "sddete/rng.hpp"

using namespace sddete;

TEST_CASE("substream is a pure function of seed, index and purpose") {
  RngStream a = substream(42, 7, "rd");
  RngStream b = substream(42, 7, "rd");
  for (int i = 0; i < 200; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("substreams with different purposes or indices diverge") {
  RngStream a = substream(42, 7, "rd");
  RngStream b = substream(42, 7, "k");
  RngStream c = substream(42, 8, "rd");
  CHECK(a.next_u64() != b.next_u64());
  CHECK(substream(42, 7, "rd").next_u64() != c.next_u64());
}

TEST_CASE("fork derives from the stream seed, not from draw position") {
  RngStream parent(99);
  RngStream f1 = parent.fork(3, "tree");
  parent.next_u64();
  parent.next_u64();
  RngStream f2 = parent.fork(3, "tree");
  CHECK(f1.next_u64() == f2.next_u64());
}

TEST_CASE("uniform_index stays in range and covers a small domain evenly") {
  RngStream rng(1);
  std::vector<int> hits(6, 0);
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) {
    auto v = rng.uniform_index(6);
    REQUIRE(v < 6);
    ++hits[v];
  }
  for (int h : hits) {
    CHECK(h > draws / 6 - 600);
    CHECK(h < draws / 6 + 600);
  }
  CHECK(RngStream(5).uniform_index(1) == 0);
}

TEST_CASE("uniform_int covers both endpoints") {
  RngStream rng(2);
  bool lo = false, hi = false;
  for (int i = 0; i < 1000; ++i) {
    auto v = rng.uniform_int(-3, 3);
    REQUIRE(v >= -3);
    REQUIRE(v <= 3);
    lo = lo || v == -3;
    hi = hi || v == 3;
  }
  CHECK(lo);
  CHECK(hi);
}

TEST_CASE("uniform_real lies in the half-open unit interval") {
  RngStream rng(3);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    double v = rng.uniform_real();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
    sum += v;
  }
  CHECK(std::abs(sum / 100000 - 0.5) < 0.01);
}

TEST_CASE("normal has unit moments") {
  RngStream rng(4);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double v = rng.normal();
    sum += v;
    sq += v * v;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("uniform_index rejects an empty range") {
  RngStream rng(5);
  CHECK_THROWS_AS(rng.uniform_index(0), ParameterError);
}
