#include <catch2/catch_amalgamated.hpp>

#include "cmjlab/rng.hpp"
#include "cmjlab/stats.hpp"

using namespace cmjlab;

TEST_CASE("rng streams are deterministic and distinct") {
  Rng a = make_rng(42, 7, RngLane::kLife);
  Rng b = make_rng(42, 7, RngLane::kLife);
  Rng c = make_rng(42, 8, RngLane::kLife);
  Rng d = make_rng(42, 7, RngLane::kMarks);
  bool same = true, diff_index = false, diff_lane = false;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next_u64();
    same = same && va == b.next_u64();
    diff_index = diff_index || va != c.next_u64();
    diff_lane = diff_lane || va != d.next_u64();
  }
  CHECK(same);
  CHECK(diff_index);
  CHECK(diff_lane);
  CHECK(replica_seed(1, 2) == replica_seed(1, 2));
  CHECK(replica_seed(1, 2) != replica_seed(1, 3));
  CHECK(replica_seed(1, 2) != replica_seed(2, 2));
}

TEST_CASE("uniform stays inside the open unit interval") {
  Rng rng(123);
  RunningStat stat;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    stat.add(u);
  }
  CHECK(std::abs(stat.mean() - 0.5) <= 3.0 * stat.se());
}

TEST_CASE("exponential has the requested mean") {
  Rng rng(9001);
  RunningStat stat;
  for (int i = 0; i < 100000; ++i) stat.add(rng.exponential(2.5));
  CHECK(std::abs(stat.mean() - 1.0 / 2.5) <= 3.0 * stat.se());
}

TEST_CASE("bernoulli respects degenerate probabilities") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    CHECK(rng.bernoulli(1.0));
    CHECK_FALSE(rng.bernoulli(0.0));
  }
}
