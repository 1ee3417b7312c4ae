#include "pdet/rng.hpp"

#include <cmath>

#include "doctest.h"

using namespace pdet;

TEST_CASE("streams are reproducible and substreams are independent") {
  rng::Stream a(123);
  rng::Stream b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  CHECK(rng::substream_seed(1, "noise") != rng::substream_seed(1, "agent"));
  CHECK(rng::substream_seed(1, "noise") != rng::substream_seed(2, "noise"));
  CHECK(rng::substream_seed(1, "noise") == rng::substream_seed(1, "noise"));
}

TEST_CASE("uniform01 stays in [0,1) and below() respects its bound") {
  rng::Stream rs(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rs.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < 10000; ++i) CHECK(rs.below(13) < 13);
}

TEST_CASE("gaussian moments are sane") {
  rng::Stream rs(99);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rs.gaussian();
    sum += g;
    sumsq += g * g;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::fabs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}
