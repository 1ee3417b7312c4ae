#include "pdet/kernels.hpp"

#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "pdet/rng.hpp"

using namespace pdet;

namespace {

std::vector<double> random_vec(std::size_t n, rng::Stream& rs,
                               double scale = 2.0) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * (rs.uniform01() - 0.5);
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool bitwise_equal(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

struct IsaGuard {
  kernels::Isa saved;
  IsaGuard() : saved(kernels::active_isa()) {}
  ~IsaGuard() { kernels::force_isa(saved); }
};

}  // namespace

TEST_CASE("kernel basics on the active ISA") {
  const std::vector<double> a = {1.0, 2.0, 3.0, 4.0, 5.0};
  const std::vector<double> b = {2.0, -1.0, 0.5, 1.0, -2.0};

  CHECK(kernels::dot(a.data(), b.data(), 5) == doctest::Approx(1.0 * 2 - 2 + 1.5 + 4 - 10));
  CHECK(kernels::sum(a.data(), 5) == doctest::Approx(15.0));
  CHECK(kernels::sumsq_diff(a.data(), a.data(), 5) == 0.0);

  std::vector<double> out(5);
  kernels::add(out.data(), a.data(), b.data(), 5);
  CHECK(out[0] == 3.0);
  kernels::sub(out.data(), a.data(), b.data(), 5);
  CHECK(out[4] == 7.0);

  std::vector<double> y = a;
  kernels::axpy(y.data(), 2.0, b.data(), 5);
  CHECK(y[0] == 5.0);

  std::vector<double> target = {0.0, 0.0};
  const std::vector<double> online = {1.0, -1.0};
  kernels::lerp(target.data(), online.data(), 0.005, 2);
  CHECK(target[0] == doctest::Approx(0.005));
  CHECK(target[1] == doctest::Approx(-0.005));
}

TEST_CASE("matvec against a hand-rolled reference") {
  rng::Stream rs(7);
  const std::size_t rows = 5, cols = 7;
  const std::vector<double> w = random_vec(rows * cols, rs);
  const std::vector<double> x = random_vec(cols, rs);
  const std::vector<double> bias = random_vec(rows, rs);

  std::vector<double> y(rows);
  kernels::matvec(w.data(), x.data(), bias.data(), y.data(), rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double expect = bias[r];
    for (std::size_t c = 0; c < cols; ++c) expect += w[r * cols + c] * x[c];
    CHECK(y[r] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("relu kernels honor the strict-positive gate") {
  const std::vector<double> pre = {-1.0, 0.0, 2.0, -0.0};
  std::vector<double> out(4);
  kernels::relu(out.data(), pre.data(), 4);
  CHECK(out == std::vector<double>{0.0, 0.0, 2.0, 0.0});

  std::vector<double> g = {5.0, 5.0, 5.0, 5.0};
  kernels::relu_backward(g.data(), pre.data(), 4);
  CHECK(g == std::vector<double>{0.0, 0.0, 5.0, 0.0});
}

TEST_CASE("scalar and AVX2 variants are bit-identical" *
          doctest::skip(!kernels::isa_supported(kernels::Isa::avx2))) {
  IsaGuard guard;
  rng::Stream rs(42);

  // sizes straddling the 4-lane blocking, including tails
  for (const std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 64u, 257u}) {
    const std::vector<double> a = random_vec(n, rs);
    const std::vector<double> b = random_vec(n, rs);

    kernels::force_isa(kernels::Isa::scalar);
    const double dot_s = kernels::dot(a.data(), b.data(), n);
    const double sum_s = kernels::sum(a.data(), n);
    const double ssd_s = kernels::sumsq_diff(a.data(), b.data(), n);
    std::vector<double> add_s(n), relu_s(n);
    kernels::add(add_s.data(), a.data(), b.data(), n);
    kernels::relu(relu_s.data(), a.data(), n);
    std::vector<double> axpy_s = a;
    kernels::axpy(axpy_s.data(), 0.73, b.data(), n);
    std::vector<double> lerp_s = a;
    kernels::lerp(lerp_s.data(), b.data(), 0.005, n);

    std::vector<double> p_s = a, m_s(n, 0.1), v_s(n, 0.2);
    kernels::adam_update(p_s.data(), m_s.data(), v_s.data(), b.data(), n,
                         3e-4, 0.9, 0.999, 1e-8, 0.1, 0.001);

    kernels::force_isa(kernels::Isa::avx2);
    CHECK(bitwise_equal(dot_s, kernels::dot(a.data(), b.data(), n)));
    CHECK(bitwise_equal(sum_s, kernels::sum(a.data(), n)));
    CHECK(bitwise_equal(ssd_s, kernels::sumsq_diff(a.data(), b.data(), n)));
    std::vector<double> add_v(n), relu_v(n);
    kernels::add(add_v.data(), a.data(), b.data(), n);
    kernels::relu(relu_v.data(), a.data(), n);
    CHECK(bitwise_equal(add_s, add_v));
    CHECK(bitwise_equal(relu_s, relu_v));
    std::vector<double> axpy_v = a;
    kernels::axpy(axpy_v.data(), 0.73, b.data(), n);
    CHECK(bitwise_equal(axpy_s, axpy_v));
    std::vector<double> lerp_v = a;
    kernels::lerp(lerp_v.data(), b.data(), 0.005, n);
    CHECK(bitwise_equal(lerp_s, lerp_v));

    std::vector<double> p_v = a, m_v(n, 0.1), v_v(n, 0.2);
    kernels::adam_update(p_v.data(), m_v.data(), v_v.data(), b.data(), n,
                         3e-4, 0.9, 0.999, 1e-8, 0.1, 0.001);
    CHECK(bitwise_equal(p_s, p_v));
    CHECK(bitwise_equal(m_s, m_v));
    CHECK(bitwise_equal(v_s, v_v));
  }
}

TEST_CASE("force_isa rejects unsupported targets gracefully") {
  CHECK(kernels::isa_supported(kernels::Isa::scalar));
  CHECK_NOTHROW(kernels::force_isa(kernels::active_isa()));
  CHECK(std::string(kernels::isa_name(kernels::Isa::scalar)) == "scalar");
  CHECK(std::string(kernels::isa_name(kernels::Isa::avx2)) == "avx2");
}
