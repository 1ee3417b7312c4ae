#include "pdet/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace pdet::kernels {

namespace detail {

double dot_scalar(const double*, const double*, std::size_t);
double sum_scalar(const double*, std::size_t);
double sumsq_diff_scalar(const double*, const double*, std::size_t);
void add_scalar(double*, const double*, const double*, std::size_t);
void sub_scalar(double*, const double*, const double*, std::size_t);
void scale_scalar(double*, double, std::size_t);
void axpy_scalar(double*, double, const double*, std::size_t);
void lerp_scalar(double*, const double*, double, std::size_t);
void relu_scalar(double*, const double*, std::size_t);
void relu_backward_scalar(double*, const double*, std::size_t);
void adam_update_scalar(double*, double*, double*, const double*, std::size_t,
                        double, double, double, double, double, double);

#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(const double*, const double*, std::size_t);
double sum_avx2(const double*, std::size_t);
double sumsq_diff_avx2(const double*, const double*, std::size_t);
void add_avx2(double*, const double*, const double*, std::size_t);
void sub_avx2(double*, const double*, const double*, std::size_t);
void scale_avx2(double*, double, std::size_t);
void axpy_avx2(double*, double, const double*, std::size_t);
void lerp_avx2(double*, const double*, double, std::size_t);
void relu_avx2(double*, const double*, std::size_t);
void relu_backward_avx2(double*, const double*, std::size_t);
void adam_update_avx2(double*, double*, double*, const double*, std::size_t,
                      double, double, double, double, double, double);
#endif

}  // namespace detail

namespace {

struct Ops {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*sumsq_diff)(const double*, const double*, std::size_t);
  void (*add)(double*, const double*, const double*, std::size_t);
  void (*sub)(double*, const double*, const double*, std::size_t);
  void (*scale)(double*, double, std::size_t);
  void (*axpy)(double*, double, const double*, std::size_t);
  void (*lerp)(double*, const double*, double, std::size_t);
  void (*relu)(double*, const double*, std::size_t);
  void (*relu_backward)(double*, const double*, std::size_t);
  void (*adam_update)(double*, double*, double*, const double*, std::size_t,
                      double, double, double, double, double, double);
};

constexpr Ops kScalarOps = {
    detail::dot_scalar,        detail::sum_scalar,
    detail::sumsq_diff_scalar, detail::add_scalar,
    detail::sub_scalar,        detail::scale_scalar,
    detail::axpy_scalar,       detail::lerp_scalar,
    detail::relu_scalar,       detail::relu_backward_scalar,
    detail::adam_update_scalar};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Ops kAvx2Ops = {
    detail::dot_avx2,        detail::sum_avx2,  detail::sumsq_diff_avx2,
    detail::add_avx2,        detail::sub_avx2,  detail::scale_avx2,
    detail::axpy_avx2,       detail::lerp_avx2, detail::relu_avx2,
    detail::relu_backward_avx2, detail::adam_update_avx2};
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

struct Dispatch {
  Isa isa;
  const Ops* ops;

  Dispatch() {
    isa = cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
    if (const char* env = std::getenv("PERTURB_DETECT_ISA")) {
      const std::string want(env);
      if (want == "scalar") {
        isa = Isa::scalar;
      } else if (want == "avx2") {
        if (!cpu_has_avx2())
          throw std::invalid_argument(
              "PERTURB_DETECT_ISA=avx2 but the CPU lacks AVX2");
        isa = Isa::avx2;
      } else if (!want.empty()) {
        throw std::invalid_argument("unknown PERTURB_DETECT_ISA value '" +
                                    want + "' (expected scalar or avx2)");
      }
    }
    set(isa);
  }

  void set(Isa next) {
    isa = next;
#if defined(__x86_64__) || defined(_M_X64)
    ops = (next == Isa::avx2) ? &kAvx2Ops : &kScalarOps;
#else
    ops = &kScalarOps;
#endif
  }
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

Isa active_isa() { return dispatch().isa; }

bool isa_supported(Isa isa) {
  return isa == Isa::scalar || (isa == Isa::avx2 && cpu_has_avx2());
}

void force_isa(Isa isa) {
  if (!isa_supported(isa))
    throw std::invalid_argument(std::string("ISA not supported on this CPU: ") +
                                isa_name(isa));
  dispatch().set(isa);
}

const char* isa_name(Isa isa) {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().ops->dot(a, b, n);
}
double sum(const double* a, std::size_t n) { return dispatch().ops->sum(a, n); }
double sumsq_diff(const double* a, const double* b, std::size_t n) {
  return dispatch().ops->sumsq_diff(a, b, n);
}
void add(double* out, const double* a, const double* b, std::size_t n) {
  dispatch().ops->add(out, a, b, n);
}
void sub(double* out, const double* a, const double* b, std::size_t n) {
  dispatch().ops->sub(out, a, b, n);
}
void scale(double* y, double alpha, std::size_t n) {
  dispatch().ops->scale(y, alpha, n);
}
void axpy(double* y, double alpha, const double* x, std::size_t n) {
  dispatch().ops->axpy(y, alpha, x, n);
}
void lerp(double* target, const double* online, double tau, std::size_t n) {
  dispatch().ops->lerp(target, online, tau, n);
}
void relu(double* out, const double* in, std::size_t n) {
  dispatch().ops->relu(out, in, n);
}
void relu_backward(double* g, const double* pre, std::size_t n) {
  dispatch().ops->relu_backward(g, pre, n);
}
void adam_update(double* p, double* m, double* v, const double* g,
                 std::size_t n, double lr, double b1, double b2, double eps,
                 double bc1, double bc2) {
  dispatch().ops->adam_update(p, m, v, g, n, lr, b1, b2, eps, bc1, bc2);
}

void matvec(const double* W, const double* x, const double* b, double* y,
            std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = dot(W + r * cols, x, cols);
    if (b) y[r] += b[r];
  }
}

void matvec_t_acc(const double* W, const double* g, double* y,
                  std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(y, g[r], W + r * cols, cols);
}

void outer_acc(double* dW, const double* g, const double* x, std::size_t rows,
               std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(dW + r * cols, g[r], x, cols);
}

}  // namespace pdet::kernels
