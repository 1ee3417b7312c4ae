#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner-loop primitives on double arrays.
//
// Every kernel has a scalar reference implementation and (on x86-64) an AVX2
// variant; the active variant is chosen once at startup from CPUID and can be
// forced with force_isa() or the PERTURB_DETECT_ISA environment variable
// ("scalar" / "avx2").
//
// Contract: dispatch never changes results, only speed. Reductions are
// defined with a fixed 4-lane blocked accumulation order (element i goes to
// accumulator i & 3, lanes combined as (a0+a1)+(a2+a3)), elementwise kernels
// are plain per-lane IEEE ops with no FMA contraction, so the scalar and AVX2
// variants produce bit-identical output. The equivalence tests assert exactly
// that.
namespace pdet::kernels {

enum class Isa { scalar, avx2 };

// Variant currently dispatched to.
Isa active_isa();
bool isa_supported(Isa isa);
// Force a variant (tests, benchmarking). Throws std::invalid_argument if the
// CPU does not support it.
void force_isa(Isa isa);
const char* isa_name(Isa isa);

// --- reductions (fixed blocked order) ---
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
// squared Euclidean distance sum((a-b)^2)
double sumsq_diff(const double* a, const double* b, std::size_t n);

// --- elementwise ---
void add(double* out, const double* a, const double* b, std::size_t n);
void sub(double* out, const double* a, const double* b, std::size_t n);
void scale(double* y, double alpha, std::size_t n);
// y += alpha * x
void axpy(double* y, double alpha, const double* x, std::size_t n);
// target = tau * online + (1 - tau) * target
void lerp(double* target, const double* online, double tau, std::size_t n);
void relu(double* out, const double* in, std::size_t n);
// g *= (pre > 0)
void relu_backward(double* g, const double* pre, std::size_t n);
// Adam with bias correction folded in:
//   m = b1*m + (1-b1)*g; v = b2*v + (1-b2)*g*g;
//   p -= lr * (m/bc1) / (sqrt(v/bc2) + eps)
void adam_update(double* p, double* m, double* v, const double* g,
                 std::size_t n, double lr, double b1, double b2, double eps,
                 double bc1, double bc2);

// --- composite helpers (loop over dispatched primitives) ---
// y = W x + b   (W row-major rows x cols; b may be null)
void matvec(const double* W, const double* x, const double* b, double* y,
            std::size_t rows, std::size_t cols);
// y += W^T g    (accumulated row by row, fixed order)
void matvec_t_acc(const double* W, const double* g, double* y,
                  std::size_t rows, std::size_t cols);
// dW += g x^T
void outer_acc(double* dW, const double* g, const double* x, std::size_t rows,
               std::size_t cols);

}  // namespace pdet::kernels
