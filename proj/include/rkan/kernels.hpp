#pragma once

#include <cmath>

namespace rkan::kernels {

// Threading mode is thread-local so sweep workers running whole experiments
// in parallel can pin their cells to the serial path without interfering
// with each other. Auto picks the OpenMP variant for large inputs.
enum class Mode { Auto, ForceSerial };

Mode mode();
void set_mode(Mode m);

struct SerialGuard {
  Mode prev;
  SerialGuard() : prev(mode()) { set_mode(Mode::ForceSerial); }
  ~SerialGuard() { set_mode(prev); }
};

// Minimum element count before the parallel variant is dispatched.
inline constexpr long kGrain = 16384;

// Strided read-only operand; stride 0 broadcasts a scalar across the op.
struct View {
  const double* p;
  long stride;
};

inline View full(const double* p) { return View{p, 1}; }
inline View scalar(const double* p) { return View{p, 0}; }

// Per-element math shared by the serial and parallel variants, so the two
// produce bitwise-identical results by construction.
namespace detail {
inline double sigmoid1(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}
inline double softplus1(double x) {
  return (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::fabs(x)));
}
inline double elu1(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_grad1(double x) { return x > 0.0 ? 1.0 : std::exp(x); }
// sqrt fast path keeps pow(x, 0.5) exactly equal to the sqrt a hand-written
// formula would use.
inline double pow1(double x, double p) {
  return p == 0.5 ? std::sqrt(x) : std::pow(x, p);
}
}  // namespace detail

#define RKAN_KERNELS_DECL                                                       \
  void ew_add(View a, View b, double* out, long n);                            \
  void ew_sub(View a, View b, double* out, long n);                            \
  void ew_mul(View a, View b, double* out, long n);                            \
  void ew_div(View a, View b, double* out, long n);                            \
  void ew_select(View c, View a, View b, double* out, long n);                 \
  void ew_neg(View a, double* out, long n);                                    \
  void ew_exp(View a, double* out, long n);                                    \
  void ew_log(View a, double* out, long n);                                    \
  void ew_tanh(View a, double* out, long n);                                   \
  void ew_sigmoid(View a, double* out, long n);                                \
  void ew_sin(View a, double* out, long n);                                    \
  void ew_cos(View a, double* out, long n);                                    \
  void ew_elu(View a, double* out, long n);                                    \
  void ew_elu_grad(View a, double* out, long n);                               \
  void ew_softplus(View a, double* out, long n);                               \
  void ew_powc(View a, double p, double* out, long n);                         \
  void acc(double* out, View s, long n);                                       \
  void acc_scaled(double* out, View s, double c, long n);                      \
  void fill(double* out, double x, long n);                                    \
  void gemm(bool ta, bool tb, long m, long n, long k, const double* A,         \
            long lda, const double* B, long ldb, double* C, long ldc,          \
            bool accumulate);                                                  \
  double reduce_sum(View a, long n);

// Reference implementation.
namespace serial {
RKAN_KERNELS_DECL
}

// OpenMP variant. Work is partitioned so each output element is written by
// exactly one thread with the same accumulation order as the serial code;
// reductions stay serial. Results are bitwise equal to serial:: for any
// thread count.
namespace par {
RKAN_KERNELS_DECL
}

// Dispatch layer: serial below kGrain or under ForceSerial, parallel otherwise.
RKAN_KERNELS_DECL

#undef RKAN_KERNELS_DECL

}  // namespace rkan::kernels
