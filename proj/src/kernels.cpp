#include "rkan/kernels.hpp"

namespace rkan::kernels {

namespace {
thread_local Mode tls_mode = Mode::Auto;
}

Mode mode() { return tls_mode; }
void set_mode(Mode m) { tls_mode = m; }

// The serial and parallel loop bodies are generated from one macro each so
// the per-element arithmetic cannot drift between the two variants.

#define RKAN_EW2(name, expr)                                                   \
  namespace serial {                                                           \
  void name(View a, View b, double* out, long n) {                            \
    for (long i = 0; i < n; ++i) {                                            \
      const double x = a.p[i * a.stride], y = b.p[i * b.stride];              \
      out[i] = (expr);                                                         \
    }                                                                          \
  }                                                                            \
  }                                                                            \
  namespace par {                                                              \
  void name(View a, View b, double* out, long n) {                            \
    _Pragma("omp parallel for schedule(static)")                               \
    for (long i = 0; i < n; ++i) {                                            \
      const double x = a.p[i * a.stride], y = b.p[i * b.stride];              \
      out[i] = (expr);                                                         \
    }                                                                          \
  }                                                                            \
  }                                                                            \
  void name(View a, View b, double* out, long n) {                            \
    if (tls_mode == Mode::ForceSerial || n < kGrain)                           \
      serial::name(a, b, out, n);                                              \
    else                                                                       \
      par::name(a, b, out, n);                                                 \
  }

#define RKAN_EW1(name, expr)                                                   \
  namespace serial {                                                           \
  void name(View a, double* out, long n) {                                    \
    for (long i = 0; i < n; ++i) {                                            \
      const double x = a.p[i * a.stride];                                     \
      out[i] = (expr);                                                         \
    }                                                                          \
  }                                                                            \
  }                                                                            \
  namespace par {                                                              \
  void name(View a, double* out, long n) {                                    \
    _Pragma("omp parallel for schedule(static)")                               \
    for (long i = 0; i < n; ++i) {                                            \
      const double x = a.p[i * a.stride];                                     \
      out[i] = (expr);                                                         \
    }                                                                          \
  }                                                                            \
  }                                                                            \
  void name(View a, double* out, long n) {                                    \
    if (tls_mode == Mode::ForceSerial || n < kGrain)                           \
      serial::name(a, out, n);                                                 \
    else                                                                       \
      par::name(a, out, n);                                                    \
  }

RKAN_EW2(ew_add, x + y)
RKAN_EW2(ew_sub, x - y)
RKAN_EW2(ew_mul, x* y)
RKAN_EW2(ew_div, x / y)
RKAN_EW1(ew_neg, -x)
RKAN_EW1(ew_exp, std::exp(x))
RKAN_EW1(ew_log, std::log(x))
RKAN_EW1(ew_tanh, std::tanh(x))
RKAN_EW1(ew_sigmoid, detail::sigmoid1(x))
RKAN_EW1(ew_sin, std::sin(x))
RKAN_EW1(ew_cos, std::cos(x))
RKAN_EW1(ew_elu, detail::elu1(x))
RKAN_EW1(ew_elu_grad, detail::elu_grad1(x))
RKAN_EW1(ew_softplus, detail::softplus1(x))

#undef RKAN_EW2
#undef RKAN_EW1

namespace serial {

void ew_select(View c, View a, View b, double* out, long n) {
  for (long i = 0; i < n; ++i)
    out[i] = c.p[i * c.stride] > 0.0 ? a.p[i * a.stride] : b.p[i * b.stride];
}

void ew_powc(View a, double p, double* out, long n) {
  for (long i = 0; i < n; ++i) out[i] = detail::pow1(a.p[i * a.stride], p);
}

void acc(double* out, View s, long n) {
  for (long i = 0; i < n; ++i) out[i] += s.p[i * s.stride];
}

void acc_scaled(double* out, View s, double c, long n) {
  for (long i = 0; i < n; ++i) out[i] += c * s.p[i * s.stride];
}

void fill(double* out, double x, long n) {
  for (long i = 0; i < n; ++i) out[i] = x;
}

void gemm(bool ta, bool tb, long m, long n, long k, const double* A, long lda,
          const double* B, long ldb, double* C, long ldc, bool accumulate) {
  for (long i = 0; i < m; ++i) {
    for (long j = 0; j < n; ++j) {
      double s = accumulate ? C[i * ldc + j] : 0.0;
      for (long q = 0; q < k; ++q) {
        const double av = ta ? A[q * lda + i] : A[i * lda + q];
        const double bv = tb ? B[j * ldb + q] : B[q * ldb + j];
        s += av * bv;
      }
      C[i * ldc + j] = s;
    }
  }
}

double reduce_sum(View a, long n) {
  double s = 0.0;
  for (long i = 0; i < n; ++i) s += a.p[i * a.stride];
  return s;
}

}  // namespace serial

namespace par {

void ew_select(View c, View a, View b, double* out, long n) {
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i)
    out[i] = c.p[i * c.stride] > 0.0 ? a.p[i * a.stride] : b.p[i * b.stride];
}

void ew_powc(View a, double p, double* out, long n) {
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[i] = detail::pow1(a.p[i * a.stride], p);
}

void acc(double* out, View s, long n) {
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[i] += s.p[i * s.stride];
}

void acc_scaled(double* out, View s, double c, long n) {
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[i] += c * s.p[i * s.stride];
}

void fill(double* out, double x, long n) {
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[i] = x;
}

void gemm(bool ta, bool tb, long m, long n, long k, const double* A, long lda,
          const double* B, long ldb, double* C, long ldc, bool accumulate) {
  // Rows of C are independent; the inner accumulation order matches serial.
#pragma omp parallel for schedule(static)
  for (long i = 0; i < m; ++i) {
    for (long j = 0; j < n; ++j) {
      double s = accumulate ? C[i * ldc + j] : 0.0;
      for (long q = 0; q < k; ++q) {
        const double av = ta ? A[q * lda + i] : A[i * lda + q];
        const double bv = tb ? B[j * ldb + q] : B[q * ldb + j];
        s += av * bv;
      }
      C[i * ldc + j] = s;
    }
  }
}

// Reductions keep one fixed accumulation order; a parallel reduction would
// reassociate floating-point sums and break bitwise determinism.
double reduce_sum(View a, long n) { return serial::reduce_sum(a, n); }

}  // namespace par

#define RKAN_DISPATCH(cond, call_serial, call_par) \
  if (tls_mode == Mode::ForceSerial || !(cond))    \
    call_serial;                                   \
  else                                             \
    call_par;

void ew_select(View c, View a, View b, double* out, long n) {
  RKAN_DISPATCH(n >= kGrain, serial::ew_select(c, a, b, out, n),
                par::ew_select(c, a, b, out, n))
}

void ew_powc(View a, double p, double* out, long n) {
  RKAN_DISPATCH(n >= kGrain, serial::ew_powc(a, p, out, n),
                par::ew_powc(a, p, out, n))
}

void acc(double* out, View s, long n) {
  RKAN_DISPATCH(n >= kGrain, serial::acc(out, s, n), par::acc(out, s, n))
}

void acc_scaled(double* out, View s, double c, long n) {
  RKAN_DISPATCH(n >= kGrain, serial::acc_scaled(out, s, c, n),
                par::acc_scaled(out, s, c, n))
}

void fill(double* out, double x, long n) {
  RKAN_DISPATCH(n >= kGrain, serial::fill(out, x, n), par::fill(out, x, n))
}

void gemm(bool ta, bool tb, long m, long n, long k, const double* A, long lda,
          const double* B, long ldb, double* C, long ldc, bool accumulate) {
  RKAN_DISPATCH(m * n * k >= kGrain,
                serial::gemm(ta, tb, m, n, k, A, lda, B, ldb, C, ldc, accumulate),
                par::gemm(ta, tb, m, n, k, A, lda, B, ldb, C, ldc, accumulate))
}

double reduce_sum(View a, long n) { return serial::reduce_sum(a, n); }

#undef RKAN_DISPATCH

}  // namespace rkan::kernels
