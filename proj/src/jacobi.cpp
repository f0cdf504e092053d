#include "rkan/jacobi.hpp"

#include <cmath>
#include <string>

#include "rkan/error.hpp"

namespace rkan {

double elu_constrain(double raw, double kappa) {
  if (!(kappa > 0.0)) throw ValueError("elu_constrain: kappa must be positive");
  return raw > 0.0 ? raw : kappa * std::expm1(raw);
}

double elu_inverse(double value, double kappa) {
  if (!(kappa > 0.0)) throw ValueError("elu_inverse: kappa must be positive");
  if (!(value > -kappa)) throw ValueError("elu_inverse: value must exceed -kappa");
  return value > 0.0 ? value : std::log1p(value / kappa);
}

double softplus_constrain(double raw) {
  return (raw > 0.0 ? raw : 0.0) + std::log1p(std::exp(-std::fabs(raw)));
}

double softplus_inverse(double value) {
  if (!(value > 0.0)) throw ValueError("softplus_inverse: value must be positive");
  return value + std::log1p(-std::exp(-value));
}

double jacobi_explicit(int n, double alpha, double beta, double xi) {
  if (n < 0) throw ValueError("jacobi_explicit: degree must be non-negative");
  if (!(alpha > -1.0) || !(beta > -1.0))
    throw ValueError("jacobi_explicit: alpha and beta must exceed -1");
  const long double a = alpha;
  const long double b = beta;
  const long double half = (static_cast<long double>(xi) - 1.0L) / 2.0L;
  long double sum = 0.0L;
  long double hm = 1.0L;  // half^m
  for (int m = 0; m <= n; ++m) {
    // C(n,m) * rising(a+b+n+1, m) * prod_{j=m+1}^{n}(a+j) / n!, assembled as
    // ratio products so intermediate magnitudes stay modest.
    long double term = 1.0L;
    for (int i = 1; i <= m; ++i) term *= (a + b + n + i) / i;
    for (int j = m + 1; j <= n; ++j) term *= (a + j) / (j - m);
    sum += term * hm;
    hm *= half;
  }
  return static_cast<double>(sum);
}

std::vector<Var> jacobi_basis(Var t, Var alpha, Var beta, int K) {
  if (K < 0) throw ValueError("jacobi_basis: K must be non-negative");
  Tape& tape = *t.tape;
  std::vector<Var> j;
  j.reserve(K + 1);
  j.push_back(tape.constant(Tensor(t.val().rows, t.val().cols, 1.0)));
  if (K == 0) return j;
  j.push_back(((alpha + beta + 2.0) * t + (alpha - beta)) * 0.5);
  Var apb = alpha + beta;
  for (int n = 2; n <= K; ++n) {
    const double dn = n;
    Var m2 = apb + 2.0 * dn;  // 2n + a + b
    Var c0 = (2.0 * dn) * (apb + dn) * (m2 - 2.0);
    Var c1 = (m2 - 1.0) * m2 * (m2 - 2.0);
    Var c2 = (m2 - 1.0) * (alpha - beta) * apb;
    Var c3 = 2.0 * (alpha + (dn - 1.0)) * (beta + (dn - 1.0)) * m2;
    j.push_back(((c1 * t + c2) * j[n - 1] - c3 * j[n - 2]) / c0);
  }
  return j;
}

Tensor jacobi_all_degrees(const JacobiBasisConfig& config, const Tensor& xi) {
  if (config.K < 0) throw ValueError("jacobi_all_degrees: K must be non-negative");
  Tape tape;
  Tensor flat(xi.size(), 1, 0.0);
  flat.v = xi.v;
  Var t = tape.constant(std::move(flat));
  Var alpha = elu(tape.constant(config.alpha_raw));
  Var beta = elu(tape.constant(config.beta_raw));
  std::vector<Var> j = jacobi_basis(t, alpha, beta, config.K);
  Tensor out(xi.size(), config.K + 1, 0.0);
  for (int n = 0; n <= config.K; ++n) {
    const Tensor& col = j[n].val();
    for (long i = 0; i < xi.size(); ++i) out.at(i, n) = col.v[i];
  }
  return out;
}

}  // namespace rkan
