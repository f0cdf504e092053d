#pragma once

#include <vector>

#include "rkan/autodiff.hpp"
#include "rkan/tensor.hpp"

namespace rkan {

// Degree bound and raw (unconstrained) basis parameters. The effective
// exponents are alpha = elu_constrain(alpha_raw), beta = elu_constrain(beta_raw),
// both > -1 by construction. kappa is fixed at 1 and not exposed as a knob.
struct JacobiBasisConfig {
  int K = 3;
  double alpha_raw = 1.0;
  double beta_raw = 1.0;
  double kappa = 1.0;
};

// ELU with slope parameter kappa: raw for raw > 0, else kappa*(e^raw - 1).
// Output range (-kappa, inf). Throws ValueError for kappa <= 0.
double elu_constrain(double raw, double kappa = 1.0);

// Inverse of elu_constrain on its range. Throws ValueError for value <= -kappa.
double elu_inverse(double value, double kappa = 1.0);

// log(1 + e^raw) in the overflow-safe form max(raw,0) + log1p(e^{-|raw|}).
double softplus_constrain(double raw);

// Inverse of softplus_constrain on (0, inf).
double softplus_inverse(double value);

// Direct evaluation of the Gamma-function sum formula for J_n^{(alpha,beta)}(xi),
// accumulated in long double with ratio-product terms so no Gamma evaluation is
// needed. O(n^2); test oracle only, the recurrence below is the production path.
double jacobi_explicit(int n, double alpha, double beta, double xi);

// All degrees 0..K at each element of t via the three-term recurrence, built on
// the tape so gradients flow to t and to alpha/beta through the recurrence
// coefficients. alpha and beta are the effective (already constrained) scalar
// parameters. Degree 1 always comes from its closed form: the generic
// recurrence denominator 2n(n+a+b)(2n+a+b-2) vanishes at n=1 when a+b = -1.
// Returns K+1 Vars, each shaped like t.
std::vector<Var> jacobi_basis(Var t, Var alpha, Var beta, int K);

// Plain-tensor convenience wrapper: evaluates the same graph path on a scratch
// tape and packs the result as [xi.size() x (K+1)], column n = J_n.
Tensor jacobi_all_degrees(const JacobiBasisConfig& config, const Tensor& xi);

}  // namespace rkan
