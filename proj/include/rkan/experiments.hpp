#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "rkan/autodiff.hpp"
#include "rkan/layers.hpp"
#include "rkan/optim.hpp"
#include "rkan/tensor.hpp"

namespace rkan {

enum class Target { F1, F2, F3 };

// Config-file names: "F1", "F2", "F3".
const char* target_name(Target t);
Target target_parse(const std::string& name);

// F1 = xi/(1+xi^2), F2 = 1/(1+xi^2), F3 = exp(-xi^2).
double target_eval(Target t, double xi);

struct RegressionData {
  Tensor train_x, train_y;  // [200 x 1] by default
  Tensor test_x, test_y;    // [100 x 1]
};

// x uniform on [lo, hi]; train and test come from disjoint seed streams; y is
// exact (no noise).
RegressionData generate_regression_data(Target target, std::uint64_t seed,
                                        long n_train = 200, long n_test = 100,
                                        double lo = -10.0, double hi = 10.0);

double mse(const Tensor& a, const Tensor& b);

struct OptimConfig {
  std::string kind = "lbfgs";  // "lbfgs" or "adam"
  int epochs = 50;
  double learning_rate = 0.001;  // adam only
};

struct TrainReport {
  std::string status = "ok";  // ok, stalled, diverged, no-root
  // NaN marks a field the experiment kind does not produce.
  double train_mse = std::numeric_limits<double>::quiet_NaN();
  double test_mse = std::numeric_limits<double>::quiet_NaN();
  double root = std::numeric_limits<double>::quiet_NaN();
  double root_err = std::numeric_limits<double>::quiet_NaN();
  double max_abs_err = std::numeric_limits<double>::quiet_NaN();
  double wall_s = 0.0;
  std::vector<double> trace;
};

// Maps a [n x d] input Var to the network (or witness) output on the same
// tape. Lets the loss builders run on hand-built exact solutions in tests.
using GraphFn = std::function<Var(Var)>;

// mean[(xi F'' + 2 F' + xi F^w)^2] + (F(0)-1)^2 + (F'(0))^2. The residual is
// the xi-multiplied form, regular at the ODE's 2/xi singularity. xi is a
// [n x 1] column of collocation points; F^w is repeated multiplication.
Var lane_emden_loss(const GraphFn& f, Var xi, int w);

// mean over interior of [F_x1x1 + F_x2x2 - sin(pi x1) sin(pi x2)]^2 plus mean
// over boundary of F^2. interior/boundary are [n x 2] point lists.
Var elliptic_pde_loss(const GraphFn& f, Var interior, Var boundary);

// -sin(pi x1) sin(pi x2) / (2 pi^2).
double elliptic_pde_exact(double x1, double x2);

// First roots of the Lane-Emden solutions for w = 0..4: sqrt(6), pi, then the
// Horedt tabulated values.
double lane_emden_reference_root(int w);

struct RootScan {
  bool found = false;
  double root = 0.0;
};

// Scan grid_n equidistant points on [lo, hi] for the first sign change, then
// bisect to an interval shorter than 1e-12.
RootScan find_first_root(const std::function<double(double)>& f, double lo,
                         double hi, long grid_n = 10000);

// Forward pass on a scratch tape with the network's current parameters.
Tensor net_eval(const Network& net, const Tensor& x);

// The harnesses train in place, never throw on divergence (status reports it),
// and fill the report fields that apply: regression train/test MSE; Lane-Emden
// final loss in train_mse plus root and root_err; PDE final loss in train_mse,
// MSE versus the exact solution in test_mse, and max abs error on an
// independent 101 x 101 grid.
TrainReport train_regression(Network& net, const RegressionData& data,
                             const OptimConfig& opt);
TrainReport solve_lane_emden(Network& net, int w, const OptimConfig& opt,
                             long n_collocation = 1500, double domain_hi = 15.0);
TrainReport solve_elliptic_pde(Network& net, const OptimConfig& opt,
                               long grid_n = 50, long eval_grid_n = 101);

}  // namespace rkan
