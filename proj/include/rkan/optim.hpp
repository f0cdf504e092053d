#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rkan/tensor.hpp"

namespace rkan {

// Evaluates the loss at the parameters' current values. When grads is non-null
// it is filled with one tensor per parameter, shapes matching. The optimizers
// never build tapes themselves; the caller's objective owns that.
using Objective = std::function<double(std::vector<Tensor>* grads)>;

// Standard bias-corrected Adam over a fixed parameter list.
class Adam {
 public:
  explicit Adam(std::vector<Tensor*> params, double learning_rate = 0.001);
  void step(const std::vector<Tensor>& grads);
  long step_count() const { return t_; }

 private:
  std::vector<Tensor*> params_;
  std::vector<Tensor> m_, v_;
  double lr_;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
};

struct LbfgsOptions {
  int max_epochs = 50;   // one epoch = one accepted line-search step
  int history = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search = 25;  // objective evaluations per line search
  double grad_tol = 1e-12;   // infinity norm
};

struct LbfgsResult {
  std::vector<double> trace;  // accepted losses; trace[0] is the initial loss
  std::string status;         // "converged", "max_epochs", "stalled", "diverged"
  int epochs = 0;
};

// Two-loop-recursion L-BFGS with a strong-Wolfe cubic-interpolation line
// search. Curvature pairs with s.y <= 1e-10 are discarded. A failed line
// search falls back to one plain gradient step of length 1e-3; if that fails
// to decrease the loss the run stops with status "stalled".
LbfgsResult lbfgs_minimize(const Objective& objective, std::vector<Tensor*> params,
                           const LbfgsOptions& opts = {});

}  // namespace rkan
