#include "rkan/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <utility>

#include "rkan/error.hpp"
#include "rkan/rng.hpp"

namespace rkan {

namespace {

constexpr double kPi = 3.14159265358979323846;

double now_between(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

const char* target_name(Target t) {
  switch (t) {
    case Target::F1: return "F1";
    case Target::F2: return "F2";
    case Target::F3: return "F3";
  }
  throw ValueError("target_name: unknown target");
}

Target target_parse(const std::string& name) {
  if (name == "F1") return Target::F1;
  if (name == "F2") return Target::F2;
  if (name == "F3") return Target::F3;
  throw ValueError("unknown target \"" + name + "\"");
}

double target_eval(Target t, double xi) {
  switch (t) {
    case Target::F1: return xi / (1.0 + xi * xi);
    case Target::F2: return 1.0 / (1.0 + xi * xi);
    case Target::F3: return std::exp(-xi * xi);
  }
  throw ValueError("target_eval: unknown target");
}

RegressionData generate_regression_data(Target target, std::uint64_t seed,
                                        long n_train, long n_test, double lo,
                                        double hi) {
  RegressionData d;
  Rng train_rng(seed, Stream::TrainData);
  Rng test_rng(seed, Stream::TestData);
  d.train_x = Tensor(n_train, 1, 0.0);
  d.train_y = Tensor(n_train, 1, 0.0);
  for (long i = 0; i < n_train; ++i) {
    d.train_x.v[i] = train_rng.uniform(lo, hi);
    d.train_y.v[i] = target_eval(target, d.train_x.v[i]);
  }
  d.test_x = Tensor(n_test, 1, 0.0);
  d.test_y = Tensor(n_test, 1, 0.0);
  for (long i = 0; i < n_test; ++i) {
    d.test_x.v[i] = test_rng.uniform(lo, hi);
    d.test_y.v[i] = target_eval(target, d.test_x.v[i]);
  }
  return d;
}

double mse(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b))
    throw ShapeError("mse: shapes " + a.shape_str() + " and " + b.shape_str());
  if (a.size() == 0) throw ValueError("mse: empty tensors");
  double s = 0.0;
  for (long i = 0; i < a.size(); ++i) {
    const double d = a.v[i] - b.v[i];
    s += d * d;
  }
  return s / double(a.size());
}

Var lane_emden_loss(const GraphFn& f, Var xi, int w) {
  if (w < 0) throw ValueError("lane_emden_loss: w must be non-negative");
  Tape& tape = *xi.tape;
  Var y = f(xi);
  Var d1 = tape.input_derivative(y, xi, 1, 0);
  Var d2 = tape.input_derivative(y, xi, 2, 0);
  Var fw;
  if (w == 0) {
    fw = tape.constant(Tensor(xi.val().rows, 1, 1.0));
  } else {
    fw = y;
    for (int i = 1; i < w; ++i) fw = fw * y;
  }
  Var r = xi * d2 + 2.0 * d1 + xi * fw;
  Var loss = mean(r * r);

  Var x0 = tape.constant(Tensor(1, 1, 0.0));
  Var y0 = f(x0);
  Var dy0 = tape.input_derivative(y0, x0, 1, 0);
  Var e0 = y0 - 1.0;
  return loss + e0 * e0 + dy0 * dy0;
}

Var elliptic_pde_loss(const GraphFn& f, Var interior, Var boundary) {
  Tape& tape = *interior.tape;
  Var y = f(interior);
  Var fxx = tape.input_derivative(y, interior, 2, 0);
  Var fyy = tape.input_derivative(y, interior, 2, 1);

  Tensor e0(2, 1, 0.0), e1(2, 1, 0.0);
  e0.at(0, 0) = 1.0;
  e1.at(1, 0) = 1.0;
  Var x1 = matmul(interior, tape.constant(e0));
  Var x2 = matmul(interior, tape.constant(e1));
  Var forcing = sin(x1 * kPi) * sin(x2 * kPi);

  Var r = fxx + fyy - forcing;
  Var yb = f(boundary);
  return mean(r * r) + mean(yb * yb);
}

double elliptic_pde_exact(double x1, double x2) {
  return -std::sin(kPi * x1) * std::sin(kPi * x2) / (2.0 * kPi * kPi);
}

double lane_emden_reference_root(int w) {
  switch (w) {
    case 0: return std::sqrt(6.0);
    case 1: return kPi;
    case 2: return 3.65375374;
    case 3: return 6.89684862;
    case 4: return 14.97154635;
  }
  throw ValueError("lane_emden_reference_root: w must be in 0..4");
}

RootScan find_first_root(const std::function<double(double)>& f, double lo,
                         double hi, long grid_n) {
  if (grid_n < 2) throw ValueError("find_first_root: grid_n must be >= 2");
  double xa = lo;
  double fa = f(xa);
  if (fa == 0.0) return {true, xa};
  for (long i = 1; i < grid_n; ++i) {
    const double xb = lo + (hi - lo) * double(i) / double(grid_n - 1);
    const double fb = f(xb);
    if (fb == 0.0) return {true, xb};
    if ((fa < 0.0) != (fb < 0.0)) {
      double a = xa, b = xb, va = fa;
      while (b - a > 1e-12) {
        const double m = 0.5 * (a + b);
        const double vm = f(m);
        if (vm == 0.0) return {true, m};
        if ((va < 0.0) == (vm < 0.0)) {
          a = m;
          va = vm;
        } else {
          b = m;
        }
      }
      return {true, 0.5 * (a + b)};
    }
    xa = xb;
    fa = fb;
  }
  return {};
}

Tensor net_eval(const Network& net, const Tensor& x) {
  Tape tape;
  std::vector<Var> leaves = net.make_leaves(tape);
  Var out = net.forward(tape.constant(x), leaves);
  return out.val();
}

namespace {

// Shared training driver: runs the configured optimizer over the objective,
// fills trace and status. Divergence (non-finite loss or a layer's runtime
// range/finiteness error) is reported, never thrown.
void run_optimizer(Network& net, const Objective& objective,
                   const OptimConfig& opt, TrainReport& rep) {
  if (opt.kind != "lbfgs" && opt.kind != "adam")
    throw ValueError("unknown optimizer \"" + opt.kind + "\"");
  if (opt.epochs < 0) throw ValueError("optimizer epochs must be non-negative");
  try {
    if (opt.kind == "adam") {
      Adam adam(net.params(), opt.learning_rate);
      std::vector<Tensor> grads;
      for (int e = 0; e < opt.epochs; ++e) {
        grads.clear();
        const double f = objective(&grads);
        rep.trace.push_back(f);
        if (!std::isfinite(f)) {
          rep.status = "diverged";
          return;
        }
        adam.step(grads);
      }
      rep.trace.push_back(objective(nullptr));
    } else {
      LbfgsOptions lopts;
      lopts.max_epochs = opt.epochs;
      LbfgsResult r = lbfgs_minimize(objective, net.params(), lopts);
      rep.trace = std::move(r.trace);
      if (r.status == "stalled" || r.status == "diverged") rep.status = r.status;
    }
  } catch (const ValueError&) {
    rep.status = "diverged";
  }
}

}  // namespace

TrainReport train_regression(Network& net, const RegressionData& data,
                             const OptimConfig& opt) {
  if (net.in_dim() != 1 || net.out_dim() != 1)
    throw ShapeError("regression needs a scalar-in scalar-out network");
  TrainReport rep;
  const auto t0 = std::chrono::steady_clock::now();
  Objective objective = [&net, &data](std::vector<Tensor>* grads) -> double {
    Tape tape;
    std::vector<Var> leaves = net.make_leaves(tape);
    Var pred = net.forward(tape.constant(data.train_x), leaves);
    Var err = pred - tape.constant(data.train_y);
    Var loss = mean(err * err);
    if (grads) {
      tape.backward(loss);
      for (const Var& l : leaves) grads->push_back(l.grad());
    }
    return loss.val().v[0];
  };
  run_optimizer(net, objective, opt, rep);
  if (rep.status != "diverged") {
    try {
      rep.train_mse = mse(net_eval(net, data.train_x), data.train_y);
      rep.test_mse = mse(net_eval(net, data.test_x), data.test_y);
    } catch (const ValueError&) {
      rep.status = "diverged";
    }
  }
  rep.wall_s = now_between(t0);
  return rep;
}

TrainReport solve_lane_emden(Network& net, int w, const OptimConfig& opt,
                             long n_collocation, double domain_hi) {
  if (w < 0 || w > 4) throw ValueError("lane-emden: w must be in 0..4");
  if (net.in_dim() != 1 || net.out_dim() != 1)
    throw ShapeError("lane-emden needs a scalar-in scalar-out network");
  if (n_collocation < 1) throw ValueError("lane-emden: empty collocation grid");
  Tensor grid(n_collocation, 1, 0.0);
  for (long i = 0; i < n_collocation; ++i)
    grid.v[i] = domain_hi * double(i + 1) / double(n_collocation);

  TrainReport rep;
  const auto t0 = std::chrono::steady_clock::now();
  Objective objective = [&net, &grid, w](std::vector<Tensor>* grads) -> double {
    Tape tape;
    std::vector<Var> leaves = net.make_leaves(tape);
    GraphFn f = [&net, &leaves](Var x) { return net.forward(x, leaves); };
    Var loss = lane_emden_loss(f, tape.constant(grid), w);
    if (grads) {
      tape.backward(loss);
      for (const Var& l : leaves) grads->push_back(l.grad());
    }
    return loss.val().v[0];
  };
  run_optimizer(net, objective, opt, rep);
  if (!rep.trace.empty()) rep.train_mse = rep.trace.back();
  if (rep.status != "diverged") {
    try {
      auto point = [&net](double x) { return net_eval(net, Tensor(1, 1, x)).v[0]; };
      RootScan scan = find_first_root(point, 0.0, domain_hi, 10000);
      if (!scan.found) {
        rep.status = "no-root";
      } else {
        rep.root = scan.root;
        rep.root_err = std::fabs(scan.root - lane_emden_reference_root(w));
      }
    } catch (const ValueError&) {
      rep.status = "diverged";
    }
  }
  rep.wall_s = now_between(t0);
  return rep;
}

TrainReport solve_elliptic_pde(Network& net, const OptimConfig& opt, long grid_n,
                               long eval_grid_n) {
  if (net.in_dim() != 2 || net.out_dim() != 1)
    throw ShapeError("elliptic-pde needs a two-in scalar-out network");
  if (grid_n < 3 || eval_grid_n < 2)
    throw ValueError("elliptic-pde: grids too small");

  std::vector<double> interior_pts, boundary_pts;
  for (long i = 0; i < grid_n; ++i) {
    for (long j = 0; j < grid_n; ++j) {
      const double x1 = double(i) / double(grid_n - 1);
      const double x2 = double(j) / double(grid_n - 1);
      const bool edge = i == 0 || j == 0 || i == grid_n - 1 || j == grid_n - 1;
      std::vector<double>& dst = edge ? boundary_pts : interior_pts;
      dst.push_back(x1);
      dst.push_back(x2);
    }
  }
  Tensor interior(long(interior_pts.size() / 2), 2, 0.0);
  interior.v = interior_pts;
  Tensor boundary(long(boundary_pts.size() / 2), 2, 0.0);
  boundary.v = boundary_pts;

  TrainReport rep;
  const auto t0 = std::chrono::steady_clock::now();
  Objective objective = [&net, &interior, &boundary](std::vector<Tensor>* grads) {
    Tape tape;
    std::vector<Var> leaves = net.make_leaves(tape);
    GraphFn f = [&net, &leaves](Var x) { return net.forward(x, leaves); };
    Var loss = elliptic_pde_loss(f, tape.constant(interior), tape.constant(boundary));
    if (grads) {
      tape.backward(loss);
      for (const Var& l : leaves) grads->push_back(l.grad());
    }
    return loss.val().v[0];
  };
  run_optimizer(net, objective, opt, rep);
  if (!rep.trace.empty()) rep.train_mse = rep.trace.back();
  if (rep.status != "diverged") {
    try {
      Tensor pts(eval_grid_n * eval_grid_n, 2, 0.0);
      Tensor exact(eval_grid_n * eval_grid_n, 1, 0.0);
      long r = 0;
      for (long i = 0; i < eval_grid_n; ++i) {
        for (long j = 0; j < eval_grid_n; ++j, ++r) {
          const double x1 = double(i) / double(eval_grid_n - 1);
          const double x2 = double(j) / double(eval_grid_n - 1);
          pts.at(r, 0) = x1;
          pts.at(r, 1) = x2;
          exact.v[r] = elliptic_pde_exact(x1, x2);
        }
      }
      Tensor pred = net_eval(net, pts);
      rep.test_mse = mse(pred, exact);
      double maxerr = 0.0;
      for (long k = 0; k < pred.size(); ++k)
        maxerr = std::max(maxerr, std::fabs(pred.v[k] - exact.v[k]));
      rep.max_abs_err = maxerr;
    } catch (const ValueError&) {
      rep.status = "diverged";
    }
  }
  rep.wall_s = now_between(t0);
  return rep;
}

}  // namespace rkan
