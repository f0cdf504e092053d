#include <cmath>
#include <cstring>
#include <memory>
#include <vector>

#include "doctest.h"
#include "rkan/experiments.hpp"
#include "rkan/layers.hpp"
#include "support/helpers.hpp"

using namespace rkan;
using testsupport::kPi;

namespace {

Network small_mlp(long in, long hidden, std::uint64_t seed) {
  std::vector<std::unique_ptr<Layer>> ls;
  ls.push_back(std::make_unique<DenseLayer>(in, hidden));
  ls.push_back(std::make_unique<FixedActivation>(FixedActivation::Kind::Tanh));
  ls.push_back(std::make_unique<DenseLayer>(hidden, 1));
  Network net(std::move(ls));
  Rng rng(seed, Stream::Init);
  net.init(rng);
  return net;
}

Tensor linspace_col(double lo, double hi, long n) {
  Tensor t(n, 1, 0.0);
  for (long i = 0; i < n; ++i)
    t.v[i] = lo + (hi - lo) * double(i) / double(n - 1);
  return t;
}

}  // namespace

TEST_CASE("target functions match their formulas") {
  CHECK(target_eval(Target::F1, 1.0) == 0.5);
  CHECK(target_eval(Target::F1, 2.0) == 0.4);
  CHECK(target_eval(Target::F2, 0.0) == 1.0);
  CHECK(target_eval(Target::F2, 3.0) == 0.1);
  CHECK(target_eval(Target::F3, 0.0) == 1.0);
  CHECK(target_eval(Target::F3, 1.0) ==
        doctest::Approx(0.36787944117144233).epsilon(1e-15));
  for (Target t : {Target::F1, Target::F2, Target::F3})
    CHECK(target_parse(target_name(t)) == t);
  CHECK_THROWS_AS(target_parse("F4"), ValueError);
}

TEST_CASE("regression data is deterministic with disjoint streams") {
  const RegressionData a = generate_regression_data(Target::F2, 7);
  const RegressionData b = generate_regression_data(Target::F2, 7);
  REQUIRE(a.train_x.rows == 200);
  REQUIRE(a.test_x.rows == 100);
  CHECK(std::memcmp(a.train_x.v.data(), b.train_x.v.data(), 200 * sizeof(double)) == 0);
  CHECK(std::memcmp(a.test_x.v.data(), b.test_x.v.data(), 100 * sizeof(double)) == 0);

  const RegressionData c = generate_regression_data(Target::F2, 8);
  CHECK(a.train_x.v[0] != c.train_x.v[0]);
  CHECK(a.train_x.v[0] != a.test_x.v[0]);

  // The test stream does not depend on how many training points were drawn.
  const RegressionData d = generate_regression_data(Target::F2, 7, 17, 100);
  CHECK(std::memcmp(a.test_x.v.data(), d.test_x.v.data(), 100 * sizeof(double)) == 0);

  for (long i = 0; i < a.train_x.size(); ++i) {
    CHECK(a.train_x.v[i] >= -10.0);
    CHECK(a.train_x.v[i] <= 10.0);
    CHECK(a.train_y.v[i] == target_eval(Target::F2, a.train_x.v[i]));
  }
  const RegressionData e = generate_regression_data(Target::F1, 7, 50, 25, 0.0, 1.0);
  for (long i = 0; i < 50; ++i) {
    CHECK(e.train_x.v[i] >= 0.0);
    CHECK(e.train_x.v[i] <= 1.0);
  }
}

TEST_CASE("mse basics") {
  Tensor a(2, 1, 0.0), b(2, 1, 0.0);
  b.v = {3.0, 4.0};
  CHECK(mse(a, a) == 0.0);
  CHECK(mse(a, b) == 12.5);
  CHECK(mse(a, b) == mse(b, a));
  CHECK_THROWS_AS(mse(a, Tensor(1, 2, 0.0)), ShapeError);
}

TEST_CASE("lane-emden loss vanishes on the exact w = 0 solution") {
  Tape tape;
  GraphFn f = [](Var xi) { return xi * xi * (-1.0 / 6.0) + 1.0; };
  Var xi = tape.constant(linspace_col(0.05, 2.4, 48));
  Var loss = lane_emden_loss(f, xi, 0);
  CHECK(loss.val().v[0] < 1e-12);
}

TEST_CASE("lane-emden loss vanishes on a sinc series for w = 1") {
  // Degree-12 Taylor polynomial of sin(xi)/xi; on [0, 1] the truncation
  // residual of the w = 1 equation is far below the assertion.
  Tape tape;
  GraphFn f = [](Var xi) {
    Var u = xi * xi;
    Var acc = u * (1.0 / 6227020800.0) + (-1.0 / 39916800.0);
    acc = acc * u + 1.0 / 362880.0;
    acc = acc * u + (-1.0 / 5040.0);
    acc = acc * u + 1.0 / 120.0;
    acc = acc * u + (-1.0 / 6.0);
    return acc * u + 1.0;
  };
  Var xi = tape.constant(linspace_col(0.05, 1.0, 40));
  Var loss = lane_emden_loss(f, xi, 1);
  CHECK(loss.val().v[0] < 1e-15);
}

TEST_CASE("lane-emden loss matches a hand computation for w = 2") {
  const Tensor grid = linspace_col(0.3, 2.1, 25);
  Tape tape;
  GraphFn f = [](Var xi) { return xi * xi + 1.0; };
  const double loss = lane_emden_loss(f, tape.constant(grid), 2).val().v[0];

  double acc = 0.0;
  for (long i = 0; i < grid.size(); ++i) {
    const double x = grid.v[i];
    const double fw = (x * x + 1.0) * (x * x + 1.0);
    const double r = x * 2.0 + 2.0 * (x + x) + x * fw;
    acc += r * r;
  }
  // f(0) = 1 and f'(0) = 0, so the boundary terms contribute nothing.
  CHECK(loss == doctest::Approx(acc / double(grid.size())).epsilon(1e-14));
}

TEST_CASE("lane-emden boundary terms penalize a wrong center value") {
  const Tensor grid = linspace_col(0.5, 1.5, 10);
  Tape tape;
  GraphFn f = [](Var xi) { return xi * xi; };
  const double loss = lane_emden_loss(f, tape.constant(grid), 0).val().v[0];
  double acc = 0.0;
  for (long i = 0; i < grid.size(); ++i) {
    const double x = grid.v[i];
    const double r = x * 2.0 + 2.0 * (x + x) + x;
    acc += r * r;
  }
  // f(0) = 0 costs (0 - 1)^2 = 1; f'(0) = 0 adds nothing.
  CHECK(loss == doctest::Approx(acc / 10.0 + 1.0).epsilon(1e-14));
  CHECK_THROWS_AS(lane_emden_loss(f, tape.constant(grid), -1), ValueError);
}

TEST_CASE("elliptic pde loss vanishes on the exact solution") {
  Tape tape;
  GraphFn f = [](Var x) {
    Tape& t = *x.tape;
    Tensor e0(2, 1, 0.0), e1(2, 1, 0.0);
    e0.v[0] = 1.0;
    e1.v[1] = 1.0;
    Var x1 = matmul(x, t.constant(e0));
    Var x2 = matmul(x, t.constant(e1));
    return sin(x1 * kPi) * sin(x2 * kPi) * (-1.0 / (2.0 * kPi * kPi));
  };
  const long n = 8;
  std::vector<double> inside, edge;
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      const double x1 = double(i) / double(n - 1);
      const double x2 = double(j) / double(n - 1);
      const bool b = i == 0 || j == 0 || i == n - 1 || j == n - 1;
      std::vector<double>& dst = b ? edge : inside;
      dst.push_back(x1);
      dst.push_back(x2);
    }
  Tensor interior(long(inside.size()) / 2, 2, 0.0);
  interior.v = inside;
  Tensor boundary(long(edge.size()) / 2, 2, 0.0);
  boundary.v = edge;
  Var loss = elliptic_pde_loss(f, tape.constant(interior), tape.constant(boundary));
  CHECK(loss.val().v[0] < 1e-12);
}

TEST_CASE("elliptic pde loss on the zero function is the mean squared forcing") {
  Tape tape;
  GraphFn f = [](Var x) {
    return matmul(x, x.tape->constant(Tensor(2, 1, 0.0)));
  };
  Tensor interior(6, 2, 0.0);
  interior.v = {0.2, 0.3, 0.5, 0.5, 0.7, 0.1, 0.4, 0.9, 0.25, 0.75, 0.6, 0.45};
  Tensor boundary(2, 2, 0.0);
  boundary.v = {0.0, 0.3, 1.0, 0.8};
  const double loss =
      elliptic_pde_loss(f, tape.constant(interior), tape.constant(boundary))
          .val()
          .v[0];
  double acc = 0.0;
  for (long i = 0; i < 6; ++i) {
    const double s =
        std::sin(kPi * interior.at(i, 0)) * std::sin(kPi * interior.at(i, 1));
    acc += s * s;
  }
  CHECK(loss == doctest::Approx(acc / 6.0).epsilon(1e-14));
}

TEST_CASE("elliptic exact solution values") {
  CHECK(elliptic_pde_exact(0.5, 0.5) ==
        doctest::Approx(-0.05066059182116889).epsilon(1e-15));
  CHECK(elliptic_pde_exact(0.0, 0.7) == 0.0);
  CHECK(elliptic_pde_exact(0.3, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  // Laplacian check by second differences: d2F/dx1^2 + d2F/dx2^2 = forcing.
  const double h = 1e-4, x1 = 0.37, x2 = 0.61;
  const double lap =
      (elliptic_pde_exact(x1 + h, x2) - 2.0 * elliptic_pde_exact(x1, x2) +
       elliptic_pde_exact(x1 - h, x2)) /
          (h * h) +
      (elliptic_pde_exact(x1, x2 + h) - 2.0 * elliptic_pde_exact(x1, x2) +
       elliptic_pde_exact(x1, x2 - h)) /
          (h * h);
  CHECK(lap == doctest::Approx(std::sin(kPi * x1) * std::sin(kPi * x2)).epsilon(1e-6));
}

TEST_CASE("first-root scan") {
  RootScan r = find_first_root([](double x) { return x - 2.0; }, 0.0, 10.0);
  CHECK(r.found);
  CHECK(std::fabs(r.root - 2.0) < 1e-11);

  r = find_first_root([](double x) { return 1.0 - x * x / 6.0; }, 0.0, 15.0);
  CHECK(r.found);
  CHECK(std::fabs(r.root - std::sqrt(6.0)) < 1e-11);

  r = find_first_root([](double x) { return std::sin(x); }, 1.0, 20.0);
  CHECK(r.found);
  CHECK(std::fabs(r.root - kPi) < 1e-11);

  r = find_first_root([](double x) { return x - 2.0; }, 0.0, 4.0, 5);
  CHECK(r.found);
  CHECK(r.root == 2.0);

  r = find_first_root([](double x) { return x; }, 0.0, 5.0);
  CHECK(r.found);
  CHECK(r.root == 0.0);

  CHECK_FALSE(find_first_root([](double x) { return x * x + 1.0; }, -3.0, 3.0).found);
  CHECK_THROWS_AS(find_first_root([](double x) { return x; }, 0.0, 1.0, 1),
                  ValueError);
}

TEST_CASE("lane-emden reference roots") {
  CHECK(lane_emden_reference_root(0) == std::sqrt(6.0));
  CHECK(lane_emden_reference_root(1) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(lane_emden_reference_root(2) == 3.65375374);
  CHECK(lane_emden_reference_root(3) == 6.89684862);
  CHECK(lane_emden_reference_root(4) == 14.97154635);
  CHECK_THROWS_AS(lane_emden_reference_root(5), ValueError);
  CHECK_THROWS_AS(lane_emden_reference_root(-1), ValueError);
}

TEST_CASE("net_eval runs on a scratch tape without touching parameters") {
  Network net = small_mlp(1, 4, 9);
  std::vector<Tensor*> params = net.params();
  std::vector<Tensor> before;
  for (Tensor* p : params) before.push_back(*p);
  const Tensor x = linspace_col(-2.0, 2.0, 7);
  const Tensor y1 = net_eval(net, x);
  const Tensor y2 = net_eval(net, x);
  for (long i = 0; i < y1.size(); ++i) CHECK(y1.v[i] == y2.v[i]);
  for (size_t i = 0; i < params.size(); ++i)
    CHECK(std::memcmp(params[i]->v.data(), before[i].v.data(),
                      static_cast<size_t>(params[i]->size()) * sizeof(double)) == 0);
}

TEST_CASE("regression training fills its report and is reproducible") {
  const RegressionData data = generate_regression_data(Target::F2, 3, 64, 32);
  OptimConfig opt;
  opt.epochs = 10;

  Network net1 = small_mlp(1, 8, 3);
  TrainReport r1 = train_regression(net1, data, opt);
  CHECK(r1.status == "ok");
  CHECK(std::isfinite(r1.train_mse));
  CHECK(std::isfinite(r1.test_mse));
  CHECK(r1.train_mse >= 0.0);
  CHECK(std::isnan(r1.root));
  CHECK(std::isnan(r1.root_err));
  CHECK(std::isnan(r1.max_abs_err));
  REQUIRE(r1.trace.size() >= 2);
  CHECK(r1.trace.back() < r1.trace.front());
  CHECK(r1.wall_s >= 0.0);

  Network net2 = small_mlp(1, 8, 3);
  TrainReport r2 = train_regression(net2, data, opt);
  CHECK(r1.train_mse == r2.train_mse);
  CHECK(r1.test_mse == r2.test_mse);
  REQUIRE(r1.trace.size() == r2.trace.size());
  for (size_t i = 0; i < r1.trace.size(); ++i) CHECK(r1.trace[i] == r2.trace[i]);
}

TEST_CASE("regression harness reports divergence instead of throwing") {
  // Fractional mapping with an identity squash feeds raw inputs to a map that
  // requires (0, 1), so the very first forward pass raises internally.
  MappingSpec frac;
  frac.kind = MapKind::Fractional;
  std::vector<std::unique_ptr<Layer>> ls;
  ls.push_back(std::make_unique<JacobiRKanLayer>(1, 1, 2, frac));
  Network net(std::move(ls));
  const RegressionData data = generate_regression_data(Target::F1, 2, 16, 8);
  OptimConfig opt;
  opt.epochs = 3;
  TrainReport rep = train_regression(net, data, opt);
  CHECK(rep.status == "diverged");
  CHECK(std::isnan(rep.train_mse));
}

TEST_CASE("harness argument guards") {
  Network wide = small_mlp(2, 4, 1);
  const RegressionData data = generate_regression_data(Target::F1, 1, 8, 4);
  OptimConfig opt;
  CHECK_THROWS_AS(train_regression(wide, data, opt), ShapeError);
  Network uni = small_mlp(1, 4, 1);
  CHECK_THROWS_AS(solve_elliptic_pde(uni, opt, 6, 5), ShapeError);
  CHECK_THROWS_AS(solve_lane_emden(uni, 5, opt), ValueError);
  CHECK_THROWS_AS(solve_lane_emden(uni, 0, opt, 0), ValueError);
  OptimConfig bad;
  bad.kind = "sgd";
  Network n2 = small_mlp(1, 4, 2);
  CHECK_THROWS_AS(train_regression(n2, data, bad), ValueError);
}

TEST_CASE("lane-emden harness fills root fields consistently") {
  Network net = small_mlp(1, 8, 5);
  OptimConfig opt;
  opt.epochs = 5;
  TrainReport rep = solve_lane_emden(net, 0, opt, 96, 6.0);
  CHECK(std::isnan(rep.test_mse));
  CHECK(std::isnan(rep.max_abs_err));
  REQUIRE_FALSE(rep.trace.empty());
  CHECK(rep.train_mse == rep.trace.back());
  REQUIRE((rep.status == "ok" || rep.status == "no-root" || rep.status == "stalled"));
  if (rep.status == "ok") CHECK(std::isfinite(rep.root));
  if (rep.status == "no-root") CHECK(std::isnan(rep.root));
  if (std::isfinite(rep.root)) {
    CHECK(rep.root >= 0.0);
    CHECK(rep.root <= 6.0);
    CHECK(rep.root_err ==
          doctest::Approx(std::fabs(rep.root - std::sqrt(6.0))).epsilon(1e-12));
  }
}

TEST_CASE("elliptic pde harness fills error fields under adam") {
  Network net = small_mlp(2, 6, 6);
  OptimConfig opt;
  opt.kind = "adam";
  opt.epochs = 10;
  opt.learning_rate = 0.01;
  TrainReport rep = solve_elliptic_pde(net, opt, 6, 11);
  CHECK(rep.status == "ok");
  CHECK(rep.trace.size() == 11);
  CHECK(rep.train_mse == rep.trace.back());
  CHECK(std::isfinite(rep.test_mse));
  CHECK(std::isfinite(rep.max_abs_err));
  CHECK(rep.max_abs_err >= 0.0);
  CHECK(std::isnan(rep.root));
  CHECK(std::isnan(rep.root_err));
}
