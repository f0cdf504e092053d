#include <cmath>
#include <cstring>
#include <memory>
#include <vector>

#include "doctest.h"
#include "rkan/jacobi.hpp"
#include "rkan/layers.hpp"
#include "rkan/rng.hpp"
#include "support/helpers.hpp"

using namespace rkan;
using testsupport::rel_err;

namespace {

Tensor eval_net(const Network& net, const Tensor& x) {
  Tape tape;
  std::vector<Var> leaves = net.make_leaves(tape);
  return net.forward(tape.constant(x), leaves).val();
}

Tensor random_tensor(long r, long c, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed, Stream::Init);
  Tensor t(r, c);
  for (long i = 0; i < t.size(); ++i) t.v[i] = rng.uniform(lo, hi);
  return t;
}

double plain_sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

std::vector<std::unique_ptr<Layer>> one(std::unique_ptr<Layer> l) {
  std::vector<std::unique_ptr<Layer>> v;
  v.push_back(std::move(l));
  return v;
}

}  // namespace

TEST_CASE("jacobi layer with zero coefficients returns its bias") {
  MappingSpec ms;
  ms.kind = MapKind::InfAlg;
  Network net(one(std::make_unique<JacobiRKanLayer>(2, 3, 2, ms)));
  std::vector<Tensor*> params = net.params();
  // coeffs are zero from construction; set a recognizable bias.
  Tensor* bias = params[3];
  REQUIRE(bias->cols == 3);
  bias->v = {1.5, -2.0, 0.25};
  const Tensor out = eval_net(net, random_tensor(4, 2, 1, -2.0, 2.0));
  for (long b = 0; b < 4; ++b)
    for (long j = 0; j < 3; ++j) CHECK(out.at(b, j) == bias->v[size_t(j)]);
}

TEST_CASE("K = 0 reduces to column sums of the constant coefficient") {
  MappingSpec ms;
  ms.kind = MapKind::Identity;
  Network net(one(std::make_unique<JacobiRKanLayer>(3, 2, 0, ms)));
  Tensor* c0 = net.params()[0];
  for (long i = 0; i < c0->size(); ++i) c0->v[i] = 0.5 * double(i + 1);
  const Tensor out = eval_net(net, random_tensor(2, 3, 2, -0.9, 0.9));
  for (long b = 0; b < 2; ++b)
    for (long j = 0; j < 2; ++j) {
      double expect = 0.0;
      for (long q = 0; q < 3; ++q) expect += c0->at(q, j);
      CHECK(out.at(b, j) == expect);
    }
}

TEST_CASE("single-edge inf-alg layer at xi = iota evaluates to 1/sqrt(2)") {
  MappingSpec ms;
  ms.kind = MapKind::InfAlg;
  Network net(one(std::make_unique<JacobiRKanLayer>(1, 1, 1, ms)));
  std::vector<Tensor*> params = net.params();
  params[1]->v[0] = 1.0;  // C1 = 1, C0 stays 0, bias stays 0
  params[3]->v[0] = 0.0;  // alpha_raw -> alpha = 0
  params[4]->v[0] = 0.0;  // beta_raw -> beta = 0
  // iota_raw keeps its default, so iota = 1 and t = 1/sqrt(2); with
  // alpha = beta = 0 degree one is J1(t) = t.
  const Tensor out = eval_net(net, Tensor::scalar(1.0));
  CHECK(out.v[0] == doctest::Approx(0.7071067811865476).epsilon(1e-15));
}

TEST_CASE("pade layer with a fresh denominator acts as its numerator expansion") {
  Network net(one(std::make_unique<PadeRKanLayer>(2, 2, 2, 3)));
  Rng rng(11, Stream::Init);
  net.init(rng);
  std::vector<Tensor*> params = net.params();
  // params: num0..2, den0..3, psi, bias, alpha_raw, beta_raw
  const Tensor x = random_tensor(6, 2, 3, -2.5, 2.5);
  const Tensor out = eval_net(net, x);

  for (long b = 0; b < 6; ++b) {
    for (long j = 0; j < 2; ++j) {
      double expect = 0.0;
      for (long q = 0; q < 2; ++q) {
        const double t = std::tanh(x.at(b, q));
        double n = 0.0;
        for (int k = 0; k <= 2; ++k)
          n += params[size_t(k)]->at(q, j) * jacobi_explicit(k, 1.0, 1.0, t);
        const double d = 1.0;  // den = [1,0,0,0]
        const double safe = n * d / (d * d + 1e-16);
        expect += safe * params[7]->at(q, j);  // psi
      }
      CHECK(std::fabs(out.at(b, j) - expect) < 1e-10);
    }
  }
}

TEST_CASE("pade safeguard survives a zero denominator") {
  Network net(one(std::make_unique<PadeRKanLayer>(1, 1, 1, 1)));
  std::vector<Tensor*> params = net.params();
  // num nonzero, den identically zero: N*D/(D^2+eps^2) must give 0, not NaN.
  params[0]->v[0] = 0.7;
  params[1]->v[0] = 0.7;
  params[2]->v[0] = 0.0;  // den0
  params[3]->v[0] = 0.0;  // den1
  params[5]->v[0] = 2.5;  // bias
  const Tensor out = eval_net(net, Tensor::from_rows({{0.3}, {-1.0}}));
  CHECK(out.all_finite());
  CHECK(out.v[0] == 2.5);
  CHECK(out.v[1] == 2.5);
}

TEST_CASE("shared-coefficient activation ties the edge-wise layer at width 1") {
  MappingSpec ms;
  ms.kind = MapKind::InfAlg;
  Network act(one(std::make_unique<JacobiActivation>(3, ms)));
  Network edge(one(std::make_unique<JacobiRKanLayer>(1, 1, 3, ms)));
  std::vector<Tensor*> ap = act.params();
  std::vector<Tensor*> ep = edge.params();
  Rng rng(21, Stream::Init);
  act.init(rng);
  for (int k = 0; k <= 3; ++k) ep[size_t(k)]->v[0] = ap[size_t(k)]->v[0];
  // edge bias stays zero; raws already agree (defaults).
  const Tensor x = random_tensor(5, 1, 5, -3.0, 3.0);
  const Tensor ya = eval_net(act, x);
  const Tensor ye = eval_net(edge, x);
  for (long i = 0; i < 5; ++i) CHECK(ya.v[i] == ye.v[i]);
}

TEST_CASE("network composition equals sequential application") {
  auto build = [](std::uint64_t seed) {
    MappingSpec ms;
    ms.kind = MapKind::InfAlg;
    std::vector<std::unique_ptr<Layer>> ls;
    ls.push_back(std::make_unique<DenseLayer>(2, 4));
    ls.push_back(std::make_unique<JacobiActivation>(2, ms));
    ls.push_back(std::make_unique<DenseLayer>(4, 1));
    Network net(std::move(ls));
    Rng rng(seed, Stream::Init);
    net.init(rng);
    return net;
  };
  Network full = build(33);

  Network front(one(std::make_unique<DenseLayer>(2, 4)));
  MappingSpec ms;
  ms.kind = MapKind::InfAlg;
  Network mid(one(std::make_unique<JacobiActivation>(2, ms)));
  Network back(one(std::make_unique<DenseLayer>(4, 1)));
  {
    // Same draw order as the composed network's init.
    Rng rng(33, Stream::Init);
    front.init(rng);
    mid.init(rng);
    back.init(rng);
  }
  const Tensor x = random_tensor(7, 2, 8, -2.0, 2.0);
  const Tensor direct = eval_net(full, x);
  const Tensor staged = eval_net(back, eval_net(mid, eval_net(front, x)));
  REQUIRE(direct.size() == staged.size());
  for (long i = 0; i < direct.size(); ++i) CHECK(direct.v[i] == staged.v[i]);
}

TEST_CASE("init is deterministic and leaves pade denominators fresh") {
  auto build = [] {
    std::vector<std::unique_ptr<Layer>> ls;
    ls.push_back(std::make_unique<PadeRKanLayer>(2, 3, 2, 2));
    return Network(std::move(ls));
  };
  Network a = build(), b = build();
  Rng ra(77, Stream::Init), rb(77, Stream::Init);
  a.init(ra);
  b.init(rb);
  std::vector<Tensor*> pa = a.params(), pb = b.params();
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); ++i) {
    REQUIRE(pa[i]->size() == pb[i]->size());
    CHECK(std::memcmp(pa[i]->v.data(), pb[i]->v.data(),
                      static_cast<size_t>(pa[i]->size()) * sizeof(double)) == 0);
  }
  // den tensors sit right after the K+1 numerators: exactly [1, 0, ...].
  for (int i = 0; i <= 2; ++i) {
    const Tensor& den = *pa[size_t(3 + i)];
    for (long q = 0; q < den.size(); ++q)
      CHECK(den.v[size_t(q)] == (i == 0 ? 1.0 : 0.0));
  }
  const Tensor out = eval_net(a, random_tensor(16, 2, 6, -3.0, 3.0));
  CHECK(out.all_finite());
  for (long i = 0; i < out.size(); ++i) CHECK(std::fabs(out.v[i]) < 10.0);
}

TEST_CASE("parameter counts per layer kind") {
  MappingSpec inf;
  inf.kind = MapKind::InfAlg;
  MappingSpec frac;
  frac.kind = MapKind::Fractional;
  JacobiRKanLayer jac(2, 3, 3, inf);
  CHECK(jac.params().size() == 4 + 1 + 2 + 1);  // coeffs, bias, raws, iota
  JacobiRKanLayer fjac(2, 3, 3, frac, Squash::Sigmoid);
  CHECK(fjac.params().size() == 4 + 1 + 2 + 1);  // gamma instead of iota
  CHECK(fjac.kind_name() == "fjacobi-rkan");
  PadeRKanLayer pade(2, 3, 3, 2);
  CHECK(pade.params().size() == 4 + 3 + 2 + 2);  // num, den, psi+bias, raws
  CHECK(pade.kind_name() == "pade-rkan");
  PadeRKanLayer fpade(2, 3, 3, 2, true, Squash::Sigmoid);
  CHECK(fpade.params().size() == 4 + 3 + 2 + 3);
  CHECK(fpade.kind_name() == "fpade-rkan");
  MappingSpec ident;
  ident.kind = MapKind::Identity;
  JacobiRKanLayer plain(2, 3, 3, ident);
  CHECK(plain.params().size() == 4 + 1 + 2);  // no mapping parameter
}

TEST_CASE("edge permutation commutes with input permutation") {
  MappingSpec ms;
  ms.kind = MapKind::InfAlg;
  Network net(one(std::make_unique<JacobiRKanLayer>(2, 2, 2, ms)));
  Rng rng(55, Stream::Init);
  net.init(rng);
  const Tensor x = random_tensor(5, 2, 9, -2.0, 2.0);
  const Tensor base = eval_net(net, x);

  // Swap the two input columns and the matching coefficient rows.
  Tensor xs(5, 2);
  for (long b = 0; b < 5; ++b) {
    xs.at(b, 0) = x.at(b, 1);
    xs.at(b, 1) = x.at(b, 0);
  }
  for (int k = 0; k <= 2; ++k) {
    Tensor* c = net.params()[size_t(k)];
    for (long j = 0; j < 2; ++j) std::swap(c->at(0, j), c->at(1, j));
  }
  const Tensor swapped = eval_net(net, xs);
  for (long i = 0; i < base.size(); ++i)
    CHECK(rel_err(swapped.v[i], base.v[i]) < 1e-12);
}

TEST_CASE("fractional layer at gamma = 1 is the affine sigmoid pullback") {
  MappingSpec frac;
  frac.kind = MapKind::Fractional;
  Network net(one(std::make_unique<JacobiRKanLayer>(1, 1, 2, frac, Squash::Sigmoid)));
  Rng rng(44, Stream::Init);
  net.init(rng);
  std::vector<Tensor*> params = net.params();
  const Tensor x = random_tensor(9, 1, 10, -4.0, 4.0);
  const Tensor out = eval_net(net, x);
  for (long i = 0; i < 9; ++i) {
    const double t = 2.0 * plain_sigmoid(x.v[i]) - 1.0;
    double expect = 0.0;
    for (int k = 0; k <= 2; ++k)
      expect += params[size_t(k)]->v[0] * jacobi_explicit(k, 1.0, 1.0, t);
    CHECK(std::fabs(out.v[i] - expect) < 1e-12);
  }
}

TEST_CASE("affine input and fixed activations") {
  Network net(one(std::make_unique<AffineInput>(2.0, -1.0)));
  const Tensor out = eval_net(net, Tensor::from_rows({{0.0, 0.5}, {1.0, 0.25}}));
  CHECK(out.at(0, 0) == -1.0);
  CHECK(out.at(0, 1) == 0.0);
  CHECK(out.at(1, 0) == 1.0);
  CHECK(out.at(1, 1) == -0.5);

  Network relu(one(std::make_unique<FixedActivation>(FixedActivation::Kind::Relu)));
  const Tensor r = eval_net(relu, Tensor::from_rows({{-2.0, 3.0}}));
  CHECK(r.at(0, 0) == 0.0);
  CHECK(r.at(0, 1) == 3.0);
  CHECK(relu.in_dim() == 0);
}

TEST_CASE("construction and forward guards") {
  std::vector<std::unique_ptr<Layer>> bad;
  bad.push_back(std::make_unique<DenseLayer>(1, 10));
  bad.push_back(std::make_unique<DenseLayer>(9, 1));
  CHECK_THROWS_AS(Network(std::move(bad)), ShapeError);
  CHECK_THROWS_AS(Network({}), ValueError);

  CHECK_THROWS_AS(DenseLayer(0, 3), ValueError);
  MappingSpec ms;
  CHECK_THROWS_AS(JacobiRKanLayer(2, 2, -1, ms), ValueError);
  CHECK_THROWS_AS(PadeRKanLayer(2, 2, 2, 2, false, Squash::Identity), ValueError);
  CHECK_THROWS_AS(PadeRKanLayer(2, 2, 2, 2, true, Squash::Tanh), ValueError);
  CHECK_THROWS_AS(PadeActivation(2, 2, false, Squash::Identity), ValueError);

  Network net(one(std::make_unique<DenseLayer>(3, 1)));
  Tape tape;
  std::vector<Var> leaves = net.make_leaves(tape);
  CHECK_THROWS_AS(net.forward(tape.constant(Tensor(2, 2, 0.5)), leaves), ShapeError);
}

TEST_CASE("shape-preserving networks adapt to the incoming width") {
  MappingSpec ms;
  ms.kind = MapKind::InfAlg;
  Network net(one(std::make_unique<JacobiActivation>(2, ms)));
  CHECK(net.in_dim() == 0);
  const Tensor out = eval_net(net, random_tensor(4, 3, 12, -2.0, 2.0));
  CHECK(out.rows == 4);
  CHECK(out.cols == 3);
}
