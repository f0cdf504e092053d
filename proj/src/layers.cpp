#include "rkan/layers.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "rkan/error.hpp"

namespace rkan {

const char* squash_name(Squash s) {
  switch (s) {
    case Squash::Identity: return "identity";
    case Squash::Tanh: return "tanh";
    case Squash::Sigmoid: return "sigmoid";
  }
  throw ValueError("squash_name: unknown squash");
}

Squash squash_parse(const std::string& name) {
  if (name == "identity") return Squash::Identity;
  if (name == "tanh") return Squash::Tanh;
  if (name == "sigmoid") return Squash::Sigmoid;
  throw ValueError("unknown squash \"" + name + "\"");
}

Var apply_squash(Var x, Squash s) {
  switch (s) {
    case Squash::Identity: return x;
    case Squash::Tanh: return tanh(x);
    case Squash::Sigmoid: return sigmoid(x);
  }
  throw ValueError("apply_squash: unknown squash");
}

namespace {

void check_width(const Var& x, long want, const char* who) {
  if (x.val().cols != want)
    throw ShapeError(std::string(who) + ": batch width " +
                     std::to_string(x.val().cols) + ", layer expects " +
                     std::to_string(want));
}

void check_dims(long in, long out, const char* who) {
  if (in <= 0 || out <= 0)
    throw ValueError(std::string(who) + ": dimensions must be positive");
}

double coeff_limit(long in, int K) { return 1.0 / std::sqrt(double(in) * (K + 1)); }

void draw_uniform(Tensor& t, Rng& rng, double lo, double hi) {
  for (double& x : t.v) x = rng.uniform(lo, hi);
}

Var ones_column(Var x) {
  return x.tape->constant(Tensor(x.val().rows, 1, 1.0));
}

// bias is [1 x out]; broadcast it across the batch as onesB * bias.
Var add_bias(Var acc, Var bias) {
  return acc + matmul(ones_column(acc), bias);
}

Tensor unit_column(long dim, long q) {
  Tensor e(dim, 1, 0.0);
  e.at(q, 0) = 1.0;
  return e;
}

Tensor unit_row(long dim, long q) {
  Tensor e(1, dim, 0.0);
  e.at(0, q) = 1.0;
  return e;
}

void check_finite_batch(const Var& out, const char* who) {
  const Tensor& t = out.val();
  for (long i = 0; i < t.size(); ++i)
    if (!std::isfinite(t.v[i]))
      throw ValueError(std::string(who) + ": non-finite output at sample " +
                       std::to_string(i / t.cols));
}

}  // namespace

DenseLayer::DenseLayer(long in, long out)
    : in_(in), out_(out), w_(in, out, 0.0), b_(1, out, 0.0) {
  check_dims(in, out, "dense");
}

void DenseLayer::init(Rng& rng) {
  const double lim = 1.1 / std::sqrt(double(in_));
  draw_uniform(w_, rng, -lim, lim);
  draw_uniform(b_, rng, -0.5, 0.5);
}

Var DenseLayer::forward(Var x, const std::vector<Var>& leaves, size_t& cursor) const {
  check_width(x, in_, "dense");
  Var w = leaves.at(cursor++);
  Var b = leaves.at(cursor++);
  return add_bias(matmul(x, w), b);
}

std::string FixedActivation::kind_name() const {
  switch (kind_) {
    case Kind::Tanh: return "tanh";
    case Kind::Relu: return "relu";
    case Kind::Sigmoid: return "sigmoid";
  }
  throw ValueError("fixed activation: unknown kind");
}

Var FixedActivation::forward(Var x, const std::vector<Var>&, size_t&) const {
  switch (kind_) {
    case Kind::Tanh: return tanh(x);
    case Kind::Sigmoid: return sigmoid(x);
    default: break;
  }
  Var zero = x.tape->constant(0.0);
  return select(x, x, zero);
}

Var AffineInput::forward(Var x, const std::vector<Var>&, size_t&) const {
  return x * scale_ + shift_;
}

JacobiRKanLayer::JacobiRKanLayer(long in, long out, int K, MappingSpec mapping,
                                 Squash squash)
    : in_(in),
      out_(out),
      K_(K),
      mapping_(mapping),
      squash_(squash),
      bias_(1, out > 0 ? out : 1, 0.0),
      alpha_raw_(1, 1, 1.0),
      beta_raw_(1, 1, 1.0),
      iota_raw_(1, 1, mapping.iota_raw),
      gamma_raw_(1, 1, mapping.gamma_raw) {
  check_dims(in, out, "jacobi-rkan");
  if (K < 0) throw ValueError("jacobi-rkan: K must be non-negative");
  for (int k = 0; k <= K_; ++k) coeffs_.emplace_back(in_, out_, 0.0);
}

std::string JacobiRKanLayer::kind_name() const {
  return mapping_.kind == MapKind::Fractional ? "fjacobi-rkan" : "jacobi-rkan";
}

std::vector<Tensor*> JacobiRKanLayer::params() {
  std::vector<Tensor*> out;
  for (Tensor& c : coeffs_) out.push_back(&c);
  out.push_back(&bias_);
  out.push_back(&alpha_raw_);
  out.push_back(&beta_raw_);
  if (mapping_uses_iota(mapping_.kind)) out.push_back(&iota_raw_);
  if (mapping_uses_gamma(mapping_.kind)) out.push_back(&gamma_raw_);
  return out;
}

void JacobiRKanLayer::init(Rng& rng) {
  const double lim = coeff_limit(in_, K_);
  for (Tensor& c : coeffs_) draw_uniform(c, rng, -lim, lim);
  bias_ = Tensor(1, out_, 0.0);
  alpha_raw_.v[0] = 1.0;
  beta_raw_.v[0] = 1.0;
  iota_raw_.v[0] = mapping_.iota_raw;
  gamma_raw_.v[0] = mapping_.gamma_raw;
}

Var JacobiRKanLayer::forward(Var x, const std::vector<Var>& leaves,
                             size_t& cursor) const {
  check_width(x, in_, "jacobi-rkan");
  std::vector<Var> c;
  for (int k = 0; k <= K_; ++k) c.push_back(leaves.at(cursor++));
  Var bias = leaves.at(cursor++);
  Var alpha = elu(leaves.at(cursor++));
  Var beta = elu(leaves.at(cursor++));
  Var iota, gamma;
  if (mapping_uses_iota(mapping_.kind)) iota = softplus(leaves.at(cursor++));
  if (mapping_uses_gamma(mapping_.kind)) gamma = softplus(leaves.at(cursor++));

  Var mapped = map_apply(apply_squash(x, squash_), mapping_, iota, gamma);
  std::vector<Var> basis = jacobi_basis(mapped, alpha, beta, K_);
  Var acc = matmul(basis[0], c[0]);
  for (int k = 1; k <= K_; ++k) acc = acc + matmul(basis[k], c[k]);
  return add_bias(acc, bias);
}

JacobiActivation::JacobiActivation(int K, MappingSpec mapping, Squash squash)
    : K_(K),
      mapping_(mapping),
      squash_(squash),
      alpha_raw_(1, 1, 1.0),
      beta_raw_(1, 1, 1.0),
      iota_raw_(1, 1, mapping.iota_raw),
      gamma_raw_(1, 1, mapping.gamma_raw) {
  if (K < 0) throw ValueError("jacobi activation: K must be non-negative");
  for (int k = 0; k <= K_; ++k) theta_.emplace_back(1, 1, 0.0);
}

std::string JacobiActivation::kind_name() const {
  return mapping_.kind == MapKind::Fractional ? "fjacobi-rkan" : "jacobi-rkan";
}

std::vector<Tensor*> JacobiActivation::params() {
  std::vector<Tensor*> out;
  for (Tensor& t : theta_) out.push_back(&t);
  out.push_back(&alpha_raw_);
  out.push_back(&beta_raw_);
  if (mapping_uses_iota(mapping_.kind)) out.push_back(&iota_raw_);
  if (mapping_uses_gamma(mapping_.kind)) out.push_back(&gamma_raw_);
  return out;
}

void JacobiActivation::init(Rng& rng) {
  const double lim = coeff_limit(1, K_);
  for (Tensor& t : theta_) draw_uniform(t, rng, -lim, lim);
  alpha_raw_.v[0] = 1.0;
  beta_raw_.v[0] = 1.0;
  iota_raw_.v[0] = mapping_.iota_raw;
  gamma_raw_.v[0] = mapping_.gamma_raw;
}

Var JacobiActivation::forward(Var x, const std::vector<Var>& leaves,
                              size_t& cursor) const {
  std::vector<Var> theta;
  for (int k = 0; k <= K_; ++k) theta.push_back(leaves.at(cursor++));
  Var alpha = elu(leaves.at(cursor++));
  Var beta = elu(leaves.at(cursor++));
  Var iota, gamma;
  if (mapping_uses_iota(mapping_.kind)) iota = softplus(leaves.at(cursor++));
  if (mapping_uses_gamma(mapping_.kind)) gamma = softplus(leaves.at(cursor++));

  Var mapped = map_apply(apply_squash(x, squash_), mapping_, iota, gamma);
  std::vector<Var> basis = jacobi_basis(mapped, alpha, beta, K_);
  Var acc = theta[0] * basis[0];
  for (int k = 1; k <= K_; ++k) acc = acc + theta[k] * basis[k];
  return acc;
}

PadeRKanLayer::PadeRKanLayer(long in, long out, int K, int p, bool fractional,
                             Squash squash)
    : in_(in),
      out_(out),
      K_(K),
      p_(p),
      fractional_(fractional),
      squash_(squash),
      psi_(in > 0 ? in : 1, out > 0 ? out : 1, 1.0),
      bias_(1, out > 0 ? out : 1, 0.0),
      alpha_raw_(1, 1, 1.0),
      beta_raw_(1, 1, 1.0),
      gamma_raw_(1, 1, softplus_inverse(1.0)) {
  check_dims(in, out, "pade-rkan");
  if (K < 0 || p < 0) throw ValueError("pade-rkan: K and p must be non-negative");
  if (squash_ == Squash::Identity)
    throw ValueError("pade-rkan: squash must be tanh or sigmoid");
  if (fractional_ && squash_ != Squash::Sigmoid)
    throw ValueError("fpade-rkan: fractional map needs the sigmoid squash");
  for (int i = 0; i <= K_; ++i) num_.emplace_back(in_, out_, 0.0);
  for (int i = 0; i <= p_; ++i) den_.emplace_back(1, in_, i == 0 ? 1.0 : 0.0);
}

std::string PadeRKanLayer::kind_name() const {
  return fractional_ ? "fpade-rkan" : "pade-rkan";
}

std::vector<Tensor*> PadeRKanLayer::params() {
  std::vector<Tensor*> out;
  for (Tensor& t : num_) out.push_back(&t);
  for (Tensor& t : den_) out.push_back(&t);
  out.push_back(&psi_);
  out.push_back(&bias_);
  out.push_back(&alpha_raw_);
  out.push_back(&beta_raw_);
  if (fractional_) out.push_back(&gamma_raw_);
  return out;
}

void PadeRKanLayer::init(Rng& rng) {
  const double lim = coeff_limit(in_, K_);
  for (Tensor& t : num_) draw_uniform(t, rng, -lim, lim);
  for (int i = 0; i <= p_; ++i) den_[i] = Tensor(1, in_, i == 0 ? 1.0 : 0.0);
  psi_ = Tensor(in_, out_, 1.0);
  bias_ = Tensor(1, out_, 0.0);
  alpha_raw_.v[0] = 1.0;
  beta_raw_.v[0] = 1.0;
  gamma_raw_.v[0] = softplus_inverse(1.0);
}

Var PadeRKanLayer::forward(Var x, const std::vector<Var>& leaves,
                           size_t& cursor) const {
  check_width(x, in_, "pade-rkan");
  std::vector<Var> num, den;
  for (int i = 0; i <= K_; ++i) num.push_back(leaves.at(cursor++));
  for (int i = 0; i <= p_; ++i) den.push_back(leaves.at(cursor++));
  Var psi = leaves.at(cursor++);
  Var bias = leaves.at(cursor++);
  Var alpha = elu(leaves.at(cursor++));
  Var beta = elu(leaves.at(cursor++));
  Var gamma;
  if (fractional_) gamma = softplus(leaves.at(cursor++));

  Tape& tape = *x.tape;
  Var s = apply_squash(x, squash_);
  if (fractional_) s = map_fractional(s, gamma);

  const int maxd = K_ > p_ ? K_ : p_;
  const double eps2 = epsilon_ * epsilon_;
  Var onesB = ones_column(x);
  Var ones_out = tape.constant(Tensor(1, out_, 1.0));
  Var acc;
  for (long q = 0; q < in_; ++q) {
    Var eq = tape.constant(unit_column(in_, q));
    Var eqT = tape.constant(unit_row(in_, q));
    Var sq = matmul(s, eq);
    std::vector<Var> basis = jacobi_basis(sq, alpha, beta, maxd);
    Var n = matmul(basis[0], matmul(eqT, num[0]));
    for (int i = 1; i <= K_; ++i)
      n = n + matmul(basis[i], matmul(eqT, num[i]));
    Var d = matmul(den[0], eq) * basis[0];
    for (int i = 1; i <= p_; ++i) d = d + matmul(den[i], eq) * basis[i];
    Var dx = matmul(d, ones_out);
    Var ratio = n * dx / (dx * dx + eps2);
    Var contrib = ratio * matmul(onesB, matmul(eqT, psi));
    acc = q == 0 ? contrib : acc + contrib;
  }
  Var out = add_bias(acc, bias);
  check_finite_batch(out, "pade-rkan");
  return out;
}

PadeActivation::PadeActivation(int K, int p, bool fractional, Squash squash)
    : K_(K),
      p_(p),
      fractional_(fractional),
      squash_(squash),
      alpha_raw_(1, 1, 1.0),
      beta_raw_(1, 1, 1.0),
      gamma_raw_(1, 1, softplus_inverse(1.0)) {
  if (K < 0 || p < 0)
    throw ValueError("pade activation: K and p must be non-negative");
  if (squash_ == Squash::Identity)
    throw ValueError("pade activation: squash must be tanh or sigmoid");
  if (fractional_ && squash_ != Squash::Sigmoid)
    throw ValueError("fpade activation: fractional map needs the sigmoid squash");
  for (int i = 0; i <= K_; ++i) num_.emplace_back(1, 1, 0.0);
  for (int i = 0; i <= p_; ++i) den_.emplace_back(1, 1, i == 0 ? 1.0 : 0.0);
}

std::string PadeActivation::kind_name() const {
  return fractional_ ? "fpade-rkan" : "pade-rkan";
}

std::vector<Tensor*> PadeActivation::params() {
  std::vector<Tensor*> out;
  for (Tensor& t : num_) out.push_back(&t);
  for (Tensor& t : den_) out.push_back(&t);
  out.push_back(&alpha_raw_);
  out.push_back(&beta_raw_);
  if (fractional_) out.push_back(&gamma_raw_);
  return out;
}

void PadeActivation::init(Rng& rng) {
  const double lim = coeff_limit(1, K_);
  for (Tensor& t : num_) draw_uniform(t, rng, -lim, lim);
  for (int i = 0; i <= p_; ++i) den_[i].v[0] = i == 0 ? 1.0 : 0.0;
  alpha_raw_.v[0] = 1.0;
  beta_raw_.v[0] = 1.0;
  gamma_raw_.v[0] = softplus_inverse(1.0);
}

Var PadeActivation::forward(Var x, const std::vector<Var>& leaves,
                            size_t& cursor) const {
  std::vector<Var> num, den;
  for (int i = 0; i <= K_; ++i) num.push_back(leaves.at(cursor++));
  for (int i = 0; i <= p_; ++i) den.push_back(leaves.at(cursor++));
  Var alpha = elu(leaves.at(cursor++));
  Var beta = elu(leaves.at(cursor++));
  Var gamma;
  if (fractional_) gamma = softplus(leaves.at(cursor++));

  Var s = apply_squash(x, squash_);
  if (fractional_) s = map_fractional(s, gamma);
  const int maxd = K_ > p_ ? K_ : p_;
  std::vector<Var> basis = jacobi_basis(s, alpha, beta, maxd);
  Var n = num[0] * basis[0];
  for (int i = 1; i <= K_; ++i) n = n + num[i] * basis[i];
  Var d = den[0] * basis[0];
  for (int i = 1; i <= p_; ++i) d = d + den[i] * basis[i];
  const double eps2 = epsilon_ * epsilon_;
  Var out = n * d / (d * d + eps2);
  check_finite_batch(out, "pade activation");
  return out;
}

Network::Network(std::vector<std::unique_ptr<Layer>> layers)
    : layers_(std::move(layers)) {
  if (layers_.empty()) throw ValueError("network: needs at least one layer");
  long cur = 0;
  for (const auto& l : layers_) {
    const long li = l->in_dim();
    if (li > 0) {
      if (cur > 0 && cur != li)
        throw ShapeError("network: layer \"" + l->kind_name() + "\" expects width " +
                         std::to_string(li) + ", previous layer produces " +
                         std::to_string(cur));
      if (in_ == 0) in_ = li;
      cur = l->out_dim();
    }
  }
  out_ = cur;
}

void Network::init(Rng& rng) {
  for (auto& l : layers_) l->init(rng);
}

std::vector<Tensor*> Network::params() {
  std::vector<Tensor*> out;
  for (auto& l : layers_)
    for (Tensor* t : l->params()) out.push_back(t);
  return out;
}

std::vector<const Tensor*> Network::params() const {
  std::vector<const Tensor*> out;
  for (const auto& l : layers_)
    for (Tensor* t : l->params()) out.push_back(t);
  return out;
}

long Network::n_scalars() const {
  long n = 0;
  for (const Tensor* t : params()) n += t->size();
  return n;
}

std::vector<Var> Network::make_leaves(Tape& tape) const {
  std::vector<Var> leaves;
  for (const Tensor* t : params()) leaves.push_back(tape.leaf(*t));
  return leaves;
}

Var Network::forward(Var x, const std::vector<Var>& leaves) const {
  size_t cursor = 0;
  Var h = x;
  for (const auto& l : layers_) h = l->forward(h, leaves, cursor);
  if (cursor != leaves.size())
    throw Error("network: leaf count mismatch (internal)");
  return h;
}

}  // namespace rkan
