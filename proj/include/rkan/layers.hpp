#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rkan/autodiff.hpp"
#include "rkan/jacobi.hpp"
#include "rkan/mapping.hpp"
#include "rkan/rng.hpp"
#include "rkan/tensor.hpp"

namespace rkan {

enum class Squash { Identity, Tanh, Sigmoid };

// Config-file names: "identity", "tanh", "sigmoid".
const char* squash_name(Squash s);
Squash squash_parse(const std::string& name);

Var apply_squash(Var x, Squash s);

inline bool mapping_uses_iota(MapKind k) {
  return k == MapKind::SemiLog || k == MapKind::SemiAlg || k == MapKind::SemiExp ||
         k == MapKind::InfLog || k == MapKind::InfAlg;
}
inline bool mapping_uses_gamma(MapKind k) { return k == MapKind::Fractional; }

// One stage of a network. Parameters are plain tensors owned by the layer;
// each training step copies them onto a fresh tape as leaves (make_leaves) and
// forward() consumes this layer's leaves in params() order starting at cursor.
// Layers are immutable during forward; updates happen between steps.
class Layer {
 public:
  virtual ~Layer() = default;
  // 0 means shape-preserving (activations, input scaling).
  virtual long in_dim() const { return 0; }
  virtual long out_dim() const { return 0; }
  virtual std::string kind_name() const = 0;
  virtual std::vector<Tensor*> params() { return {}; }
  virtual void init(Rng&) {}
  virtual Var forward(Var x, const std::vector<Var>& leaves, size_t& cursor) const = 0;
};

// Fully connected: y = xW + b, W ~ U(+-1.1/sqrt(in)), b ~ U(+-0.5).
class DenseLayer final : public Layer {
 public:
  DenseLayer(long in, long out);
  long in_dim() const override { return in_; }
  long out_dim() const override { return out_; }
  std::string kind_name() const override { return "dense"; }
  std::vector<Tensor*> params() override { return {&w_, &b_}; }
  void init(Rng& rng) override;
  Var forward(Var x, const std::vector<Var>& leaves, size_t& cursor) const override;

 private:
  long in_, out_;
  Tensor w_, b_;
};

// Parameter-free elementwise activation ("tanh", "relu", "sigmoid").
class FixedActivation final : public Layer {
 public:
  enum class Kind { Tanh, Relu, Sigmoid };
  explicit FixedActivation(Kind k) : kind_(k) {}
  std::string kind_name() const override;
  Var forward(Var x, const std::vector<Var>& leaves, size_t& cursor) const override;

 private:
  Kind kind_;
};

// Fixed (non-trainable) elementwise a*x + c stage, used by harnesses that
// pre-scale raw physical coordinates into the mapping's comfort zone.
class AffineInput final : public Layer {
 public:
  AffineInput(double scale, double shift) : scale_(scale), shift_(shift) {}
  std::string kind_name() const override { return "affine-input"; }
  Var forward(Var x, const std::vector<Var>& leaves, size_t& cursor) const override;
  double scale() const { return scale_; }
  double shift() const { return shift_; }

 private:
  double scale_, shift_;
};

// Edge-wise rational-Jacobi layer: squash, rational mapping, Jacobi basis up to
// degree K, contraction with per-edge coefficients, bias. Coefficients are
// stored per degree as [in x out] matrices (logically one [out x in x (K+1)]
// array). With mapping kind Fractional this is the fractional variant and
// kind_name() reports "fjacobi-rkan".
class JacobiRKanLayer final : public Layer {
 public:
  JacobiRKanLayer(long in, long out, int K, MappingSpec mapping,
                  Squash squash = Squash::Identity);
  long in_dim() const override { return in_; }
  long out_dim() const override { return out_; }
  std::string kind_name() const override;
  std::vector<Tensor*> params() override;
  void init(Rng& rng) override;
  Var forward(Var x, const std::vector<Var>& leaves, size_t& cursor) const override;
  const MappingSpec& mapping() const { return mapping_; }

 private:
  long in_, out_;
  int K_;
  MappingSpec mapping_;
  Squash squash_;
  std::vector<Tensor> coeffs_;  // K+1 of [in x out]
  Tensor bias_;                 // [1 x out]
  Tensor alpha_raw_, beta_raw_, iota_raw_, gamma_raw_;  // [1 x 1]
};

// Shared-coefficient rational-Jacobi activation: the same basis machinery
// applied elementwise with one coefficient per degree, shape preserving.
class JacobiActivation final : public Layer {
 public:
  JacobiActivation(int K, MappingSpec mapping, Squash squash = Squash::Identity);
  std::string kind_name() const override;
  std::vector<Tensor*> params() override;
  void init(Rng& rng) override;
  Var forward(Var x, const std::vector<Var>& leaves, size_t& cursor) const override;

 private:
  int K_;
  MappingSpec mapping_;
  Squash squash_;
  std::vector<Tensor> theta_;  // K+1 of [1 x 1]
  Tensor alpha_raw_, beta_raw_, iota_raw_, gamma_raw_;
};

// Edge-wise Pade layer. Numerator degree K with per-edge coefficients
// (stored per degree as [in x out]); denominator degree p with per-input
// coefficients shared across output edges (stored per degree as [1 x in]);
// linear psi combiner [in x out] plus bias. The raw ratio N/D is replaced by
// the smooth safeguard N*D/(D^2 + eps^2) so a denominator zero crossing during
// training cannot produce NaN. fractional=true squashes through Sigmoid and
// applies the trainable fractional map before the basis ("fpade-rkan").
class PadeRKanLayer final : public Layer {
 public:
  PadeRKanLayer(long in, long out, int K, int p, bool fractional = false,
                Squash squash = Squash::Tanh);
  long in_dim() const override { return in_; }
  long out_dim() const override { return out_; }
  std::string kind_name() const override;
  std::vector<Tensor*> params() override;
  void init(Rng& rng) override;
  Var forward(Var x, const std::vector<Var>& leaves, size_t& cursor) const override;
  Tensor* den_coeff(int i) { return &den_[i]; }

 private:
  long in_, out_;
  int K_, p_;
  bool fractional_;
  Squash squash_;
  double epsilon_ = 1e-8;
  std::vector<Tensor> num_;  // K+1 of [in x out]
  std::vector<Tensor> den_;  // p+1 of [1 x in]
  Tensor psi_;               // [in x out]
  Tensor bias_;              // [1 x out]
  Tensor alpha_raw_, beta_raw_, gamma_raw_;
};

// Shared-coefficient Pade activation: one numerator and one denominator
// coefficient per degree, applied elementwise with the same safeguard.
class PadeActivation final : public Layer {
 public:
  PadeActivation(int K, int p, bool fractional = false, Squash squash = Squash::Tanh);
  std::string kind_name() const override;
  std::vector<Tensor*> params() override;
  void init(Rng& rng) override;
  Var forward(Var x, const std::vector<Var>& leaves, size_t& cursor) const override;

 private:
  int K_, p_;
  bool fractional_;
  Squash squash_;
  double epsilon_ = 1e-8;
  std::vector<Tensor> num_, den_;  // [1 x 1] each
  Tensor alpha_raw_, beta_raw_, gamma_raw_;
};

// Left-to-right composition. Dimension chaining is validated at construction;
// shape-preserving layers (dim 0) adapt to whatever width reaches them.
class Network {
 public:
  explicit Network(std::vector<std::unique_ptr<Layer>> layers);

  long in_dim() const { return in_; }
  long out_dim() const { return out_; }
  const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }

  void init(Rng& rng);
  std::vector<Tensor*> params();
  std::vector<const Tensor*> params() const;
  long n_scalars() const;

  // One leaf per parameter tensor, in params() order, holding current values.
  std::vector<Var> make_leaves(Tape& tape) const;
  Var forward(Var x, const std::vector<Var>& leaves) const;

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
  long in_ = 0, out_ = 0;
};

}  // namespace rkan
