#pragma once

#include <cstdint>
#include <vector>

#include "rkan/tensor.hpp"

namespace rkan {

enum class Op : std::uint8_t {
  Leaf,
  Const,
  Add,
  Sub,
  Mul,
  Div,
  Select,
  Neg,
  Exp,
  Log,
  Tanh,
  Sigmoid,
  Sin,
  Cos,
  Elu,
  EluGrad,
  Softplus,
  Pow,
  MatMul,
  Sum,
  Mean,
  Concat,
};

struct Node {
  Op op;
  int a = -1, b = -1, c = -1;  // parent indices, always < own index
  double attr = 0.0;           // Pow exponent; Concat axis
  Tensor val;
  Tensor grad;                 // filled by Tape::backward
};

class Tape;

// Lightweight handle to a tape node.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
  Var() = default;
  Var(Tape* t, int i) : tape(t), id(i) {}
  const Tensor& val() const;
  const Tensor& grad() const;
};

// Append-only computation graph. Values are immutable once recorded; a
// training step builds a fresh tape, runs backward, and discards it.
// Elementwise ops accept equal shapes or a 1x1 scalar on either side.
class Tape {
 public:
  Var leaf(Tensor v);
  Var constant(Tensor v);
  Var constant(double x) { return constant(Tensor::scalar(x)); }

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  // Errors if any denominator element has |value| < 1e-30; poles must be
  // handled by layer-level safeguards, not silently produced here.
  Var div(Var a, Var b);
  // c > 0 picks a, otherwise b, elementwise.
  Var select(Var c, Var a, Var b);
  Var neg(Var a);
  Var exp(Var a);
  // Errors if any element is below 1e-30 (covers non-positive inputs).
  Var log(Var a);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var sin(Var a);
  Var cos(Var a);
  Var elu(Var a);       // kappa = 1
  Var elu_grad(Var a);  // d/dx elu(x); has its own derivative rules
  Var softplus(Var a);
  Var pow(Var a, double p);
  Var matmul(Var a, Var b);
  Var sum(Var a);   // full reduction to 1x1
  Var mean(Var a);  // full reduction to 1x1
  Var concat(Var a, Var b, int axis);

  // Reverse sweep from a scalar root. Grads are zeroed first, so repeated
  // calls on the same graph produce bitwise-identical results.
  void backward(Var root);

  // Forward-mode JVP sweep: appends nodes computing the directional
  // derivative of y with respect to x along `seed` (same shape as x).
  // Leaves other than x are treated as constants. The returned node is
  // itself differentiable, so applying tangent twice yields second-order
  // input derivatives while the result stays differentiable in the
  // parameters via backward.
  Var tangent(Var y, Var x, Var seed);

  // d^order y / d(x[:, axis])^order, order in {1, 2}, evaluated per sample.
  Var input_derivative(Var y, Var x, int order, long axis);

  int n_nodes() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int i) const { return nodes_[static_cast<size_t>(i)]; }
  const Tensor& val(int i) const { return nodes_[static_cast<size_t>(i)].val; }
  const Tensor& grad(int i) const { return nodes_[static_cast<size_t>(i)].grad; }
  void clear() { nodes_.clear(); }

 private:
  Var push(Op op, int a, int b, int c, double attr, Tensor val);
  Var binary(Op op, const char* name, Var a, Var b);
  Var unary(Op op, Var a, Tensor val);
  void check_mine(Var v, const char* name) const;

  std::vector<Node> nodes_;
};

inline const Tensor& Var::val() const { return tape->val(id); }
inline const Tensor& Var::grad() const { return tape->grad(id); }

// Graph math in operator form. Scalar overloads record constants.
inline Var operator+(Var a, Var b) { return a.tape->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
inline Var operator/(Var a, Var b) { return a.tape->div(a, b); }
inline Var operator-(Var a) { return a.tape->neg(a); }
inline Var operator+(Var a, double b) { return a + a.tape->constant(b); }
inline Var operator+(double a, Var b) { return b.tape->constant(a) + b; }
inline Var operator-(Var a, double b) { return a - a.tape->constant(b); }
inline Var operator-(double a, Var b) { return b.tape->constant(a) - b; }
inline Var operator*(Var a, double b) { return a * a.tape->constant(b); }
inline Var operator*(double a, Var b) { return b.tape->constant(a) * b; }
inline Var operator/(Var a, double b) { return a / a.tape->constant(b); }
inline Var operator/(double a, Var b) { return b.tape->constant(a) / b; }

inline Var exp(Var a) { return a.tape->exp(a); }
inline Var log(Var a) { return a.tape->log(a); }
inline Var tanh(Var a) { return a.tape->tanh(a); }
inline Var sigmoid(Var a) { return a.tape->sigmoid(a); }
inline Var sin(Var a) { return a.tape->sin(a); }
inline Var cos(Var a) { return a.tape->cos(a); }
inline Var elu(Var a) { return a.tape->elu(a); }
inline Var softplus(Var a) { return a.tape->softplus(a); }
inline Var pow(Var a, double p) { return a.tape->pow(a, p); }
inline Var matmul(Var a, Var b) { return a.tape->matmul(a, b); }
inline Var sum(Var a) { return a.tape->sum(a); }
inline Var mean(Var a) { return a.tape->mean(a); }
inline Var select(Var c, Var a, Var b) { return c.tape->select(c, a, b); }
inline Var concat(Var a, Var b, int axis) { return a.tape->concat(a, b, axis); }

}  // namespace rkan
