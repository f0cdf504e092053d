#include "rkan/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rkan/kernels.hpp"

namespace rkan {

namespace {

constexpr double kDivGuard = 1e-30;
const double kZero = 0.0;
const double kOne = 1.0;

kernels::View view_of(const Tensor& t) {
  return t.is_scalar() ? kernels::scalar(t.data()) : kernels::full(t.data());
}

// Result shape of a broadcasting binary op: equal shapes, or scalar vs any.
Tensor result_like(const char* name, const Tensor& a, const Tensor& b) {
  if (a.same_shape(b) || b.is_scalar()) return Tensor(a.rows, a.cols);
  if (a.is_scalar()) return Tensor(b.rows, b.cols);
  throw ShapeError(std::string(name) + ": shapes " + a.shape_str() + " and " +
                   b.shape_str() + " do not conform");
}

}  // namespace

void Tape::check_mine(Var v, const char* name) const {
  if (v.tape != this || v.id < 0 || v.id >= n_nodes())
    throw ValueError(std::string(name) + ": operand from another tape");
}

Var Tape::push(Op op, int a, int b, int c, double attr, Tensor val) {
  Node n;
  n.op = op;
  n.a = a;
  n.b = b;
  n.c = c;
  n.attr = attr;
  n.val = std::move(val);
  nodes_.push_back(std::move(n));
  return Var(this, n_nodes() - 1);
}

Var Tape::leaf(Tensor v) { return push(Op::Leaf, -1, -1, -1, 0.0, std::move(v)); }
Var Tape::constant(Tensor v) { return push(Op::Const, -1, -1, -1, 0.0, std::move(v)); }

Var Tape::binary(Op op, const char* name, Var a, Var b) {
  check_mine(a, name);
  check_mine(b, name);
  const Tensor& va = val(a.id);
  const Tensor& vb = val(b.id);
  Tensor out = result_like(name, va, vb);
  const long n = out.size();
  switch (op) {
    case Op::Add: kernels::ew_add(view_of(va), view_of(vb), out.data(), n); break;
    case Op::Sub: kernels::ew_sub(view_of(va), view_of(vb), out.data(), n); break;
    case Op::Mul: kernels::ew_mul(view_of(va), view_of(vb), out.data(), n); break;
    case Op::Div: {
      for (double d : vb.v)
        if (std::fabs(d) < kDivGuard)
          throw ValueError("div: denominator magnitude below 1e-30");
      kernels::ew_div(view_of(va), view_of(vb), out.data(), n);
      break;
    }
    default: throw Error("binary: bad op");
  }
  return push(op, a.id, b.id, -1, 0.0, std::move(out));
}

Var Tape::add(Var a, Var b) { return binary(Op::Add, "add", a, b); }
Var Tape::sub(Var a, Var b) { return binary(Op::Sub, "sub", a, b); }
Var Tape::mul(Var a, Var b) { return binary(Op::Mul, "mul", a, b); }
Var Tape::div(Var a, Var b) { return binary(Op::Div, "div", a, b); }

Var Tape::select(Var c, Var a, Var b) {
  check_mine(c, "select");
  check_mine(a, "select");
  check_mine(b, "select");
  const Tensor& vc = val(c.id);
  const Tensor& va = val(a.id);
  const Tensor& vb = val(b.id);
  // Find the common non-scalar shape; every non-scalar operand must match it.
  const Tensor* shape = &vc;
  if (shape->is_scalar()) shape = &va;
  if (shape->is_scalar()) shape = &vb;
  for (const Tensor* t : {&vc, &va, &vb})
    if (!t->is_scalar() && !t->same_shape(*shape))
      throw ShapeError("select: shapes " + vc.shape_str() + ", " + va.shape_str() +
                       ", " + vb.shape_str() + " do not conform");
  Tensor out(shape->rows, shape->cols);
  kernels::ew_select(view_of(vc), view_of(va), view_of(vb), out.data(), out.size());
  return push(Op::Select, a.id, b.id, c.id, 0.0, std::move(out));
}

Var Tape::unary(Op op, Var a, Tensor out) {
  return push(op, a.id, -1, -1, 0.0, std::move(out));
}

#define RKAN_UNARY(fn, OPTAG, KERNEL)                                     \
  Var Tape::fn(Var a) {                                                   \
    check_mine(a, #fn);                                                   \
    const Tensor& va = val(a.id);                                         \
    Tensor out(va.rows, va.cols);                                         \
    kernels::KERNEL(view_of(va), out.data(), out.size());                 \
    return unary(Op::OPTAG, a, std::move(out));                           \
  }

RKAN_UNARY(neg, Neg, ew_neg)
RKAN_UNARY(exp, Exp, ew_exp)
RKAN_UNARY(tanh, Tanh, ew_tanh)
RKAN_UNARY(sigmoid, Sigmoid, ew_sigmoid)
RKAN_UNARY(sin, Sin, ew_sin)
RKAN_UNARY(cos, Cos, ew_cos)
RKAN_UNARY(elu, Elu, ew_elu)
RKAN_UNARY(elu_grad, EluGrad, ew_elu_grad)
RKAN_UNARY(softplus, Softplus, ew_softplus)

#undef RKAN_UNARY

Var Tape::log(Var a) {
  check_mine(a, "log");
  const Tensor& va = val(a.id);
  for (double x : va.v)
    if (x < kDivGuard) throw ValueError("log: argument below 1e-30");
  Tensor out(va.rows, va.cols);
  kernels::ew_log(view_of(va), out.data(), out.size());
  return unary(Op::Log, a, std::move(out));
}

Var Tape::pow(Var a, double p) {
  check_mine(a, "pow");
  const Tensor& va = val(a.id);
  Tensor out(va.rows, va.cols);
  kernels::ew_powc(view_of(va), p, out.data(), out.size());
  return push(Op::Pow, a.id, -1, -1, p, std::move(out));
}

Var Tape::matmul(Var a, Var b) {
  check_mine(a, "matmul");
  check_mine(b, "matmul");
  const Tensor& va = val(a.id);
  const Tensor& vb = val(b.id);
  if (va.cols != vb.rows)
    throw ShapeError("matmul: shapes " + va.shape_str() + " and " + vb.shape_str() +
                     " do not chain");
  Tensor out(va.rows, vb.cols);
  kernels::gemm(false, false, va.rows, vb.cols, va.cols, va.data(), va.cols,
                vb.data(), vb.cols, out.data(), out.cols, false);
  return push(Op::MatMul, a.id, b.id, -1, 0.0, std::move(out));
}

Var Tape::sum(Var a) {
  check_mine(a, "sum");
  const Tensor& va = val(a.id);
  return push(Op::Sum, a.id, -1, -1, 0.0,
              Tensor::scalar(kernels::reduce_sum(view_of(va), va.size())));
}

Var Tape::mean(Var a) {
  check_mine(a, "mean");
  const Tensor& va = val(a.id);
  if (va.size() == 0) throw ValueError("mean: empty tensor");
  return push(Op::Mean, a.id, -1, -1, 0.0,
              Tensor::scalar(kernels::reduce_sum(view_of(va), va.size()) /
                             static_cast<double>(va.size())));
}

Var Tape::concat(Var a, Var b, int axis) {
  check_mine(a, "concat");
  check_mine(b, "concat");
  const Tensor& va = val(a.id);
  const Tensor& vb = val(b.id);
  if (axis != 0 && axis != 1) throw ValueError("concat: axis must be 0 or 1");
  Tensor out;
  if (axis == 0) {
    if (va.cols != vb.cols)
      throw ShapeError("concat: shapes " + va.shape_str() + " and " +
                       vb.shape_str() + " do not align on axis 0");
    out = Tensor(va.rows + vb.rows, va.cols);
    std::copy(va.v.begin(), va.v.end(), out.v.begin());
    std::copy(vb.v.begin(), vb.v.end(), out.v.begin() + va.size());
  } else {
    if (va.rows != vb.rows)
      throw ShapeError("concat: shapes " + va.shape_str() + " and " +
                       vb.shape_str() + " do not align on axis 1");
    out = Tensor(va.rows, va.cols + vb.cols);
    for (long r = 0; r < va.rows; ++r) {
      for (long c = 0; c < va.cols; ++c) out.at(r, c) = va.at(r, c);
      for (long c = 0; c < vb.cols; ++c) out.at(r, va.cols + c) = vb.at(r, c);
    }
  }
  return push(Op::Concat, a.id, b.id, -1, static_cast<double>(axis), std::move(out));
}

void Tape::backward(Var root) {
  check_mine(root, "backward");
  if (!val(root.id).is_scalar())
    throw ValueError("backward: root must be scalar, got " +
                     val(root.id).shape_str());

  const int r = root.id;
  for (int i = 0; i <= r; ++i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.grad.same_shape(n.val))
      kernels::fill(n.grad.data(), 0.0, n.grad.size());
    else
      n.grad = Tensor(n.val.rows, n.val.cols);
  }
  nodes_[static_cast<size_t>(r)].grad.v[0] = 1.0;

  std::vector<std::uint8_t> touched(static_cast<size_t>(r) + 1, 0);
  touched[static_cast<size_t>(r)] = 1;

  // Accumulates a result-shaped contribution into a parent, reducing over
  // the broadcast when the parent is scalar. Constants are gradient sinks.
  auto add_into = [&](int parent, const Tensor& contrib, double scale) {
    Node& p = nodes_[static_cast<size_t>(parent)];
    if (p.op == Op::Const) return;
    touched[static_cast<size_t>(parent)] = 1;
    if (p.val.is_scalar() && !contrib.is_scalar())
      p.grad.v[0] +=
          scale * kernels::reduce_sum(kernels::full(contrib.data()), contrib.size());
    else
      kernels::acc_scaled(p.grad.data(), kernels::full(contrib.data()), scale,
                          contrib.size());
  };

  for (int i = r; i >= 0; --i) {
    const Node& n = nodes_[static_cast<size_t>(i)];
    if (!touched[static_cast<size_t>(i)]) continue;
    if (n.op == Op::Leaf || n.op == Op::Const) continue;
    const Tensor& g = n.grad;
    const long sz = g.size();
    Tensor t(g.rows, g.cols);
    switch (n.op) {
      case Op::Add:
        add_into(n.a, g, 1.0);
        add_into(n.b, g, 1.0);
        break;
      case Op::Sub:
        add_into(n.a, g, 1.0);
        add_into(n.b, g, -1.0);
        break;
      case Op::Mul:
        kernels::ew_mul(kernels::full(g.data()), view_of(val(n.b)), t.data(), sz);
        add_into(n.a, t, 1.0);
        kernels::ew_mul(kernels::full(g.data()), view_of(val(n.a)), t.data(), sz);
        add_into(n.b, t, 1.0);
        break;
      case Op::Div: {
        kernels::ew_div(kernels::full(g.data()), view_of(val(n.b)), t.data(), sz);
        add_into(n.a, t, 1.0);
        Tensor u(g.rows, g.cols);
        kernels::ew_mul(kernels::full(t.data()), kernels::full(n.val.data()),
                        u.data(), sz);
        add_into(n.b, u, -1.0);
        break;
      }
      case Op::Select:
        kernels::ew_select(view_of(val(n.c)), kernels::full(g.data()),
                           kernels::scalar(&kZero), t.data(), sz);
        add_into(n.a, t, 1.0);
        kernels::ew_select(view_of(val(n.c)), kernels::scalar(&kZero),
                           kernels::full(g.data()), t.data(), sz);
        add_into(n.b, t, 1.0);
        break;
      case Op::Neg:
        add_into(n.a, g, -1.0);
        break;
      case Op::Exp:
        kernels::ew_mul(kernels::full(g.data()), kernels::full(n.val.data()),
                        t.data(), sz);
        add_into(n.a, t, 1.0);
        break;
      case Op::Log:
        kernels::ew_div(kernels::full(g.data()), kernels::full(val(n.a).data()),
                        t.data(), sz);
        add_into(n.a, t, 1.0);
        break;
      case Op::Tanh: {
        Tensor u(g.rows, g.cols);
        kernels::ew_mul(kernels::full(n.val.data()), kernels::full(n.val.data()),
                        u.data(), sz);
        kernels::ew_sub(kernels::scalar(&kOne), kernels::full(u.data()), u.data(), sz);
        kernels::ew_mul(kernels::full(g.data()), kernels::full(u.data()), t.data(), sz);
        add_into(n.a, t, 1.0);
        break;
      }
      case Op::Sigmoid: {
        Tensor u(g.rows, g.cols);
        kernels::ew_sub(kernels::scalar(&kOne), kernels::full(n.val.data()),
                        u.data(), sz);
        kernels::ew_mul(kernels::full(n.val.data()), kernels::full(u.data()),
                        u.data(), sz);
        kernels::ew_mul(kernels::full(g.data()), kernels::full(u.data()), t.data(), sz);
        add_into(n.a, t, 1.0);
        break;
      }
      case Op::Sin:
        kernels::ew_cos(view_of(val(n.a)), t.data(), sz);
        kernels::ew_mul(kernels::full(g.data()), kernels::full(t.data()), t.data(), sz);
        add_into(n.a, t, 1.0);
        break;
      case Op::Cos:
        kernels::ew_sin(view_of(val(n.a)), t.data(), sz);
        kernels::ew_mul(kernels::full(g.data()), kernels::full(t.data()), t.data(), sz);
        add_into(n.a, t, -1.0);
        break;
      case Op::Elu:
        kernels::ew_elu_grad(view_of(val(n.a)), t.data(), sz);
        kernels::ew_mul(kernels::full(g.data()), kernels::full(t.data()), t.data(), sz);
        add_into(n.a, t, 1.0);
        break;
      case Op::EluGrad:
        // d/dx elu_grad(x) = 0 for x > 0, exp(x) = elu_grad(x) otherwise.
        kernels::ew_select(view_of(val(n.a)), kernels::scalar(&kZero),
                           kernels::full(n.val.data()), t.data(), sz);
        kernels::ew_mul(kernels::full(g.data()), kernels::full(t.data()), t.data(), sz);
        add_into(n.a, t, 1.0);
        break;
      case Op::Softplus:
        kernels::ew_sigmoid(view_of(val(n.a)), t.data(), sz);
        kernels::ew_mul(kernels::full(g.data()), kernels::full(t.data()), t.data(), sz);
        add_into(n.a, t, 1.0);
        break;
      case Op::Pow:
        kernels::ew_powc(view_of(val(n.a)), n.attr - 1.0, t.data(), sz);
        kernels::ew_mul(kernels::full(g.data()), kernels::full(t.data()), t.data(), sz);
        add_into(n.a, t, n.attr);
        break;
      case Op::MatMul: {
        const Tensor& va = val(n.a);
        const Tensor& vb = val(n.b);
        Node& pa = nodes_[static_cast<size_t>(n.a)];
        Node& pb = nodes_[static_cast<size_t>(n.b)];
        if (pa.op != Op::Const) {
          touched[static_cast<size_t>(n.a)] = 1;
          kernels::gemm(false, true, va.rows, va.cols, vb.cols, g.data(), g.cols,
                        vb.data(), vb.cols, pa.grad.data(), pa.grad.cols, true);
        }
        if (pb.op != Op::Const) {
          touched[static_cast<size_t>(n.b)] = 1;
          kernels::gemm(true, false, vb.rows, vb.cols, va.rows, va.data(), va.cols,
                        g.data(), g.cols, pb.grad.data(), pb.grad.cols, true);
        }
        break;
      }
      case Op::Sum:
      case Op::Mean: {
        Node& p = nodes_[static_cast<size_t>(n.a)];
        if (p.op == Op::Const) break;
        touched[static_cast<size_t>(n.a)] = 1;
        const double c =
            n.op == Op::Mean ? 1.0 / static_cast<double>(p.val.size()) : 1.0;
        kernels::acc_scaled(p.grad.data(), kernels::scalar(g.data()), c,
                            p.grad.size());
        break;
      }
      case Op::Concat: {
        const Tensor& va = val(n.a);
        const Tensor& vb = val(n.b);
        Node& pa = nodes_[static_cast<size_t>(n.a)];
        Node& pb = nodes_[static_cast<size_t>(n.b)];
        if (static_cast<int>(n.attr) == 0) {
          if (pa.op != Op::Const) {
            touched[static_cast<size_t>(n.a)] = 1;
            kernels::acc(pa.grad.data(), kernels::full(g.data()), va.size());
          }
          if (pb.op != Op::Const) {
            touched[static_cast<size_t>(n.b)] = 1;
            kernels::acc(pb.grad.data(), kernels::full(g.data() + va.size()),
                         vb.size());
          }
        } else {
          for (long row = 0; row < va.rows; ++row) {
            if (pa.op != Op::Const)
              kernels::acc(pa.grad.data() + row * va.cols,
                           kernels::full(g.data() + row * g.cols), va.cols);
            if (pb.op != Op::Const)
              kernels::acc(pb.grad.data() + row * vb.cols,
                           kernels::full(g.data() + row * g.cols + va.cols),
                           vb.cols);
          }
          if (pa.op != Op::Const) touched[static_cast<size_t>(n.a)] = 1;
          if (pb.op != Op::Const) touched[static_cast<size_t>(n.b)] = 1;
        }
        break;
      }
      default:
        throw Error("backward: unhandled op");
    }
  }
}

Var Tape::tangent(Var y, Var x, Var seed) {
  check_mine(y, "tangent");
  check_mine(x, "tangent");
  check_mine(seed, "tangent");
  if (!val(seed.id).same_shape(val(x.id)))
    throw ShapeError("tangent: seed shape " + val(seed.id).shape_str() +
                     " does not match x " + val(x.id).shape_str());

  auto zeros_like_y = [&] {
    return constant(Tensor(val(y.id).rows, val(y.id).cols));
  };
  if (x.id > y.id) return zeros_like_y();

  // Restrict the sweep to ancestors of y.
  std::vector<std::uint8_t> anc(static_cast<size_t>(y.id) + 1, 0);
  {
    std::vector<int> stack{y.id};
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      if (anc[static_cast<size_t>(i)]) continue;
      anc[static_cast<size_t>(i)] = 1;
      const Node& n = nodes_[static_cast<size_t>(i)];
      for (int p : {n.a, n.b, n.c})
        if (p >= 0 && !anc[static_cast<size_t>(p)]) stack.push_back(p);
    }
  }
  if (!anc[static_cast<size_t>(x.id)]) return zeros_like_y();

  // dot[i] = node holding the tangent of node i; -1 = structurally zero.
  std::vector<int> dot(static_cast<size_t>(y.id) + 1, -1);
  dot[static_cast<size_t>(x.id)] = seed.id;

  const int y_id = y.id;  // nodes_ grows during the sweep
  for (int i = 0; i <= y_id; ++i) {
    if (!anc[static_cast<size_t>(i)] || i == x.id) continue;
    const Op op = nodes_[static_cast<size_t>(i)].op;
    const int ia = nodes_[static_cast<size_t>(i)].a;
    const int ib = nodes_[static_cast<size_t>(i)].b;
    const int ic = nodes_[static_cast<size_t>(i)].c;
    const double attr = nodes_[static_cast<size_t>(i)].attr;
    const int da = ia >= 0 ? dot[static_cast<size_t>(ia)] : -1;
    const int db = ib >= 0 ? dot[static_cast<size_t>(ib)] : -1;
    Var self(this, i);
    Var A(this, ia), B(this, ib), Dx(this, da), Dy(this, db);
    int r = -1;
    switch (op) {
      case Op::Leaf:
      case Op::Const:
        break;
      case Op::Add:
        if (da < 0 && db < 0) break;
        r = da < 0 ? db : db < 0 ? da : add(Dx, Dy).id;
        break;
      case Op::Sub:
        if (da < 0 && db < 0) break;
        r = da < 0 ? neg(Dy).id : db < 0 ? da : sub(Dx, Dy).id;
        break;
      case Op::Mul: {
        if (da < 0 && db < 0) break;
        int t1 = da >= 0 ? mul(Dx, B).id : -1;
        int t2 = db >= 0 ? mul(A, Dy).id : -1;
        r = t1 < 0 ? t2 : t2 < 0 ? t1 : add(Var(this, t1), Var(this, t2)).id;
        break;
      }
      case Op::Div: {
        if (da < 0 && db < 0) break;
        if (db < 0) {
          r = div(Dx, B).id;
        } else {
          Var rb = mul(self, Dy);
          Var num = da >= 0 ? sub(Dx, rb) : neg(rb);
          r = div(num, B).id;
        }
        break;
      }
      case Op::Select: {
        if (da < 0 && db < 0) break;
        Var za = da >= 0 ? Dx : constant(0.0);
        Var zb = db >= 0 ? Dy : constant(0.0);
        r = select(Var(this, ic), za, zb).id;
        break;
      }
      case Op::Neg:
        if (da >= 0) r = neg(Dx).id;
        break;
      case Op::Exp:
        if (da >= 0) r = mul(self, Dx).id;
        break;
      case Op::Log:
        if (da >= 0) r = div(Dx, A).id;
        break;
      case Op::Tanh:
        if (da >= 0) r = mul(sub(constant(1.0), mul(self, self)), Dx).id;
        break;
      case Op::Sigmoid:
        if (da >= 0) r = mul(mul(self, sub(constant(1.0), self)), Dx).id;
        break;
      case Op::Sin:
        if (da >= 0) r = mul(cos(A), Dx).id;
        break;
      case Op::Cos:
        if (da >= 0) r = neg(mul(sin(A), Dx)).id;
        break;
      case Op::Elu:
        if (da >= 0) r = mul(elu_grad(A), Dx).id;
        break;
      case Op::EluGrad:
        if (da >= 0) r = mul(select(A, constant(0.0), self), Dx).id;
        break;
      case Op::Softplus:
        if (da >= 0) r = mul(sigmoid(A), Dx).id;
        break;
      case Op::Pow:
        if (da >= 0 && attr != 0.0)
          r = mul(mul(pow(A, attr - 1.0), Dx), constant(attr)).id;
        break;
      case Op::MatMul: {
        if (da < 0 && db < 0) break;
        int t1 = da >= 0 ? matmul(Dx, B).id : -1;
        int t2 = db >= 0 ? matmul(A, Dy).id : -1;
        r = t1 < 0 ? t2 : t2 < 0 ? t1 : add(Var(this, t1), Var(this, t2)).id;
        break;
      }
      case Op::Sum:
        if (da >= 0) r = sum(Dx).id;
        break;
      case Op::Mean:
        if (da >= 0) r = mean(Dx).id;
        break;
      case Op::Concat: {
        if (da < 0 && db < 0) break;
        Var za = da >= 0 ? Dx : constant(Tensor(val(ia).rows, val(ia).cols));
        Var zb = db >= 0 ? Dy : constant(Tensor(val(ib).rows, val(ib).cols));
        r = concat(za, zb, static_cast<int>(attr)).id;
        break;
      }
      default:
        throw Error("tangent: unhandled op");
    }
    dot[static_cast<size_t>(i)] = r;
  }

  const int dy = dot[static_cast<size_t>(y_id)];
  return dy >= 0 ? Var(this, dy) : zeros_like_y();
}

Var Tape::input_derivative(Var y, Var x, int order, long axis) {
  if (order != 1 && order != 2)
    throw ValueError("input_derivative: order must be 1 or 2");
  const Tensor& vx = val(x.id);
  if (axis < 0 || axis >= vx.cols)
    throw ValueError("input_derivative: axis out of range");
  Tensor s(vx.rows, vx.cols);
  for (long r = 0; r < vx.rows; ++r) s.at(r, axis) = 1.0;
  Var seed = constant(std::move(s));
  Var d = tangent(y, x, seed);
  if (order == 2) d = tangent(d, x, seed);
  return d;
}

}  // namespace rkan
