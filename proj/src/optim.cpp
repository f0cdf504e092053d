#include "rkan/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "rkan/error.hpp"

namespace rkan {

Adam::Adam(std::vector<Tensor*> params, double learning_rate)
    : params_(std::move(params)), lr_(learning_rate) {
  for (Tensor* p : params_) {
    m_.emplace_back(p->rows, p->cols, 0.0);
    v_.emplace_back(p->rows, p->cols, 0.0);
  }
}

void Adam::step(const std::vector<Tensor>& grads) {
  if (grads.size() != params_.size())
    throw ShapeError("adam: gradient list size mismatch");
  for (size_t i = 0; i < grads.size(); ++i) {
    if (!grads[i].same_shape(*params_[i]))
      throw ShapeError("adam: gradient shape mismatch for parameter " +
                       std::to_string(i));
    if (!grads[i].all_finite())
      throw ValueError("adam: non-finite gradient for parameter " +
                       std::to_string(i));
  }
  ++t_;
  const double b1t = 1.0 - std::pow(beta1_, double(t_));
  const double b2t = 1.0 - std::pow(beta2_, double(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = *params_[i];
    for (long j = 0; j < p.size(); ++j) {
      const double g = grads[i].v[j];
      m_[i].v[j] = beta1_ * m_[i].v[j] + (1.0 - beta1_) * g;
      v_[i].v[j] = beta2_ * v_[i].v[j] + (1.0 - beta2_) * g * g;
      const double mhat = m_[i].v[j] / b1t;
      const double vhat = v_[i].v[j] / b2t;
      p.v[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(const std::vector<double>& a) {
  double s = 0.0;
  for (double x : a) s = std::max(s, std::fabs(x));
  return s;
}

bool finite_all(const std::vector<double>& a) {
  for (double x : a)
    if (!std::isfinite(x)) return false;
  return true;
}

struct FlatParams {
  std::vector<Tensor*> params;
  long n = 0;

  explicit FlatParams(std::vector<Tensor*> p) : params(std::move(p)) {
    for (Tensor* t : params) n += t->size();
  }
  std::vector<double> gather() const {
    std::vector<double> x;
    x.reserve(n);
    for (const Tensor* t : params) x.insert(x.end(), t->v.begin(), t->v.end());
    return x;
  }
  void scatter(const std::vector<double>& x) const {
    size_t k = 0;
    for (Tensor* t : params)
      for (double& v : t->v) v = x[k++];
  }
  std::vector<double> flatten(const std::vector<Tensor>& grads) const {
    std::vector<double> g;
    g.reserve(n);
    for (const Tensor& t : grads) g.insert(g.end(), t.v.begin(), t.v.end());
    return g;
  }
};

// Minimizer of the cubic interpolating (a1,f1,d1) and (a2,f2,d2); NaN when the
// interpolant has none.
double cubic_min(double a1, double f1, double d1, double a2, double f2, double d2) {
  const double h = a2 - a1;
  if (h == 0.0) return std::nan("");
  const double t = d1 + d2 - 3.0 * (f1 - f2) / (a1 - a2);
  const double disc = t * t - d1 * d2;
  if (disc < 0.0) return std::nan("");
  const double s = std::sqrt(disc);
  const double denom = d2 - d1 + 2.0 * s;
  if (denom == 0.0) return std::nan("");
  return a2 - h * (d2 + s - t) / denom;
}

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& objective, std::vector<Tensor*> params,
                           const LbfgsOptions& opts) {
  FlatParams flat(std::move(params));
  LbfgsResult res;

  std::vector<double> x = flat.gather();
  std::vector<Tensor> grad_tensors;
  auto eval = [&](const std::vector<double>& at, std::vector<double>* g) {
    flat.scatter(at);
    grad_tensors.clear();
    const double f = objective(&grad_tensors);
    if (g) *g = flat.flatten(grad_tensors);
    return f;
  };

  std::vector<double> g;
  double f = eval(x, &g);
  res.trace.push_back(f);
  if (!std::isfinite(f) || !finite_all(g)) {
    res.status = "diverged";
    return res;
  }

  std::deque<std::vector<double>> hist_s, hist_y;
  std::deque<double> hist_rho;

  auto direction = [&](const std::vector<double>& grad) {
    std::vector<double> q = grad;
    const int m = int(hist_s.size());
    std::vector<double> alpha(m);
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = hist_rho[i] * dot(hist_s[i], q);
      for (size_t j = 0; j < q.size(); ++j) q[j] -= alpha[i] * hist_y[i][j];
    }
    if (m > 0) {
      const double gamma =
          dot(hist_s[m - 1], hist_y[m - 1]) / dot(hist_y[m - 1], hist_y[m - 1]);
      for (double& v : q) v *= gamma;
    }
    for (int i = 0; i < m; ++i) {
      const double beta = hist_rho[i] * dot(hist_y[i], q);
      for (size_t j = 0; j < q.size(); ++j) q[j] += hist_s[i][j] * (alpha[i] - beta);
    }
    for (double& v : q) v = -v;
    return q;
  };

  // Strong-Wolfe search along d from (x, f, g). On success updates x, f, g.
  auto line_search = [&](const std::vector<double>& d) -> bool {
    const double phi0 = f;
    const double dphi0 = dot(g, d);
    if (!(dphi0 < 0.0)) return false;
    int trials = 0;
    std::vector<double> xt(x.size()), gt;

    auto phi = [&](double a, double* dphi) {
      for (size_t j = 0; j < x.size(); ++j) xt[j] = x[j] + a * d[j];
      const double fa = eval(xt, &gt);
      ++trials;
      *dphi = finite_all(gt) ? dot(gt, d) : std::nan("");
      return fa;
    };
    auto accept = [&](double fa) {
      x = xt;
      f = fa;
      g = gt;
      return true;
    };

    // Zoom phase: bracket [alo, ahi] with phi(alo) the best so far.
    auto zoom = [&](double alo, double flo, double dlo, double ahi, double fhi,
                    double dhi) -> bool {
      while (trials < opts.max_line_search) {
        const double w = std::fabs(ahi - alo);
        double a = cubic_min(alo, flo, dlo, ahi, fhi, dhi);
        const double lo = std::min(alo, ahi), hi = std::max(alo, ahi);
        if (!std::isfinite(a) || a <= lo + 0.05 * w || a >= hi - 0.05 * w)
          a = 0.5 * (alo + ahi);
        double da;
        const double fa = phi(a, &da);
        if (!std::isfinite(fa) || fa > phi0 + opts.c1 * a * dphi0 || fa >= flo) {
          ahi = a;
          fhi = fa;
          dhi = da;
        } else {
          if (std::fabs(da) <= -opts.c2 * dphi0) return accept(fa);
          if (da * (ahi - alo) >= 0.0) {
            ahi = alo;
            fhi = flo;
            dhi = dlo;
          }
          alo = a;
          flo = fa;
          dlo = da;
        }
        if (w < 1e-16 * std::max(1.0, std::fabs(alo))) return false;
      }
      return false;
    };

    double a_prev = 0.0, f_prev = phi0, d_prev = dphi0;
    double a = 1.0;
    while (trials < opts.max_line_search) {
      double da;
      const double fa = phi(a, &da);
      if (!std::isfinite(fa)) {
        a = 0.5 * (a_prev + a);
        continue;
      }
      if (fa > phi0 + opts.c1 * a * dphi0 || (trials > 1 && fa >= f_prev))
        return zoom(a_prev, f_prev, d_prev, a, fa, da);
      if (std::fabs(da) <= -opts.c2 * dphi0) return accept(fa);
      if (da >= 0.0) return zoom(a, fa, da, a_prev, f_prev, d_prev);
      a_prev = a;
      f_prev = fa;
      d_prev = da;
      a *= 2.0;
    }
    return false;
  };

  res.status = "max_epochs";
  while (res.epochs < opts.max_epochs) {
    if (inf_norm(g) <= opts.grad_tol) {
      res.status = "converged";
      break;
    }
    std::vector<double> d = direction(g);
    if (!(dot(d, g) < 0.0))
      for (size_t j = 0; j < d.size(); ++j) d[j] = -g[j];

    const std::vector<double> x_old = x, g_old = g;
    bool ok = line_search(d);
    if (!ok) {
      // One plain gradient step; accepted only on strict decrease.
      std::vector<double> xt(x.size());
      for (size_t j = 0; j < x.size(); ++j) xt[j] = x[j] - 1e-3 * g[j];
      std::vector<double> gt;
      const double ft = eval(xt, &gt);
      if (std::isfinite(ft) && finite_all(gt) && ft < f) {
        x = xt;
        f = ft;
        g = gt;
        hist_s.clear();
        hist_y.clear();
        hist_rho.clear();
        ok = true;
      } else {
        flat.scatter(x);  // leave parameters at the last accepted point
        res.status = "stalled";
        break;
      }
    }
    if (!std::isfinite(f) || !finite_all(g)) {
      res.status = "diverged";
      break;
    }
    ++res.epochs;
    res.trace.push_back(f);

    std::vector<double> s(x.size()), y(x.size());
    for (size_t j = 0; j < x.size(); ++j) {
      s[j] = x[j] - x_old[j];
      y[j] = g[j] - g_old[j];
    }
    const double sy = dot(s, y);
    if (sy > 1e-10) {
      hist_s.push_back(std::move(s));
      hist_y.push_back(std::move(y));
      hist_rho.push_back(1.0 / sy);
      if (int(hist_s.size()) > opts.history) {
        hist_s.pop_front();
        hist_y.pop_front();
        hist_rho.pop_front();
      }
    }
  }
  flat.scatter(x);
  return res;
}

}  // namespace rkan
