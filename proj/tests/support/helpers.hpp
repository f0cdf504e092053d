#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace testsupport {

inline constexpr double kPi = 3.14159265358979323846;

inline double rel_err(double a, double b, double floor_at = 1e-8) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), floor_at});
}

// Central difference with the same step the gradient suite uses.
inline double fd_central(const std::function<double(double)>& f, double x,
                         double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

struct Quadrature {
  std::vector<double> x, w;
};

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
// Legendre recurrence (standard construction, ~1e-15 node accuracy).
inline Quadrature gauss_legendre(int n) {
  Quadrature q;
  q.x.assign(static_cast<size_t>(n), 0.0);
  q.w.assign(static_cast<size_t>(n), 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) < 1e-15) break;
    }
    q.x[static_cast<size_t>(i)] = -z;
    q.x[static_cast<size_t>(n - 1 - i)] = z;
    q.w[static_cast<size_t>(i)] = 2.0 / ((1.0 - z * z) * pp * pp);
    q.w[static_cast<size_t>(n - 1 - i)] = q.w[static_cast<size_t>(i)];
  }
  return q;
}

}  // namespace testsupport
