#pragma once

#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include "rkan/error.hpp"

namespace rkan {

// Dense row-major matrix of 64-bit floats. Scalars are 1x1 tensors.
struct Tensor {
  long rows = 0;
  long cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(long r, long c, double fill = 0.0) : rows(r), cols(c) {
    if (r < 0 || c < 0) throw ValueError("tensor extents must be non-negative");
    v.assign(static_cast<size_t>(r) * static_cast<size_t>(c), fill);
  }

  static Tensor scalar(double x) {
    Tensor t(1, 1);
    t.v[0] = x;
    return t;
  }

  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rs) {
    Tensor t(static_cast<long>(rs.size()),
             rs.size() ? static_cast<long>(rs.begin()->size()) : 0);
    long i = 0;
    for (const auto& row : rs) {
      if (static_cast<long>(row.size()) != t.cols)
        throw ShapeError("ragged initializer");
      for (double x : row) t.v[static_cast<size_t>(i++)] = x;
    }
    return t;
  }

  long size() const { return rows * cols; }
  bool is_scalar() const { return rows == 1 && cols == 1; }

  double& at(long r, long c) { return v[static_cast<size_t>(r * cols + c)]; }
  double at(long r, long c) const { return v[static_cast<size_t>(r * cols + c)]; }

  double* data() { return v.data(); }
  const double* data() const { return v.data(); }

  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

  std::string shape_str() const {
    return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
  }

  bool all_finite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

}  // namespace rkan
