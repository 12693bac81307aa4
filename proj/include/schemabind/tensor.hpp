#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "schemabind/errors.hpp"
#include "schemabind/rng.hpp"

namespace schemabind {

// Dense row-major matrix of doubles; vectors are n x 1.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {
    if (r < 0 || c < 0) throw DimensionError("negative tensor shape");
  }

  static Tensor zeros(int r, int c) { return Tensor(r, c); }

  static Tensor column(const std::vector<double>& v) {
    Tensor t(static_cast<int>(v.size()), 1);
    t.data = v;
    return t;
  }

  static Tensor filled(int r, int c, double value) {
    Tensor t(r, c);
    std::fill(t.data.begin(), t.data.end(), value);
    return t;
  }

  static Tensor randn(int r, int c, Rng& rng, double stddev = 1.0) {
    Tensor t(r, c);
    for (auto& x : t.data) x = stddev * rng.normal();
    return t;
  }

  int size() const { return rows * cols; }
  bool is_vector() const { return cols == 1; }

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
  double& operator[](int i) { return data[static_cast<size_t>(i)]; }
  double operator[](int i) const { return data[static_cast<size_t>(i)]; }

  bool same_shape(const Tensor& other) const { return rows == other.rows && cols == other.cols; }

  double norm() const {
    double s = 0.0;
    for (double x : data) s += x * x;
    return std::sqrt(s);
  }

  bool all_finite() const {
    for (double x : data)
      if (!std::isfinite(x)) return false;
    return true;
  }

  std::string shape_str() const {
    return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
  }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  double denom = std::sqrt(na) * std::sqrt(nb);
  if (denom == 0.0) throw NumericError("undefined similarity: zero-norm vector");
  return num / denom;
}

}  // namespace schemabind
