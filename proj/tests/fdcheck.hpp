#pragma once

// Central finite-difference oracle for gradient checks. Kept independent of
// the tape's backward pass: it only re-runs forward evaluations.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "schemabind/tensor.hpp"

namespace fdcheck {

struct Result {
  double max_rel_err = 0.0;
  std::string where;
};

inline double rel_err(double a, double b) {
  double scale = std::max({std::abs(a), std::abs(b), 1e-4});
  return std::abs(a - b) / scale;
}

// f maps flat inputs -> scalar. Compares analytic gradient against central
// differences with step h.
inline Result check_gradient(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x, const std::vector<double>& analytic,
                             double h = 1e-5) {
  Result r;
  for (size_t i = 0; i < x.size(); ++i) {
    double keep = x[i];
    x[i] = keep + h;
    double fp = f(x);
    x[i] = keep - h;
    double fm = f(x);
    x[i] = keep;
    double fd = (fp - fm) / (2.0 * h);
    double e = rel_err(fd, analytic[i]);
    if (e > r.max_rel_err) {
      r.max_rel_err = e;
      r.where = "index " + std::to_string(i) + " fd=" + std::to_string(fd) +
                " ad=" + std::to_string(analytic[i]);
    }
  }
  return r;
}

}  // namespace fdcheck
