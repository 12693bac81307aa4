#pragma once

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <vector>

#include "schemabind/errors.hpp"

namespace schemabind {

inline double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_var(const std::vector<double>& xs) {
  if (xs.size() < 2) throw DataError("sample_var: need at least two values");
  double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw DataError("pearson: need two equal-length series");
  double ma = mean_of(a), mb = mean_of(b);
  double num = 0.0, va = 0.0, vb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  double denom = std::sqrt(va) * std::sqrt(vb);
  if (denom == 0.0) throw NumericError("pearson: zero-variance series");
  return num / denom;
}

// Welch's unequal-variance two-sample t statistic.
inline double welch_t(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw DataError("welch_t: fewer than 2 values per group");
  double va = sample_var(a) / static_cast<double>(a.size());
  double vb = sample_var(b) / static_cast<double>(b.size());
  return (mean_of(a) - mean_of(b)) / std::sqrt(va + vb);
}

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

inline TTest one_sample_t(const std::vector<double>& xs, double mu0 = 0.0) {
  if (xs.size() < 2) throw DataError("one_sample_t: need at least two values");
  TTest r;
  double n = static_cast<double>(xs.size());
  r.df = n - 1.0;
  r.t = (mean_of(xs) - mu0) / std::sqrt(sample_var(xs) / n);
  boost::math::students_t dist(r.df);
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

// Exact two-sided binomial test (sum of outcomes no more likely than k).
inline double binomial_two_sided_p(long k, long n, double p0) {
  if (n <= 0 || p0 <= 0.0 || p0 >= 1.0) throw DataError("binomial test: bad arguments");
  boost::math::binomial dist(static_cast<double>(n), p0);
  double pk = boost::math::pdf(dist, static_cast<double>(k));
  double total = 0.0;
  for (long i = 0; i <= n; ++i) {
    double pi = boost::math::pdf(dist, static_cast<double>(i));
    if (pi <= pk * (1.0 + 1e-9)) total += pi;
  }
  return std::min(1.0, total);
}

// Goodness-of-fit p-value for observed counts against a uniform multinomial.
inline double chi_squared_uniform_p(const std::vector<long>& counts) {
  if (counts.size() < 2) throw DataError("chi-squared: need at least two bins");
  long total = 0;
  for (long c : counts) total += c;
  if (total == 0) throw DataError("chi-squared: no observations");
  double expected = static_cast<double>(total) / static_cast<double>(counts.size());
  double stat = 0.0;
  for (long c : counts) {
    double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace schemabind
