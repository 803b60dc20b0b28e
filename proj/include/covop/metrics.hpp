#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "covop/common.hpp"

namespace covop {

// A sorted sample of scalar statistic values together with its exact
// empirical CDF. The ECDF convention is right-continuous.
class ScalarSample {
 public:
  explicit ScalarSample(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ConfigError("ScalarSample: empty sample");
    std::sort(values_.begin(), values_.end());
  }

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }

  double mean() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s / static_cast<double>(values_.size());
  }

  // P(X <= t), right-continuous.
  double ecdf(double t) const {
    const auto it = std::upper_bound(values_.begin(), values_.end(), t);
    return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
  }

  // Linear interpolation between order statistics (R type 7); monotone in p.
  double quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("quantile: p must lie in [0,1]");
    const std::size_t n = values_.size();
    if (n == 1) return values_[0];
    const double h = p * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return values_[n - 1];
    const double w = h - static_cast<double>(lo);
    return values_[lo] + w * (values_[lo + 1] - values_[lo]);
  }

 private:
  std::vector<double> values_;
};

// Exact sup_t |F_a(t) - F_b(t)| for two ECDFs. The sup of a difference of
// right-continuous step functions is attained at a jump point, so a merged
// sweep over the pooled values is exact; ties are handled by advancing both
// counters past every copy of the current value before comparing.
inline double kolmogorov_distance(const ScalarSample& a, const ScalarSample& b) {
  if (&a == &b) return 0.0;
  const auto& x = a.values();
  const auto& y = b.values();
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t ia = 0;
  std::size_t ib = 0;
  double best = 0.0;
  while (ia < x.size() || ib < y.size()) {
    double v;
    if (ib >= y.size()) v = x[ia];
    else if (ia >= x.size()) v = y[ib];
    else v = std::min(x[ia], y[ib]);
    while (ia < x.size() && x[ia] == v) ++ia;
    while (ib < y.size() && y[ib] == v) ++ib;
    const double gap = std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb);
    if (gap > best) best = gap;
  }
  return best;
}

struct RateFit {
  double slope = 0.0;
  double stderr = 0.0;
};

// OLS slope of log(value) on log(n), with its standard error.
// drop_smallest excludes the smallest n as burn-in; off by default.
inline RateFit rate_fit(std::vector<double> ns, std::vector<double> values,
                        bool drop_smallest = false) {
  if (ns.size() != values.size()) throw ConfigError("rate_fit: length mismatch");
  if (drop_smallest && ns.size() > 1) {
    const auto it = std::min_element(ns.begin(), ns.end());
    const auto idx = static_cast<std::size_t>(it - ns.begin());
    ns.erase(ns.begin() + static_cast<std::ptrdiff_t>(idx));
    values.erase(values.begin() + static_cast<std::ptrdiff_t>(idx));
  }
  const std::size_t m = ns.size();
  if (m < 3) throw ConfigError("rate_fit: need at least 3 points");
  std::vector<double> lx(m);
  std::vector<double> ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(ns[i] > 0.0)) throw ConfigError("rate_fit: n values must be positive");
    if (!(values[i] > 0.0)) throw ConfigError("rate_fit: values must be positive");
    lx[i] = std::log(ns[i]);
    ly[i] = std::log(values[i]);
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("rate_fit: degenerate design (all n equal)");
  const double slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = ly[i] - my - slope * (lx[i] - mx);
    rss += r * r;
  }
  const double sigma2 = rss / static_cast<double>(m - 2);
  return RateFit{slope, std::sqrt(sigma2 / sxx)};
}

// Kolmogorov-rate exponent of the bootstrap approximation upper bound,
// (beta - 1/2) / (2*beta + 4 + epsilon). Valid for beta > 1/2, epsilon in (0,1).
inline double theoretical_rate(double beta, double epsilon) {
  if (!(beta > 0.5)) throw ConfigError("theoretical_rate: beta must exceed 1/2");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ConfigError("theoretical_rate: epsilon must lie in (0,1)");
  return (beta - 0.5) / (2.0 * beta + 4.0 + epsilon);
}

// Exponent of the earlier (beta - 1/2)/(6*beta + 4) bound, kept for comparison.
inline double theoretical_rate_previous(double beta) {
  if (!(beta > 0.5)) throw ConfigError("theoretical_rate_previous: beta must exceed 1/2");
  return (beta - 0.5) / (6.0 * beta + 4.0);
}

}  // namespace covop
