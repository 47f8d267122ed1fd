#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

// Shared oracle helpers for the test suites. Everything here is independent
// of the library implementation paths it is used to check.
namespace testutil {

inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int intervals) {
  if (intervals % 2 != 0) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i)
    s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (static_cast<double>(v.size()) - 1.0));
}

// One-sample Kolmogorov-Smirnov statistic against a CDF.
inline double ks_statistic(std::vector<double> sample,
                           const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double c = cdf(sample[i]);
    d = std::max(d, std::abs(c - static_cast<double>(i) / n));
    d = std::max(d, std::abs(c - static_cast<double>(i + 1) / n));
  }
  return d;
}

// Approximate KS critical value at level alpha.
inline double ks_critical(double n, double alpha) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c / std::sqrt(n);
}

inline double chisq_pdf(double x, double df) {
  if (x <= 0.0) return 0.0;
  const double h = 0.5 * df;
  return std::exp((h - 1.0) * std::log(x) - 0.5 * x - std::lgamma(h) -
                  h * std::log(2.0));
}

inline double inv_gamma_pdf(double x, double shape, double rate) {
  if (x <= 0.0) return 0.0;
  return std::exp(shape * std::log(rate) - std::lgamma(shape) -
                  (shape + 1.0) * std::log(x) - rate / x);
}

}  // namespace testutil
