#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>

namespace bnpmed {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112353;
inline constexpr double kLogSqrt2Pi = 0.9189385332046727417803297364056176;

inline double log_normal_pdf(double x, double mean, double var) {
  const double r = x - mean;
  return -0.5 * (kLog2Pi + std::log(var)) - 0.5 * r * r / var;
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * M_SQRT1_2);
}

// log Phi(x), stable far into the lower tail where erfc underflows.
inline double log_normal_cdf(double x) {
  if (x > -30.0) {
    return std::log(0.5 * std::erfc(-x * M_SQRT1_2));
  }
  // Asymptotic series for Phi(x) ~ phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6)
  const double x2 = x * x;
  const double corr = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - kLogSqrt2Pi - std::log(-x) + std::log(corr);
}

// Inverse standard normal CDF (Acklam's rational approximation plus one
// Halley refinement; accurate to full double precision over (0,1)).
inline double inv_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("inv_normal_cdf: p must lie in (0,1)");
  }
  static const double A[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double B[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double C[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double D[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
        ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5, r = q * q;
    x = (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) *
        q /
        (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
        ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0);
  }
  // Halley step against the true CDF.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

// lgamma(a + 1/2) - lgamma(a) without cancellation for large a.
inline double lgamma_half_step(double a) {
  if (a < 1e6) return std::lgamma(a + 0.5) - std::lgamma(a);
  return 0.5 * std::log(a) + a * std::log1p(0.5 / a) - 0.5 -
         (1.0 / 24.0) / (a * (a + 0.5));
}

inline double log_student_t_pdf(double x, double df, double loc,
                                double scale) {
  const double z = (x - loc) / scale;
  return lgamma_half_step(0.5 * df) - 0.5 * std::log(df * M_PI) -
         std::log(scale) - 0.5 * (df + 1.0) * std::log1p(z * z / df);
}

inline double lbeta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

inline double logsumexp(std::span<const double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace bnpmed
