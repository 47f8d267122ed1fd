#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

#include "bnpmed/math.hpp"

namespace bnpmed {

// splitmix64; used to derive independent stream seeds from (seed, tag) pairs.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seeded random stream. All variate generators are implemented here (rather
// than via std:: distributions) so that output is identical across standard
// library versions; the draw-log determinism contract depends on this.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(mix_seed(seed, 0x5eedULL)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on the open interval (0,1).
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() { return inv_normal_cdf(uniform()); }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Marsaglia-Tsang; shape boost for shape < 1. Parameterized by rate.
  double gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
      throw std::domain_error("Rng::gamma: shape and rate must be positive");
    }
    double boost = 1.0;
    double a = shape;
    if (a < 1.0) {
      boost = std::pow(uniform(), 1.0 / a);
      a += 1.0;
    }
    const double d = a - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return boost * d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return boost * d * v / rate;
    }
  }

  double beta(double a, double b) {
    const double ga = gamma(a, 1.0);
    const double gb = gamma(b, 1.0);
    return ga / (ga + gb);
  }

  double chisq(double df) { return gamma(0.5 * df, 0.5); }

  // Scaled inverse chi-square: nu * tau2 / chisq(nu).
  double scaled_inv_chisq(double nu, double tau2) {
    return nu * tau2 / chisq(nu);
  }

  // Inverse gamma with shape a and rate b (density ~ x^{-a-1} e^{-b/x}).
  double inv_gamma(double a, double b) { return b / gamma(a, 1.0); }

  // Standard normal conditioned on Z > lower (Robert 1995 for far tails).
  double trunc_normal_lower(double lower) {
    if (lower < 0.45) {
      for (;;) {
        const double z = normal();
        if (z > lower) return z;
      }
    }
    const double lam = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
    for (;;) {
      const double z = lower - std::log(uniform()) / lam;
      const double d = z - lam;
      if (std::log(uniform()) <= -0.5 * d * d) return z;
    }
  }

  // N(mean, 1) truncated to z > 0 (positive=true) or z <= 0.
  double trunc_std_normal(double mean, bool positive) {
    if (positive) return mean + trunc_normal_lower(-mean);
    return mean - trunc_normal_lower(mean);
  }

  // Index draw proportional to weights (need not be normalized).
  int categorical(std::span<const double> w) {
    double total = 0.0;
    for (double x : w) total += x;
    double u = uniform() * total;
    for (std::size_t i = 0; i < w.size(); ++i) {
      u -= w[i];
      if (u <= 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(w.size()) - 1;
  }

  // Index draw from unnormalized log-weights; max subtraction before
  // exponentiation (required: scores routinely reach the -1e3 range).
  int categorical_from_log(std::span<const double> logw) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : logw) mx = std::max(mx, x);
    double total = 0.0;
    for (double x : logw) total += std::exp(x - mx);
    double u = uniform() * total;
    for (std::size_t i = 0; i < logw.size(); ++i) {
      u -= std::exp(logw[i] - mx);
      if (u <= 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(logw.size()) - 1;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace bnpmed
