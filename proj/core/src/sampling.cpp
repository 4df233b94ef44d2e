#include "bbabc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace bbabc {
namespace {

constexpr std::int64_t kLogFactorialTable = 256;

const std::array<double, kLogFactorialTable>& log_factorial_table() {
  static const auto table = [] {
    std::array<double, kLogFactorialTable> t{};
    double acc = 0.0;
    for (std::int64_t k = 1; k < kLogFactorialTable; ++k) {
      acc += std::log(static_cast<double>(k));
      t[static_cast<std::size_t>(k)] = acc;
    }
    return t;
  }();
  return table;
}

std::int64_t binomial_inversion(std::int64_t n, double p, RngStream& rng) {
  const double q = 1.0 - p;
  const double q_n = std::exp(static_cast<double>(n) * std::log1p(-p));
  const double np = static_cast<double>(n) * p;
  const double bound = std::min(static_cast<double>(n), np + 10.0 * std::sqrt(np * q + 1.0));
  for (;;) {
    std::int64_t x = 0;
    double px = q_n;
    double u = rng.uniform();
    while (u > px) {
      u -= px;
      ++x;
      if (static_cast<double>(x) > bound) break;
      px *= static_cast<double>(n - x + 1) * p / (static_cast<double>(x) * q);
    }
    if (static_cast<double>(x) <= bound) return x;
  }
}

// Hormann (1993), "The generation of binomial random variates", algorithm BTRS.
// Requires n * p >= 10 and p <= 0.5.
std::int64_t binomial_btrs(std::int64_t n, double p, RngStream& rng) {
  const double nd = static_cast<double>(n);
  const double q = 1.0 - p;
  const double spq = std::sqrt(nd * p * q);
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = nd * p + 0.5;
  const double v_r = 0.92 - 4.2 / b;
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double lpq = std::log(p / q);
  const auto m = static_cast<std::int64_t>(std::floor((nd + 1.0) * p));
  const double h = log_factorial(m) + log_factorial(n - m);

  for (;;) {
    const double u = rng.uniform() - 0.5;
    double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + c);
    if (kf < 0.0 || kf > nd) continue;
    const auto k = static_cast<std::int64_t>(kf);
    if (us >= 0.07 && v <= v_r) return k;
    v = std::log(v * alpha / (a / (us * us) + b));
    if (v <= h - log_factorial(k) - log_factorial(n - k) + static_cast<double>(k - m) * lpq) return k;
  }
}

}  // namespace

RateVector::RateVector() noexcept {
  rates_.fill(1.0 / static_cast<double>(kCategoryCount));
}

RateVector RateVector::from(const CategoryValues& rates) {
  double sum = 0.0;
  for (double r : rates) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw std::invalid_argument(fmt::format("rate {} outside [0, 1]", r));
    }
    sum += r;
  }
  if (std::fabs(sum - 1.0) > kSumTolerance) {
    throw std::invalid_argument(fmt::format("rates sum to {:.17g}, not 1", sum));
  }
  return RateVector(rates);
}

RateVector RateVector::normalized(const CategoryValues& weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument(fmt::format("weight {} is negative or not finite", w));
    }
    sum += w;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("weights sum to zero");
  CategoryValues out{};
  for (std::size_t k = 0; k < kCategoryCount; ++k) out[k] = weights[k] / sum;
  return RateVector(out);
}

double log_factorial(std::int64_t k) noexcept {
  if (k < kLogFactorialTable) return log_factorial_table()[static_cast<std::size_t>(std::max<std::int64_t>(k, 0))];
  const double x = static_cast<double>(k) + 1.0;
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // lgamma(x) for x >= 257 by Stirling's series; truncation error < 1e-17.
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) +
         inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0)));
}

double sample_normal(RngStream& rng) noexcept {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double sample_lognormal(double mu, double sigma, RngStream& rng) {
  if (!(sigma > 0.0)) throw std::invalid_argument(fmt::format("lognormal sigma {} must be > 0", sigma));
  return std::exp(mu + sigma * sample_normal(rng));
}

double sample_log_gamma(double shape, RngStream& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw std::invalid_argument(fmt::format("gamma shape {} must be positive and finite", shape));
  }
  double boost = 0.0;
  if (shape < 1.0) {
    boost = std::log(rng.uniform()) / shape;
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = sample_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return std::log(d * v) + boost;
    }
  }
}

double sample_gamma(double shape, RngStream& rng) {
  return std::exp(sample_log_gamma(shape, rng));
}

RateVector sample_dirichlet(std::span<const double, kCategoryCount> alpha, RngStream& rng) {
  for (double a : alpha) {
    if (!(a > 0.0)) throw std::invalid_argument(fmt::format("Dirichlet parameter {} must be > 0", a));
  }
  CategoryValues logs{};
  for (std::size_t k = 0; k < kCategoryCount; ++k) logs[k] = sample_log_gamma(alpha[k], rng);
  const double top = *std::max_element(logs.begin(), logs.end());
  CategoryValues w{};
  for (std::size_t k = 0; k < kCategoryCount; ++k) w[k] = std::exp(logs[k] - top);
  return RateVector::normalized(w);
}

std::int64_t sample_binomial(std::int64_t n, double p, RngStream& rng) {
  if (n < 0) throw std::invalid_argument("binomial trials must be >= 0");
  if (n == 0 || !(p > 0.0)) return 0;
  if (p >= 1.0) return n;
  if (p > 0.5) return n - sample_binomial(n, 1.0 - p, rng);
  if (static_cast<double>(n) * p < 10.0) return binomial_inversion(n, p, rng);
  return binomial_btrs(n, p, rng);
}

CategoryCounts sample_multinomial(std::int64_t n, const RateVector& theta, RngStream& rng) {
  if (n < 0) throw std::invalid_argument("multinomial trials must be >= 0");
  CategoryCounts counts{};
  std::int64_t remaining = n;
  double mass = 1.0;
  for (std::size_t k = 0; k + 1 < kCategoryCount && remaining > 0; ++k) {
    const double p = mass > 0.0 ? std::clamp(theta[k] / mass, 0.0, 1.0) : 1.0;
    counts[k] = sample_binomial(remaining, p, rng);
    remaining -= counts[k];
    mass -= theta[k];
  }
  counts[kCategoryCount - 1] += remaining;
  return counts;
}

}  // namespace bbabc
