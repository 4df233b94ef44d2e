#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "bbabc/categories.hpp"
#include "bbabc/rng.hpp"

namespace bbabc {

// A point on the 7-simplex: non-negative rates summing to one.
class RateVector {
 public:
  static constexpr double kSumTolerance = 1e-12;

  RateVector() noexcept;  // uniform

  // Throws std::invalid_argument unless the entries already lie on the simplex.
  static RateVector from(const CategoryValues& rates);
  // Rescales non-negative weights with a positive sum onto the simplex.
  static RateVector normalized(const CategoryValues& weights);

  double operator[](std::size_t k) const noexcept { return rates_[k]; }
  double operator[](DecisionCategory c) const noexcept { return rates_[index_of(c)]; }
  const CategoryValues& values() const noexcept { return rates_; }

  friend bool operator==(const RateVector&, const RateVector&) = default;

 private:
  explicit RateVector(const CategoryValues& rates) noexcept : rates_(rates) {}
  CategoryValues rates_;
};

double sample_normal(RngStream& rng) noexcept;

// exp(mu + sigma * Z). Throws unless sigma > 0.
double sample_lognormal(double mu, double sigma, RngStream& rng);

// Gamma(shape, 1). Marsaglia-Tsang with the shape < 1 boost.
double sample_gamma(double shape, RngStream& rng);

// log of a Gamma(shape, 1) variate; finite even when the variate itself
// underflows (very small shapes).
double sample_log_gamma(double shape, RngStream& rng);

// Dirichlet via normalized Gamma draws, combined in log space so tiny shapes
// give exact zeros rather than 0/0. Throws unless every alpha > 0.
RateVector sample_dirichlet(std::span<const double, kCategoryCount> alpha, RngStream& rng);

// Inversion for small n*min(p, 1-p), Hormann's BTRS otherwise.
std::int64_t sample_binomial(std::int64_t n, double p, RngStream& rng);

// Sequential binomial conditioning; counts sum to n.
CategoryCounts sample_multinomial(std::int64_t n, const RateVector& theta, RngStream& rng);

// log(k!) via a table for small k and Stirling's series beyond it.
double log_factorial(std::int64_t k) noexcept;

}  // namespace bbabc
