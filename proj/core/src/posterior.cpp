#include "bbabc/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace bbabc {
namespace {

std::size_t window_length(std::size_t m, double mass) {
  if (!(mass > 0.0 && mass < 1.0)) throw std::invalid_argument(fmt::format("interval mass {} is not in (0, 1)", mass));
  const auto minimum = static_cast<std::size_t>(std::ceil(1.0 / (1.0 - mass) - 1e-9));
  if (m < minimum) {
    throw std::invalid_argument(fmt::format("{} draws are too few for a {} interval (need {})", m, mass, minimum));
  }
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(mass * static_cast<double>(m) - 1e-9)), 1, m);
}

std::vector<double> sorted_copy(std::span<const double> draws) {
  std::vector<double> v(draws.begin(), draws.end());
  if (std::any_of(v.begin(), v.end(), [](double x) { return std::isnan(x); })) {
    throw std::invalid_argument("posterior draws contain NaN");
  }
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

double marginal_median(std::span<const double> draws) {
  if (draws.empty()) throw std::invalid_argument("median of an empty sample");
  std::vector<double> v(draws.begin(), draws.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double marginal_median(const PosteriorSample& sample, DecisionCategory c) {
  return marginal_median(sample.marginal(c));
}

HdiInterval hdi(std::span<const double> draws, double mass) {
  const std::size_t w = window_length(draws.size(), mass);
  const std::vector<double> v = sorted_copy(draws);
  std::size_t best = 0;
  double best_width = v[w - 1] - v[0];
  for (std::size_t k = 1; k + w <= v.size(); ++k) {
    const double width = v[k + w - 1] - v[k];
    if (width < best_width) {
      best_width = width;
      best = k;
    }
  }
  return {v[best], v[best + w - 1], mass};
}

HdiInterval equal_tailed_interval(std::span<const double> draws, double mass) {
  const std::size_t w = window_length(draws.size(), mass);
  const std::vector<double> v = sorted_copy(draws);
  const std::size_t start = (v.size() - w) / 2;
  return {v[start], v[start + w - 1], mass};
}

double tail_probability(std::span<const double> draws, std::span<const double> weights, double threshold,
                        TailDirection direction) {
  if (draws.empty()) throw std::invalid_argument("tail probability of an empty sample");
  if (!weights.empty() && weights.size() != draws.size()) {
    throw std::invalid_argument(fmt::format("{} draws but {} weights", draws.size(), weights.size()));
  }
  double hit = 0.0, total = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    const bool beyond = direction == TailDirection::Greater ? draws[i] > threshold : draws[i] < threshold;
    total += w;
    if (beyond) hit += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("weights sum to zero");
  return hit / total;
}

double tail_probability(const PosteriorSample& sample, DecisionCategory c, double threshold,
                        TailDirection direction) {
  return tail_probability(sample.marginal(c), sample.weights, threshold, direction);
}

std::vector<SummaryRow> summarize_sample(const PosteriorSample& sample, const CategoryCounts* observed, double mass,
                                         double confidence) {
  std::vector<SummaryRow> rows;
  rows.reserve(kCategoryCount);
  std::int64_t n = 0;
  if (observed) n = std::accumulate(observed->begin(), observed->end(), std::int64_t{0});
  for (DecisionCategory c : kAllCategories) {
    const std::vector<double> m = sample.marginal(c);
    SummaryRow row;
    row.target = sample.target;
    row.scenario = sample.scenario;
    row.category = c;
    row.median = marginal_median(m);
    row.hdi = hdi(m, mass);
    if (observed && n > 0) {
      const std::int64_t x = (*observed)[index_of(c)];
      row.plugin = static_cast<double>(x) / static_cast<double>(n);
      row.agresti_coull = agresti_coull(x, n, confidence);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double percent2(double proportion) noexcept { return std::round(proportion * 10000.0) / 100.0; }

}  // namespace bbabc
