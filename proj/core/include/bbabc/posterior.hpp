#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bbabc/abc_engine.hpp"
#include "bbabc/categories.hpp"
#include "bbabc/study_data.hpp"

namespace bbabc {

struct HdiInterval {
  double lower = 0.0;
  double upper = 0.0;
  double mass = 0.95;

  double width() const noexcept { return upper - lower; }
  bool contains(double x, double slack = 0.0) const noexcept { return x >= lower - slack && x <= upper + slack; }
};

// Exact median; the mean of the two middle values for an even count.
// Throws std::invalid_argument on an empty sample.
double marginal_median(std::span<const double> draws);
double marginal_median(const PosteriorSample& sample, DecisionCategory c);

// Shortest window of ceil(mass * M) sorted draws, the first on ties.
// Requires 0 < mass < 1 and M >= ceil(1 / (1 - mass)).
HdiInterval hdi(std::span<const double> draws, double mass);

// Central window of the same number of sorted draws as hdi().
HdiInterval equal_tailed_interval(std::span<const double> draws, double mass);

enum class TailDirection { Greater, Less };

// Weighted fraction of draws strictly beyond the threshold. Empty weights
// mean uniform weights.
double tail_probability(std::span<const double> draws, std::span<const double> weights, double threshold,
                        TailDirection direction);
double tail_probability(const PosteriorSample& sample, DecisionCategory c, double threshold,
                        TailDirection direction);

// One row of a Table-2-shaped report. Proportions, not percentages.
struct SummaryRow {
  std::string target;
  Scenario scenario = Scenario::Mated;
  DecisionCategory category = DecisionCategory::NV;
  double median = 0.0;
  HdiInterval hdi;
  std::optional<double> plugin;
  std::optional<BinomialInterval> agresti_coull;
};

// Median and HDI per category; plug-in PRES rate and Agresti-Coull interval
// when observed counts are supplied.
std::vector<SummaryRow> summarize_sample(const PosteriorSample& sample, const CategoryCounts* observed,
                                         double mass = 0.95, double confidence = 0.95);

// Rounds a proportion to a percentage with two decimals.
double percent2(double proportion) noexcept;

}  // namespace bbabc
