#include "bbabc/summary.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace bbabc {

SummaryVector population_summary(std::span<const ExaminerCounts> counts) {
  SummaryVector s(kSummaryWidth, 0.0);
  for (const auto& c : counts) {
    for (std::size_t k = 0; k < kCategoryCount; ++k) {
      s[k] += static_cast<double>(c.mated[k]);
      s[kCategoryCount + k] += static_cast<double>(c.nonmated[k]);
    }
  }
  return s;
}

SummaryVector examiner_summary(const ExaminerCounts& own, std::span<const double> population) {
  if (population.size() != kSummaryWidth) {
    throw std::invalid_argument(fmt::format("population summary has {} entries, expected {}",
                                            population.size(), kSummaryWidth));
  }
  SummaryVector s(kExaminerSummaryWidth);
  for (std::size_t k = 0; k < kCategoryCount; ++k) {
    s[k] = static_cast<double>(own.mated[k]);
    s[kCategoryCount + k] = static_cast<double>(own.nonmated[k]);
  }
  std::copy(population.begin(), population.end(), s.begin() + kSummaryWidth);
  return s;
}

StudySummaries summarize(std::span<const ExaminerCounts> counts) {
  StudySummaries out;
  out.population = population_summary(counts);
  out.examiners.reserve(counts.size());
  for (const auto& c : counts) out.examiners.push_back(examiner_summary(c, out.population));
  return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(fmt::format("distance: dimension mismatch ({} vs {})", a.size(), b.size()));
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

}  // namespace bbabc
