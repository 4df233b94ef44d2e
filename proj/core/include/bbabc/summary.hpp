#pragma once

#include <span>
#include <vector>

#include "bbabc/generative_model.hpp"

namespace bbabc {

// Count summaries. Population: 14 category totals, mated block first.
// Examiner: the examiner's own 14 counts followed by the population 14.
using SummaryVector = std::vector<double>;

inline constexpr std::size_t kExaminerSummaryWidth = 2 * kSummaryWidth;

struct StudySummaries {
  SummaryVector population;
  std::vector<SummaryVector> examiners;
};

SummaryVector population_summary(std::span<const ExaminerCounts> counts);
SummaryVector examiner_summary(const ExaminerCounts& own, std::span<const double> population);
StudySummaries summarize(std::span<const ExaminerCounts> counts);

// Euclidean distance. Throws std::invalid_argument on a dimension mismatch.
double distance(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace bbabc
