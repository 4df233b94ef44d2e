#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "bbabc/abc_engine.hpp"
#include "bbabc/generative_model.hpp"
#include "bbabc/posterior.hpp"

namespace bbabc {

// ---- Data-generator adequacy -------------------------------------------------

struct DatagenOptions {
  std::size_t runs = 10'000;
  double mass = 0.95;
  std::uint64_t seed = 0;
  unsigned workers = 0;
};

struct DatagenRow {
  Scenario scenario = Scenario::Mated;
  DecisionCategory category = DecisionCategory::NV;
  std::int64_t observed = 0;
  double lower = 0.0;  // HDI of the simulated total
  double upper = 0.0;
  bool contained = false;
};

struct DatagenReport {
  DatagenOptions options;
  std::vector<DatagenRow> rows;  // 14 rows, mated block first

  bool all_contained() const noexcept;
  const DatagenRow& row(Scenario s, DecisionCategory c) const { return rows.at(summary_index(s, c)); }
};

// Simulates the study `runs` times with every examiner's rates fixed and
// reports the HDI of each of the 14 simulated category totals. Run r uses
// RngStream(seed, r). Requires runs >= 100.
DatagenReport validate_datagen(const StudyDesign& design, std::span<const ExaminerRates> rates,
                               std::span<const ExaminerCounts> observed, const DatagenOptions& options);

// Plug-in (PRES) rates per examiner; examiners with no pairs in a scenario
// get the uniform vector, which generates nothing for them.
std::vector<ExaminerRates> plugin_examiner_rates(std::span<const ExaminerCounts> observed);

// ---- True-rate recovery ------------------------------------------------------

struct TrueRateScenario {
  std::string description;
  ExaminerRates population;
  std::vector<std::string> examiner_ids;
  std::vector<ExaminerRates> examiners;

  // JSON: {"description", "population": {"mated": [7], "nonmated": [7]},
  //        "examiners": [{"id", "mated": [7], "nonmated": [7]}]}.
  // Vectors are normalized; negative or all-zero vectors are rejected.
  static TrueRateScenario from_json(std::istream& in);
  static TrueRateScenario load(const std::filesystem::path& path);
  const ExaminerRates& examiner(std::string_view id) const;
};

struct RecoveryRow {
  std::string target;
  Scenario scenario = Scenario::Mated;
  DecisionCategory category = DecisionCategory::NV;
  double truth = 0.0;
  double median = 0.0;
  HdiInterval hdi;
  bool contained = false;
};

struct RecoveryOptions {
  StudyOptions study{};
  double mass = 0.95;
  // Truth counts as contained when within this distance of the interval.
  // Half a unit in the second decimal of a percentage.
  double containment_slack = 0.00005;
  std::vector<std::string> highlighted{"E010", "E042", "E107"};
};

struct RecoveryReport {
  std::vector<ExaminerCounts> synthetic;  // generated observed data, design order
  std::vector<RecoveryRow> population;    // 14 rows
  std::vector<RecoveryRow> examiners;     // 14 rows per examiner, design order
  std::vector<std::string> highlighted;

  bool population_contained() const noexcept;
  double examiner_containment_rate() const noexcept;
};

// Stream index reserved for the synthetic observed data, outside any
// realistic simulation range.
inline constexpr std::uint64_t kSyntheticDataStream = 0xD47A'0B5E'0000'0000ull;

// Generates observed counts from the scenario's examiner rates, runs the full
// study against them and checks HDI containment of every true rate.
// Requires options.study.sims >= 10,000.
RecoveryReport verify_recovery(const TrueRateScenario& scenario, const StudyDesign& design, const PriorConfig& prior,
                               const RecoveryOptions& options);

// ---- Examiner partition --------------------------------------------------------

struct ExaminerMedians {
  std::vector<std::string> examiner_ids;
  std::vector<std::array<double, kSummaryWidth>> medians;  // mated block first

  static ExaminerMedians from_study(const StudyResult& result);
};

struct PartitionGroup {
  std::string examiner_id;
  double median = 0.0;
  bool high = false;
};

struct PartitionPair {
  std::size_t a = 0;  // summary indices, a < b
  std::size_t b = 0;
  std::string examiner_id;
  double median_a = 0.0;
  double median_b = 0.0;
  bool high = false;
};

struct PartitionReport {
  Scenario scenario = Scenario::Mated;
  DecisionCategory category = DecisionCategory::NV;
  double threshold = 0.0;
  std::vector<PartitionGroup> groups;
  std::vector<PartitionPair> pairs;

  std::size_t high_count() const noexcept;
};

inline constexpr double kDefaultPartitionThreshold = 0.05;
inline constexpr double kDefaultSecondaryThreshold = 0.0002;

// Examiners whose median for (scenario, category) is strictly above the
// threshold form the high group. Pairs cover every two of the 14 categories.
PartitionReport partition_report(const ExaminerMedians& medians, Scenario scenario, DecisionCategory category,
                                 double threshold);

}  // namespace bbabc
