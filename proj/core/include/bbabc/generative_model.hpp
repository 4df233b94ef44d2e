#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bbabc/categories.hpp"
#include "bbabc/rng.hpp"
#include "bbabc/sampling.hpp"
#include "bbabc/study_data.hpp"

namespace bbabc {

// Who was tested and how many pairs of each kind they saw.
struct StudyDesign {
  std::vector<std::string> examiner_ids;
  std::vector<std::int64_t> n_mated;
  std::vector<std::int64_t> n_nonmated;
  // Key used to derive each examiner's random substreams; defaults to the
  // examiner's position. Permuting examiners together with their keys
  // permutes the generated data and changes nothing else.
  std::vector<std::uint64_t> stream_keys;

  static StudyDesign from_counts(const CountTable& counts);

  std::size_t size() const noexcept { return examiner_ids.size(); }
  std::int64_t presented(std::size_t examiner, Scenario s) const {
    return s == Scenario::Mated ? n_mated.at(examiner) : n_nonmated.at(examiner);
  }
  std::int64_t total(Scenario s) const;
  std::int64_t grand_total() const { return total(Scenario::Mated) + total(Scenario::NonMated); }

  // Throws std::invalid_argument on ragged vectors or negative counts.
  void validate() const;
};

// Hyperparameters of the hierarchical prior. Defaults are the values used
// for the Noblis reanalysis.
struct PriorConfig {
  CategoryValues alpha_mated{3.0, 0.5, 0.5, 2.0, 2.0, 0.5, 3.0};
  CategoryValues alpha_nonmated{1.0, 1.0, 7.0, 1.0, 1.0, 0.5, 0.5};
  double mu = 6.0;
  double sigma = 1.0;

  void validate() const;
  const CategoryValues& alpha(Scenario s) const noexcept {
    return s == Scenario::Mated ? alpha_mated : alpha_nonmated;
  }
};

struct PopulationDraw {
  RateVector eta_mated;
  RateVector eta_nonmated;
  double lambda = 1.0;

  const RateVector& eta(Scenario s) const noexcept {
    return s == Scenario::Mated ? eta_mated : eta_nonmated;
  }
};

struct ExaminerRates {
  RateVector mated;
  RateVector nonmated;

  const RateVector& operator()(Scenario s) const noexcept {
    return s == Scenario::Mated ? mated : nonmated;
  }
};

struct ExaminerCounts {
  CategoryCounts mated{};
  CategoryCounts nonmated{};

  const CategoryCounts& operator()(Scenario s) const noexcept {
    return s == Scenario::Mated ? mated : nonmated;
  }
  friend bool operator==(const ExaminerCounts&, const ExaminerCounts&) = default;
};

// One prior draw: population rates, scale, per-examiner rates and, once
// generated, per-examiner pseudo-counts.
struct SimulationDraw {
  PopulationDraw population;
  std::vector<ExaminerRates> rates;
  std::vector<ExaminerCounts> counts;  // empty until pseudo-data is generated
};

// Lower bound applied to every lambda * eta_k before it is used as a
// Dirichlet parameter.
inline constexpr double kDirichletFloor = 1e-300;

PopulationDraw draw_population(const PriorConfig& prior, const RngStream& rng);

ExaminerRates draw_examiner_rates(const PopulationDraw& population, std::uint64_t stream_key,
                                  const RngStream& rng);

ExaminerCounts generate_examiner_counts(const ExaminerRates& rates, std::int64_t n_mated,
                                        std::int64_t n_nonmated, std::uint64_t stream_key,
                                        const RngStream& rng);

// Population rates from Dirichlet(alpha), lambda from logNormal(mu, sigma^2),
// then each examiner's rates from Dirichlet(lambda * eta). `rng` identifies the
// simulation; examiner draws use substreams keyed by the design's stream keys.
SimulationDraw draw_prior(const PriorConfig& prior, const StudyDesign& design, const RngStream& rng);

// Multinomial pseudo-counts for every examiner given the draw's rates.
SimulationDraw generate_pseudo_data(SimulationDraw draw, const StudyDesign& design,
                                    const RngStream& rng);

// draw_prior followed by generate_pseudo_data.
SimulationDraw simulate_study(const PriorConfig& prior, const StudyDesign& design,
                              const RngStream& rng);

// Observed counts in design order. Throws if an examiner is missing.
std::vector<ExaminerCounts> examiner_counts(const CountTable& table, const StudyDesign& design);

}  // namespace bbabc
