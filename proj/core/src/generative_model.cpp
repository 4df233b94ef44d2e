#include "bbabc/generative_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace bbabc {
namespace {

enum SubstreamSlot : std::uint64_t { kRatesMated = 0, kRatesNonMated = 1, kCountsMated = 2, kCountsNonMated = 3 };

std::uint64_t slot_tag(std::uint64_t key, SubstreamSlot slot) { return key * 4 + slot; }

RateVector draw_examiner_vector(const RateVector& eta, double lambda, RngStream rng) {
  CategoryValues alpha{};
  for (std::size_t k = 0; k < kCategoryCount; ++k) alpha[k] = std::max(lambda * eta[k], kDirichletFloor);
  return sample_dirichlet(alpha, rng);
}

}  // namespace

StudyDesign StudyDesign::from_counts(const CountTable& counts) {
  StudyDesign d;
  const std::size_t e = counts.examiner_count();
  d.examiner_ids = counts.examiner_ids();
  d.n_mated.resize(e);
  d.n_nonmated.resize(e);
  d.stream_keys.resize(e);
  for (std::size_t j = 0; j < e; ++j) {
    d.n_mated[j] = counts.presented(j, Scenario::Mated);
    d.n_nonmated[j] = counts.presented(j, Scenario::NonMated);
    d.stream_keys[j] = j;
  }
  return d;
}

std::int64_t StudyDesign::total(Scenario s) const {
  const auto& v = s == Scenario::Mated ? n_mated : n_nonmated;
  return std::accumulate(v.begin(), v.end(), std::int64_t{0});
}

void StudyDesign::validate() const {
  const std::size_t e = examiner_ids.size();
  if (n_mated.size() != e || n_nonmated.size() != e || stream_keys.size() != e) {
    throw std::invalid_argument(fmt::format(
        "study design is ragged: {} ids, {} mated counts, {} non-mated counts, {} stream keys", e,
        n_mated.size(), n_nonmated.size(), stream_keys.size()));
  }
  for (std::size_t j = 0; j < e; ++j) {
    if (n_mated[j] < 0 || n_nonmated[j] < 0) {
      throw std::invalid_argument(fmt::format("examiner {} has a negative pair count", examiner_ids[j]));
    }
  }
}

void PriorConfig::validate() const {
  for (Scenario s : kAllScenarios) {
    for (double a : alpha(s)) {
      if (!(a > 0.0) || !std::isfinite(a)) {
        throw std::invalid_argument(fmt::format("{} alpha entry {} must be positive", label(s), a));
      }
    }
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("prior sigma must be > 0");
  if (!std::isfinite(mu)) throw std::invalid_argument("prior mu must be finite");
}

PopulationDraw draw_population(const PriorConfig& prior, const RngStream& rng) {
  RngStream local = rng;
  PopulationDraw out;
  out.eta_mated = sample_dirichlet(prior.alpha_mated, local);
  out.eta_nonmated = sample_dirichlet(prior.alpha_nonmated, local);
  out.lambda = sample_lognormal(prior.mu, prior.sigma, local);
  return out;
}

ExaminerRates draw_examiner_rates(const PopulationDraw& population, std::uint64_t stream_key,
                                  const RngStream& rng) {
  return {draw_examiner_vector(population.eta_mated, population.lambda,
                               rng.substream(slot_tag(stream_key, kRatesMated))),
          draw_examiner_vector(population.eta_nonmated, population.lambda,
                               rng.substream(slot_tag(stream_key, kRatesNonMated)))};
}

ExaminerCounts generate_examiner_counts(const ExaminerRates& rates, std::int64_t n_mated,
                                        std::int64_t n_nonmated, std::uint64_t stream_key,
                                        const RngStream& rng) {
  RngStream mated = rng.substream(slot_tag(stream_key, kCountsMated));
  RngStream nonmated = rng.substream(slot_tag(stream_key, kCountsNonMated));
  return {sample_multinomial(n_mated, rates.mated, mated),
          sample_multinomial(n_nonmated, rates.nonmated, nonmated)};
}

SimulationDraw draw_prior(const PriorConfig& prior, const StudyDesign& design, const RngStream& rng) {
  SimulationDraw draw;
  draw.population = draw_population(prior, rng);
  draw.rates.reserve(design.size());
  for (std::size_t j = 0; j < design.size(); ++j) {
    draw.rates.push_back(draw_examiner_rates(draw.population, design.stream_keys[j], rng));
  }
  return draw;
}

SimulationDraw generate_pseudo_data(SimulationDraw draw, const StudyDesign& design, const RngStream& rng) {
  if (draw.rates.size() != design.size()) {
    throw std::invalid_argument(fmt::format("draw has rates for {} examiners, design has {}",
                                            draw.rates.size(), design.size()));
  }
  draw.counts.resize(design.size());
  for (std::size_t j = 0; j < design.size(); ++j) {
    draw.counts[j] = generate_examiner_counts(draw.rates[j], design.n_mated[j], design.n_nonmated[j],
                                              design.stream_keys[j], rng);
  }
  return draw;
}

SimulationDraw simulate_study(const PriorConfig& prior, const StudyDesign& design, const RngStream& rng) {
  return generate_pseudo_data(draw_prior(prior, design, rng), design, rng);
}

std::vector<ExaminerCounts> examiner_counts(const CountTable& table, const StudyDesign& design) {
  std::vector<ExaminerCounts> out(design.size());
  for (std::size_t j = 0; j < design.size(); ++j) {
    const auto idx = table.find(design.examiner_ids[j]);
    if (!idx) {
      throw std::invalid_argument(
          fmt::format("examiner {} is in the design but not in the observed data", design.examiner_ids[j]));
    }
    out[j] = {table.counts(*idx, Scenario::Mated), table.counts(*idx, Scenario::NonMated)};
  }
  return out;
}

}  // namespace bbabc
