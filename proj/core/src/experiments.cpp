#include "bbabc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "bbabc/parallel.hpp"
#include "json.hpp"

namespace bbabc {
namespace {

using Json = nlohmann::json;

RateVector rates_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != kCategoryCount) {
    throw std::invalid_argument(fmt::format("{}: expected an array of {} rates", where, kCategoryCount));
  }
  CategoryValues v{};
  for (std::size_t k = 0; k < kCategoryCount; ++k) {
    if (!j[k].is_number()) throw std::invalid_argument(fmt::format("{}: entry {} is not a number", where, k));
    v[k] = j[k].get<double>();
  }
  try {
    return RateVector::normalized(v);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(fmt::format("{}: {}", where, e.what()));
  }
}

ExaminerRates pair_from_json(const Json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("mated") || !j.contains("nonmated")) {
    throw std::invalid_argument(fmt::format("{}: needs \"mated\" and \"nonmated\" rate arrays", where));
  }
  return {rates_from_json(j["mated"], where + ".mated"), rates_from_json(j["nonmated"], where + ".nonmated")};
}

std::vector<RecoveryRow> containment_rows(const std::string& target, const TargetPosterior& posterior,
                                          const ExaminerRates& truth, const RecoveryOptions& options) {
  std::vector<RecoveryRow> rows;
  for (Scenario s : kAllScenarios) {
    const PosteriorSample& sample = posterior(s);
    for (DecisionCategory c : kAllCategories) {
      const std::vector<double> m = sample.marginal(c);
      RecoveryRow r;
      r.target = target;
      r.scenario = s;
      r.category = c;
      r.truth = truth(s)[c];
      r.median = marginal_median(m);
      r.hdi = hdi(m, options.mass);
      r.contained = r.hdi.contains(r.truth, options.containment_slack);
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

}  // namespace

bool DatagenReport::all_contained() const noexcept {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const DatagenRow& r) { return r.contained; });
}

std::vector<ExaminerRates> plugin_examiner_rates(std::span<const ExaminerCounts> observed) {
  std::vector<ExaminerRates> out;
  out.reserve(observed.size());
  for (const ExaminerCounts& c : observed) {
    ExaminerRates r;
    for (Scenario s : kAllScenarios) {
      const CategoryCounts& x = c(s);
      if (std::accumulate(x.begin(), x.end(), std::int64_t{0}) == 0) continue;
      CategoryValues w{};
      for (std::size_t k = 0; k < kCategoryCount; ++k) w[k] = static_cast<double>(x[k]);
      (s == Scenario::Mated ? r.mated : r.nonmated) = RateVector::normalized(w);
    }
    out.push_back(r);
  }
  return out;
}

DatagenReport validate_datagen(const StudyDesign& design, std::span<const ExaminerRates> rates,
                               std::span<const ExaminerCounts> observed, const DatagenOptions& options) {
  design.validate();
  if (options.runs < 100) throw std::invalid_argument(fmt::format("{} runs; at least 100 are required", options.runs));
  if (rates.size() != design.size() || observed.size() != design.size()) {
    throw std::invalid_argument(fmt::format("design has {} examiners, rates {}, observed {}", design.size(),
                                            rates.size(), observed.size()));
  }
  std::vector<std::array<double, kSummaryWidth>> totals(options.runs);
  parallel_for(options.runs, options.workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      const RngStream root(options.seed, r);
      std::array<double, kSummaryWidth> t{};
      for (std::size_t j = 0; j < design.size(); ++j) {
        const ExaminerCounts x =
            generate_examiner_counts(rates[j], design.n_mated[j], design.n_nonmated[j], design.stream_keys[j], root);
        for (Scenario s : kAllScenarios)
          for (DecisionCategory c : kAllCategories) t[summary_index(s, c)] += static_cast<double>(x(s)[index_of(c)]);
      }
      totals[r] = t;
    }
  });

  const SummaryVector obs = population_summary(observed);
  DatagenReport report;
  report.options = options;
  std::vector<double> column(options.runs);
  for (Scenario s : kAllScenarios) {
    for (DecisionCategory c : kAllCategories) {
      const std::size_t k = summary_index(s, c);
      for (std::size_t r = 0; r < options.runs; ++r) column[r] = totals[r][k];
      const HdiInterval h = hdi(column, options.mass);
      DatagenRow row{s, c, static_cast<std::int64_t>(obs[k]), h.lower, h.upper, false};
      row.contained = h.contains(obs[k]);
      report.rows.push_back(row);
    }
  }
  return report;
}

TrueRateScenario TrueRateScenario::from_json(std::istream& in) {
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw std::invalid_argument(fmt::format("true-rate scenario is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object() || !doc.contains("population")) {
    throw std::invalid_argument("true-rate scenario needs a \"population\" object");
  }
  TrueRateScenario s;
  s.description = doc.value("description", "");
  s.population = pair_from_json(doc["population"], "population");
  if (doc.contains("examiners")) {
    const Json& list = doc["examiners"];
    if (!list.is_array()) throw std::invalid_argument("\"examiners\" must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Json& e = list[i];
      if (!e.is_object() || !e.contains("id") || !e["id"].is_string()) {
        throw std::invalid_argument(fmt::format("examiners[{}] needs a string \"id\"", i));
      }
      const std::string id = e["id"].get<std::string>();
      if (std::find(s.examiner_ids.begin(), s.examiner_ids.end(), id) != s.examiner_ids.end()) {
        throw std::invalid_argument(fmt::format("examiner {} appears twice in the scenario", id));
      }
      s.examiner_ids.push_back(id);
      s.examiners.push_back(pair_from_json(e, "examiners." + id));
    }
  }
  return s;
}

TrueRateScenario TrueRateScenario::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  return from_json(in);
}

const ExaminerRates& TrueRateScenario::examiner(std::string_view id) const {
  const auto it = std::find(examiner_ids.begin(), examiner_ids.end(), id);
  if (it == examiner_ids.end()) throw std::invalid_argument(fmt::format("scenario has no examiner {}", id));
  return examiners[static_cast<std::size_t>(it - examiner_ids.begin())];
}

bool RecoveryReport::population_contained() const noexcept {
  return !population.empty() &&
         std::all_of(population.begin(), population.end(), [](const RecoveryRow& r) { return r.contained; });
}

double RecoveryReport::examiner_containment_rate() const noexcept {
  if (examiners.empty()) return 0.0;
  const auto hits = std::count_if(examiners.begin(), examiners.end(), [](const RecoveryRow& r) { return r.contained; });
  return static_cast<double>(hits) / static_cast<double>(examiners.size());
}

RecoveryReport verify_recovery(const TrueRateScenario& scenario, const StudyDesign& design, const PriorConfig& prior,
                               const RecoveryOptions& options) {
  if (options.study.sims < 10'000) {
    throw std::invalid_argument(fmt::format("{} simulations; recovery needs at least 10,000", options.study.sims));
  }
  design.validate();
  std::vector<ExaminerRates> truth;
  truth.reserve(design.size());
  for (const std::string& id : design.examiner_ids) truth.push_back(scenario.examiner(id));

  RecoveryReport report;
  const RngStream data_stream(options.study.seed, kSyntheticDataStream);
  report.synthetic.reserve(design.size());
  for (std::size_t j = 0; j < design.size(); ++j) {
    report.synthetic.push_back(generate_examiner_counts(truth[j], design.n_mated[j], design.n_nonmated[j],
                                                        design.stream_keys[j], data_stream));
  }

  const StudyResult study = run_full_study(prior, design, report.synthetic, options.study);
  report.population = containment_rows("population", study.population, scenario.population, options);
  for (std::size_t j = 0; j < study.examiners.size(); ++j) {
    auto rows = containment_rows(design.examiner_ids[j], study.examiners[j], truth[j], options);
    report.examiners.insert(report.examiners.end(), rows.begin(), rows.end());
  }
  for (const std::string& id : options.highlighted) {
    if (std::find(design.examiner_ids.begin(), design.examiner_ids.end(), id) != design.examiner_ids.end()) {
      report.highlighted.push_back(id);
    }
  }
  return report;
}

ExaminerMedians ExaminerMedians::from_study(const StudyResult& result) {
  ExaminerMedians m;
  for (const TargetPosterior& t : result.examiners) {
    std::array<double, kSummaryWidth> row{};
    for (Scenario s : kAllScenarios)
      for (DecisionCategory c : kAllCategories) row[summary_index(s, c)] = marginal_median(t(s), c);
    m.examiner_ids.push_back(t.target);
    m.medians.push_back(row);
  }
  return m;
}

std::size_t PartitionReport::high_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(groups.begin(), groups.end(), [](const auto& g) { return g.high; }));
}

PartitionReport partition_report(const ExaminerMedians& medians, Scenario scenario, DecisionCategory category,
                                 double threshold) {
  if (index_of(scenario) >= kScenarioCount || index_of(category) >= kCategoryCount) {
    throw std::invalid_argument("partition category is not one of the 14 decision categories");
  }
  if (medians.examiner_ids.size() != medians.medians.size()) {
    throw std::invalid_argument("examiner medians are ragged");
  }
  PartitionReport report;
  report.scenario = scenario;
  report.category = category;
  report.threshold = threshold;
  const std::size_t key = summary_index(scenario, category);
  const std::size_t e = medians.examiner_ids.size();
  report.groups.reserve(e);
  for (std::size_t j = 0; j < e; ++j) {
    const double v = medians.medians[j][key];
    report.groups.push_back({medians.examiner_ids[j], v, v > threshold});
  }
  report.pairs.reserve(e * kSummaryWidth * (kSummaryWidth - 1) / 2);
  for (std::size_t a = 0; a < kSummaryWidth; ++a) {
    for (std::size_t b = a + 1; b < kSummaryWidth; ++b) {
      for (std::size_t j = 0; j < e; ++j) {
        report.pairs.push_back({a, b, medians.examiner_ids[j], medians.medians[j][a], medians.medians[j][b],
                                report.groups[j].high});
      }
    }
  }
  return report;
}

}  // namespace bbabc
