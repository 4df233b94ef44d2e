#include "bbabc/abc_engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "bbabc/parallel.hpp"

namespace bbabc {
namespace {

constexpr char kSpillMagic[8] = {'B', 'B', 'A', 'B', 'C', 'S', 'P', '1'};

static_assert(std::endian::native == std::endian::little, "spill format assumes a little-endian host");

Eigen::VectorXd to_vector(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void check_run(const RunOptions& run) {
  if (run.sims == 0) throw std::invalid_argument("number of simulations must be at least 1");
  if (run.block_size == 0) throw std::invalid_argument("block size must be at least 1");
}

// Runs produce(i) for every i in [0, sims) in parallel blocks and hands each
// result to consume(i, result) in index order on the calling thread.
template <typename T, typename Produce, typename Consume>
void ordered_blocks(const RunOptions& run, Produce&& produce, Consume&& consume) {
  check_run(run);
  std::vector<T> block(std::min(run.block_size, run.sims));
  for (std::size_t start = 0; start < run.sims; start += run.block_size) {
    const std::size_t len = std::min(run.block_size, run.sims - start);
    parallel_for(len, run.workers, [&](std::size_t b, std::size_t e) {
      for (std::size_t k = b; k < e; ++k) block[k] = produce(start + k);
    });
    for (std::size_t k = 0; k < len; ++k) consume(start + k, block[k]);
  }
}

CategoryValues population_rates(const PopulationDraw& pop, Scenario s) { return pop.eta(s).values(); }

}  // namespace

void AcceptanceConfig::validate() const {
  if (!(tolerance_quantile > 0.0 && tolerance_quantile < 1.0)) {
    throw std::invalid_argument(fmt::format("tolerance quantile {} is not in (0, 1)", tolerance_quantile));
  }
}

std::size_t AcceptanceConfig::accepted_count(std::size_t sims) const {
  validate();
  const auto minimum = static_cast<std::size_t>(std::ceil(1.0 / tolerance_quantile - 1e-9));
  if (sims < minimum) {
    throw std::invalid_argument(fmt::format("{} simulations is fewer than the {} needed at tolerance {}", sims,
                                            minimum, tolerance_quantile));
  }
  const auto m = static_cast<std::size_t>(std::ceil(tolerance_quantile * static_cast<double>(sims) - 1e-9));
  return std::clamp<std::size_t>(m, 1, sims);
}

std::size_t Acceptance::positive_weights() const noexcept {
  return static_cast<std::size_t>(std::count_if(weights.begin(), weights.end(), [](double w) { return w > 0.0; }));
}

std::vector<double> kernel_weights(std::span<const double> distances, double bandwidth, KernelType) {
  std::vector<double> w(distances.size(), 1.0);
  if (!(bandwidth > 0.0)) return w;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double u = distances[i] / bandwidth;
    w[i] = std::max(0.0, 1.0 - u * u);
  }
  return w;
}

NearestSelector::NearestSelector(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("selector capacity must be at least 1");
  heap_.reserve(capacity);
}

void NearestSelector::offer(double distance, std::size_t index) {
  if (std::isnan(distance)) throw std::invalid_argument(fmt::format("distance of draw {} is NaN", index));
  const Entry e{distance, index};
  if (heap_.size() < capacity_) {
    heap_.push_back(e);
    std::push_heap(heap_.begin(), heap_.end());
  } else if (e < heap_.front()) {
    std::pop_heap(heap_.begin(), heap_.end());
    heap_.back() = e;
    std::push_heap(heap_.begin(), heap_.end());
  }
}

double NearestSelector::threshold() const noexcept {
  return heap_.size() < capacity_ ? std::numeric_limits<double>::infinity() : heap_.front().distance;
}

Acceptance NearestSelector::finish(KernelType kernel) const {
  Acceptance a;
  if (heap_.empty()) return a;
  a.bandwidth = heap_.front().distance;
  std::vector<Entry> sorted = heap_;
  std::sort(sorted.begin(), sorted.end(), [](const Entry& x, const Entry& y) { return x.index < y.index; });
  a.indices.reserve(sorted.size());
  a.distances.reserve(sorted.size());
  for (const Entry& e : sorted) {
    a.indices.push_back(e.index);
    a.distances.push_back(e.distance);
  }
  a.weights = kernel_weights(a.distances, a.bandwidth, kernel);
  return a;
}

Acceptance select_accepted(std::span<const double> distances, const AcceptanceConfig& config) {
  NearestSelector selector(config.accepted_count(distances.size()));
  for (std::size_t i = 0; i < distances.size(); ++i) selector.offer(distances[i], i);
  return selector.finish(config.kernel);
}

double to_transformed(double value, const AdjustmentOptions& options) noexcept {
  if (options.transform == Transform::Identity) return value;
  const double p = std::clamp(value, options.clamp, 1.0 - options.clamp);
  return std::log(p) - std::log1p(-p);
}

double from_transformed(double value, const AdjustmentOptions& options) noexcept {
  if (options.transform == Transform::Identity) return value;
  const double p = value >= 0.0 ? 1.0 / (1.0 + std::exp(-value)) : std::exp(value) / (1.0 + std::exp(value));
  return std::clamp(p, options.clamp, 1.0 - options.clamp);
}

AdjustmentResult adjust(std::span<const double> parameter, const Eigen::MatrixXd& summaries,
                        std::span<const double> observed, std::span<const double> weights,
                        const AdjustmentOptions& options) {
  const auto m = static_cast<Eigen::Index>(parameter.size());
  if (summaries.rows() != m || static_cast<Eigen::Index>(weights.size()) != m) {
    throw std::invalid_argument(fmt::format("adjust: {} parameters, {} summary rows, {} weights", m,
                                            summaries.rows(), weights.size()));
  }
  if (static_cast<Eigen::Index>(observed.size()) != summaries.cols()) {
    throw std::invalid_argument(fmt::format("adjust: observed summary has {} entries, draws have {}",
                                            observed.size(), summaries.cols()));
  }
  if (!(options.ratio_min > 0.0 && options.ratio_min <= options.ratio_max)) {
    throw std::invalid_argument("adjust: invalid ratio bounds");
  }

  AdjustmentResult out;
  out.values.assign(parameter.begin(), parameter.end());
  const auto positive =
      static_cast<std::size_t>(std::count_if(weights.begin(), weights.end(), [](double w) { return w > 0.0; }));
  if (positive < options.min_positive_weights) {
    out.fallback = true;
    return out;
  }

  Eigen::VectorXd t(m);
  for (Eigen::Index i = 0; i < m; ++i) t[i] = to_transformed(parameter[static_cast<std::size_t>(i)], options);
  const Eigen::VectorXd w = to_vector(weights);
  const Eigen::RowVectorXd s_obs = to_vector(observed).transpose();

  try {
    auto mean_model = make_regression(options.backend, options.neural_net);
    mean_model->fit(summaries, t, w);
    const Eigen::VectorXd fitted = mean_model->predict_all(summaries);
    const double fitted_obs = mean_model->predict(s_obs);
    out.fitted_at_observed = fitted_obs;

    const Eigen::VectorXd resid = t - fitted;
    double scale = 0.0, mean_sq = 0.0, wsum = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (w[i] <= 0.0) continue;
      scale = std::max(scale, std::fabs(t[i]));
      mean_sq += w[i] * resid[i] * resid[i];
      wsum += w[i];
    }
    mean_sq /= wsum;

    Eigen::VectorXd ratio = Eigen::VectorXd::Ones(m);
    if (mean_sq > 1e-24 * std::max(1.0, scale * scale)) {
      const double floor = 1e-12 * mean_sq;
      Eigen::VectorXd log_sq(m);
      for (Eigen::Index i = 0; i < m; ++i) log_sq[i] = std::log(std::max(resid[i] * resid[i], floor));
      auto scale_model = make_regression(options.backend, options.neural_net);
      scale_model->fit(summaries, log_sq, w);
      const Eigen::VectorXd log_var = scale_model->predict_all(summaries);
      const double log_var_obs = scale_model->predict(s_obs);
      for (Eigen::Index i = 0; i < m; ++i) {
        ratio[i] = std::clamp(std::exp(0.5 * (log_var_obs - log_var[i])), options.ratio_min, options.ratio_max);
      }
    }

    for (Eigen::Index i = 0; i < m; ++i) {
      const double adjusted = fitted_obs + ratio[i] * resid[i];
      if (!std::isfinite(adjusted)) throw RegressionError("adjusted value is not finite");
      out.values[static_cast<std::size_t>(i)] = from_transformed(adjusted, options);
    }
  } catch (const RegressionError&) {
    out.values.assign(parameter.begin(), parameter.end());
    out.fallback = true;
  }
  return out;
}

MatrixAdjustment adjust(const Eigen::MatrixXd& parameters, const Eigen::MatrixXd& summaries,
                        std::span<const double> observed, std::span<const double> weights,
                        const AdjustmentOptions& options) {
  MatrixAdjustment out;
  out.values.resize(parameters.rows(), parameters.cols());
  out.fallback.resize(static_cast<std::size_t>(parameters.cols()));
  std::vector<double> column(static_cast<std::size_t>(parameters.rows()));
  for (Eigen::Index c = 0; c < parameters.cols(); ++c) {
    Eigen::Map<Eigen::VectorXd>(column.data(), parameters.rows()) = parameters.col(c);
    AdjustmentResult r = adjust(column, summaries, observed, weights, options);
    out.values.col(c) = Eigen::Map<const Eigen::VectorXd>(r.values.data(), parameters.rows());
    out.fallback[static_cast<std::size_t>(c)] = r.fallback;
  }
  return out;
}

void run_simulations(const PriorConfig& prior, const StudyDesign& design, const RunOptions& options,
                     const DrawVisitor& visit) {
  prior.validate();
  design.validate();
  struct Item {
    SimulationDraw draw;
    SummaryVector summary;
  };
  ordered_blocks<Item>(
      options,
      [&](std::size_t i) {
        Item item;
        item.draw = simulate_study(prior, design, RngStream(options.seed, i));
        item.summary = population_summary(item.draw.counts);
        return item;
      },
      [&](std::size_t i, const Item& item) { visit(i, item.draw, item.summary); });
}

SummarySpillWriter::SummarySpillWriter(const std::filesystem::path& path, std::size_t cols)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), cols_(cols) {
  if (!out_) throw std::runtime_error(fmt::format("cannot open spill file {}", path.string()));
  const std::uint64_t header[2] = {0, cols};
  out_.write(kSpillMagic, sizeof kSpillMagic);
  out_.write(reinterpret_cast<const char*>(header), sizeof header);
  if (!out_) throw std::runtime_error(fmt::format("write to spill file {} failed", path_.string()));
}

SummarySpillWriter::~SummarySpillWriter() {
  try {
    close();
  } catch (...) {
  }
}

void SummarySpillWriter::append(std::span<const double> row) {
  if (row.size() != cols_) {
    throw std::invalid_argument(fmt::format("spill row has {} values, expected {}", row.size(), cols_));
  }
  out_.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
  if (!out_) throw std::runtime_error(fmt::format("write to spill file {} failed", path_.string()));
  ++rows_;
}

void SummarySpillWriter::close() {
  if (!out_.is_open()) return;
  const std::uint64_t rows = rows_;
  out_.seekp(sizeof kSpillMagic);
  out_.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  out_.close();
  if (!out_) throw std::runtime_error(fmt::format("finalizing spill file {} failed", path_.string()));
}

SummaryMatrix read_summary_spill(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open spill file {}", path.string()));
  char magic[8];
  std::uint64_t header[2];
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in || std::memcmp(magic, kSpillMagic, sizeof magic) != 0) {
    throw std::runtime_error(fmt::format("{} is not a summary spill file", path.string()));
  }
  SummaryMatrix m;
  m.rows = header[0];
  m.cols = header[1];
  m.values.resize(m.rows * m.cols);
  in.read(reinterpret_cast<char*>(m.values.data()), static_cast<std::streamsize>(m.values.size() * sizeof(double)));
  if (!in) throw std::runtime_error(fmt::format("spill file {} is truncated", path.string()));
  return m;
}

std::vector<double> PosteriorSample::marginal(DecisionCategory c) const {
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& d : draws) out.push_back(d[index_of(c)]);
  return out;
}

namespace {

struct AdjustedBlock {
  std::vector<CategoryValues> values;
  std::size_t fallbacks = 0;
};

AdjustedBlock adjust_block(const std::vector<CategoryValues>& raw, const Eigen::MatrixXd& summaries,
                           std::span<const double> observed, const std::vector<double>& weights,
                           const std::optional<AdjustmentOptions>& options) {
  AdjustedBlock out{raw, 0};
  if (!options) return out;
  std::vector<double> column(raw.size());
  for (std::size_t k = 0; k < kCategoryCount; ++k) {
    for (std::size_t i = 0; i < raw.size(); ++i) column[i] = raw[i][k];
    const AdjustmentResult r = adjust(column, summaries, observed, weights, *options);
    if (r.fallback) ++out.fallbacks;
    for (std::size_t i = 0; i < raw.size(); ++i) out.values[i][k] = r.values[i];
  }
  return out;
}

PosteriorSample make_sample(const std::string& target, Scenario s, const Acceptance& acc,
                            std::vector<CategoryValues> raw, const Eigen::MatrixXd& summaries,
                            std::span<const double> observed, const StudyOptions& options) {
  PosteriorSample p;
  p.target = target;
  p.scenario = s;
  p.sim_indices = acc.indices;
  p.weights = acc.weights;
  AdjustedBlock adjusted = adjust_block(raw, summaries, observed, acc.weights, options.adjustment);
  p.raw = std::move(raw);
  p.draws = std::move(adjusted.values);
  p.manifest = {options.seed,       options.sims,          acc.size(), acc.bandwidth,
                options.config_hash, options.adjustment.has_value(), adjusted.fallbacks};
  return p;
}

}  // namespace

StudyResult run_full_study(const PriorConfig& prior, const StudyDesign& design,
                           std::span<const ExaminerCounts> observed, const StudyOptions& options) {
  prior.validate();
  design.validate();
  if (observed.size() != design.size()) {
    throw std::invalid_argument(
        fmt::format("observed data has {} examiners, design has {}", observed.size(), design.size()));
  }
  for (std::size_t j = 0; j < design.size(); ++j) {
    for (Scenario s : kAllScenarios) {
      const auto& c = observed[j](s);
      std::int64_t n = 0;
      for (auto v : c) n += v;
      if (n != design.presented(j, s)) {
        throw std::invalid_argument(fmt::format("examiner {} has {} {} decisions but the design presents {}",
                                                design.examiner_ids[j], n, label(s), design.presented(j, s)));
      }
    }
  }
  const std::size_t m = options.acceptance.accepted_count(options.sims);

  StudyResult result;
  const StudySummaries obs = summarize(observed);
  result.observed_population = obs.population;
  const std::size_t e = design.size();
  const bool per_examiner = options.examiners && e > 0;
  const bool own_ranking = per_examiner && options.ranking == ExaminerRanking::Own;

  // Pass 1: simulate, keep population summaries, select nearest draws.
  std::vector<std::int32_t> pop_summaries(options.sims * kSummaryWidth);
  NearestSelector pop_selector(m);
  std::vector<NearestSelector> ex_selectors;
  if (own_ranking) ex_selectors.assign(e, NearestSelector(m));
  std::optional<SummarySpillWriter> spill;
  if (!options.spill_path.empty()) spill.emplace(options.spill_path, kSummaryWidth);

  struct Item {
    std::vector<ExaminerCounts> counts;
    SummaryVector summary;
  };
  RunOptions run{options.sims, options.seed, options.workers, 256};
  ordered_blocks<Item>(
      run,
      [&](std::size_t i) {
        SimulationDraw d = simulate_study(prior, design, RngStream(options.seed, i));
        Item item;
        item.summary = population_summary(d.counts);
        if (own_ranking) item.counts = std::move(d.counts);
        return item;
      },
      [&](std::size_t i, const Item& item) {
        for (std::size_t k = 0; k < kSummaryWidth; ++k) {
          pop_summaries[i * kSummaryWidth + k] = static_cast<std::int32_t>(item.summary[k]);
        }
        if (spill) spill->append(item.summary);
        const double pop_sq = squared_distance(item.summary, obs.population);
        pop_selector.offer(std::sqrt(pop_sq), i);
        for (std::size_t j = 0; j < ex_selectors.size(); ++j) {
          double sq = pop_sq;
          for (Scenario s : kAllScenarios) {
            const auto& sim = item.counts[j](s);
            const auto& ref = observed[j](s);
            for (std::size_t k = 0; k < kCategoryCount; ++k) {
              const double diff = static_cast<double>(sim[k] - ref[k]);
              sq += diff * diff;
            }
          }
          ex_selectors[j].offer(std::sqrt(sq), i);
        }
      });
  if (spill) spill->close();

  auto pop_row = [&](std::size_t i, auto&& row) {
    for (std::size_t k = 0; k < kSummaryWidth; ++k) {
      row[static_cast<Eigen::Index>(k)] = pop_summaries[i * kSummaryWidth + k];
    }
  };

  // Population posterior.
  const Acceptance pop_acc = pop_selector.finish(options.acceptance.kernel);
  {
    const std::size_t ma = pop_acc.size();
    Eigen::MatrixXd summaries(static_cast<Eigen::Index>(ma), static_cast<Eigen::Index>(kSummaryWidth));
    std::vector<CategoryValues> raw_m(ma), raw_nm(ma);
    parallel_for(ma, options.workers, [&](std::size_t b, std::size_t end) {
      for (std::size_t r = b; r < end; ++r) {
        const std::size_t i = pop_acc.indices[r];
        const PopulationDraw pop = draw_population(prior, RngStream(options.seed, i));
        raw_m[r] = population_rates(pop, Scenario::Mated);
        raw_nm[r] = population_rates(pop, Scenario::NonMated);
        pop_row(i, summaries.row(static_cast<Eigen::Index>(r)));
      }
    });
    result.population.target = "population";
    result.population.acceptance = pop_acc;
    result.population.mated =
        make_sample("population", Scenario::Mated, pop_acc, std::move(raw_m), summaries, obs.population, options);
    result.population.nonmated = make_sample("population", Scenario::NonMated, pop_acc, std::move(raw_nm),
                                             summaries, obs.population, options);
  }
  if (!per_examiner) return result;

  // Pass 2: regenerate each examiner's accepted draws and adjust on the
  // 28-dimensional examiner summary.
  result.examiners.resize(e);
  parallel_for(e, options.workers, [&](std::size_t b, std::size_t end) {
    for (std::size_t j = b; j < end; ++j) {
      const Acceptance acc = own_ranking ? ex_selectors[j].finish(options.acceptance.kernel) : pop_acc;
      const std::size_t ma = acc.size();
      Eigen::MatrixXd summaries(static_cast<Eigen::Index>(ma), static_cast<Eigen::Index>(kExaminerSummaryWidth));
      std::vector<CategoryValues> raw_m(ma), raw_nm(ma);
      for (std::size_t r = 0; r < ma; ++r) {
        const std::size_t i = acc.indices[r];
        const RngStream root(options.seed, i);
        const PopulationDraw pop = draw_population(prior, root);
        const ExaminerRates rates = draw_examiner_rates(pop, design.stream_keys[j], root);
        const ExaminerCounts counts =
            generate_examiner_counts(rates, design.n_mated[j], design.n_nonmated[j], design.stream_keys[j], root);
        raw_m[r] = rates.mated.values();
        raw_nm[r] = rates.nonmated.values();
        auto row = summaries.row(static_cast<Eigen::Index>(r));
        for (Scenario s : kAllScenarios) {
          for (DecisionCategory c : kAllCategories) {
            row[static_cast<Eigen::Index>(summary_index(s, c))] = static_cast<double>(counts(s)[index_of(c)]);
          }
        }
        pop_row(i, row.tail(static_cast<Eigen::Index>(kSummaryWidth)));
      }
      const std::string& id = design.examiner_ids[j];
      TargetPosterior& t = result.examiners[j];
      t.target = id;
      t.acceptance = acc;
      t.mated = make_sample(id, Scenario::Mated, acc, std::move(raw_m), summaries, obs.examiners[j], options);
      t.nonmated = make_sample(id, Scenario::NonMated, acc, std::move(raw_nm), summaries, obs.examiners[j], options);
    }
  });
  return result;
}

StudyResult run_full_study(const PriorConfig& prior, const StudyDesign& design, const CountTable& observed,
                           const StudyOptions& options) {
  if (observed.examiner_count() != design.size()) {
    throw std::invalid_argument(fmt::format("observed data has {} examiners, design has {}",
                                            observed.examiner_count(), design.size()));
  }
  const std::vector<ExaminerCounts> counts = examiner_counts(observed, design);
  return run_full_study(prior, design, counts, options);
}

RejectionResult rejection_abc(const GenericSimulator& simulate, std::span<const double> observed,
                              const RunOptions& run, const AcceptanceConfig& config,
                              const std::optional<AdjustmentOptions>& adjustment) {
  NearestSelector selector(config.accepted_count(run.sims));
  ordered_blocks<double>(
      run,
      [&](std::size_t i) {
        RngStream rng(run.seed, i);
        return distance(simulate(rng).summary, observed);
      },
      [&](std::size_t i, double d) { selector.offer(d, i); });

  RejectionResult out;
  out.acceptance = selector.finish(config.kernel);
  const std::size_t ma = out.acceptance.size();
  std::vector<GenericDraw> draws(ma);
  parallel_for(ma, run.workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      RngStream rng(run.seed, out.acceptance.indices[r]);
      draws[r] = simulate(rng);
    }
  });
  const auto rows = static_cast<Eigen::Index>(ma);
  const auto p = static_cast<Eigen::Index>(draws.front().parameters.size());
  const auto d = static_cast<Eigen::Index>(observed.size());
  out.parameters.resize(rows, p);
  out.summaries.resize(rows, d);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const GenericDraw& g = draws[static_cast<std::size_t>(r)];
    if (static_cast<Eigen::Index>(g.parameters.size()) != p) {
      throw std::invalid_argument("simulator returned parameter vectors of varying length");
    }
    out.parameters.row(r) = to_vector(g.parameters).transpose();
    out.summaries.row(r) = to_vector(g.summary).transpose();
  }
  if (adjustment) {
    MatrixAdjustment a = adjust(out.parameters, out.summaries, observed, out.acceptance.weights, *adjustment);
    out.adjusted = std::move(a.values);
    out.fallback = std::move(a.fallback);
  } else {
    out.adjusted = out.parameters;
    out.fallback.assign(static_cast<std::size_t>(p), false);
  }
  return out;
}

}  // namespace bbabc
