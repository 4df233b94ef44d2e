#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bbabc/generative_model.hpp"
#include "bbabc/regression.hpp"
#include "bbabc/summary.hpp"

namespace bbabc {

enum class DistanceMetric { Euclidean };
enum class KernelType { Epanechnikov };

struct AcceptanceConfig {
  DistanceMetric distance = DistanceMetric::Euclidean;
  double tolerance_quantile = 0.01;
  KernelType kernel = KernelType::Epanechnikov;

  void validate() const;
  // ceil(tolerance_quantile * sims). Throws if sims < ceil(1 / tolerance_quantile).
  std::size_t accepted_count(std::size_t sims) const;
};

// The accepted draws of one target, in ascending simulation index.
struct Acceptance {
  std::vector<std::size_t> indices;
  std::vector<double> distances;
  std::vector<double> weights;
  double bandwidth = 0.0;  // distance of the M-th nearest draw

  std::size_t size() const noexcept { return indices.size(); }
  std::size_t positive_weights() const noexcept;
};

// Epanechnikov weights 1 - (d / h)^2. With h == 0 every accepted draw sits at
// distance zero and all weights are 1.
std::vector<double> kernel_weights(std::span<const double> distances, double bandwidth, KernelType kernel);

// Streaming selection of the `capacity` nearest draws, ordered by
// (distance, simulation index) so the result does not depend on offer order.
class NearestSelector {
 public:
  explicit NearestSelector(std::size_t capacity);

  void offer(double distance, std::size_t index);
  // Worst distance currently retained, or +inf while not yet full.
  double threshold() const noexcept;
  Acceptance finish(KernelType kernel) const;

 private:
  struct Entry {
    double distance;
    std::size_t index;
    bool operator<(const Entry& o) const noexcept {
      return distance < o.distance || (distance == o.distance && index < o.index);
    }
  };
  std::size_t capacity_;
  std::vector<Entry> heap_;  // max-heap
};

Acceptance select_accepted(std::span<const double> distances, const AcceptanceConfig& config);

enum class Transform { Logit, Identity };

struct AdjustmentOptions {
  Transform transform = Transform::Logit;
  RegressionBackend backend = RegressionBackend::Linear;
  NeuralNetOptions neural_net{};
  double clamp = 1e-8;  // logit inputs clamped to [clamp, 1 - clamp]
  double ratio_min = 1e-3;
  double ratio_max = 1e3;
  std::size_t min_positive_weights = 30;
};

struct AdjustmentResult {
  std::vector<double> values;
  bool fallback = false;  // regression failed; values are the unadjusted draws
  double fitted_at_observed = 0.0;  // m(s_obs) in transformed space
};

double to_transformed(double value, const AdjustmentOptions& options) noexcept;
double from_transformed(double value, const AdjustmentOptions& options) noexcept;

// Heteroscedastic regression adjustment of one scalar parameter:
//   t_i' = m(s_obs) + sigma(s_obs) / sigma(s_i) * (t_i - m(s_i))
// in transformed space, with m a weighted regression of t on s and log sigma^2
// a weighted regression of the log squared residuals on s.
// `summaries` is M x d, one row per accepted draw.
AdjustmentResult adjust(std::span<const double> parameter, const Eigen::MatrixXd& summaries,
                        std::span<const double> observed, std::span<const double> weights,
                        const AdjustmentOptions& options);

// Column-wise adjust() over an M x p parameter matrix.
struct MatrixAdjustment {
  Eigen::MatrixXd values;
  std::vector<bool> fallback;
};
MatrixAdjustment adjust(const Eigen::MatrixXd& parameters, const Eigen::MatrixXd& summaries,
                        std::span<const double> observed, std::span<const double> weights,
                        const AdjustmentOptions& options);

struct RunOptions {
  std::size_t sims = 0;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::size_t block_size = 256;
};

// Called in ascending simulation index on the calling thread.
using DrawVisitor = std::function<void(std::size_t index, const SimulationDraw& draw,
                                       const SummaryVector& population)>;

// Simulation i uses RngStream(seed, i). Draws are produced in parallel blocks
// and delivered in index order, so output does not depend on `workers`.
void run_simulations(const PriorConfig& prior, const StudyDesign& design, const RunOptions& options,
                     const DrawVisitor& visit);

// Binary N x d summary matrix: 8-byte magic "BBABCSP1", uint64 rows, uint64
// cols, then row-major float64, all little-endian.
class SummarySpillWriter {
 public:
  SummarySpillWriter(const std::filesystem::path& path, std::size_t cols);
  ~SummarySpillWriter();
  SummarySpillWriter(const SummarySpillWriter&) = delete;
  SummarySpillWriter& operator=(const SummarySpillWriter&) = delete;

  void append(std::span<const double> row);
  void close();
  std::size_t rows() const noexcept { return rows_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t cols_;
  std::size_t rows_ = 0;
};

struct SummaryMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major
};
SummaryMatrix read_summary_spill(const std::filesystem::path& path);

struct SampleManifest {
  std::uint64_t seed = 0;
  std::size_t sims = 0;
  std::size_t accepted = 0;
  double bandwidth = 0.0;
  std::string config_hash;
  bool adjusted = false;
  std::size_t fallback_components = 0;
};

// Accepted draws for one (target, scenario). `draws` are adjusted when
// adjustment ran, otherwise equal to `raw`. Adjusted vectors are not
// renormalized onto the simplex.
struct PosteriorSample {
  std::string target;
  Scenario scenario = Scenario::Mated;
  std::vector<std::size_t> sim_indices;
  std::vector<CategoryValues> raw;
  std::vector<CategoryValues> draws;
  std::vector<double> weights;
  SampleManifest manifest;

  std::size_t size() const noexcept { return draws.size(); }
  std::vector<double> marginal(DecisionCategory c) const;
};

struct TargetPosterior {
  std::string target;
  Acceptance acceptance;
  PosteriorSample mated;
  PosteriorSample nonmated;

  const PosteriorSample& operator()(Scenario s) const noexcept {
    return s == Scenario::Mated ? mated : nonmated;
  }
};

enum class ExaminerRanking {
  Own,         // rank by the examiner's 28-dimensional summary distance
  Population,  // reuse the population acceptance set and weights
};

struct StudyOptions {
  std::size_t sims = 0;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  AcceptanceConfig acceptance{};
  std::optional<AdjustmentOptions> adjustment = AdjustmentOptions{};
  ExaminerRanking ranking = ExaminerRanking::Own;
  bool examiners = true;
  std::filesystem::path spill_path;  // empty: no spill
  std::string config_hash;
};

struct StudyResult {
  SummaryVector observed_population;
  TargetPosterior population;
  std::vector<TargetPosterior> examiners;  // design order; empty if disabled
};

StudyResult run_full_study(const PriorConfig& prior, const StudyDesign& design,
                           std::span<const ExaminerCounts> observed, const StudyOptions& options);

// Requires the observed examiner set to equal the design's.
StudyResult run_full_study(const PriorConfig& prior, const StudyDesign& design, const CountTable& observed,
                           const StudyOptions& options);

// Generic rejection ABC (optionally with adjustment) for models outside the
// hierarchical study; `simulate` receives RngStream(seed, i) for draw i.
struct GenericDraw {
  std::vector<double> parameters;
  std::vector<double> summary;
};
using GenericSimulator = std::function<GenericDraw(RngStream& rng)>;

struct RejectionResult {
  Acceptance acceptance;
  Eigen::MatrixXd parameters;  // M x p, accepted raw draws
  Eigen::MatrixXd summaries;   // M x d
  Eigen::MatrixXd adjusted;    // M x p; equals parameters without adjustment
  std::vector<bool> fallback;
};

RejectionResult rejection_abc(const GenericSimulator& simulate, std::span<const double> observed,
                              const RunOptions& run, const AcceptanceConfig& config,
                              const std::optional<AdjustmentOptions>& adjustment);

}  // namespace bbabc
