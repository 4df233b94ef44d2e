#pragma once

// Independent reference computations used as test oracles. Each one is a
// direct, slow transcription of a textbook formula and does not call into
// the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <bbabc/categories.hpp>
#include <bbabc/study_data.hpp>

namespace bbabc::testing {

inline std::filesystem::path source_path(const std::string& relative) {
  return std::filesystem::path(BBABC_SOURCE_DIR) / relative;
}

inline ColumnMapping noblis_mapping() {
  ColumnMapping m;
  m.test_case_column = "pair_id";
  m.mated_column = "mating";
  m.mated_labels = {"Mates"};
  m.nonmated_labels = {"Non-mates"};
  m.category_column.reset();
  m.value_column = "latent_value";
  m.decision_column = "decision";
  return m;
}

inline CountTable load_fixture() {
  std::ifstream in(source_path("data/noblis_fixture.csv"));
  return ingest_records(in, noblis_mapping());
}

// Two-sided 97.5% standard normal quantile.
inline constexpr double kZ975 = 1.959963984540054;

inline std::pair<double, double> agresti_coull_reference(double x, double n, double z = kZ975) {
  const double nt = n + z * z;
  const double pt = (x + z * z / 2.0) / nt;
  const double half = z * std::sqrt(pt * (1.0 - pt) / nt);
  return {pt - half, pt + half};
}

inline double binomial_pmf(std::int64_t n, double p, std::int64_t k) {
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  const double lg = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(lg + k * std::log(p) + (n - k) * std::log1p(-p));
}

// Weighted least squares with intercept by the normal equations. Only valid
// for well-conditioned full-rank designs.
inline Eigen::VectorXd wls_normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                            const Eigen::VectorXd& w) {
  Eigen::MatrixXd a(x.rows(), x.cols() + 1);
  a.col(0).setOnes();
  a.rightCols(x.cols()) = x;
  const Eigen::MatrixXd at_w = a.transpose() * w.asDiagonal();
  return (at_w * a).ldlt().solve(at_w * y);
}

inline double wls_predict(const Eigen::VectorXd& coef, const Eigen::RowVectorXd& x) {
  return coef[0] + x.dot(coef.tail(coef.size() - 1));
}

// Shortest window by exhaustive search over all window starts.
inline std::pair<double, double> hdi_brute_force(std::vector<double> v, double mass) {
  std::sort(v.begin(), v.end());
  const auto w = static_cast<std::size_t>(std::ceil(mass * static_cast<double>(v.size()) - 1e-9));
  double best = std::numeric_limits<double>::infinity();
  std::pair<double, double> out;
  for (std::size_t k = 0; k + w <= v.size(); ++k) {
    if (v[k + w - 1] - v[k] < best) {
      best = v[k + w - 1] - v[k];
      out = {v[k], v[k + w - 1]};
    }
  }
  return out;
}

inline double sorted_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// Category totals of the published study, mated block first.
inline constexpr std::array<std::int64_t, kSummaryWidth> kPublishedTotals{
    3389, 161, 450, 2019, 1856, 40, 3663, 558, 325, 3622, 577, 455, 0, 6};

}  // namespace bbabc::testing
