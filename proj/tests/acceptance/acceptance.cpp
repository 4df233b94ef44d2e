// Acceptance suite: one PASS/FAIL line per criterion.
//
//   bbabc_acceptance [--report FILE] [--only 1,5,9] [--strict]
//
// The exit status is 0 once every selected criterion has run; --strict
// makes any FAIL return 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include <bbabc/abc_engine.hpp>
#include <bbabc/experiments.hpp>
#include <bbabc/posterior.hpp>
#include <bbabc/study_data.hpp>
#include <commands.hpp>

#include "oracles.hpp"
#include "published.hpp"

using namespace bbabc;
namespace t = bbabc::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> detail;

  void expect(bool ok, std::string line) {
    if (!ok) pass = false;
    detail.push_back(fmt::format("{} {}", ok ? "  ok " : "  BAD", line));
  }
  void note(std::string line) { detail.push_back("      " + std::move(line)); }
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
  double time_limit = 0.0;  // seconds; 0 means none
};

struct Fixture {
  CountTable table = t::load_fixture();
  StudyDesign design = StudyDesign::from_counts(table);
  std::vector<ExaminerCounts> counts = examiner_counts(table, design);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

double pct(double p) { return 100.0 * p; }

// ---- 1 -----------------------------------------------------------------------

Outcome plugin_reproduction() {
  Outcome o;
  const CountTable table = t::load_fixture();
  for (std::size_t k = 0; k < kCategoryCount; ++k) {
    const std::int64_t combined = table.totals(Scenario::Mated)[k] + table.totals(Scenario::NonMated)[k];
    o.expect(combined == t::kCombinedTotals[k],
             fmt::format("{} total {} (expected {})", label(kAllCategories[k]), combined, t::kCombinedTotals[k]));
  }
  o.expect(table.grand_total() == t::kGrandTotal, fmt::format("grand total {}", table.grand_total()));
  int checked = 0;
  double worst = 0.0;
  for (Scenario s : kAllScenarios) {
    const PluginRates rates[3] = {plugin_rates(table, s, Denominator::PRES), plugin_rates(table, s, Denominator::CMP),
                                  plugin_rates(table, s, Denominator::VID)};
    for (DecisionCategory c : kAllCategories) {
      const auto& row = t::kPluginTable[index_of(s)][index_of(c)];
      const std::optional<double> expected[3] = {row.pres, row.cmp, row.vid};
      for (int d = 0; d < 3; ++d) {
        const auto& got = rates[d][index_of(c)];
        if (got.has_value() != expected[d].has_value()) {
          o.expect(false, fmt::format("{} {} denominator {} presence differs", label(s), label(c), d));
          continue;
        }
        if (!got) continue;
        const double dev = std::fabs(pct(*got) - *expected[d]);
        worst = std::max(worst, dev);
        ++checked;
        if (dev > 0.05 + 1e-9) {
          o.expect(false, fmt::format("{} {} {:.3f}% vs {}%", label(s), label(c), pct(*got), *expected[d]));
        }
      }
    }
  }
  o.expect(worst <= 0.05 + 1e-9, fmt::format("{} percentages, worst deviation {:.4f} pp", checked, worst));
  return o;
}

// ---- 2 -----------------------------------------------------------------------

Outcome agresti_coull_cases() {
  Outcome o;
  for (const auto& c : t::kAgrestiCases) {
    const BinomialInterval ci = agresti_coull(c.x, c.n, 0.95);
    const double lo = pct(ci.lower), hi = pct(ci.upper);
    const bool ok = std::fabs(lo - c.lower_pct) <= 0.01 + 1e-9 && std::fabs(hi - c.upper_pct) <= 0.01 + 1e-9;
    o.expect(ok, fmt::format("({}, {}) -> [{:.4f}%, {:.4f}%], published [{}%, {}%]", c.x, c.n, lo, hi, c.lower_pct,
                             c.upper_pct));
  }
  return o;
}

// ---- 3 -----------------------------------------------------------------------

Outcome datagen_validation() {
  Outcome o;
  const Fixture& f = fixture();
  DatagenOptions opt;
  opt.runs = 10000;
  opt.seed = 20111;
  const DatagenReport r = validate_datagen(f.design, plugin_examiner_rates(f.counts), f.counts, opt);
  for (const DatagenRow& row : r.rows) {
    const auto& pub = t::kSimulatedTotals[index_of(row.scenario)][index_of(row.category)];
    o.expect(row.contained, fmt::format("{} {}: observed {} in [{}, {}] (published range [{}, {}])", label(row.scenario),
                                        label(row.category), row.observed, row.lower, row.upper, pub[0], pub[1]));
  }
  const DatagenRow& nv = r.row(Scenario::Mated, DecisionCategory::NV);
  const double lo = t::kSimulatedTotals[0][0][0], hi = t::kSimulatedTotals[0][0][1];
  const bool overlap = nv.lower <= hi && nv.upper >= lo;
  const double dev = std::max(std::fabs(nv.lower - lo), std::fabs(nv.upper - hi));
  o.expect(overlap && dev <= 15.0,
           fmt::format("mated NV interval [{}, {}] vs [{}, {}]: endpoint deviation {}", nv.lower, nv.upper, lo, hi, dev));
  return o;
}

// ---- 4 -----------------------------------------------------------------------

Outcome recovery_seeds() {
  Outcome o;
  const Fixture& f = fixture();
  const TrueRateScenario sc = TrueRateScenario::load(t::source_path("data/recovery_scenario.json"));
  for (std::uint64_t seed : {20111ull, 20112ull, 20113ull, 20114ull, 20115ull}) {
    RecoveryOptions opt;
    opt.study.sims = 100000;
    opt.study.seed = seed;
    opt.study.examiners = false;
    const auto start = std::chrono::steady_clock::now();
    const RecoveryReport r = verify_recovery(sc, f.design, PriorConfig{}, opt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string missed;
    for (const RecoveryRow& row : r.population) {
      if (!row.contained) {
        missed += fmt::format(" {}:{} truth {:.4f}% HDI [{:.4f}%, {:.4f}%]", label(row.scenario), label(row.category),
                              pct(row.truth), pct(row.hdi.lower), pct(row.hdi.upper));
      }
    }
    const auto n_in = std::count_if(r.population.begin(), r.population.end(), [](const auto& x) { return x.contained; });
    o.expect(r.population_contained(),
             fmt::format("seed {}: {}/14 contained ({:.0f} s){}", seed, n_in, secs, missed));
  }
  return o;
}

// ---- 5 -----------------------------------------------------------------------

StudyResult population_study(RegressionBackend backend) {
  const Fixture& f = fixture();
  StudyOptions opt;
  opt.sims = 100000;
  opt.seed = 20111;
  opt.examiners = false;
  opt.adjustment->backend = backend;
  return run_full_study(PriorConfig{}, f.design, f.counts, opt);
}

Outcome population_agreement() {
  Outcome o;
  const StudyResult linear = population_study(RegressionBackend::Linear);
  for (Scenario s : kAllScenarios) {
    for (DecisionCategory c : kAllCategories) {
      const auto& pub = t::kPopulationHdi[index_of(s)][index_of(c)];
      const double med = pct(marginal_median(linear.population(s), c));
      const bool inside = med >= pub.lower - 0.005 && med <= pub.upper + 0.005;
      o.expect(inside, fmt::format("{} {}: median {:.3f}% in [{}%, {}%]", label(s), label(c), med, pub.lower, pub.upper));
    }
  }
  // Informational: the same study with the neural-network mean and scale models.
  const StudyResult nn = population_study(RegressionBackend::NeuralNet);
  int inside = 0;
  std::string outside;
  for (Scenario s : kAllScenarios) {
    for (DecisionCategory c : kAllCategories) {
      const auto& pub = t::kPopulationHdi[index_of(s)][index_of(c)];
      const double med = pct(marginal_median(nn.population(s), c));
      if (med >= pub.lower - 0.005 && med <= pub.upper + 0.005) {
        ++inside;
      } else {
        outside += fmt::format(" {}:{} {:.3f}%", label(s), label(c), med);
      }
    }
  }
  o.note(fmt::format("neural-network backend (informational): {}/14 medians inside{}", inside, outside));
  return o;
}

// ---- 6 -----------------------------------------------------------------------

Outcome conjugate_oracle() {
  Outcome o;
  const std::int64_t n = 5;
  const CategoryCounts x{2, 1, 0, 1, 0, 0, 1};
  const CategoryValues ones{1, 1, 1, 1, 1, 1, 1};
  const GenericSimulator sim = [&](RngStream& rng) {
    const RateVector theta = sample_dirichlet(ones, rng);
    const CategoryCounts y = sample_multinomial(n, theta, rng);
    GenericDraw d;
    d.parameters.assign(theta.values().begin(), theta.values().end());
    d.summary.assign(y.begin(), y.end());
    return d;
  };
  const std::vector<double> observed(x.begin(), x.end());
  AcceptanceConfig cfg;
  cfg.tolerance_quantile = 0.001;
  const RejectionResult r = rejection_abc(sim, observed, {1000000, 20111, 0, 4096}, cfg, std::nullopt);
  const auto m = static_cast<double>(r.acceptance.size());
  o.note(fmt::format("{} accepted, bandwidth {}", r.acceptance.size(), r.acceptance.bandwidth));
  const double a0 = static_cast<double>(kCategoryCount + n);
  for (std::size_t k = 0; k < kCategoryCount; ++k) {
    const double ak = 1.0 + static_cast<double>(x[k]);
    const double exact = ak / a0;
    const double sd = std::sqrt(ak * (a0 - ak) / (a0 * a0 * (a0 + 1.0)));
    const double se = sd / std::sqrt(m);
    const double got = r.adjusted.col(static_cast<Eigen::Index>(k)).mean();
    o.expect(std::fabs(got - exact) <= 3.0 * se,
             fmt::format("category {}: mean {:.5f} vs {:.5f} ({:.2f} SE)", k, got, exact, (got - exact) / se));
  }
  return o;
}

// ---- 7 -----------------------------------------------------------------------

Outcome adjustment_contracts() {
  Outcome o;
  std::mt19937_64 eng(20111);
  std::uniform_real_distribution<double> unif(0.02, 0.98);
  std::normal_distribution<double> norm(0.0, 1.0);
  {
    const std::size_t m = 500;
    std::vector<double> theta(m), w(m);
    for (std::size_t i = 0; i < m; ++i) {
      theta[i] = unif(eng);
      w[i] = unif(eng);
    }
    const std::vector<double> obs{12.0, 3.0, 40.0};
    Eigen::MatrixXd s(static_cast<Eigen::Index>(m), 3);
    for (Eigen::Index i = 0; i < s.rows(); ++i) s.row(i) << 12.0, 3.0, 40.0;
    const AdjustmentOptions opt;
    const AdjustmentResult r = adjust(theta, s, obs, w, opt);
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      worst = std::max(worst, std::fabs(to_transformed(r.values[i], opt) - to_transformed(theta[i], opt)));
    }
    o.expect(!r.fallback && worst <= 1e-12, fmt::format("identity case: max transformed deviation {:.3g}", worst));
  }
  {
    // t = 0.4 + 0.8 s1 - 0.3 s2 + noise, weights from an Epanechnikov kernel.
    const std::size_t m = 2000;
    const double sigma = 0.25;
    Eigen::MatrixXd s(static_cast<Eigen::Index>(m), 2);
    std::vector<double> t_vals(m), dist(m);
    const std::vector<double> obs{0.3, -0.2};
    for (std::size_t i = 0; i < m; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      s(r, 0) = norm(eng);
      s(r, 1) = norm(eng);
      t_vals[i] = 0.4 + 0.8 * s(r, 0) - 0.3 * s(r, 1) + sigma * norm(eng);
      dist[i] = std::hypot(s(r, 0) - obs[0], s(r, 1) - obs[1]);
    }
    const double h = *std::max_element(dist.begin(), dist.end());
    const std::vector<double> w = kernel_weights(dist, h, KernelType::Epanechnikov);
    AdjustmentOptions opt;
    opt.transform = Transform::Identity;
    const AdjustmentResult r = adjust(t_vals, s, obs, w, opt);

    Eigen::VectorXd y(static_cast<Eigen::Index>(m)), wv(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      y[static_cast<Eigen::Index>(i)] = t_vals[i];
      wv[static_cast<Eigen::Index>(i)] = w[i];
    }
    const Eigen::VectorXd coef = t::wls_normal_equations(s, y, wv);
    Eigen::RowVectorXd q(2);
    q << obs[0], obs[1];
    const double oracle = t::wls_predict(coef, q);
    // Standard error of the WLS mean prediction at the observed summary.
    Eigen::MatrixXd a(static_cast<Eigen::Index>(m), 3);
    a.col(0).setOnes();
    a.rightCols(2) = s;
    const Eigen::MatrixXd xtwx = a.transpose() * wv.asDiagonal() * a;
    const Eigen::MatrixXd xtw2x = a.transpose() * wv.cwiseProduct(wv).asDiagonal() * a;
    const Eigen::MatrixXd inv = xtwx.inverse();
    Eigen::VectorXd q1(3);
    q1 << 1.0, obs[0], obs[1];
    const double se = sigma * std::sqrt(q1.dot(inv * xtw2x * inv * q1));
    const double truth = 0.4 + 0.8 * obs[0] - 0.3 * obs[1];
    o.expect(std::fabs(r.fitted_at_observed - oracle) <= 1e-9 * std::max(1.0, std::fabs(oracle)),
             fmt::format("fitted value at s_obs {:.12f} equals the WLS oracle {:.12f}", r.fitted_at_observed, oracle));
    o.expect(std::fabs(r.fitted_at_observed - truth) <= 2.0 * se,
             fmt::format("linear case: fitted {:.5f} vs true mean {:.5f} ({:.2f} SE)", r.fitted_at_observed, truth,
                         (r.fitted_at_observed - truth) / se));
  }
  return o;
}

// ---- 8 -----------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome cli_determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "bbabc_acceptance_determinism";
  fs::remove_all(root);
  const std::string config = t::source_path("configs/noblis.json").string();

  struct Command {
    std::string name;
    std::vector<std::string> args;
    std::vector<std::string> files;
    bool verdict = false;  // exit 3 is a valid outcome
  };
  const fs::path medians = root / "abc_w1" / "examiner_summary.csv";
  const std::vector<Command> commands{
      {"plugin", {"plugin"}, {"plugin.csv"}},
      {"abc",
       {"abc", "--sims", "3000", "--tolerance", "0.02", "--draws"},
       {"population_summary.csv", "examiner_summary.csv", "draws/population_mated.csv", "draws/E107_nonmated.csv"}},
      {"validate-datagen", {"validate-datagen", "--runs", "500"}, {"datagen.csv"}},
      {"verify-recovery",
       {"verify-recovery", "--sims", "10000"},
       {"population_recovery.csv", "examiner_recovery.csv"},
       true},
      {"partition", {"partition", "--medians", medians.string()}, {"groups.csv", "pairs.csv"}},
  };
  for (const Command& c : commands) {
    std::vector<std::string> reference;
    bool all_same = true;
    int runs = 0;
    for (const char* workers : {"1", "1", "4", "8"}) {
      const fs::path out = root / (c.name + "_w" + workers + (runs == 1 ? "b" : ""));
      std::vector<std::string> args = c.args;
      args.insert(args.end(), {"--config", config, "--workers", workers, "--out", out.string()});
      std::ostringstream log, err;
      const int code = cli::run_cli(args, log, err);
      if (code != cli::kSuccess && !(c.verdict && code == cli::kVerdictFailure)) {
        o.expect(false, fmt::format("{} --workers {} exited {}: {}", c.name, workers, code, err.str()));
        all_same = false;
        break;
      }
      std::vector<std::string> contents;
      for (const std::string& f : c.files) contents.push_back(slurp(out / f));
      if (runs == 0) {
        reference = contents;
      } else if (contents != reference) {
        all_same = false;
      }
      ++runs;
    }
    const bool nonempty = std::all_of(reference.begin(), reference.end(), [](const auto& s) { return !s.empty(); });
    o.expect(all_same && nonempty,
             fmt::format("{}: rerun and --workers 1/4/8 byte-identical over {} files", c.name, c.files.size()));
  }
  fs::remove_all(root);
  return o;
}

// ---- 9 -----------------------------------------------------------------------

Outcome hdi_oracle() {
  Outcome o;
  std::mt19937_64 eng(20111);
  std::normal_distribution<double> norm(0.0, 1.0);
  std::vector<double> v(100000);
  for (double& x : v) x = norm(eng);
  const HdiInterval h = hdi(v, 0.95);
  o.expect(std::fabs(h.lower + t::kZ975) <= 0.05 && std::fabs(h.upper - t::kZ975) <= 0.05,
           fmt::format("standard normal hdi(0.95) = [{:.4f}, {:.4f}]", h.lower, h.upper));

  int nested = 0, narrower = 0;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 200 + static_cast<std::size_t>(unif(eng) * 4800);
    std::vector<double> s(n);
    const int shape = trial % 4;
    const double a = 0.3 + 3.0 * unif(eng);
    std::gamma_distribution<double> gamma(a + 1.0, 1.0);
    std::lognormal_distribution<double> lognormal(0.0, 0.2 + unif(eng));
    std::student_t_distribution<double> student(2.0 + 5.0 * unif(eng));
    for (double& x : s) {
      switch (shape) {
        case 0: x = norm(eng) * (0.1 + 3.0 * a); break;
        case 1: x = gamma(eng); break;
        case 2: x = lognormal(eng); break;
        default: x = student(eng); break;
      }
    }
    const HdiInterval inner = hdi(s, 0.5);
    const HdiInterval outer = hdi(s, 0.95);
    const HdiInterval central = equal_tailed_interval(s, 0.95);
    if (inner.lower >= outer.lower && inner.upper <= outer.upper) ++nested;
    if (outer.width() <= central.width() + 1e-12) ++narrower;
  }
  o.expect(nested == 100, fmt::format("hdi(0.5) inside hdi(0.95) on {}/100 unimodal samples", nested));
  o.expect(narrower == 100, fmt::format("hdi(0.95) no wider than the equal-tailed interval on {}/100", narrower));
  return o;
}

std::set<int> parse_only(const std::string& list) {
  std::set<int> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path report_path;
  std::set<int> only;
  bool strict = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--report" && i + 1 < argc) {
      report_path = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      only = parse_only(argv[++i]);
    } else if (arg == "--strict") {
      strict = true;
    } else {
      std::cerr << "usage: bbabc_acceptance [--report FILE] [--only 1,2,...] [--strict]\n";
      return 2;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "plug-in reproduction", plugin_reproduction, 1.0},
      {2, "Agresti-Coull intervals", agresti_coull_cases, 1.0},
      {3, "data-generator validation", datagen_validation},
      {4, "true-rate recovery on 5 seeds", recovery_seeds},
      {5, "population medians inside published HDIs", population_agreement},
      {6, "conjugate Dirichlet-multinomial oracle", conjugate_oracle},
      {7, "adjustment contracts", adjustment_contracts},
      {8, "CLI determinism", cli_determinism},
      {9, "HDI oracle and properties", hdi_oracle},
  };

  std::ostringstream report;
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.expect(false, fmt::format("threw: {}", e.what()));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0.0) out.expect(secs < c.time_limit, fmt::format("runtime {:.3f} s < {} s", secs, c.time_limit));
    if (!out.pass) ++failures;
    const std::string head = fmt::format("[{}] {}. {} ({:.1f} s)", out.pass ? "PASS" : "FAIL", c.id, c.name, secs);
    std::cout << head << std::endl;
    report << head << '\n';
    for (const std::string& d : out.detail) report << d << '\n';
  }
  const std::string tail = fmt::format("{} criteria failed", failures);
  std::cout << tail << std::endl;
  report << tail << '\n';
  if (!report_path.empty()) {
    std::ofstream(report_path) << report.str();
    std::cout << "details: " << report_path.string() << std::endl;
  } else {
    std::cout << report.str();
  }
  return strict && failures > 0 ? 1 : 0;
}
