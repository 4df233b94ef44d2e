#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <bbabc/posterior.hpp>
#include <bbabc/report_io.hpp>
#include <bbabc/version.hpp>

#include "CLI11.hpp"
#include "json.hpp"

namespace bbabc::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

template <typename Writer>
std::string render(Writer&& write) {
  std::ostringstream s;
  write(s);
  return s.str();
}

void write_json(const fs::path& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

Json run_manifest(const RunConfig& c, const char* command) {
  Json j;
  j["command"] = command;
  j["version"] = std::string(version());
  j["config_hash"] = c.hash();
  j["seed"] = c.seed;
  return j;
}

void snapshot_config(const RunConfig& c, const fs::path& out) { write_file(out / "config.json", c.canonical_json()); }

struct ObservedStudy {
  CountTable table;
  StudyDesign design;
  std::vector<ExaminerCounts> counts;
};

ObservedStudy load_study(const RunConfig& config) {
  ObservedStudy s;
  s.table = load_table(config);
  s.design = StudyDesign::from_counts(s.table);
  s.counts = examiner_counts(s.table, s.design);
  return s;
}

void check_accepted(const RunConfig& c) {
  std::size_t m = 0;
  try {
    m = c.acceptance.accepted_count(c.sims);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.adjustment.enabled && m < c.adjustment.options.min_positive_weights + 1) {
    throw ConfigError(fmt::format(
        "sims = {} at tolerance {} accepts only {} draws; regression adjustment needs at least {}", c.sims,
        c.acceptance.tolerance_quantile, m, c.adjustment.options.min_positive_weights + 1));
  }
}

Json sample_manifest(const PosteriorSample& s) {
  Json j;
  j["accepted"] = s.manifest.accepted;
  j["bandwidth"] = s.manifest.bandwidth;
  j["adjusted"] = s.manifest.adjusted;
  j["fallback_components"] = s.manifest.fallback_components;
  return j;
}

StudyResult run_study(const RunConfig& c, const ObservedStudy& s, std::ostream& log) {
  check_accepted(c);
  fmt::print(log, "simulating {} studies of {} examiners (seed {})\n", c.sims, s.design.size(), c.seed);
  return run_full_study(c.prior, s.design, s.counts, c.study_options());
}

void write_study(const RunConfig& c, const ObservedStudy& s, const StudyResult& r, const fs::path& out) {
  std::vector<SummaryRow> pop_rows;
  for (Scenario sc : kAllScenarios) {
    const CategoryCounts totals = s.table.totals(sc);
    auto rows = summarize_sample(r.population(sc), &totals, c.mass, c.confidence);
    pop_rows.insert(pop_rows.end(), rows.begin(), rows.end());
  }
  write_file(out / "population_summary.csv", render([&](std::ostream& o) { write_summary_csv(o, pop_rows); }));

  Json manifest = run_manifest(c, "abc");
  manifest["sims"] = c.sims;
  manifest["tolerance"] = c.acceptance.tolerance_quantile;
  manifest["population"] = {{"mated", sample_manifest(r.population.mated)},
                            {"nonmated", sample_manifest(r.population.nonmated)}};

  if (!r.examiners.empty()) {
    std::vector<SummaryRow> ex_rows;
    Json ex_manifest = Json::array();
    for (std::size_t j = 0; j < r.examiners.size(); ++j) {
      const TargetPosterior& t = r.examiners[j];
      for (Scenario sc : kAllScenarios) {
        auto rows = summarize_sample(t(sc), &s.counts[j](sc), c.mass, c.confidence);
        ex_rows.insert(ex_rows.end(), rows.begin(), rows.end());
      }
      ex_manifest.push_back(
          {{"target", t.target}, {"mated", sample_manifest(t.mated)}, {"nonmated", sample_manifest(t.nonmated)}});
    }
    write_file(out / "examiner_summary.csv", render([&](std::ostream& o) { write_summary_csv(o, ex_rows); }));
    manifest["examiners"] = ex_manifest;
  }
  write_json(out / "manifest.json", manifest);

  if (c.write_draws) {
    auto dump = [&](const TargetPosterior& t) {
      for (Scenario sc : kAllScenarios) {
        const std::string stem = fmt::format("{}_{}", t.target, label(sc));
        write_file(out / "draws" / (stem + ".csv"), render([&](std::ostream& o) { write_draws_csv(o, t(sc)); }));
        write_file(out / "draws" / (stem + ".json"), manifest_json(t(sc)));
      }
    };
    dump(r.population);
    for (const TargetPosterior& t : r.examiners) dump(t);
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else {
      fields.back() += ch;
    }
  }
  return fields;
}

ExaminerMedians read_medians(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open examiner medians {}", path.string()));
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line).size() < 4 || split_csv_line(line)[3] != "median") {
    throw ConfigError(fmt::format("{} is not an examiner summary table", path.string()));
  }
  ExaminerMedians m;
  std::map<std::string, std::size_t> index;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    const auto s = f.size() >= 4 ? parse_scenario(f[1]) : std::nullopt;
    const auto c = f.size() >= 4 ? parse_category(f[2]) : std::nullopt;
    if (!s || !c) throw ConfigError(fmt::format("{}:{}: malformed row", path.string(), lineno));
    auto [it, inserted] = index.emplace(f[0], m.examiner_ids.size());
    if (inserted) {
      m.examiner_ids.push_back(f[0]);
      std::array<double, kSummaryWidth> blank;
      blank.fill(std::nan(""));
      m.medians.push_back(blank);
    }
    m.medians[it->second][summary_index(*s, *c)] = std::stod(f[3]);
  }
  for (std::size_t j = 0; j < m.examiner_ids.size(); ++j) {
    for (double v : m.medians[j]) {
      if (std::isnan(v)) throw ConfigError(fmt::format("examiner {} is missing categories", m.examiner_ids[j]));
    }
  }
  return m;
}

}  // namespace

CountTable load_table(const RunConfig& config) {
  if (config.data.path.empty()) throw ConfigError("no data path configured (data.path or --data)");
  if (!config.data.columns) throw ConfigError("no column mapping configured (data.columns)");
  const fs::path path = config.resolve(config.data.path);
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open data file {}", path.string()));
  return ingest_records(in, *config.data.columns);
}

int cmd_plugin(const RunConfig& c, std::ostream& log) {
  const CountTable table = load_table(c);
  const fs::path out(c.out);
  snapshot_config(c, out);
  const std::string csv = render([&](std::ostream& o) { write_plugin_csv(o, table, c.confidence); });
  write_file(out / "plugin.csv", csv);
  Json manifest = run_manifest(c, "plugin");
  manifest["examiners"] = table.examiner_count();
  manifest["decisions"] = table.grand_total();
  manifest["mated"] = table.total(Scenario::Mated);
  manifest["nonmated"] = table.total(Scenario::NonMated);
  write_json(out / "manifest.json", manifest);
  fmt::print(log, "{} examiners, {} decisions ({} mated, {} non-mated)\n", table.examiner_count(),
             table.grand_total(), table.total(Scenario::Mated), table.total(Scenario::NonMated));
  log << csv;
  return kSuccess;
}

int cmd_abc(const RunConfig& c, std::ostream& log) {
  const ObservedStudy s = load_study(c);
  const fs::path out(c.out);
  if (c.spill) fs::create_directories(out);
  const StudyResult r = run_study(c, s, log);
  snapshot_config(c, out);
  write_study(c, s, r, out);
  fmt::print(log, "wrote {}\n", out.string());
  return kSuccess;
}

int cmd_validate_datagen(const RunConfig& c, std::ostream& log) {
  const ObservedStudy s = load_study(c);
  if (c.datagen_runs < 100) throw ConfigError("validate.runs must be at least 100");
  const fs::path out(c.out);
  DatagenOptions o{c.datagen_runs, c.mass, c.seed, c.workers};
  const DatagenReport report = validate_datagen(s.design, plugin_examiner_rates(s.counts), s.counts, o);
  snapshot_config(c, out);
  const std::string csv = render([&](std::ostream& os) { write_datagen_csv(os, report); });
  write_file(out / "datagen.csv", csv);
  Json verdict = run_manifest(c, "validate-datagen");
  verdict["runs"] = c.datagen_runs;
  verdict["mass"] = c.mass;
  verdict["all_contained"] = report.all_contained();
  write_json(out / "verdict.json", verdict);
  log << csv;
  fmt::print(log, "all observed totals contained: {}\n", report.all_contained() ? "yes" : "no");
  return report.all_contained() ? kSuccess : kVerdictFailure;
}

int cmd_verify_recovery(const RunConfig& c, std::ostream& log) {
  if (c.scenario_path.empty()) throw ConfigError("no true-rate scenario configured (verify.scenario or --scenario)");
  const fs::path scenario_path = c.resolve(c.scenario_path);
  if (!fs::exists(scenario_path)) throw ConfigError(fmt::format("cannot open scenario {}", scenario_path.string()));
  TrueRateScenario scenario;
  try {
    scenario = TrueRateScenario::load(scenario_path);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const ObservedStudy s = load_study(c);
  check_accepted(c);
  if (c.sims < 10'000) throw ConfigError("verify-recovery needs sims >= 10000");

  RecoveryOptions o;
  o.study = c.study_options();
  o.mass = c.mass;
  o.containment_slack = c.containment_slack;
  o.highlighted = c.highlighted;
  fmt::print(log, "simulating {} studies against synthetic data (seed {})\n", c.sims, c.seed);
  const RecoveryReport report = verify_recovery(scenario, s.design, c.prior, o);

  const fs::path out(c.out);
  snapshot_config(c, out);
  const std::string pop_csv = render([&](std::ostream& os) { write_recovery_csv(os, report.population); });
  write_file(out / "population_recovery.csv", pop_csv);
  write_file(out / "examiner_recovery.csv",
             render([&](std::ostream& os) { write_recovery_csv(os, report.examiners); }));
  std::vector<RecoveryRow> highlighted;
  for (const RecoveryRow& r : report.examiners) {
    if (std::find(report.highlighted.begin(), report.highlighted.end(), r.target) != report.highlighted.end()) {
      highlighted.push_back(r);
    }
  }
  write_file(out / "highlighted_recovery.csv",
             render([&](std::ostream& os) { write_recovery_csv(os, highlighted); }));

  Json verdict = run_manifest(c, "verify-recovery");
  verdict["sims"] = c.sims;
  verdict["population_contained"] = report.population_contained();
  verdict["examiner_containment_rate"] = report.examiner_containment_rate();
  verdict["highlighted"] = report.highlighted;
  write_json(out / "verdict.json", verdict);
  log << pop_csv;
  const std::string examiner_rate =
      report.examiners.empty() ? "n/a" : fmt::format("{:.1f}%", 100.0 * report.examiner_containment_rate());
  fmt::print(log, "population rates contained: {}; examiner containment {}\n",
             report.population_contained() ? "yes" : "no", examiner_rate);
  return report.population_contained() ? kSuccess : kVerdictFailure;
}

int cmd_partition(const RunConfig& c, std::ostream& log) {
  ExaminerMedians medians;
  const fs::path out(c.out);
  if (!c.partition_medians.empty()) {
    medians = read_medians(c.resolve(c.partition_medians));
  } else {
    RunConfig study = c;
    study.examiners = true;
    const ObservedStudy s = load_study(study);
    const StudyResult r = run_study(study, s, log);
    write_study(study, s, r, out / "study");
    medians = ExaminerMedians::from_study(r);
  }
  const PartitionReport report = partition_report(medians, c.partition_scenario, c.partition_category,
                                                  c.partition_threshold);
  snapshot_config(c, out);
  write_file(out / "groups.csv", render([&](std::ostream& os) { write_partition_groups_csv(os, report); }));
  write_file(out / "pairs.csv", render([&](std::ostream& os) { write_partition_pairs_csv(os, report); }));
  Json manifest = run_manifest(c, "partition");
  manifest["scenario"] = std::string(label(report.scenario));
  manifest["category"] = std::string(label(report.category));
  manifest["threshold"] = report.threshold;
  manifest["high"] = report.high_count();
  manifest["examiners"] = report.groups.size();
  write_json(out / "manifest.json", manifest);
  fmt::print(log, "{} of {} examiners above {} on {} {}\n", report.high_count(), report.groups.size(),
             report.threshold, label(report.scenario), label(report.category));
  return kSuccess;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Approximate Bayesian computation for black-box error-rate studies", "bbabc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  struct Flags {
    std::string config, data, scenario, category, medians;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> sims, runs;
    std::optional<double> tolerance, threshold;
    std::optional<unsigned> workers;
    std::optional<std::string> out;
    bool draws = false, no_adjust = false;
  } f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--data", f.data, "Decision records (overrides data.path)");
    sub->add_option("--seed", f.seed, "Master seed");
    sub->add_option("--sims", f.sims, "Number of simulations N");
    sub->add_option("--tolerance", f.tolerance, "Acceptance quantile");
    sub->add_option("--workers", f.workers, "Worker threads (0 = all cores)");
    sub->add_option("--out", f.out, "Output directory");
  };
  CLI::App* plugin = app.add_subcommand("plugin", "Plug-in rates and Agresti-Coull intervals");
  CLI::App* abc = app.add_subcommand("abc", "Population and examiner posterior estimates");
  CLI::App* validate = app.add_subcommand("validate-datagen", "Data-generator adequacy check");
  CLI::App* verify = app.add_subcommand("verify-recovery", "True-rate recovery check");
  CLI::App* partition = app.add_subcommand("partition", "Split examiners by a posterior median");
  for (CLI::App* sub : {plugin, abc, validate, verify, partition}) common(sub);
  abc->add_flag("--draws", f.draws, "Also write accepted draws");
  abc->add_flag("--no-adjust", f.no_adjust, "Rejection only, no regression adjustment");
  validate->add_option("--runs", f.runs, "Simulated experiments");
  verify->add_option("--scenario", f.scenario, "True-rate scenario JSON");
  partition->add_option("--category", f.category, "Category, e.g. mated:Exc.VID");
  partition->add_option("--threshold", f.threshold, "Median threshold (proportion)");
  partition->add_option("--medians", f.medians, "examiner_summary.csv from an abc run");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForVersion& e) {
    out << version() << '\n';
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    RunConfig c = f.config.empty() ? RunConfig{} : RunConfig::load(f.config);
    if (!f.data.empty()) {
      c.data.path = f.data;
      c.base_dir = fs::current_path();
    }
    if (f.seed) c.seed = *f.seed;
    if (f.sims) c.sims = *f.sims;
    if (f.tolerance) c.acceptance.tolerance_quantile = *f.tolerance;
    if (f.workers) c.workers = *f.workers;
    if (f.out) c.out = *f.out;
    if (f.runs) c.datagen_runs = *f.runs;
    if (f.draws) c.write_draws = true;
    if (f.no_adjust) c.adjustment.enabled = false;
    if (!f.scenario.empty()) c.scenario_path = fs::absolute(f.scenario).string();
    if (!f.medians.empty()) c.partition_medians = fs::absolute(f.medians).string();
    if (f.threshold) c.partition_threshold = *f.threshold;
    if (!f.category.empty()) {
      const auto colon = f.category.find(':');
      if (colon == std::string::npos) throw ConfigError("--category must look like scenario:category");
      const auto s = parse_scenario(f.category.substr(0, colon));
      const auto cat = parse_category(f.category.substr(colon + 1));
      if (!s || !cat) throw ConfigError(fmt::format("unknown category \"{}\"", f.category));
      c.partition_scenario = *s;
      c.partition_category = *cat;
    }
    if (!(c.mass > 0.0 && c.mass < 1.0)) throw ConfigError("mass must be in (0, 1)");
    if (!(c.confidence > 0.0 && c.confidence < 1.0)) throw ConfigError("confidence must be in (0, 1)");
    try {
      c.acceptance.validate();
      c.prior.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (c.sims == 0) throw ConfigError("sims must be at least 1");

    if (plugin->parsed()) return cmd_plugin(c, out);
    if (abc->parsed()) return cmd_abc(c, out);
    if (validate->parsed()) return cmd_validate_datagen(c, out);
    if (verify->parsed()) return cmd_verify_recovery(c, out);
    return cmd_partition(c, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const VerdictFailure& e) {
    err << "verdict: " << e.what() << '\n';
    return kVerdictFailure;
  } catch (const ValidationError& e) {
    err << "invalid data (line " << e.line() << "): " << e.what() << '\n';
    return kRuntimeFailure;
  } catch (const ParseError& e) {
    err << "unreadable data (line " << e.line() << "): " << e.what() << '\n';
    return kRuntimeFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
}

}  // namespace bbabc::cli
