#include "bbabc/report_io.hpp"

#include <fstream>
#include <iterator>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "bbabc/version.hpp"
#include "json.hpp"

namespace bbabc {
namespace {

std::string num(double v) { return fmt::format("{}", v); }

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string{}; }

std::string opt_pct(const std::optional<double>& v) { return v ? num(percent2(*v)) : std::string{}; }

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

const char* group_label(bool high) { return high ? "high" : "low"; }

}  // namespace

std::string column_label(std::size_t summary_index) {
  if (summary_index >= kSummaryWidth) throw std::out_of_range("summary index out of range");
  const auto s = kAllScenarios[summary_index / kCategoryCount];
  const auto c = kAllCategories[summary_index % kCategoryCount];
  return fmt::format("{}:{}", label(s), label(c));
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  out << "target,scenario,category,median,hdi_lower,hdi_upper,plugin,ac_lower,ac_upper,"
         "median_pct,hdi_lower_pct,hdi_upper_pct\n";
  for (const SummaryRow& r : rows) {
    std::optional<double> lo, hi;
    if (r.agresti_coull) {
      lo = r.agresti_coull->lower;
      hi = r.agresti_coull->upper;
    }
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{}\n", csv_field(r.target), label(r.scenario), label(r.category),
               num(r.median), num(r.hdi.lower), num(r.hdi.upper), opt(r.plugin), opt(lo), opt(hi),
               num(percent2(r.median)), num(percent2(r.hdi.lower)), num(percent2(r.hdi.upper)));
  }
}

void write_draws_csv(std::ostream& out, const PosteriorSample& sample) {
  out << "sim_index,weight";
  for (const char* prefix : {"raw_", "adj_"})
    for (DecisionCategory c : kAllCategories) out << ',' << prefix << label(c);
  out << '\n';
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out << sample.sim_indices[i] << ',' << num(sample.weights[i]);
    for (double v : sample.raw[i]) out << ',' << num(v);
    for (double v : sample.draws[i]) out << ',' << num(v);
    out << '\n';
  }
}

void write_plugin_csv(std::ostream& out, const CountTable& table, double confidence) {
  out << "scenario,category,total,pres_pct,cmp_pct,vid_pct,ac_lower_pct,ac_upper_pct\n";
  for (Scenario s : kAllScenarios) {
    const CategoryCounts totals = table.totals(s);
    const std::int64_t n = table.total(s);
    PluginRates pres{}, cmp{}, vid{};
    if (n > 0) pres = plugin_rates(totals, Denominator::PRES);
    try {
      cmp = plugin_rates(totals, Denominator::CMP);
    } catch (const std::domain_error&) {
    }
    try {
      vid = plugin_rates(totals, Denominator::VID);
    } catch (const std::domain_error&) {
    }
    for (DecisionCategory c : kAllCategories) {
      const std::size_t k = index_of(c);
      std::string lo, hi;
      if (n > 0) {
        const BinomialInterval ac = agresti_coull(totals[k], n, confidence);
        lo = num(percent2(ac.lower));
        hi = num(percent2(ac.upper));
      }
      fmt::print(out, "{},{},{},{},{},{},{},{}\n", label(s), label(c), totals[k], opt_pct(pres[k]), opt_pct(cmp[k]),
                 opt_pct(vid[k]), lo, hi);
    }
  }
}

void write_datagen_csv(std::ostream& out, const DatagenReport& report) {
  out << "scenario,category,observed,hdi_lower,hdi_upper,contained\n";
  for (const DatagenRow& r : report.rows) {
    fmt::print(out, "{},{},{},{},{},{}\n", label(r.scenario), label(r.category), r.observed, num(r.lower),
               num(r.upper), r.contained ? "true" : "false");
  }
}

void write_recovery_csv(std::ostream& out, std::span<const RecoveryRow> rows) {
  out << "target,scenario,category,truth,median,hdi_lower,hdi_upper,contained\n";
  for (const RecoveryRow& r : rows) {
    fmt::print(out, "{},{},{},{},{},{},{},{}\n", csv_field(r.target), label(r.scenario), label(r.category),
               num(r.truth), num(r.median), num(r.hdi.lower), num(r.hdi.upper), r.contained ? "true" : "false");
  }
}

void write_partition_groups_csv(std::ostream& out, const PartitionReport& report) {
  out << "examiner_id,median,group\n";
  for (const PartitionGroup& g : report.groups) {
    fmt::print(out, "{},{},{}\n", csv_field(g.examiner_id), num(g.median), group_label(g.high));
  }
}

void write_partition_pairs_csv(std::ostream& out, const PartitionReport& report) {
  out << "category_a,category_b,examiner_id,median_a,median_b,group\n";
  for (const PartitionPair& p : report.pairs) {
    fmt::print(out, "{},{},{},{},{},{}\n", column_label(p.a), column_label(p.b), csv_field(p.examiner_id),
               num(p.median_a), num(p.median_b), group_label(p.high));
  }
}

std::string manifest_json(const PosteriorSample& sample) {
  const SampleManifest& m = sample.manifest;
  nlohmann::ordered_json j;
  j["target"] = sample.target;
  j["scenario"] = std::string(label(sample.scenario));
  j["seed"] = m.seed;
  j["sims"] = m.sims;
  j["accepted"] = m.accepted;
  j["bandwidth"] = m.bandwidth;
  j["config_hash"] = m.config_hash;
  j["adjusted"] = m.adjusted;
  j["fallback_components"] = m.fallback_components;
  j["version"] = std::string(version());
  return j.dump(2) + "\n";
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
    out << contents;
    if (!out) throw std::runtime_error(fmt::format("write to {} failed", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace bbabc
