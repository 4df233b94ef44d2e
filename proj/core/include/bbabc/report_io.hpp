#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>

#include "bbabc/abc_engine.hpp"
#include "bbabc/experiments.hpp"
#include "bbabc/posterior.hpp"
#include "bbabc/study_data.hpp"

namespace bbabc {

// All writers emit a header row, comma delimiters, '\n' line endings and the
// shortest round-trip representation of every double, so equal inputs give
// byte-identical files.

// target,scenario,category,median,hdi_lower,hdi_upper,plugin,ac_lower,ac_upper,
// median_pct,hdi_lower_pct,hdi_upper_pct
void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);

// sim_index,weight,raw_<category>...,adj_<category>...
void write_draws_csv(std::ostream& out, const PosteriorSample& sample);

// scenario,category,total,pres_pct,cmp_pct,vid_pct,ac_lower_pct,ac_upper_pct
// (percentages rounded to two decimals; empty when a denominator excludes the category)
void write_plugin_csv(std::ostream& out, const CountTable& table, double confidence = 0.95);

// scenario,category,observed,hdi_lower,hdi_upper,contained
void write_datagen_csv(std::ostream& out, const DatagenReport& report);

// target,scenario,category,truth,median,hdi_lower,hdi_upper,contained
void write_recovery_csv(std::ostream& out, std::span<const RecoveryRow> rows);

// examiner_id,median,group
void write_partition_groups_csv(std::ostream& out, const PartitionReport& report);

// category_a,category_b,examiner_id,median_a,median_b,group
void write_partition_pairs_csv(std::ostream& out, const PartitionReport& report);

// Manifest fields: target, scenario, seed, sims, accepted, bandwidth,
// config_hash, adjusted, fallback_components, version.
std::string manifest_json(const PosteriorSample& sample);

// "<scenario>:<category>" such as "mated:Exc.VID".
std::string column_label(std::size_t summary_index);

// Writes through a temporary sibling and renames it into place.
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace bbabc
