#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <bbabc/abc_engine.hpp>
#include <bbabc/experiments.hpp>
#include <bbabc/study_data.hpp>

namespace bbabc::cli {

// Malformed or missing configuration, unreadable inputs. Exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Containment or validation verdict failed. Exit code 3.
class VerdictFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kSuccess = 0, kRuntimeFailure = 1, kUsageError = 2, kVerdictFailure = 3 };

inline constexpr const char* kDataDirEnv = "BBABC_DATA_DIR";

struct DataConfig {
  std::string path;
  std::optional<ColumnMapping> columns;  // required by every command that ingests data
};

struct AdjustConfig {
  bool enabled = true;
  AdjustmentOptions options{};
};

struct RunConfig {
  DataConfig data;
  PriorConfig prior{};
  AcceptanceConfig acceptance{};
  AdjustConfig adjustment{};
  ExaminerRanking ranking = ExaminerRanking::Own;
  std::size_t sims = 100'000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string out = "bbabc-out";
  double mass = 0.95;
  double confidence = 0.95;
  bool write_draws = false;
  bool examiners = true;
  bool spill = false;  // write the N x 14 population summaries to summaries.bin

  std::size_t datagen_runs = 10'000;

  std::string scenario_path;
  double containment_slack = 0.00005;
  std::vector<std::string> highlighted{"E010", "E042", "E107"};

  Scenario partition_scenario = Scenario::Mated;
  DecisionCategory partition_category = DecisionCategory::ExcVID;
  double partition_threshold = kDefaultPartitionThreshold;
  std::string partition_medians;  // examiner_summary.csv from an earlier abc run; empty runs the study

  std::filesystem::path base_dir;  // directory of the config file, for relative paths

  static RunConfig from_json_text(const std::string& text, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);

  // Canonical JSON with every field, keys sorted; `workers` and `out` omitted
  // when `for_hash` is set since they do not change results.
  std::string canonical_json(bool for_hash = false) const;
  // FNV-1a 64 of canonical_json(true), as 16 hex digits.
  std::string hash() const;

  // Relative paths resolve against the config file's directory first, then
  // against $BBABC_DATA_DIR.
  std::filesystem::path resolve(const std::string& path) const;

  StudyOptions study_options() const;
};

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace bbabc::cli
