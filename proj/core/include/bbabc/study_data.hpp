#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bbabc/categories.hpp"

namespace bbabc {

// A delimited-text row that could not be split into fields.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates the record contract (unknown label,
// duplicate key, missing column).
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct DecisionRecord {
  std::string examiner_id;
  std::string test_case_id;
  bool mated = false;
  DecisionCategory category = DecisionCategory::NV;
};

// How columns of a delimited file map onto DecisionRecord fields. The category
// comes either from one column holding category labels, or from a latent-value
// column plus a comparison-decision column.
struct ColumnMapping {
  char delimiter = ',';
  std::string examiner_column = "examiner_id";
  std::string test_case_column = "test_case_id";
  std::string mated_column = "mated";
  std::vector<std::string> mated_labels{"true", "1", "yes", "mated", "mates"};
  std::vector<std::string> nonmated_labels{"false", "0", "no", "nonmated", "non-mated",
                                           "non-mates", "nonmates"};

  std::optional<std::string> category_column{"category"};
  std::optional<std::string> value_column;
  std::optional<std::string> decision_column;

  // Extra category labels beyond the canonical spellings, matched exactly.
  std::map<std::string, DecisionCategory> category_labels;
};

// Per-examiner decision counts for both scenarios. Examiners keep their order
// of first appearance. Built once, then read-only.
class CountTable {
 public:
  CountTable() = default;

  std::size_t examiner_count() const noexcept { return ids_.size(); }
  const std::vector<std::string>& examiner_ids() const noexcept { return ids_; }
  std::optional<std::size_t> find(std::string_view examiner_id) const;

  const CategoryCounts& counts(std::size_t examiner, Scenario s) const;
  std::int64_t presented(std::size_t examiner, Scenario s) const;

  CategoryCounts totals(Scenario s) const;
  std::int64_t total(Scenario s) const;
  std::int64_t grand_total() const;

  // Builder interface. Returns the examiner's index.
  std::size_t add_examiner(std::string_view examiner_id);
  void add(std::string_view examiner_id, Scenario s, DecisionCategory c, std::int64_t n = 1);
  void set_counts(std::size_t examiner, Scenario s, const CategoryCounts& counts);

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<CategoryCounts> mated_;
  std::vector<CategoryCounts> nonmated_;
};

std::vector<DecisionRecord> read_records(std::istream& in, const ColumnMapping& mapping);

// Throws ValidationError on a repeated (examiner, test case) pair.
CountTable build_count_table(std::span<const DecisionRecord> records);

CountTable ingest_records(std::istream& in, const ColumnMapping& mapping);

enum class Denominator { PRES, CMP, VID };

std::string_view label(Denominator d) noexcept;

// Share of each category under the denominator. Categories the denominator
// excludes (NV under CMP; VEO and NV under VID) are nullopt.
using PluginRates = std::array<std::optional<double>, kCategoryCount>;

PluginRates plugin_rates(const CategoryCounts& counts, Denominator d);
PluginRates plugin_rates(const CountTable& table, Scenario s, Denominator d);

enum class IntervalMethod { AgrestiCoull };

struct BinomialInterval {
  double lower = 0.0;
  double upper = 0.0;
  IntervalMethod method = IntervalMethod::AgrestiCoull;
};

// Agresti-Coull interval; bounds are not clamped to [0, 1].
BinomialInterval agresti_coull(std::int64_t successes, std::int64_t trials, double confidence);

}  // namespace bbabc
