#include "bbabc/study_data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

namespace bbabc {
namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  return text;
}

// Splits one delimited line, honouring double-quoted fields with "" escapes.
std::vector<std::string> split_fields(std::string_view line, char delimiter, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      if (!trim(field).empty() || was_quoted) {
        throw ParseError(line_no, fmt::format("line {}: stray quote in field {}", line_no,
                                              fields.size() + 1));
      }
      field.clear();
      quoted = true;
      was_quoted = true;
    } else if (ch == delimiter) {
      fields.push_back(was_quoted ? field : std::string(trim(field)));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(ch);
    }
  }
  if (quoted) throw ParseError(line_no, fmt::format("line {}: unterminated quoted field", line_no));
  fields.push_back(was_quoted ? field : std::string(trim(field)));
  return fields;
}

bool contains_label(const std::vector<std::string>& labels, const std::string& key) {
  return std::any_of(labels.begin(), labels.end(),
                     [&](const std::string& l) { return lower(l) == key; });
}

std::size_t require_column(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw ValidationError(1, fmt::format("line 1: column '{}' not found in header", name));
  }
  return static_cast<std::size_t>(std::distance(header.begin(), it));
}

enum class LatentValue { NV, VEO, VID };

std::optional<LatentValue> parse_value(std::string_view text) {
  const std::string key = lower(trim(text));
  if (key == "nv" || key == "no value") return LatentValue::NV;
  if (key == "veo" || key == "value for exclusion" || key == "value for exclusion only")
    return LatentValue::VEO;
  if (key == "vid" || key == "value for individualization" ||
      key == "value for individualisation")
    return LatentValue::VID;
  return std::nullopt;
}

enum class Conclusion { Exclusion, Inconclusive, Individualization };

std::optional<Conclusion> parse_conclusion(std::string_view text) {
  const std::string key = lower(trim(text));
  if (key == "exclusion" || key == "exc" || key == "excluded") return Conclusion::Exclusion;
  if (key == "inconclusive" || key == "inc") return Conclusion::Inconclusive;
  if (key == "individualization" || key == "individualisation" || key == "ind" ||
      key == "identification" || key == "id")
    return Conclusion::Individualization;
  return std::nullopt;
}

DecisionCategory combine(LatentValue v, Conclusion c) {
  const bool vid = v == LatentValue::VID;
  switch (c) {
    case Conclusion::Exclusion: return vid ? DecisionCategory::ExcVID : DecisionCategory::ExcVEO;
    case Conclusion::Inconclusive: return vid ? DecisionCategory::IncVID : DecisionCategory::IncVEO;
    case Conclusion::Individualization:
      return vid ? DecisionCategory::IndVID : DecisionCategory::IndVEO;
  }
  return DecisionCategory::NV;
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(what), line_(line) {}

ValidationError::ValidationError(std::size_t line, const std::string& what)
    : std::runtime_error(what), line_(line) {}

std::optional<std::size_t> CountTable::find(std::string_view examiner_id) const {
  auto it = index_.find(std::string(examiner_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const CategoryCounts& CountTable::counts(std::size_t examiner, Scenario s) const {
  return s == Scenario::Mated ? mated_.at(examiner) : nonmated_.at(examiner);
}

std::int64_t CountTable::presented(std::size_t examiner, Scenario s) const {
  const auto& c = counts(examiner, s);
  return std::accumulate(c.begin(), c.end(), std::int64_t{0});
}

CategoryCounts CountTable::totals(Scenario s) const {
  CategoryCounts out{};
  for (std::size_t j = 0; j < ids_.size(); ++j) {
    const auto& c = counts(j, s);
    for (std::size_t k = 0; k < kCategoryCount; ++k) out[k] += c[k];
  }
  return out;
}

std::int64_t CountTable::total(Scenario s) const {
  const auto t = totals(s);
  return std::accumulate(t.begin(), t.end(), std::int64_t{0});
}

std::int64_t CountTable::grand_total() const {
  return total(Scenario::Mated) + total(Scenario::NonMated);
}

std::size_t CountTable::add_examiner(std::string_view examiner_id) {
  auto [it, inserted] = index_.try_emplace(std::string(examiner_id), ids_.size());
  if (inserted) {
    ids_.emplace_back(examiner_id);
    mated_.push_back({});
    nonmated_.push_back({});
  }
  return it->second;
}

void CountTable::add(std::string_view examiner_id, Scenario s, DecisionCategory c, std::int64_t n) {
  const std::size_t j = add_examiner(examiner_id);
  auto& row = s == Scenario::Mated ? mated_[j] : nonmated_[j];
  row[index_of(c)] += n;
}

void CountTable::set_counts(std::size_t examiner, Scenario s, const CategoryCounts& counts) {
  auto& row = s == Scenario::Mated ? mated_.at(examiner) : nonmated_.at(examiner);
  row = counts;
}

std::vector<DecisionRecord> read_records(std::istream& in, const ColumnMapping& mapping) {
  std::vector<DecisionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;

  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    header = split_fields(line, mapping.delimiter, line_no);
  }
  if (header.empty()) return records;

  const bool by_category = mapping.category_column.has_value();
  if (!by_category && !(mapping.value_column && mapping.decision_column)) {
    throw ValidationError(line_no, "column mapping needs a category column or value + decision columns");
  }
  const std::size_t col_examiner = require_column(header, mapping.examiner_column);
  const std::size_t col_case = require_column(header, mapping.test_case_column);
  const std::size_t col_mated = require_column(header, mapping.mated_column);
  std::size_t col_category = 0, col_value = 0, col_decision = 0;
  if (by_category) {
    col_category = require_column(header, *mapping.category_column);
  } else {
    col_value = require_column(header, *mapping.value_column);
    col_decision = require_column(header, *mapping.decision_column);
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, mapping.delimiter, line_no);
    if (fields.size() != header.size()) {
      throw ParseError(line_no, fmt::format("line {}: expected {} fields, found {}", line_no,
                                            header.size(), fields.size()));
    }

    DecisionRecord rec;
    rec.examiner_id = fields[col_examiner];
    rec.test_case_id = fields[col_case];
    if (rec.examiner_id.empty() || rec.test_case_id.empty()) {
      throw ValidationError(line_no, fmt::format("line {}: empty examiner or test case id", line_no));
    }

    const std::string mated_key = lower(fields[col_mated]);
    if (contains_label(mapping.mated_labels, mated_key)) {
      rec.mated = true;
    } else if (contains_label(mapping.nonmated_labels, mated_key)) {
      rec.mated = false;
    } else {
      throw ValidationError(line_no, fmt::format("line {}: unknown mating label '{}'", line_no,
                                                 fields[col_mated]));
    }

    if (by_category) {
      const std::string& text = fields[col_category];
      if (auto it = mapping.category_labels.find(text); it != mapping.category_labels.end()) {
        rec.category = it->second;
      } else if (auto c = parse_category(text)) {
        rec.category = *c;
      } else {
        throw ValidationError(line_no, fmt::format("line {}: unknown category label '{}'", line_no, text));
      }
    } else {
      const auto value = parse_value(fields[col_value]);
      if (!value) {
        throw ValidationError(line_no, fmt::format("line {}: unknown latent value label '{}'",
                                                   line_no, fields[col_value]));
      }
      if (*value == LatentValue::NV) {
        rec.category = DecisionCategory::NV;
      } else {
        const auto conclusion = parse_conclusion(fields[col_decision]);
        if (!conclusion) {
          throw ValidationError(line_no, fmt::format("line {}: unknown decision label '{}'",
                                                     line_no, fields[col_decision]));
        }
        rec.category = combine(*value, *conclusion);
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

CountTable build_count_table(std::span<const DecisionRecord> records) {
  CountTable table;
  std::set<std::pair<std::string_view, std::string_view>> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!seen.emplace(r.examiner_id, r.test_case_id).second) {
      throw ValidationError(i + 2, fmt::format("record {}: duplicate (examiner, test case) pair ({}, {})",
                                               i + 1, r.examiner_id, r.test_case_id));
    }
    table.add(r.examiner_id, r.mated ? Scenario::Mated : Scenario::NonMated, r.category);
  }
  return table;
}

CountTable ingest_records(std::istream& in, const ColumnMapping& mapping) {
  const auto records = read_records(in, mapping);
  return build_count_table(records);
}

std::string_view label(Denominator d) noexcept {
  switch (d) {
    case Denominator::PRES: return "PRES";
    case Denominator::CMP: return "CMP";
    case Denominator::VID: return "VID";
  }
  return "?";
}

PluginRates plugin_rates(const CategoryCounts& counts, Denominator d) {
  auto included = [d](DecisionCategory c) {
    switch (d) {
      case Denominator::PRES: return true;
      case Denominator::CMP: return is_compared(c);
      case Denominator::VID: return is_vid(c);
    }
    return false;
  };
  std::int64_t denom = 0;
  for (DecisionCategory c : kAllCategories) {
    if (included(c)) denom += counts[index_of(c)];
  }
  if (denom <= 0) {
    throw std::domain_error(fmt::format("plug-in rates: zero {} denominator", label(d)));
  }
  PluginRates rates{};
  for (DecisionCategory c : kAllCategories) {
    if (included(c)) {
      rates[index_of(c)] = static_cast<double>(counts[index_of(c)]) / static_cast<double>(denom);
    }
  }
  return rates;
}

PluginRates plugin_rates(const CountTable& table, Scenario s, Denominator d) {
  try {
    return plugin_rates(table.totals(s), d);
  } catch (const std::domain_error&) {
    throw std::domain_error(
        fmt::format("plug-in rates: zero {} denominator for {} pairs", label(d), label(s)));
  }
}

BinomialInterval agresti_coull(std::int64_t successes, std::int64_t trials, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument(fmt::format("agresti_coull: confidence {} outside (0, 1)", confidence));
  }
  if (successes < 0 || trials < 0 || successes > trials) {
    throw std::invalid_argument(
        fmt::format("agresti_coull: need 0 <= successes <= trials, got {}/{}", successes, trials));
  }
  const double z = boost::math::quantile(boost::math::normal_distribution<double>{},
                                         0.5 + confidence / 2.0);
  const double z2 = z * z;
  const double n_tilde = static_cast<double>(trials) + z2;
  const double p_tilde = (static_cast<double>(successes) + z2 / 2.0) / n_tilde;
  const double half = z * std::sqrt(p_tilde * (1.0 - p_tilde) / n_tilde);
  return {p_tilde - half, p_tilde + half, IntervalMethod::AgrestiCoull};
}

}  // namespace bbabc
