#include "bbabc/categories.hpp"

#include <cctype>
#include <string>

namespace bbabc {
namespace {

std::string squash(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    if (ch == ' ' || ch == '.' || ch == '_' || ch == '-') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

}  // namespace

std::string_view label(DecisionCategory c) noexcept {
  switch (c) {
    case DecisionCategory::NV: return "NV";
    case DecisionCategory::ExcVEO: return "Exc.VEO";
    case DecisionCategory::ExcVID: return "Exc.VID";
    case DecisionCategory::IncVEO: return "Inc.VEO";
    case DecisionCategory::IncVID: return "Inc.VID";
    case DecisionCategory::IndVEO: return "Ind.VEO";
    case DecisionCategory::IndVID: return "Ind.VID";
  }
  return "?";
}

std::string_view label(Scenario s) noexcept {
  return s == Scenario::Mated ? "mated" : "nonmated";
}

std::optional<DecisionCategory> parse_category(std::string_view text) {
  const std::string key = squash(text);
  for (DecisionCategory c : kAllCategories) {
    if (squash(label(c)) == key) return c;
  }
  return std::nullopt;
}

std::optional<Scenario> parse_scenario(std::string_view text) {
  const std::string key = squash(text);
  if (key == "mated" || key == "mates" || key == "m") return Scenario::Mated;
  if (key == "nonmated" || key == "nonmates" || key == "nm") return Scenario::NonMated;
  return std::nullopt;
}

}  // namespace bbabc
