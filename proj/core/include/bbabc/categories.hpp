#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace bbabc {

inline constexpr std::size_t kCategoryCount = 7;
inline constexpr std::size_t kScenarioCount = 2;
inline constexpr std::size_t kSummaryWidth = kCategoryCount * kScenarioCount;

// Decision outcomes in the row order of the published decision table:
// no value, then exclusion / inconclusive / individualization, each split by
// the latent value call (value for exclusion only, value for individualization).
enum class DecisionCategory : std::uint8_t {
  NV = 0,
  ExcVEO = 1,
  ExcVID = 2,
  IncVEO = 3,
  IncVID = 4,
  IndVEO = 5,
  IndVID = 6,
};

enum class Scenario : std::uint8_t { Mated = 0, NonMated = 1 };

inline constexpr std::array<DecisionCategory, kCategoryCount> kAllCategories{
    DecisionCategory::NV,     DecisionCategory::ExcVEO, DecisionCategory::ExcVID,
    DecisionCategory::IncVEO, DecisionCategory::IncVID, DecisionCategory::IndVEO,
    DecisionCategory::IndVID};

inline constexpr std::array<Scenario, kScenarioCount> kAllScenarios{Scenario::Mated,
                                                                    Scenario::NonMated};

using CategoryCounts = std::array<std::int64_t, kCategoryCount>;
using CategoryValues = std::array<double, kCategoryCount>;

constexpr std::size_t index_of(DecisionCategory c) noexcept { return static_cast<std::size_t>(c); }
constexpr std::size_t index_of(Scenario s) noexcept { return static_cast<std::size_t>(s); }

// Position of (scenario, category) in a 14-wide summary: mated block first.
constexpr std::size_t summary_index(Scenario s, DecisionCategory c) noexcept {
  return index_of(s) * kCategoryCount + index_of(c);
}

// Pairs that went on to comparison (everything except NV).
constexpr bool is_compared(DecisionCategory c) noexcept { return c != DecisionCategory::NV; }

// Latent deemed of value for individualization.
constexpr bool is_vid(DecisionCategory c) noexcept {
  return c == DecisionCategory::ExcVID || c == DecisionCategory::IncVID ||
         c == DecisionCategory::IndVID;
}

std::string_view label(DecisionCategory c) noexcept;
std::string_view label(Scenario s) noexcept;

// Accepts canonical labels ("Exc.VEO") and loose spellings ("exc veo", "ExcVEO").
std::optional<DecisionCategory> parse_category(std::string_view text);
std::optional<Scenario> parse_scenario(std::string_view text);

}  // namespace bbabc
