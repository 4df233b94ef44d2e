#include <catch_amalgamated.hpp>

#include <bbabc/categories.hpp>

using namespace bbabc;

TEST_CASE("category labels round-trip through the parser") {
  for (DecisionCategory c : kAllCategories) {
    REQUIRE(parse_category(label(c)) == c);
  }
  CHECK(parse_category("exc vid") == DecisionCategory::ExcVID);
  CHECK(parse_category("Ind_VEO") == DecisionCategory::IndVEO);
  CHECK(parse_category("INC-VEO") == DecisionCategory::IncVEO);
  CHECK_FALSE(parse_category("Exc.VXX").has_value());
  CHECK_FALSE(parse_category("").has_value());
}

TEST_CASE("scenario labels") {
  CHECK(parse_scenario("mated") == Scenario::Mated);
  CHECK(parse_scenario("Mates") == Scenario::Mated);
  CHECK(parse_scenario("Non-mates") == Scenario::NonMated);
  CHECK(parse_scenario("NM") == Scenario::NonMated);
  CHECK_FALSE(parse_scenario("maybe").has_value());
  CHECK(label(Scenario::NonMated) == "nonmated");
}

TEST_CASE("summary layout puts the mated block first") {
  CHECK(summary_index(Scenario::Mated, DecisionCategory::NV) == 0);
  CHECK(summary_index(Scenario::Mated, DecisionCategory::IndVID) == 6);
  CHECK(summary_index(Scenario::NonMated, DecisionCategory::NV) == 7);
  CHECK(summary_index(Scenario::NonMated, DecisionCategory::IndVID) == 13);
}

TEST_CASE("compared and VID flags") {
  CHECK_FALSE(is_compared(DecisionCategory::NV));
  CHECK(is_compared(DecisionCategory::IncVEO));
  CHECK(is_vid(DecisionCategory::ExcVID));
  CHECK_FALSE(is_vid(DecisionCategory::ExcVEO));
  CHECK_FALSE(is_vid(DecisionCategory::NV));
}
