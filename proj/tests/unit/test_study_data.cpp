#include <catch_amalgamated.hpp>

#include <sstream>

#include <bbabc/study_data.hpp>

#include "generators.hpp"
#include "oracles.hpp"
#include "published.hpp"

using namespace bbabc;
namespace t = bbabc::testing;

namespace {

std::vector<DecisionRecord> parse(const std::string& text, const ColumnMapping& m = {}) {
  std::istringstream in(text);
  return read_records(in, m);
}

}  // namespace

TEST_CASE("category-column records") {
  const auto r = parse("examiner_id,test_case_id,mated,category\n"
                       "A,1,true,NV\n"
                       "A,2,false,Exc.VID\n"
                       "B,1,yes,ind veo\n");
  REQUIRE(r.size() == 3);
  CHECK(r[0].examiner_id == "A");
  CHECK(r[0].mated);
  CHECK(r[1].category == DecisionCategory::ExcVID);
  CHECK_FALSE(r[1].mated);
  CHECK(r[2].category == DecisionCategory::IndVEO);
}

TEST_CASE("value and decision columns combine into categories") {
  ColumnMapping m;
  m.category_column.reset();
  m.value_column = "value";
  m.decision_column = "decision";
  const auto r = parse("examiner_id,test_case_id,mated,value,decision\n"
                       "A,1,1,NV,\n"
                       "A,2,1,VEO,Exclusion\n"
                       "A,3,0,VID,Inconclusive\n"
                       "A,4,0,VID,Individualization\n"
                       "A,5,1,No Value,Individualization\n",
                       m);
  REQUIRE(r.size() == 5);
  CHECK(r[0].category == DecisionCategory::NV);
  CHECK(r[1].category == DecisionCategory::ExcVEO);
  CHECK(r[2].category == DecisionCategory::IncVID);
  CHECK(r[3].category == DecisionCategory::IndVID);
  CHECK(r[4].category == DecisionCategory::NV);
}

TEST_CASE("quoting, CRLF, blank lines and custom labels") {
  ColumnMapping m;
  m.delimiter = ';';
  m.category_labels["false positive"] = DecisionCategory::IndVID;
  const auto r = parse("examiner_id;test_case_id;mated;category\r\n"
                       "\r\n"
                       "\"E;1\";\"case \"\"7\"\"\";mated;false positive\r\n"
                       "   \r\n"
                       "E2;8;nonmated;Inc.VEO\r\n",
                       m);
  REQUIRE(r.size() == 2);
  CHECK(r[0].examiner_id == "E;1");
  CHECK(r[0].test_case_id == "case \"7\"");
  CHECK(r[0].category == DecisionCategory::IndVID);
  CHECK(r[1].examiner_id == "E2");
}

TEST_CASE("empty input gives an empty table") {
  std::istringstream in("");
  const CountTable t = ingest_records(in, {});
  CHECK(t.examiner_count() == 0);
  CHECK(t.grand_total() == 0);
}

TEST_CASE("malformed rows report their line number") {
  const std::string head = "examiner_id,test_case_id,mated,category\n";
  try {
    parse(head + "A,1,true,NV\nA,2,true\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  try {
    parse(head + "A,1,true,NV\n\nA,2,true,Maybe\n");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.line() == 4);
  }
  CHECK_THROWS_AS(parse(head + "A,1,perhaps,NV\n"), ValidationError);
  CHECK_THROWS_AS(parse(head + ",1,true,NV\n"), ValidationError);
  CHECK_THROWS_AS(parse(head + "A,\"1,true,NV\n"), ParseError);
  CHECK_THROWS_AS(parse("examiner,test_case_id,mated,category\nA,1,true,NV\n"), ValidationError);
}

TEST_CASE("duplicate examiner and test case pairs are rejected") {
  const auto r = parse("examiner_id,test_case_id,mated,category\nA,1,true,NV\nB,1,true,NV\nA,1,false,NV\n");
  CHECK_THROWS_AS(build_count_table(r), ValidationError);
}

TEST_CASE("count table keeps first-appearance order") {
  const auto r = parse("examiner_id,test_case_id,mated,category\n"
                       "Z,1,true,NV\nA,1,false,Exc.VID\nZ,2,false,Exc.VID\nZ,3,true,Ind.VID\n");
  const CountTable t = build_count_table(r);
  REQUIRE(t.examiner_ids() == std::vector<std::string>{"Z", "A"});
  CHECK(t.presented(0, Scenario::Mated) == 2);
  CHECK(t.presented(0, Scenario::NonMated) == 1);
  CHECK(t.counts(1, Scenario::NonMated)[index_of(DecisionCategory::ExcVID)] == 1);
  CHECK(t.find("A") == 1u);
  CHECK_FALSE(t.find("Q").has_value());
  CHECK(t.total(Scenario::Mated) == 2);
  CHECK(t.grand_total() == 4);
}

TEST_CASE("bundled fixture reproduces the published totals and plug-in table") {
  const CountTable t = t::load_fixture();
  CHECK(t.examiner_count() == 169);
  CHECK(t.grand_total() == t::kGrandTotal);
  CHECK(t.total(Scenario::Mated) == t::kMatedPresented);
  CHECK(t.total(Scenario::NonMated) == t::kNonMatedPresented);
  const CategoryCounts m = t.totals(Scenario::Mated);
  const CategoryCounts nm = t.totals(Scenario::NonMated);
  for (std::size_t k = 0; k < kCategoryCount; ++k) {
    CHECK(m[k] == t::kPublishedTotals[k]);
    CHECK(nm[k] == t::kPublishedTotals[k + kCategoryCount]);
    CHECK(m[k] + nm[k] == t::kCombinedTotals[k]);
  }
  for (Scenario s : kAllScenarios) {
    const auto pres = plugin_rates(t, s, Denominator::PRES);
    const auto cmp = plugin_rates(t, s, Denominator::CMP);
    const auto vid = plugin_rates(t, s, Denominator::VID);
    for (DecisionCategory c : kAllCategories) {
      const auto& row = t::kPluginTable[index_of(s)][index_of(c)];
      INFO(label(s) << " " << label(c));
      CHECK(100.0 * pres[index_of(c)].value() == Catch::Approx(row.pres).margin(0.05));
      CHECK(cmp[index_of(c)].has_value() == row.cmp.has_value());
      CHECK(vid[index_of(c)].has_value() == row.vid.has_value());
      if (row.cmp) CHECK(100.0 * *cmp[index_of(c)] == Catch::Approx(*row.cmp).margin(0.05));
      if (row.vid) CHECK(100.0 * *vid[index_of(c)] == Catch::Approx(*row.vid).margin(0.05));
    }
  }
}

TEST_CASE("plug-in rates under each denominator") {
  const CategoryCounts c{10, 5, 5, 10, 10, 0, 10};
  const auto pres = plugin_rates(c, Denominator::PRES);
  CHECK(*pres[0] == Catch::Approx(0.2));
  const auto cmp = plugin_rates(c, Denominator::CMP);
  CHECK_FALSE(cmp[0].has_value());
  CHECK(*cmp[1] == Catch::Approx(0.125));
  const auto vid = plugin_rates(c, Denominator::VID);
  CHECK_FALSE(vid[1].has_value());
  CHECK(*vid[2] == Catch::Approx(0.2));
  CHECK_THROWS_AS(plugin_rates(CategoryCounts{5, 0, 0, 0, 0, 0, 0}, Denominator::CMP), std::domain_error);
  CHECK_THROWS_AS(plugin_rates(CategoryCounts{}, Denominator::PRES), std::domain_error);
}

TEST_CASE("plug-in rates sum to one over the included categories") {
  t::Gen gen(5);
  for (int i = 0; i < 200; ++i) {
    const CategoryCounts c = gen.counts(50);
    for (Denominator d : {Denominator::PRES, Denominator::CMP, Denominator::VID}) {
      PluginRates r;
      try {
        r = plugin_rates(c, d);
      } catch (const std::domain_error&) {
        continue;
      }
      double s = 0.0;
      for (const auto& v : r) s += v.value_or(0.0);
      REQUIRE(s == Catch::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("Agresti-Coull matches the published intervals") {
  for (const auto& c : t::kAgrestiCases) {
    const BinomialInterval ci = agresti_coull(c.x, c.n, 0.95);
    INFO(c.x << "/" << c.n);
    CHECK(100.0 * ci.lower == Catch::Approx(c.lower_pct).margin(0.01));
    CHECK(100.0 * ci.upper == Catch::Approx(c.upper_pct).margin(0.01));
  }
}

TEST_CASE("Agresti-Coull matches the closed form and brackets the estimate") {
  t::Gen gen(99);
  for (int i = 0; i < 300; ++i) {
    const std::int64_t n = gen.integer(1, 20000);
    const std::int64_t x = gen.integer(0, n);
    const BinomialInterval ci = agresti_coull(x, n, 0.95);
    const auto [lo, hi] = t::agresti_coull_reference(static_cast<double>(x), static_cast<double>(n));
    REQUIRE(ci.lower == Catch::Approx(lo).epsilon(1e-12).margin(1e-15));
    REQUIRE(ci.upper == Catch::Approx(hi).epsilon(1e-12).margin(1e-15));
    const double p = static_cast<double>(x) / static_cast<double>(n);
    REQUIRE(ci.lower <= p + 1e-15);
    REQUIRE(ci.upper >= p - 1e-15);
  }
  CHECK(agresti_coull(0, 5543, 0.95).lower < 0.0);
  CHECK_THROWS_AS(agresti_coull(5, 4, 0.95), std::invalid_argument);
  CHECK_THROWS_AS(agresti_coull(1, 4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(agresti_coull(-1, 4, 0.95), std::invalid_argument);
}
