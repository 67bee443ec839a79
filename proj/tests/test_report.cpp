#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "streampipe/report.hpp"
#include "streampipe/rng.hpp"

using namespace streampipe;

TEST_CASE("five_number_summary") {
  SUBCASE("symmetric ladder") {
    const auto f = five_number_summary({1, 2, 3, 4, 5});
    CHECK(f.min == 1);
    CHECK(f.q1 == 2);
    CHECK(f.median == 3);
    CHECK(f.q3 == 4);
    CHECK(f.max == 5);
  }
  SUBCASE("singleton repeats the value") {
    const auto f = five_number_summary({7});
    CHECK(f.min == 7);
    CHECK(f.q1 == 7);
    CHECK(f.median == 7);
    CHECK(f.q3 == 7);
    CHECK(f.max == 7);
  }
  SUBCASE("interpolation on four values") {
    const auto f = five_number_summary({1, 2, 3, 4});
    CHECK(f.min == doctest::Approx(1.0));
    CHECK(f.q1 == doctest::Approx(1.75));
    CHECK(f.median == doctest::Approx(2.5));
    CHECK(f.q3 == doctest::Approx(3.25));
    CHECK(f.max == doctest::Approx(4.0));
  }
  SUBCASE("empty input throws") {
    CHECK_THROWS_AS(five_number_summary({}), std::invalid_argument);
  }
  SUBCASE("ordering invariant and permutation invariance on random data") {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> values(1 + static_cast<std::size_t>(rng.uniform_int(0, 40)));
      for (auto& v : values) v = rng.normal();
      const auto f = five_number_summary(values);
      CHECK(f.min <= f.q1);
      CHECK(f.q1 <= f.median);
      CHECK(f.median <= f.q3);
      CHECK(f.q3 <= f.max);

      std::vector<double> reversed(values.rbegin(), values.rend());
      const auto g = five_number_summary(reversed);
      CHECK(f.median == doctest::Approx(g.median));
      CHECK(f.q1 == doctest::Approx(g.q1));
    }
  }
}

namespace {

Table experiment_like_table() {
  Table t;
  t.columns = {"tau_minutes", "segment", "memory", "purity", "disqualified"};
  t.add_row({15.0, std::int64_t{0}, false, 0.5, false});
  t.add_row({15.0, std::int64_t{0}, false, 0.7, false});
  t.add_row({15.0, std::int64_t{1}, false, 0.9, false});
  t.add_row({15.0, std::int64_t{0}, false, 0.1, true});  // disqualified
  t.add_row({20.0, std::int64_t{0}, true, 0.8, false});
  t.add_row({20.0, std::int64_t{0}, true, std::monostate{}, false});  // missing metric
  return t;
}

}  // namespace

TEST_CASE("group_summaries") {
  const Table t = experiment_like_table();

  SUBCASE("a single group equals its five-number summary") {
    const auto rows = group_summaries(t, "purity", {"tau_minutes", "segment", "memory"});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].count == 2);  // (15, 0): disqualified row excluded
    CHECK(rows[0].stats.min == doctest::Approx(0.5));
    CHECK(rows[0].stats.max == doctest::Approx(0.7));
    CHECK(rows[1].count == 1);
    CHECK(rows[1].stats.min == rows[1].stats.max);  // single-row group
    CHECK(rows[2].count == 1);                      // empty metric cell skipped
  }
  SUBCASE("including disqualified rows changes counts by the failure count") {
    const auto strict = group_summaries(t, "purity", {"tau_minutes"});
    const auto loose = group_summaries(t, "purity", {"tau_minutes"}, true);
    std::int64_t strict_total = 0, loose_total = 0;
    for (const auto& r : strict) strict_total += r.count;
    for (const auto& r : loose) loose_total += r.count;
    CHECK(loose_total - strict_total == 1);
  }
  SUBCASE("unknown column throws") {
    CHECK_THROWS_AS(group_summaries(t, "no_such_metric", {"tau_minutes"}),
                    std::invalid_argument);
  }
  SUBCASE("summaries are invariant to row order") {
    Table reversed = t;
    std::reverse(reversed.rows.begin(), reversed.rows.end());
    const auto a = group_summaries(t, "purity", {"tau_minutes", "segment", "memory"});
    const auto b = group_summaries(reversed, "purity", {"tau_minutes", "segment", "memory"});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].count == b[i].count);
      CHECK(a[i].stats.median == doctest::Approx(b[i].stats.median));
    }
  }
  SUBCASE("ordering invariant holds on every emitted row") {
    const auto rows = group_summaries(t, "purity", {"tau_minutes"});
    for (const auto& r : rows) {
      CHECK(r.stats.min <= r.stats.q1);
      CHECK(r.stats.q1 <= r.stats.median);
      CHECK(r.stats.median <= r.stats.q3);
      CHECK(r.stats.q3 <= r.stats.max);
    }
  }
}

TEST_CASE("csv emission") {
  SUBCASE("an empty table is header-only") {
    Table t;
    t.columns = {"a", "b"};
    CHECK(to_csv(t) == "a,b\n");
  }
  SUBCASE("emit then parse round-trips bytes") {
    const Table t = experiment_like_table();
    const std::string bytes = to_csv(t);
    const Table parsed = parse_csv(bytes);
    CHECK(parsed.columns == t.columns);
    REQUIRE(parsed.rows.size() == t.rows.size());
    CHECK(to_csv(parsed) == bytes);
  }
  SUBCASE("identical inputs give identical bytes") {
    const Table t = experiment_like_table();
    CHECK(to_csv(t) == to_csv(t));
    CHECK(to_json(t) == to_json(t));
  }
  SUBCASE("six significant digits for doubles") {
    Table t;
    t.columns = {"x"};
    t.add_row({0.123456789});
    t.add_row({1234567.0});
    CHECK(to_csv(t) == "x\n0.123457\n1.23457e+06\n");
  }
  SUBCASE("quoting round-trips embedded commas and quotes") {
    Table t;
    t.columns = {"name"};
    t.add_row({std::string("a,b")});
    t.add_row({std::string("say \"hi\"")});
    const auto parsed = parse_csv(to_csv(t));
    CHECK(format_cell(parsed.rows[0][0]) == "a,b");
    CHECK(format_cell(parsed.rows[1][0]) == "say \"hi\"");
  }
}

TEST_CASE("emit writes files and reports byte counts") {
  const auto dir = std::filesystem::temp_directory_path() / "streampipe_report_test";
  std::filesystem::create_directories(dir);
  const Table t = experiment_like_table();
  const auto path = dir / "table.csv";
  const std::size_t bytes = emit(t, OutputFormat::csv, path);
  CHECK(bytes == to_csv(t).size());
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == to_csv(t));

  CHECK_THROWS_AS(emit(t, OutputFormat::csv, dir / "missing_subdir" / "t.csv"),
                  std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("summaries_to_table keeps key columns and stat order") {
  const Table t = experiment_like_table();
  const auto rows = group_summaries(t, "purity", {"tau_minutes", "memory"});
  const Table table = summaries_to_table(rows, {"tau_minutes", "memory"});
  CHECK(table.columns ==
        std::vector<std::string>{"tau_minutes", "memory", "count", "min", "q1", "q2", "q3",
                                 "max"});
  CHECK(table.rows.size() == rows.size());
}
