#include <cmath>
#include <vector>

#include <doctest.h>

#include "crawl/metrics.hpp"

using namespace crawl;

namespace {

TraceLog make_log(int vehicles, double duration) {
  TraceLog log;
  log.vehicle_count = vehicles;
  log.duration_s = duration;
  return log;
}

void rec(TraceLog& log, double t, int v, const char* ev, const char* link = "",
         const char* detail = "") {
  log.records.push_back(TraceRecord{t, v, ev, link, detail});
}

}  // namespace

TEST_CASE("summarize one parked vehicle") {
  TraceLog log = make_log(1, 600);
  rec(log, 0, 0, "arrive", "A");
  rec(log, 0, 0, "enter_link", "A");
  rec(log, 120, 0, "park", "A");
  const RunSummary s = summarize(log);
  CHECK(s.mean_time_to_parking == doctest::Approx(120.0));
  CHECK(s.parked_count == 1);
  CHECK(s.censored_count == 0);
  CHECK(s.mean_obstruction_time == 0.0);
}

TEST_CASE("unparked vehicles are censored at the duration") {
  TraceLog log = make_log(2, 600);
  rec(log, 0, 0, "arrive", "A");
  rec(log, 100, 0, "park", "A");
  rec(log, 50, 1, "arrive", "A");
  const RunSummary s = summarize(log);
  CHECK(s.parked_count == 1);
  CHECK(s.censored_count == 1);
  // (100 + (600 - 50)) / 2
  CHECK(s.mean_time_to_parking == doctest::Approx(325.0));
}

TEST_CASE("obstruction time recomputed from stay intervals") {
  TraceLog log = make_log(2, 1000);
  log.conditions.push_back({"S", LinkStatus::slowed, 200.0});
  // Vehicle 0 sits on S from t=100 to t=500: overlap [200,500] = 300 s.
  rec(log, 100, 0, "arrive", "S");
  rec(log, 100, 0, "enter_link", "S");
  rec(log, 500, 0, "enter_link", "A");
  rec(log, 600, 0, "park", "A");
  // Vehicle 1 never touches S.
  rec(log, 0, 1, "arrive", "A");
  rec(log, 0, 1, "enter_link", "A");
  rec(log, 90, 1, "park", "A");
  const auto obs = obstruction_times_from_trace(log);
  CHECK(obs[0] == doctest::Approx(300.0));
  CHECK(obs[1] == 0.0);
  CHECK(summarize(log).mean_obstruction_time == doctest::Approx(150.0));
}

TEST_CASE("open stay at the end of the run counts until the duration") {
  TraceLog log = make_log(1, 400);
  log.conditions.push_back({"S", LinkStatus::blocked, 0.0});
  rec(log, 50, 0, "arrive", "S");
  rec(log, 50, 0, "enter_link", "S");
  const auto obs = obstruction_times_from_trace(log);
  CHECK(obs[0] == doctest::Approx(350.0));
}

TEST_CASE("summarize validates the log") {
  TraceLog log = make_log(1, 10);
  rec(log, 0, 0, "arrive", "A");
  rec(log, 1, 0, "park", "A");
  rec(log, 2, 0, "park", "A");
  CHECK_THROWS(summarize(log));
  TraceLog log2 = make_log(1, 10);
  CHECK_THROWS(summarize(log2));  // missing arrive
}

TEST_CASE("aggregate of identical runs has zero-width bands") {
  TraceLog log = make_log(2, 100);
  rec(log, 0, 0, "arrive", "A");
  rec(log, 30, 0, "park", "A");
  rec(log, 0, 1, "arrive", "A");
  rec(log, 70, 1, "park", "A");
  const RunSummary s = summarize(log);
  const auto band = aggregate({s, s, s}, 10.0);
  REQUIRE(band.size() == 11);
  for (const BandPoint& p : band) CHECK(p.stddev == 0.0);
  CHECK(band[0].mean == 0.0);
  CHECK(band[4].mean == 1.0);   // t=40: one parked
  CHECK(band[10].mean == 2.0);  // t=100: both
}

TEST_CASE("aggregate mean and std at a point") {
  TraceLog a = make_log(2, 100);
  rec(a, 0, 0, "arrive", "A");
  rec(a, 10, 0, "park", "A");
  rec(a, 0, 1, "arrive", "A");
  rec(a, 20, 1, "park", "A");
  TraceLog b = make_log(2, 100);
  rec(b, 0, 0, "arrive", "A");
  rec(b, 0, 1, "arrive", "A");
  const auto band = aggregate({summarize(a), summarize(b)}, 50.0);
  // At t=50: counts {2, 0} -> mean 1, population std 1.
  CHECK(band[1].mean == doctest::Approx(1.0));
  CHECK(band[1].stddev == doctest::Approx(1.0));
}

TEST_CASE("band csv shape") {
  TraceLog log = make_log(1, 20);
  rec(log, 0, 0, "arrive", "A");
  rec(log, 5, 0, "park", "A");
  const std::string csv = band_csv(aggregate({summarize(log)}, 10.0));
  CHECK(csv.rfind("time,mean,std\n", 0) == 0);
  CHECK(csv.find("\n0.000,") != std::string::npos);
}

TEST_CASE("student t cdf against reference values") {
  // Reference values computed once with an independent statistics library.
  CHECK(student_t_cdf(1.0, 8.0) ==
        doctest::Approx(0.8267032464563329).epsilon(1e-9));
  CHECK(student_t_cdf(2.5, 3.2) ==
        doctest::Approx(0.9587791314191263).epsilon(1e-9));
  CHECK(student_t_cdf(-0.7, 12.5) ==
        doctest::Approx(0.24837458036267324).epsilon(1e-9));
  CHECK(student_t_cdf(0.0, 5.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(student_t_cdf(4.2, 1.5) ==
        doctest::Approx(0.9580726262108589).epsilon(1e-9));
}

TEST_CASE("welch t-test fixtures") {
  // Direct-formula and reference-implementation values, frozen.
  const TTestResult r1 = welch_ttest({1, 2, 3, 4, 5}, {2, 3, 4, 5, 6});
  CHECK(r1.t_statistic == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r1.degrees_of_freedom == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(r1.p_value == doctest::Approx(0.34659350708733416).epsilon(1e-7));

  const TTestResult r2 = welch_ttest({12.1, 14.3, 9.8, 11.0, 13.7},
                                     {18.4, 17.9, 21.2, 16.5});
  CHECK(r2.t_statistic == doctest::Approx(-4.897802459284466).epsilon(1e-9));
  CHECK(r2.degrees_of_freedom ==
        doctest::Approx(6.374717402245309).epsilon(1e-9));
  CHECK(r2.p_value == doctest::Approx(0.0022921083104348646).epsilon(1e-6));

  const TTestResult r3 = welch_ttest({0.5, 0.51, 0.49, 0.52, 0.48, 0.5},
                                     {0.6, 0.4, 0.7, 0.3});
  CHECK(r3.t_statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r3.degrees_of_freedom ==
        doctest::Approx(3.024018969417893).epsilon(1e-9));
  CHECK(r3.p_value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("welch t-test identities") {
  const std::vector<double> a{3.0, 4.1, 5.2, 6.3};
  const std::vector<double> b{2.0, 8.0, 4.5, 7.5, 6.0};
  const TTestResult ab = welch_ttest(a, b);
  const TTestResult ba = welch_ttest(b, a);
  CHECK(ab.t_statistic == doctest::Approx(-ba.t_statistic));
  CHECK(ab.p_value == doctest::Approx(ba.p_value));
  CHECK(ab.degrees_of_freedom == doctest::Approx(ba.degrees_of_freedom));

  // Invariance under common affine maps.
  auto affine = [](const std::vector<double>& v) {
    std::vector<double> out;
    for (double x : v) out.push_back(2.5 * x + 7.0);
    return out;
  };
  const TTestResult mapped = welch_ttest(affine(a), affine(b));
  CHECK(mapped.t_statistic == doctest::Approx(ab.t_statistic).epsilon(1e-9));
  CHECK(mapped.p_value == doctest::Approx(ab.p_value).epsilon(1e-9));

  // Identical samples: p = 1, t = 0.
  const TTestResult same = welch_ttest(a, a);
  CHECK(same.t_statistic == doctest::Approx(0.0));
  CHECK(same.p_value == doctest::Approx(1.0));
}

TEST_CASE("welch t-test degenerate and invalid inputs") {
  const TTestResult equal = welch_ttest({2, 2, 2}, {2, 2});
  CHECK(equal.t_statistic == 0.0);
  CHECK(equal.p_value == 1.0);
  const TTestResult differ = welch_ttest({2, 2, 2}, {3, 3});
  CHECK(differ.p_value == 0.0);
  CHECK(std::isinf(differ.t_statistic));
  CHECK_THROWS(welch_ttest({1.0}, {1.0, 2.0}));
}
