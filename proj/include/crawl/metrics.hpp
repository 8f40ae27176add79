#pragma once

#include <string>
#include <vector>

#include "crawl/simulator.hpp"

namespace crawl {

struct RunSummary {
  double mean_time_to_parking = 0.0;  // censored at duration for unparked
  double mean_obstruction_time = 0.0;
  int parked_count = 0;
  int total_count = 0;
  int censored_count = 0;
  double duration_s = 0.0;
  std::vector<std::pair<double, int>> parked_count_timeseries;

  std::string to_json() const;
};

RunSummary summarize(const TraceLog& log);

/// Per-vehicle seconds spent on obstructed links, recomputed purely from
/// the trace records and condition windows. Used to audit the simulator's
/// own accounting.
std::vector<double> obstruction_times_from_trace(const TraceLog& log);

struct BandPoint {
  double time = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // population
};

/// Step-interpolates every parked-count series onto a common grid and
/// returns pointwise mean and standard deviation.
std::vector<BandPoint> aggregate(const std::vector<RunSummary>& summaries,
                                 double grid_step_s = 10.0);

std::string band_csv(const std::vector<BandPoint>& band);

struct TTestResult {
  double t_statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;  // two-sided
};

/// Student's t CDF via the regularized incomplete beta function
/// (continued fraction, ~1e-10 accurate).
double student_t_cdf(double t, double dof);

TTestResult welch_ttest(const std::vector<double>& a,
                        const std::vector<double>& b);

}  // namespace crawl
