#include "crawl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace crawl {

using nlohmann::json;

RunSummary summarize(const TraceLog& log) {
  RunSummary s;
  s.total_count = log.vehicle_count;
  s.duration_s = log.duration_s;

  std::vector<double> arrive(log.vehicle_count,
                             std::numeric_limits<double>::quiet_NaN());
  std::vector<double> parked(log.vehicle_count, -1.0);
  for (const TraceRecord& r : log.records) {
    if (r.vehicle < 0 || r.vehicle >= log.vehicle_count) {
      throw std::invalid_argument("trace references unknown vehicle");
    }
    if (r.event == "arrive") {
      arrive[r.vehicle] = r.time;
    } else if (r.event == "park") {
      if (parked[r.vehicle] >= 0.0) {
        throw std::invalid_argument("vehicle parked twice in trace");
      }
      parked[r.vehicle] = r.time;
    }
  }

  std::vector<std::pair<double, int>> parks;
  double tts_sum = 0.0;
  for (int v = 0; v < log.vehicle_count; ++v) {
    if (std::isnan(arrive[v])) {
      throw std::invalid_argument("vehicle missing arrive record");
    }
    if (parked[v] >= 0.0) {
      s.parked_count++;
      tts_sum += parked[v] - arrive[v];
      parks.emplace_back(parked[v], 0);
    } else {
      s.censored_count++;
      tts_sum += log.duration_s - arrive[v];
    }
  }
  if (log.vehicle_count > 0) {
    s.mean_time_to_parking = tts_sum / log.vehicle_count;
  }

  std::sort(parks.begin(), parks.end());
  s.parked_count_timeseries.emplace_back(0.0, 0);
  int count = 0;
  for (const auto& [t, unused] : parks) {
    (void)unused;
    s.parked_count_timeseries.emplace_back(t, ++count);
  }

  const std::vector<double> obstruction = obstruction_times_from_trace(log);
  double obs_sum = 0.0;
  for (double o : obstruction) obs_sum += o;
  if (log.vehicle_count > 0) s.mean_obstruction_time = obs_sum / log.vehicle_count;
  return s;
}

std::vector<double> obstruction_times_from_trace(const TraceLog& log) {
  // Earliest activation per obstructed link; conditions never deactivate.
  std::map<std::string, double> active_from;
  for (const auto& w : log.conditions) {
    if (w.status == LinkStatus::normal) continue;
    auto it = active_from.find(w.link);
    if (it == active_from.end() || w.from_s < it->second) {
      active_from[w.link] = w.from_s;
    }
  }

  std::vector<double> out(log.vehicle_count, 0.0);
  struct Stay {
    std::string link;
    double from;
  };
  std::vector<Stay> current(log.vehicle_count);
  std::vector<char> driving(log.vehicle_count, 0);

  auto close_stay = [&](int v, double until) {
    if (!driving[v]) return;
    auto it = active_from.find(current[v].link);
    if (it != active_from.end()) {
      const double begin = std::max(current[v].from, it->second);
      if (until > begin) out[v] += until - begin;
    }
  };

  for (const TraceRecord& r : log.records) {
    if (r.event == "enter_link") {
      close_stay(r.vehicle, r.time);
      current[r.vehicle] = Stay{r.link, r.time};
      driving[r.vehicle] = 1;
    } else if (r.event == "park") {
      close_stay(r.vehicle, r.time);
      driving[r.vehicle] = 0;
    }
  }
  for (int v = 0; v < log.vehicle_count; ++v) close_stay(v, log.duration_s);
  return out;
}

std::vector<BandPoint> aggregate(const std::vector<RunSummary>& summaries,
                                 double grid_step_s) {
  if (summaries.empty()) throw std::invalid_argument("no summaries to aggregate");
  const double duration = summaries.front().duration_s;
  std::vector<BandPoint> band;
  for (double t = 0.0; t <= duration + 1e-9; t += grid_step_s) {
    double sum = 0.0, sq = 0.0;
    for (const RunSummary& s : summaries) {
      // Step interpolation: last count at or before t.
      int count = 0;
      for (const auto& [pt, c] : s.parked_count_timeseries) {
        if (pt <= t) count = c;
        else break;
      }
      sum += count;
      sq += static_cast<double>(count) * count;
    }
    const double n = static_cast<double>(summaries.size());
    const double mean = sum / n;
    const double var = std::max(0.0, sq / n - mean * mean);
    band.push_back(BandPoint{t, mean, std::sqrt(var)});
  }
  return band;
}

std::string band_csv(const std::vector<BandPoint>& band) {
  std::string out = "time,mean,std\n";
  char buf[96];
  for (const BandPoint& p : band) {
    std::snprintf(buf, sizeof(buf), "%.3f,%.6f,%.6f\n", p.time, p.mean,
                  p.stddev);
    out += buf;
  }
  return out;
}

namespace {

// Continued-fraction evaluation of the regularized incomplete beta
// function (Lentz's method).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_cdf(double t, double dof) {
  if (dof <= 0.0) throw std::invalid_argument("degrees of freedom must be > 0");
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * reg_inc_beta(dof / 2.0, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

TTestResult welch_ttest(const std::vector<double>& a,
                        const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) {
    throw std::invalid_argument("welch_ttest needs at least 2 samples per side");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double ma = 0.0, mb = 0.0;
  for (double v : a) ma += v;
  for (double v : b) mb += v;
  ma /= na;
  mb /= nb;
  double va = 0.0, vb = 0.0;
  for (double v : a) va += (v - ma) * (v - ma);
  for (double v : b) vb += (v - mb) * (v - mb);
  va /= na - 1.0;
  vb /= nb - 1.0;

  TTestResult r;
  const double se2 = va / na + vb / nb;
  if (se2 == 0.0) {
    // Degenerate: both samples are constant.
    r.degrees_of_freedom = na + nb - 2.0;
    if (ma == mb) {
      r.t_statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.t_statistic = ma > mb ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
    return r;
  }
  r.t_statistic = (ma - mb) / std::sqrt(se2);
  r.degrees_of_freedom =
      se2 * se2 /
      ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
  const double x =
      r.degrees_of_freedom /
      (r.degrees_of_freedom + r.t_statistic * r.t_statistic);
  r.p_value = reg_inc_beta(r.degrees_of_freedom / 2.0, 0.5, x);
  return r;
}

std::string RunSummary::to_json() const {
  json doc;
  doc["mean_time_to_parking_s"] = mean_time_to_parking;
  doc["mean_obstruction_time_s"] = mean_obstruction_time;
  doc["parked_count"] = parked_count;
  doc["total_count"] = total_count;
  doc["censored_count"] = censored_count;
  doc["duration_s"] = duration_s;
  json ts = json::array();
  for (const auto& [t, c] : parked_count_timeseries) {
    ts.push_back(json::array({t, c}));
  }
  doc["parked_count_timeseries"] = std::move(ts);
  return doc.dump(2);
}

}  // namespace crawl
