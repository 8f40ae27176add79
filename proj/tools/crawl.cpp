// Command-line front end: scenario runs, planner benchmarking, t-test.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crawl/dm.hpp"
#include "crawl/metrics.hpp"
#include "crawl/policy.hpp"
#include "crawl/reward.hpp"
#include "crawl/road_network.hpp"
#include "crawl/simulator.hpp"

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

int cmd_run(const std::string& scenario, long long seed_opt, int controlled_opt,
            int horizon_opt, int repeat, const std::string& out_dir) {
  crawl::ScenarioConfig cfg = crawl::ScenarioConfig::load_file(scenario);
  if (seed_opt >= 0) {
    cfg.seed = static_cast<std::uint64_t>(seed_opt);
  } else if (const char* env = std::getenv("CRAWL_SEED")) {
    cfg.seed = std::strtoull(env, nullptr, 10);
  }
  if (controlled_opt >= 0) cfg.controlled_count = controlled_opt;
  if (horizon_opt > 0) cfg.horizon = horizon_opt;

  fs::create_directories(out_dir);
  std::vector<crawl::RunSummary> summaries;
  for (int r = 0; r < repeat; ++r) {
    crawl::ScenarioConfig run_cfg = cfg;
    run_cfg.seed = cfg.seed + static_cast<std::uint64_t>(r);
    crawl::TraceLog log = crawl::run_scenario(run_cfg);
    crawl::RunSummary s = crawl::summarize(log);
    summaries.push_back(s);

    const std::string suffix =
        repeat > 1 ? "_seed" + std::to_string(run_cfg.seed) : "";
    write_file(fs::path(out_dir) / ("trace" + suffix + ".csv"), log.to_csv());
    write_file(fs::path(out_dir) / ("summary" + suffix + ".json"), s.to_json());
    std::printf(
        "seed=%llu parked=%d/%d mean_time_to_parking=%.1fs "
        "mean_obstruction=%.1fs\n",
        static_cast<unsigned long long>(run_cfg.seed), s.parked_count,
        s.total_count, s.mean_time_to_parking, s.mean_obstruction_time);
  }
  if (repeat > 1) {
    write_file(fs::path(out_dir) / "bands.csv",
               crawl::band_csv(crawl::aggregate(summaries)));
  }
  return 0;
}

int cmd_bench(const std::string& network, int s_max, int n_max, int reps,
              const std::string& out_file) {
  if (s_max < 1 || n_max < 1) throw std::runtime_error("invalid bench range");
  if (reps < 5) throw std::runtime_error("bench needs at least 5 repetitions");
  const crawl::RoadNetwork net = crawl::RoadNetwork::load_file(network);

  // Routed sources toward destinations spread evenly across the map.
  std::vector<crawl::SourcePolicy> sources;
  for (int i = 0; i < s_max; ++i) {
    const crawl::LinkIndex dest =
        static_cast<crawl::LinkIndex>(static_cast<long long>(i) *
                                      net.link_count() / s_max);
    sources.push_back(
        crawl::make_route_source(net, dest, 0.05, "b" + std::to_string(i)));
  }
  const std::vector<int> occupancy(net.lots().size(), 0);
  const crawl::RewardField reward =
      crawl::build_reward(net, occupancy, {}, n_max);

  crawl::Planner planner(net);
  std::ostringstream csv;
  csv << "S,N,reps,mean_seconds\n";
  for (int s = 1; s <= s_max; ++s) {
    const std::vector<crawl::SourcePolicy> subset(sources.begin(),
                                                  sources.begin() + s);
    for (int n = 1; n <= n_max; ++n) {
      double total = 0.0;
      for (int r = -1; r < reps; ++r) {
        // r == -1 is an untimed warm-up pass.
        const auto t0 = std::chrono::steady_clock::now();
        for (crawl::LinkIndex x = 0; x < net.link_count(); ++x) {
          crawl::PlanRequest req;
          req.initial = x;
          req.horizon = n;
          req.sources = &subset;
          req.reward = &reward;
          planner.plan(req);
        }
        const auto t1 = std::chrono::steady_clock::now();
        if (r >= 0) {
          total += std::chrono::duration<double>(t1 - t0).count() /
                   net.link_count();
        }
      }
      char row[96];
      std::snprintf(row, sizeof(row), "%d,%d,%d,%.9f\n", s, n, reps,
                    total / reps);
      csv << row;
      std::fputs(row, stdout);
    }
  }
  if (!out_file.empty()) write_file(out_file, csv.str());
  return 0;
}

std::vector<double> read_numbers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  return out;
}

int cmd_ttest(const std::string& file_a, const std::string& file_b) {
  const crawl::TTestResult r =
      crawl::welch_ttest(read_numbers(file_a), read_numbers(file_b));
  std::printf("t=%.6f df=%.6f p=%.6f\n", r.t_statistic, r.degrees_of_freedom,
              r.p_value);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KL-regularized routing control: scenarios, benchmarks, stats"};
  app.require_subcommand(1);

  std::string scenario, out_dir = "out";
  long long seed = -1;
  int controlled = -1, horizon = 0, repeat = 1;
  CLI::App* run = app.add_subcommand("run", "Run a scenario and write artifacts");
  run->add_option("--scenario", scenario, "Scenario JSON file")->required();
  run->add_option("--seed", seed, "Base RNG seed (overrides CRAWL_SEED)");
  run->add_option("--controlled", controlled, "Controlled-vehicle count");
  run->add_option("--horizon", horizon, "Planning horizon override");
  run->add_option("--repeat", repeat, "Consecutive-seed repetitions")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory");

  std::string network, bench_out;
  int s_max = 6, n_max = 5, reps = 5;
  CLI::App* bench = app.add_subcommand("bench", "Time the planner on a map");
  bench->add_option("--network", network, "Network JSON file")->required();
  bench->add_option("--smax", s_max, "Largest source count");
  bench->add_option("--nmax", n_max, "Largest horizon");
  bench->add_option("--reps", reps, "Repetitions per cell (min 5)");
  bench->add_option("--out", bench_out, "CSV output file");

  std::string file_a, file_b;
  CLI::App* ttest = app.add_subcommand("ttest", "Welch's t-test on two files");
  ttest->add_option("a", file_a, "First sample file")->required();
  ttest->add_option("b", file_b, "Second sample file")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) {
      return cmd_run(scenario, seed, controlled, horizon, repeat, out_dir);
    }
    if (bench->parsed()) {
      return cmd_bench(network, s_max, n_max, reps, bench_out);
    }
    return cmd_ttest(file_a, file_b);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
