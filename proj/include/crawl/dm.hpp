#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "crawl/policy.hpp"
#include "crawl/reward.hpp"
#include "crawl/road_network.hpp"

namespace crawl {

struct PlanRequest {
  LinkIndex initial = -1;
  int horizon = 1;
  const std::vector<SourcePolicy>* sources = nullptr;
  const SourcePolicy* target = nullptr;  // null: uniform target
  const RewardField* reward = nullptr;
  // The backward recursion subtracts the expected net reward from the KL
  // term by default (high reward attracts). Setting this flag adds it
  // instead; kept selectable for comparison.
  bool printed_cost_sign = false;
};

/// Step k of the recursion, k = 1..N. `states` is frontier[k-1] (the
/// conditioning links), `succ` is frontier[k].
struct PlanStep {
  std::vector<LinkIndex> states;
  std::vector<int> chosen;         // argmin source index per state
  std::vector<double> costs;       // S entries per state, flattened
  std::vector<int> row_offset;     // per state, into `rows`
  std::vector<double> rows;        // chosen policy row per state, flattened
  std::vector<LinkIndex> succ;
  std::vector<double> rhat;        // selected cost-to-go per succ link
  std::vector<double> rbar;        // net reward per succ link
};

struct Plan {
  LinkIndex initial = -1;
  int horizon = 0;
  int source_count = 0;
  double objective = 0.0;  // selected cost at the initial link
  std::vector<PlanStep> steps;

  const PlanStep& step(int k) const { return steps.at(k - 1); }
  std::string audit_json(const RoadNetwork& net) const;
};

/// Backward-recursion planner. Holds reusable scratch so repeated calls
/// (receding horizon, benchmarking) avoid per-call table setup.
class Planner {
 public:
  explicit Planner(const RoadNetwork& net);

  Plan plan(const PlanRequest& req);

  const SourcePolicy& default_target();

 private:
  const RoadNetwork& net_;
  SourcePolicy uniform_;
  bool uniform_built_ = false;
  std::vector<int> pos_;          // link -> position in current frontier
  std::vector<double> vnext_, vcur_, rbar_;
};

struct BruteForceResult {
  double objective = 0.0;
  // chosen[k-1][i] is the source index for state i of frontier[k-1],
  // laid out exactly like Plan::steps.
  std::vector<std::vector<int>> chosen;
  std::vector<std::vector<LinkIndex>> states;
  std::uint64_t enumerated = 0;
};

/// Exhaustive oracle: enumerates every assignment of one source per
/// (step, conditioning link) pair, scores each by forward propagation of
/// the full objective, and returns the lexicographically lowest minimizer.
/// Throws when the assignment count exceeds `guard`.
BruteForceResult brute_force_plan(const RoadNetwork& net,
                                  const PlanRequest& req,
                                  std::uint64_t guard = 1'000'000);

/// Draws the next link from the step-1 row of the plan.
LinkIndex sample_next(const RoadNetwork& net, const Plan& plan,
                      LinkIndex current, std::mt19937_64& rng);

struct EnvSnapshot {
  std::vector<int> lot_occupancy;
  std::vector<LinkCondition> conditions;
};

struct ControlConfig {
  int horizon = 3;
  const std::vector<SourcePolicy>* sources = nullptr;
  const SourcePolicy* target = nullptr;
  bool printed_cost_sign = false;
};

/// One receding-horizon decision: build the reward from the snapshot,
/// plan from `current`, sample the next link.
LinkIndex receding_horizon_step(Planner& planner, const RoadNetwork& net,
                                LinkIndex current, const EnvSnapshot& env,
                                const ControlConfig& cfg,
                                std::mt19937_64& rng);

}  // namespace crawl
