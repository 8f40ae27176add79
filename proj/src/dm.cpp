#include "crawl/dm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace crawl {

namespace {

void check_request(const RoadNetwork& net, const PlanRequest& req) {
  if (req.initial < 0 || req.initial >= net.link_count()) {
    throw UnknownLink(std::to_string(req.initial));
  }
  if (req.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!req.sources || req.sources->empty()) {
    throw std::invalid_argument("at least one source is required");
  }
  if (!req.reward) throw std::invalid_argument("reward field is required");
}

}  // namespace

Planner::Planner(const RoadNetwork& net) : net_(net) {
  pos_.assign(net.link_count(), -1);
}

const SourcePolicy& Planner::default_target() {
  if (!uniform_built_) {
    uniform_ = uniform_target(net_);
    uniform_built_ = true;
  }
  return uniform_;
}

Plan Planner::plan(const PlanRequest& req) {
  check_request(net_, req);
  const auto& sources = *req.sources;
  const SourcePolicy& target = req.target ? *req.target : default_target();
  const int S = static_cast<int>(sources.size());
  const int N = req.horizon;
  const double sign = req.printed_cost_sign ? 1.0 : -1.0;

  const auto frontiers = net_.reachable_frontiers(req.initial, N);

  Plan out;
  out.initial = req.initial;
  out.horizon = N;
  out.source_count = S;
  out.steps.resize(N);

  // V_{N+1} = 0 on frontier[N].
  vnext_.assign(frontiers[N].size(), 0.0);

  for (int k = N; k >= 1; --k) {
    const auto& states = frontiers[k - 1];
    const auto& succ = frontiers[k];
    PlanStep& step = out.steps[k - 1];
    step.states = states;
    step.succ = succ;

    for (std::size_t j = 0; j < succ.size(); ++j) pos_[succ[j]] = static_cast<int>(j);

    // rbar_k(x) = r_k(x) - rhat_k(x) with rhat the selected cost-to-go.
    step.rhat.resize(succ.size());
    step.rbar.resize(succ.size());
    rbar_.resize(succ.size());
    for (std::size_t j = 0; j < succ.size(); ++j) {
      step.rhat[j] = vnext_[j];
      rbar_[j] = req.reward->at(k, succ[j]) - vnext_[j];
      step.rbar[j] = rbar_[j];
    }

    vcur_.resize(states.size());
    step.chosen.resize(states.size());
    step.costs.resize(states.size() * S);
    step.row_offset.resize(states.size());
    step.rows.clear();

    for (std::size_t si = 0; si < states.size(); ++si) {
      const LinkIndex x = states[si];
      const auto& out_x = net_.outgoing(x);
      const ConditionalRow& trow = target.row(x);
      double best = std::numeric_limits<double>::infinity();
      int best_i = 0;
      for (int i = 0; i < S; ++i) {
        const ConditionalRow& srow = sources[i].row(x);
        double expect = 0.0;
        for (std::size_t j = 0; j < out_x.size(); ++j) {
          expect += srow.probs[j] * rbar_[pos_[out_x[j]]];
        }
        const double cost = kl_divergence(srow, trow) + sign * expect;
        step.costs[si * S + i] = cost;
        if (cost < best) {
          best = cost;
          best_i = i;
        }
      }
      step.chosen[si] = best_i;
      vcur_[si] = best;
      step.row_offset[si] = static_cast<int>(step.rows.size());
      const auto& probs = sources[best_i].row(x).probs;
      step.rows.insert(step.rows.end(), probs.begin(), probs.end());
    }

    for (LinkIndex y : succ) pos_[y] = -1;
    vnext_ = vcur_;
  }

  out.objective = vnext_[0];
  return out;
}

BruteForceResult brute_force_plan(const RoadNetwork& net,
                                  const PlanRequest& req, std::uint64_t guard) {
  check_request(net, req);
  const auto& sources = *req.sources;
  Planner scratch(net);
  const SourcePolicy& target =
      req.target ? *req.target : scratch.default_target();
  const int S = static_cast<int>(sources.size());
  const int N = req.horizon;
  const double sign = req.printed_cost_sign ? 1.0 : -1.0;

  const auto frontiers = net.reachable_frontiers(req.initial, N);

  // Decision points in (step, state) order; the counter below treats the
  // last point as least significant, so enumeration order is lexicographic.
  struct Point {
    int k;
    int state_pos;
    LinkIndex x;
    std::vector<double> base_cost;           // per source: KL +- E[r_k]
    std::vector<std::vector<double>> trans;  // per source: prob onto succ pos
  };
  std::vector<Point> points;
  std::vector<int> pos(net.link_count(), -1);
  for (int k = 1; k <= N; ++k) {
    const auto& states = frontiers[k - 1];
    const auto& succ = frontiers[k];
    for (std::size_t j = 0; j < succ.size(); ++j) pos[succ[j]] = static_cast<int>(j);
    for (std::size_t si = 0; si < states.size(); ++si) {
      const LinkIndex x = states[si];
      Point pt;
      pt.k = k;
      pt.state_pos = static_cast<int>(si);
      pt.x = x;
      const auto& out_x = net.outgoing(x);
      const ConditionalRow& trow = target.row(x);
      for (int i = 0; i < S; ++i) {
        const ConditionalRow& srow = sources[i].row(x);
        double expect = 0.0;
        std::vector<double> tr(succ.size(), 0.0);
        for (std::size_t j = 0; j < out_x.size(); ++j) {
          expect += srow.probs[j] * req.reward->at(k, out_x[j]);
          tr[pos[out_x[j]]] += srow.probs[j];
        }
        pt.base_cost.push_back(kl_divergence(srow, trow) + sign * expect);
        pt.trans.push_back(std::move(tr));
      }
      points.push_back(std::move(pt));
    }
    for (LinkIndex y : succ) pos[y] = -1;
  }

  std::uint64_t total = 1;
  for (std::size_t p = 0; p < points.size(); ++p) {
    if (total > guard / static_cast<std::uint64_t>(S)) {
      throw std::invalid_argument("brute force guard exceeded");
    }
    total *= static_cast<std::uint64_t>(S);
  }

  // Point index ranges per step, for the forward sweep.
  std::vector<std::size_t> step_begin(N + 1, 0);
  {
    std::size_t p = 0;
    for (int k = 1; k <= N; ++k) {
      step_begin[k - 1] = p;
      p += frontiers[k - 1].size();
    }
    step_begin[N] = p;
  }

  BruteForceResult best;
  best.objective = std::numeric_limits<double>::infinity();
  best.enumerated = total;
  std::vector<int> digits(points.size(), 0);
  std::vector<double> mu, mu_next;

  for (std::uint64_t iter = 0; iter < total; ++iter) {
    double obj = 0.0;
    mu.assign(1, 1.0);
    for (int k = 1; k <= N; ++k) {
      mu_next.assign(frontiers[k].size(), 0.0);
      for (std::size_t p = step_begin[k - 1]; p < step_begin[k]; ++p) {
        const Point& pt = points[p];
        const double m = mu[pt.state_pos];
        if (m == 0.0) {
          // Unvisited state still pins its digit in the lexicographic
          // comparison, but contributes nothing to the objective.
          continue;
        }
        const int i = digits[p];
        obj += m * pt.base_cost[i];
        const auto& tr = pt.trans[i];
        for (std::size_t j = 0; j < tr.size(); ++j) mu_next[j] += m * tr[j];
      }
      mu.swap(mu_next);
    }

    if (obj < best.objective - 0.0) {  // strict: first minimizer is lowest
      best.objective = obj;
      best.chosen.assign(N, {});
      for (int k = 1; k <= N; ++k) {
        best.chosen[k - 1].assign(digits.begin() + step_begin[k - 1],
                                  digits.begin() + step_begin[k]);
      }
    }

    // Mixed-radix increment, last digit fastest.
    for (int p = static_cast<int>(points.size()) - 1; p >= 0; --p) {
      if (++digits[p] < S) break;
      digits[p] = 0;
    }
  }

  best.states.resize(N);
  for (int k = 1; k <= N; ++k) best.states[k - 1] = frontiers[k - 1];
  return best;
}

LinkIndex sample_next(const RoadNetwork& net, const Plan& plan,
                      LinkIndex current, std::mt19937_64& rng) {
  const PlanStep& step = plan.step(1);
  if (step.states.size() != 1 || step.states[0] != current) {
    throw UnknownLink("link " + std::to_string(current) +
                      " is not the plan's conditioning state");
  }
  const auto& out = net.outgoing(current);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  LinkIndex last_positive = out.front();
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double p = step.rows[step.row_offset[0] + j];
    if (p > 0.0) last_positive = out[j];
    acc += p;
    if (u < acc) return out[j];
  }
  return last_positive;
}

LinkIndex receding_horizon_step(Planner& planner, const RoadNetwork& net,
                                LinkIndex current, const EnvSnapshot& env,
                                const ControlConfig& cfg,
                                std::mt19937_64& rng) {
  const RewardField reward =
      build_reward(net, env.lot_occupancy, env.conditions, cfg.horizon);
  PlanRequest req;
  req.initial = current;
  req.horizon = cfg.horizon;
  req.sources = cfg.sources;
  req.target = cfg.target;
  req.reward = &reward;
  req.printed_cost_sign = cfg.printed_cost_sign;
  const Plan p = planner.plan(req);
  return sample_next(net, p, current, rng);
}

std::string Plan::audit_json(const RoadNetwork& net) const {
  nlohmann::json doc;
  doc["initial"] = net.link(initial).id;
  doc["horizon"] = horizon;
  doc["objective"] = objective;
  nlohmann::json jsteps = nlohmann::json::array();
  for (int k = 1; k <= horizon; ++k) {
    const PlanStep& s = step(k);
    nlohmann::json js;
    js["step"] = k;
    for (std::size_t i = 0; i < s.states.size(); ++i) {
      nlohmann::json entry;
      entry["chosen"] = s.chosen[i];
      entry["costs"] = std::vector<double>(
          s.costs.begin() + i * source_count,
          s.costs.begin() + (i + 1) * source_count);
      js["states"][net.link(s.states[i]).id] = std::move(entry);
    }
    for (std::size_t j = 0; j < s.succ.size(); ++j) {
      js["reward_to_go"][net.link(s.succ[j]).id] = s.rhat[j];
    }
    jsteps.push_back(std::move(js));
  }
  doc["steps"] = std::move(jsteps);
  return doc.dump(2);
}

}  // namespace crawl
