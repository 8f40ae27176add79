#pragma once

#include <set>
#include <vector>

#include "crawl/road_network.hpp"

namespace crawl {

enum class LinkStatus { normal, slowed, blocked };

struct LinkCondition {
  LinkIndex link = -1;
  LinkStatus status = LinkStatus::normal;
  double effective_speed_mps = 0.0;  // slowed: < free flow; blocked: 0
};

// Reward contributions, summed when a link qualifies for several.
inline constexpr double kVacantLotReward = 100.0;
inline constexpr double kFullLotReward = -10.0;
inline constexpr double kSlowedReward = -20.0;
inline constexpr double kBlockedReward = -100.0;

/// Per-link reward, constant across the planning horizon. The receding
/// horizon loop rebuilds it at every link transition, so time variation
/// within one plan is not represented.
class RewardField {
 public:
  RewardField() = default;
  RewardField(int horizon, int link_count)
      : horizon_(horizon), values_(link_count, 0.0) {}

  int horizon() const { return horizon_; }
  double at(int /*step*/, LinkIndex x) const { return values_[x]; }
  double at(LinkIndex x) const { return values_[x]; }
  void add(LinkIndex x, double delta) { values_[x] += delta; }

  /// -100 on the blocked link for every step; repeat applications of the
  /// same link are no-ops.
  void apply_block(LinkIndex x);
  bool blocked(LinkIndex x) const { return blocked_.count(x) > 0; }

 private:
  int horizon_ = 0;
  std::vector<double> values_;
  std::set<LinkIndex> blocked_;
};

/// Assembles the field from lot occupancy and link conditions:
/// lot-adjacent links get +100 (vacant) or -10 (full); slowed adds -20,
/// blocked adds -100; everything else is 0.
RewardField build_reward(const RoadNetwork& net,
                         const std::vector<int>& lot_occupancy,
                         const std::vector<LinkCondition>& conditions,
                         int horizon);

}  // namespace crawl
