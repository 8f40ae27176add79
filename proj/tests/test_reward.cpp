#include <doctest.h>

#include "crawl/reward.hpp"
#include "crawl/road_network.hpp"

using namespace crawl;

namespace {

const char* kLotNet = R"({
  "links": [
    {"id": "A", "length_m": 100, "speed_mps": 10, "out": ["B", "C"]},
    {"id": "B", "length_m": 100, "speed_mps": 10, "out": ["A"]},
    {"id": "C", "length_m": 100, "speed_mps": 10, "out": ["A"]}
  ],
  "lots": [
    {"id": "p1", "capacity": 10, "adjacent": ["B"]},
    {"id": "p2", "capacity": 2, "adjacent": ["C"]}
  ]
})";

}  // namespace

TEST_CASE("vacant and full lot rewards") {
  const RoadNetwork net = RoadNetwork::load(kLotNet);
  const RewardField f = build_reward(net, {3, 2}, {}, 3);
  CHECK(f.at(net.index_of("B")) == kVacantLotReward);   // 3/10 vacant
  CHECK(f.at(net.index_of("C")) == kFullLotReward);     // 2/2 full
  CHECK(f.at(net.index_of("A")) == 0.0);                // plain link
  // Constant across the horizon.
  for (int k = 1; k <= 3; ++k) {
    CHECK(f.at(k, net.index_of("B")) == kVacantLotReward);
  }
}

TEST_CASE("condition rewards sum with lot rewards") {
  const RoadNetwork net = RoadNetwork::load(kLotNet);
  std::vector<LinkCondition> conds;
  conds.push_back({net.index_of("C"), LinkStatus::slowed, 0.27});
  const RewardField f = build_reward(net, {3, 2}, conds, 3);
  CHECK(f.at(net.index_of("C")) == kFullLotReward + kSlowedReward);  // -30
}

TEST_CASE("blocked adds -100 and stacks with slowed") {
  const RoadNetwork net = RoadNetwork::load(kLotNet);
  std::vector<LinkCondition> conds;
  conds.push_back({net.index_of("A"), LinkStatus::slowed, 0.27});
  RewardField f = build_reward(net, {0, 0}, conds, 2);
  CHECK(f.at(net.index_of("A")) == kSlowedReward);
  f.apply_block(net.index_of("A"));
  CHECK(f.at(net.index_of("A")) == kSlowedReward + kBlockedReward);  // -120
  CHECK(f.blocked(net.index_of("A")));
  // Duplicate block reports are no-ops.
  f.apply_block(net.index_of("A"));
  CHECK(f.at(net.index_of("A")) == kSlowedReward + kBlockedReward);
}

TEST_CASE("blocked condition already counted at build time") {
  const RoadNetwork net = RoadNetwork::load(kLotNet);
  std::vector<LinkCondition> conds;
  conds.push_back({net.index_of("A"), LinkStatus::blocked, 0.0});
  const RewardField f = build_reward(net, {0, 0}, conds, 2);
  CHECK(f.at(net.index_of("A")) == kBlockedReward);
  CHECK(f.blocked(net.index_of("A")));
}

TEST_CASE("occupancy above capacity is rejected") {
  const RoadNetwork net = RoadNetwork::load(kLotNet);
  CHECK_THROWS(build_reward(net, {11, 0}, {}, 1));
}

TEST_CASE("build_reward is deterministic") {
  const RoadNetwork net = RoadNetwork::load(kLotNet);
  const RewardField a = build_reward(net, {9, 1}, {}, 4);
  const RewardField b = build_reward(net, {9, 1}, {}, 4);
  for (LinkIndex x = 0; x < net.link_count(); ++x) {
    CHECK(a.at(x) == b.at(x));
  }
}

TEST_CASE("vacancy flip when the lot fills") {
  const RoadNetwork net = RoadNetwork::load(kLotNet);
  CHECK(build_reward(net, {0, 1}, {}, 1).at(net.index_of("C")) ==
        kVacantLotReward);
  CHECK(build_reward(net, {0, 2}, {}, 1).at(net.index_of("C")) ==
        kFullLotReward);
}

TEST_CASE("every nonzero reward decomposes into the documented constants") {
  const RoadNetwork net =
      RoadNetwork::load_file(std::string(CRAWL_DATA_DIR) + "/campus.json");
  std::vector<LinkCondition> conds;
  conds.push_back({net.index_of("R1"), LinkStatus::slowed, 0.12});
  conds.push_back({net.index_of("R2"), LinkStatus::blocked, 0.0});
  const RewardField f = build_reward(net, {10, 3, 0}, conds, 3);
  int nonzero = 0;
  for (LinkIndex x = 0; x < net.link_count(); ++x) {
    const double v = f.at(x);
    if (v == 0.0) continue;
    ++nonzero;
    const bool known = v == kVacantLotReward || v == kFullLotReward ||
                       v == kSlowedReward || v == kBlockedReward ||
                       v == kVacantLotReward + kSlowedReward ||
                       v == kFullLotReward + kSlowedReward ||
                       v == kVacantLotReward + kBlockedReward ||
                       v == kFullLotReward + kBlockedReward ||
                       v == kSlowedReward + kBlockedReward;
    CHECK(known);
  }
  // terminal full (-10), biblioteca + multipiano vacant (+100), R1, R2.
  CHECK(nonzero == 5);
}
