#include "crawl/reward.hpp"

#include <stdexcept>

namespace crawl {

void RewardField::apply_block(LinkIndex x) {
  if (x < 0 || x >= static_cast<int>(values_.size())) {
    throw UnknownLink(std::to_string(x));
  }
  if (!blocked_.insert(x).second) return;
  values_[x] += kBlockedReward;
}

RewardField build_reward(const RoadNetwork& net,
                         const std::vector<int>& lot_occupancy,
                         const std::vector<LinkCondition>& conditions,
                         int horizon) {
  if (lot_occupancy.size() != net.lots().size()) {
    throw std::invalid_argument("occupancy vector does not match lot count");
  }
  RewardField field(horizon, net.link_count());
  for (std::size_t li = 0; li < net.lots().size(); ++li) {
    const ParkingLot& lot = net.lots()[li];
    if (lot_occupancy[li] > lot.capacity) {
      throw std::invalid_argument("occupancy exceeds capacity for lot " +
                                  lot.id);
    }
    const double r =
        lot_occupancy[li] < lot.capacity ? kVacantLotReward : kFullLotReward;
    for (LinkIndex x : lot.adjacent) field.add(x, r);
  }
  for (const LinkCondition& c : conditions) {
    if (c.link < 0 || c.link >= net.link_count()) {
      throw UnknownLink(std::to_string(c.link));
    }
    if (c.status == LinkStatus::slowed) {
      field.add(c.link, kSlowedReward);
    } else if (c.status == LinkStatus::blocked) {
      field.apply_block(c.link);
    }
  }
  return field;
}

}  // namespace crawl
