#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace crawl {

/// Dense index of a road link within one loaded network. String ids are
/// resolved to indices at load time; all hot paths work on indices.
using LinkIndex = int;

struct NetworkError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownLink : NetworkError {
  explicit UnknownLink(const std::string& id)
      : NetworkError("unknown link: " + id) {}
};

struct UnreachableDestination : NetworkError {
  UnreachableDestination(const std::string& from, const std::string& to)
      : NetworkError("no route from " + from + " to " + to) {}
};

struct Link {
  std::string id;
  double length_m = 0.0;
  double speed_mps = 0.0;
  std::vector<LinkIndex> outgoing;  // file order, used for tie-breaking
  int lot = -1;                     // index into RoadNetwork::lots(), -1 if none
};

struct ParkingLot {
  std::string id;
  int capacity = 0;
  std::vector<LinkIndex> adjacent;
};

/// Immutable directed graph of road links. Links with no outgoing neighbor
/// are given a self-loop at load time so every conditional policy row has
/// non-empty support.
class RoadNetwork {
 public:
  /// Parses the JSON network document. Unknown fields are collected into
  /// `warnings` (when given) instead of failing the load.
  static RoadNetwork load(const std::string& json_text,
                          std::vector<std::string>* warnings = nullptr);
  static RoadNetwork load_file(const std::string& path,
                               std::vector<std::string>* warnings = nullptr);

  int link_count() const { return static_cast<int>(links_.size()); }
  const Link& link(LinkIndex x) const { return links_.at(x); }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<ParkingLot>& lots() const { return lots_; }

  LinkIndex index_of(const std::string& id) const;
  /// Returns -1 instead of throwing.
  LinkIndex find(const std::string& id) const;
  int lot_index(const std::string& id) const;

  const std::vector<LinkIndex>& outgoing(LinkIndex x) const;

  /// Free-flow traversal time of a link, seconds.
  double travel_time(LinkIndex x) const {
    const Link& l = links_.at(x);
    return l.length_m / l.speed_mps;
  }

  /// frontier[0] = {x0}; frontier[k] = image of frontier[k-1] under the
  /// outgoing relation. Each frontier is sorted by link index.
  std::vector<std::vector<LinkIndex>> reachable_frontiers(LinkIndex x0,
                                                          int steps) const;

  /// Minimum free-flow travel-time cost from every link to `dest`.
  /// Cost counts the travel time of every link entered after the start,
  /// so dist[dest] == 0. Unreachable links get +infinity.
  std::vector<double> distances_to(LinkIndex dest) const;

  /// Deterministic next hop from `x` toward `dest` along a cheapest route
  /// (ties broken by lexicographic link id). Returns -1 if unreachable.
  LinkIndex next_hop(LinkIndex x, LinkIndex dest,
                     const std::vector<double>& dist_to_dest) const;

  std::vector<LinkIndex> shortest_path(LinkIndex from, LinkIndex to) const;

  double mean_out_degree() const;

 private:
  std::vector<Link> links_;
  std::vector<ParkingLot> lots_;
  std::unordered_map<std::string, LinkIndex> by_id_;
};

}  // namespace crawl
