#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "crawl/dm.hpp"
#include "crawl/feed.hpp"
#include "crawl/policy.hpp"
#include "crawl/reward.hpp"
#include "crawl/road_network.hpp"

namespace crawl {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class VehicleKind { controlled, uncontrolled };
enum class VehicleStatus { pending, driving, parked };

struct VehicleState {
  int id = -1;
  VehicleKind kind = VehicleKind::uncontrolled;
  VehicleStatus status = VehicleStatus::pending;
  LinkIndex current_link = -1;
  double entry_time = 0.0;
  double parked_time = -1.0;
  double link_entry_time = 0.0;
  double obstruction_accum = 0.0;
  int plan_count = 0;
  int enter_count = 0;
  // Uncontrolled: remaining route (next link first) and destination lot.
  std::vector<LinkIndex> route;
  int dest_lot = -1;
  // Controlled: label of the current target source.
  std::string target_label;
  LinkIndex planned_next = -1;
};

struct ArrivalSpec {
  double time = 0.0;
  std::string origin;
  std::string dest_lot;
  std::string target;  // source label used when the vehicle is controlled
};

struct ObstructionSpec {
  std::string link;
  LinkStatus status = LinkStatus::slowed;
  double speed_mps = 0.0;
  double from_s = 0.0;
};

struct ScenarioConfig {
  std::string network_file;
  std::string start_time = "2023-05-15T08:00:00Z";
  double duration_s = 3600.0;
  int horizon = 3;
  std::uint64_t seed = 1;
  int controlled_count = 0;
  double epsilon = 0.1;
  // label -> destination link id for routed sources.
  std::vector<std::pair<std::string, std::string>> route_sources;
  struct MergedSpec {
    std::string name;
    std::vector<std::string> components;
    std::vector<double> weights;
  };
  std::vector<MergedSpec> merged_sources;
  // lot id -> source label, used when reassigning targets at full lots.
  std::map<std::string, std::string> lot_source;
  std::vector<ArrivalSpec> arrivals;
  std::vector<ObstructionSpec> obstructions;
  std::string feed_file;   // optional, newline-delimited JSON
  std::string alias_file;  // required when feed_file is set
  double feed_poll_s = 15.0;

  /// Loads a scenario JSON document; file references are resolved
  /// relative to the config's directory.
  static ScenarioConfig load_file(const std::string& path);
};

struct TraceRecord {
  double time = 0.0;
  int vehicle = -1;
  std::string event;  // arrive | enter_link | park | reroute | blocked_skip
  std::string link;
  std::string detail;
};

struct TraceLog {
  std::vector<TraceRecord> records;
  double duration_s = 0.0;
  int vehicle_count = 0;
  struct ConditionWindow {
    std::string link;
    LinkStatus status = LinkStatus::slowed;
    double from_s = 0.0;
  };
  std::vector<ConditionWindow> conditions;
  // Simulator-side accounting, cross-checked against the records in tests.
  std::vector<double> obstruction_accum;
  std::vector<int> plan_counts;
  std::vector<int> enter_counts;
  std::vector<char> parked;

  std::string to_csv() const;
};

/// Discrete-event run of one scenario. Construction performs the seeded
/// shuffle of arrivals and the random controlled/uncontrolled assignment.
class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& cfg);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Processes the next event; false when the run is over.
  bool step();
  TraceLog take_log();

  double clock() const;
  const RoadNetwork& network() const;
  const std::vector<VehicleState>& vehicles() const;
  const std::vector<int>& lot_occupancy() const;
  const std::vector<SourcePolicy>& sources() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

TraceLog run_scenario(const ScenarioConfig& cfg);

}  // namespace crawl
