#include "crawl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace crawl {

using nlohmann::json;

namespace {

LinkStatus status_from_string(const std::string& s) {
  if (s == "slowed") return LinkStatus::slowed;
  if (s == "blocked") return LinkStatus::blocked;
  if (s == "normal") return LinkStatus::normal;
  throw ScenarioError("unknown condition status: " + s);
}

const char* status_to_string(LinkStatus s) {
  switch (s) {
    case LinkStatus::normal:
      return "normal";
    case LinkStatus::slowed:
      return "slowed";
    case LinkStatus::blocked:
      return "blocked";
  }
  return "?";
}

}  // namespace

ScenarioConfig ScenarioConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  json doc = json::parse(in);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&base](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };

  ScenarioConfig cfg;
  cfg.network_file = resolve(doc.at("network").get<std::string>());
  if (doc.contains("start_time")) cfg.start_time = doc["start_time"];
  cfg.duration_s = doc.at("duration_s").get<double>();
  if (doc.contains("horizon")) cfg.horizon = doc["horizon"].get<int>();
  if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
  cfg.controlled_count = doc.at("controlled_count").get<int>();
  if (doc.contains("epsilon")) cfg.epsilon = doc["epsilon"].get<double>();

  const json& src = doc.at("sources");
  for (auto it = src.at("route").begin(); it != src.at("route").end(); ++it) {
    cfg.route_sources.emplace_back(it.key(), it.value().get<std::string>());
  }
  if (src.contains("merged")) {
    for (const json& jm : src["merged"]) {
      MergedSpec m;
      m.name = jm.at("name").get<std::string>();
      for (const json& c : jm.at("components")) m.components.push_back(c);
      for (const json& w : jm.at("weights")) m.weights.push_back(w);
      cfg.merged_sources.push_back(std::move(m));
    }
  }
  if (doc.contains("lot_source")) {
    for (auto it = doc["lot_source"].begin(); it != doc["lot_source"].end();
         ++it) {
      cfg.lot_source[it.key()] = it.value().get<std::string>();
    }
  }

  double prev_time = -1.0;
  for (const json& ja : doc.at("arrivals")) {
    ArrivalSpec a;
    a.time = ja.at("time").get<double>();
    a.origin = ja.at("origin").get<std::string>();
    a.dest_lot = ja.at("dest_lot").get<std::string>();
    a.target = ja.at("target").get<std::string>();
    if (a.time < prev_time) {
      throw ScenarioError("arrival times must be non-decreasing");
    }
    prev_time = a.time;
    cfg.arrivals.push_back(std::move(a));
  }

  if (doc.contains("obstructions")) {
    for (const json& jo : doc["obstructions"]) {
      ObstructionSpec o;
      o.link = jo.at("link").get<std::string>();
      o.status = status_from_string(jo.at("status").get<std::string>());
      if (jo.contains("speed_mps")) o.speed_mps = jo["speed_mps"].get<double>();
      if (jo.contains("from_s")) o.from_s = jo["from_s"].get<double>();
      cfg.obstructions.push_back(std::move(o));
    }
  }

  if (doc.contains("feed")) {
    cfg.feed_file = resolve(doc["feed"].at("file").get<std::string>());
    cfg.alias_file = resolve(doc["feed"].at("aliases").get<std::string>());
    if (doc["feed"].contains("poll_s")) cfg.feed_poll_s = doc["feed"]["poll_s"];
  }
  return cfg;
}

std::string TraceLog::to_csv() const {
  std::string out = "time,vehicle,event,link,detail\n";
  char buf[64];
  for (const TraceRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%.3f", r.time);
    out += buf;
    out += ',';
    out += std::to_string(r.vehicle);
    out += ',';
    out += r.event;
    out += ',';
    out += r.link;
    out += ',';
    out += r.detail;
    out += '\n';
  }
  return out;
}

struct Simulation::Impl {
  enum class EventType { arrive, transition, obstruction, feed_poll };
  struct Event {
    double time;
    std::uint64_t seq;
    EventType type;
    int index;  // vehicle or obstruction index
    bool operator>(const Event& other) const {
      if (time != other.time) return time > other.time;
      return seq > other.seq;
    }
  };

  ScenarioConfig cfg;
  RoadNetwork net;
  std::vector<SourcePolicy> sources;
  std::map<std::string, int> source_index;
  Planner planner;
  std::mt19937_64 rng;

  std::vector<VehicleState> vehicles;
  std::vector<int> occupancy;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue;
  std::uint64_t seq = 0;
  double clock = 0.0;
  bool finished = false;

  // Active conditions, one slot per link; -1 activation = inactive.
  std::vector<LinkStatus> cond_status;
  std::vector<double> cond_speed;
  std::vector<double> cond_from;

  ReplayFeedSource feed;
  bool has_feed = false;
  AliasTable aliases;
  std::size_t feed_cursor = 0;
  std::int64_t start_epoch = 0;

  TraceLog log;

  explicit Impl(const ScenarioConfig& c)
      : cfg(c),
        net(RoadNetwork::load_file(c.network_file)),
        planner((net)),
        rng(c.seed) {
    build_sources();
    init_conditions();
    init_feed();
    init_vehicles();
    log.duration_s = cfg.duration_s;
    log.vehicle_count = static_cast<int>(vehicles.size());
  }

  void build_sources() {
    for (const auto& [label, dest_id] : cfg.route_sources) {
      const LinkIndex dest = net.index_of(dest_id);
      source_index[label] = static_cast<int>(sources.size());
      sources.push_back(make_route_source(net, dest, cfg.epsilon, label));
    }
    for (const auto& m : cfg.merged_sources) {
      std::vector<const SourcePolicy*> parts;
      for (const std::string& c : m.components) {
        auto it = source_index.find(c);
        if (it == source_index.end()) {
          throw ScenarioError("merged source references unknown label " + c);
        }
        parts.push_back(&sources[it->second]);
      }
      source_index[m.name] = static_cast<int>(sources.size());
      sources.push_back(merge_sources(net, parts, m.weights, m.name));
    }
  }

  void init_conditions() {
    cond_status.assign(net.link_count(), LinkStatus::normal);
    cond_speed.assign(net.link_count(), 0.0);
    cond_from.assign(net.link_count(), -1.0);
    for (std::size_t i = 0; i < cfg.obstructions.size(); ++i) {
      const ObstructionSpec& o = cfg.obstructions[i];
      net.index_of(o.link);  // validate
      push_event(o.from_s, EventType::obstruction, static_cast<int>(i));
    }
  }

  void init_feed() {
    if (cfg.feed_file.empty()) return;
    feed = ReplayFeedSource::load(cfg.feed_file);
    aliases = load_alias_table(cfg.alias_file);
    has_feed = true;
    start_epoch = parse_instant(cfg.start_time);
    for (double t = cfg.feed_poll_s; t <= cfg.duration_s; t += cfg.feed_poll_s) {
      push_event(t, EventType::feed_poll, 0);
    }
  }

  void init_vehicles() {
    const int n = static_cast<int>(cfg.arrivals.size());
    if (cfg.controlled_count < 0 || cfg.controlled_count > n) {
      throw ScenarioError("controlled_count out of range");
    }
    // Shuffle trip specs across the fixed departure slots, then assign
    // which departures are controlled.
    std::vector<int> trip(n), flag(n);
    for (int i = 0; i < n; ++i) trip[i] = i;
    std::shuffle(trip.begin(), trip.end(), rng);
    for (int i = 0; i < n; ++i) flag[i] = i < cfg.controlled_count ? 1 : 0;
    std::shuffle(flag.begin(), flag.end(), rng);

    occupancy.assign(net.lots().size(), 0);
    vehicles.resize(n);
    for (int i = 0; i < n; ++i) {
      const ArrivalSpec& spec = cfg.arrivals[trip[i]];
      VehicleState& v = vehicles[i];
      v.id = i;
      v.kind = flag[i] ? VehicleKind::controlled : VehicleKind::uncontrolled;
      v.target_label = spec.target;
      v.dest_lot = net.lot_index(spec.dest_lot);
      if (v.dest_lot < 0) throw ScenarioError("unknown lot " + spec.dest_lot);
      v.current_link = net.index_of(spec.origin);
      if (v.kind == VehicleKind::controlled &&
          !source_index.count(v.target_label)) {
        throw ScenarioError("unknown target source " + v.target_label);
      }
      push_event(cfg.arrivals[i].time, EventType::arrive, i);
    }
    log.obstruction_accum.assign(n, 0.0);
    log.plan_counts.assign(n, 0);
    log.enter_counts.assign(n, 0);
    log.parked.assign(n, 0);
  }

  void push_event(double t, EventType type, int index) {
    queue.push(Event{t, seq++, type, index});
  }

  void record(double t, int vehicle, const char* event, LinkIndex link,
              std::string detail = "") {
    log.records.push_back(TraceRecord{
        t, vehicle, event, link >= 0 ? net.link(link).id : "", std::move(detail)});
  }

  bool obstructed(LinkIndex x) const {
    return cond_from[x] >= 0.0 && cond_status[x] != LinkStatus::normal;
  }
  bool blocked(LinkIndex x) const {
    return cond_from[x] >= 0.0 && cond_status[x] == LinkStatus::blocked;
  }

  double effective_speed(LinkIndex x) const {
    const double free = net.link(x).speed_mps;
    if (cond_from[x] >= 0.0 && cond_status[x] == LinkStatus::slowed) {
      return std::min(free, cond_speed[x]);
    }
    return free;
  }

  double traversal_time(LinkIndex x) const {
    return net.link(x).length_m / effective_speed(x);
  }

  std::vector<LinkCondition> active_conditions() const {
    std::vector<LinkCondition> out;
    for (LinkIndex x = 0; x < net.link_count(); ++x) {
      if (cond_from[x] >= 0.0 && cond_status[x] != LinkStatus::normal) {
        out.push_back(LinkCondition{x, cond_status[x], cond_speed[x]});
      }
    }
    return out;
  }

  // Obstruction exposure of a stay on `link` over [from, to).
  void accumulate_obstruction(VehicleState& v, LinkIndex link, double from,
                              double to) {
    if (!obstructed(link)) return;
    const double begin = std::max(from, cond_from[link]);
    if (to > begin) {
      v.obstruction_accum += to - begin;
      log.obstruction_accum[v.id] = v.obstruction_accum;
    }
  }

  // Free-flow route that never enters a blocked link. Returns the links
  // after `from`; empty when from == to. Throws when no route exists.
  std::vector<LinkIndex> route_avoiding_blocked(LinkIndex from, LinkIndex to) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(net.link_count(), inf);
    std::vector<LinkIndex> pred(net.link_count(), -1);
    using Item = std::pair<double, LinkIndex>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[from] = 0.0;
    pq.emplace(0.0, from);
    while (!pq.empty()) {
      auto [d, x] = pq.top();
      pq.pop();
      if (d > dist[x]) continue;
      if (x == to) break;
      for (LinkIndex y : net.outgoing(x)) {
        if (y != to && blocked(y)) continue;
        if (y == to && blocked(y)) continue;
        const double nd = d + net.travel_time(y);
        if (nd < dist[y] - 1e-12 ||
            (nd <= dist[y] + 1e-12 && pred[y] >= 0 &&
             net.link(x).id < net.link(pred[y]).id)) {
          if (nd < dist[y]) dist[y] = nd;
          pred[y] = x;
          pq.emplace(nd, y);
        }
      }
    }
    if (from != to && dist[to] == inf) {
      throw UnreachableDestination(net.link(from).id, net.link(to).id);
    }
    std::vector<LinkIndex> path;
    for (LinkIndex x = to; x != from; x = pred[x]) path.push_back(x);
    std::reverse(path.begin(), path.end());
    return path;
  }

  // Lot-adjacent link with the cheapest approach from `from`, vacant lots
  // only. Returns (lot, adjacent link) or (-1, -1).
  std::pair<int, LinkIndex> nearest_vacant_lot(LinkIndex from, int exclude_lot) {
    int best_lot = -1;
    LinkIndex best_link = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t li = 0; li < net.lots().size(); ++li) {
      if (static_cast<int>(li) == exclude_lot) continue;
      if (occupancy[li] >= net.lots()[li].capacity) continue;
      for (LinkIndex a : net.lots()[li].adjacent) {
        double cost;
        try {
          const auto path = route_avoiding_blocked(from, a);
          cost = 0.0;
          for (LinkIndex x : path) cost += net.travel_time(x);
        } catch (const UnreachableDestination&) {
          continue;
        }
        if (cost < best_cost - 1e-12 ||
            (cost <= best_cost + 1e-12 && best_link >= 0 &&
             net.link(a).id < net.link(best_link).id)) {
          best_cost = cost;
          best_lot = static_cast<int>(li);
          best_link = a;
        }
      }
    }
    return {best_lot, best_link};
  }

  void assign_uncontrolled_route(VehicleState& v, double t) {
    // Head for the cheapest adjacent link of the destination lot.
    LinkIndex goal = -1;
    double best = std::numeric_limits<double>::infinity();
    for (LinkIndex a : net.lots()[v.dest_lot].adjacent) {
      try {
        const auto path = route_avoiding_blocked(v.current_link, a);
        double cost = 0.0;
        for (LinkIndex x : path) cost += net.travel_time(x);
        if (cost < best - 1e-12 ||
            (cost <= best + 1e-12 && goal >= 0 &&
             net.link(a).id < net.link(goal).id)) {
          best = cost;
          goal = a;
        }
      } catch (const UnreachableDestination&) {
      }
    }
    if (goal < 0) {
      v.route.clear();
      return;
    }
    v.route = route_avoiding_blocked(v.current_link, goal);
    (void)t;
  }

  void plan_controlled(VehicleState& v) {
    EnvSnapshot env{occupancy, active_conditions()};
    ControlConfig cc;
    cc.horizon = cfg.horizon;
    cc.sources = &sources;
    cc.target = &sources[source_index.at(v.target_label)];
    v.planned_next =
        receding_horizon_step(planner, net, v.current_link, env, cc, rng);
    v.plan_count++;
    log.plan_counts[v.id] = v.plan_count;
  }

  void enter_link(VehicleState& v, LinkIndex x, double t) {
    v.current_link = x;
    v.link_entry_time = t;
    v.enter_count++;
    log.enter_counts[v.id] = v.enter_count;
    record(t, v.id, "enter_link", x);
    if (v.kind == VehicleKind::controlled) {
      plan_controlled(v);
    } else {
      v.planned_next = v.route.empty() ? -1 : v.route.front();
      if (!v.route.empty()) v.route.erase(v.route.begin());
    }
    push_event(t + traversal_time(x), EventType::transition, v.id);
  }

  void handle_arrive(const Event& ev) {
    VehicleState& v = vehicles[ev.index];
    v.status = VehicleStatus::driving;
    v.entry_time = ev.time;
    record(ev.time, v.id, "arrive", v.current_link);
    if (v.kind == VehicleKind::uncontrolled) {
      assign_uncontrolled_route(v, ev.time);
    }
    enter_link(v, v.current_link, ev.time);
  }

  bool try_park(VehicleState& v, double t) {
    const int lot = net.link(v.current_link).lot;
    if (lot < 0) return false;
    if (occupancy[lot] >= net.lots()[lot].capacity) return false;
    if (v.kind == VehicleKind::uncontrolled && lot != v.dest_lot) return false;
    occupancy[lot]++;
    v.status = VehicleStatus::parked;
    v.parked_time = t;
    log.parked[v.id] = 1;
    accumulate_obstruction(v, v.current_link, v.link_entry_time, t);
    record(t, v.id, "park", v.current_link, net.lots()[lot].id);
    return true;
  }

  void handle_transition(const Event& ev) {
    VehicleState& v = vehicles[ev.index];
    if (v.status != VehicleStatus::driving) return;
    const double t = ev.time;

    if (try_park(v, t)) return;

    const int lot_here = net.link(v.current_link).lot;
    if (v.kind == VehicleKind::uncontrolled) {
      if (v.planned_next < 0) {
        // Route exhausted at a full (or wrong) lot: pick a new non-full lot.
        const auto [new_lot, goal] = nearest_vacant_lot(v.current_link, -1);
        if (new_lot >= 0 && goal != v.current_link) {
          v.dest_lot = new_lot;
          record(t, v.id, "reroute", v.current_link, net.lots()[new_lot].id);
          v.route = route_avoiding_blocked(v.current_link, goal);
          v.planned_next = v.route.empty() ? -1 : v.route.front();
          if (!v.route.empty()) v.route.erase(v.route.begin());
        }
        if (v.planned_next < 0) {
          // Nowhere to go; idle on the current link.
          accumulate_obstruction(v, v.current_link, v.link_entry_time, t);
          v.link_entry_time = t;
          push_event(t + traversal_time(v.current_link), EventType::transition,
                     v.id);
          return;
        }
      }
    } else if (lot_here >= 0 &&
               occupancy[lot_here] >= net.lots()[lot_here].capacity) {
      // Controlled car sitting at a full lot that its target routes to:
      // hand it a target for the nearest lot with space.
      auto ls = cfg.lot_source.find(net.lots()[lot_here].id);
      if (ls != cfg.lot_source.end() && ls->second == v.target_label) {
        const auto [new_lot, goal] = nearest_vacant_lot(v.current_link, lot_here);
        (void)goal;
        if (new_lot >= 0) {
          auto nl = cfg.lot_source.find(net.lots()[new_lot].id);
          if (nl != cfg.lot_source.end()) {
            v.target_label = nl->second;
            record(t, v.id, "reroute", v.current_link, net.lots()[new_lot].id);
          }
        }
      }
    }

    LinkIndex next = v.planned_next;
    if (next >= 0 && blocked(next)) {
      record(t, v.id, "blocked_skip", next);
      if (v.kind == VehicleKind::controlled) {
        // Entry refused; redistribute over the unblocked neighbors.
        std::vector<LinkIndex> open;
        for (LinkIndex y : net.outgoing(v.current_link)) {
          if (!blocked(y)) open.push_back(y);
        }
        if (open.empty()) {
          next = -1;
        } else {
          std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
          next = open[pick(rng)];
        }
      } else {
        try {
          assign_uncontrolled_route(v, t);
          next = v.route.empty() ? -1 : v.route.front();
          if (!v.route.empty()) v.route.erase(v.route.begin());
        } catch (const UnreachableDestination&) {
          next = -1;
        }
      }
    }

    accumulate_obstruction(v, v.current_link, v.link_entry_time, t);
    if (next < 0) {
      v.link_entry_time = t;
      push_event(t + traversal_time(v.current_link), EventType::transition,
                 v.id);
      return;
    }
    enter_link(v, next, t);
  }

  void handle_obstruction(const Event& ev) {
    const ObstructionSpec& o = cfg.obstructions[ev.index];
    const LinkIndex x = net.index_of(o.link);
    cond_status[x] = o.status;
    cond_speed[x] = o.speed_mps;
    cond_from[x] = ev.time;
    log.conditions.push_back(TraceLog::ConditionWindow{o.link, o.status, ev.time});
  }

  void activate_block(LinkIndex x, double t) {
    if (blocked(x)) return;  // duplicate reports are no-ops
    cond_status[x] = LinkStatus::blocked;
    cond_speed[x] = 0.0;
    cond_from[x] = t;
    log.conditions.push_back(
        TraceLog::ConditionWindow{net.link(x).id, LinkStatus::blocked, t});
  }

  void handle_feed_poll(const Event& ev) {
    if (!has_feed) return;
    auto [fresh, cursor] =
        feed.poll(feed_cursor, start_epoch + static_cast<std::int64_t>(ev.time));
    feed_cursor = cursor;
    const std::int64_t today =
        day_of(start_epoch + static_cast<std::int64_t>(ev.time));
    for (const FeedMessage& m : fresh) {
      const ParseOutcome outcome =
          parse_message(m, aliases, net, today, ev.time);
      if (outcome.accepted()) activate_block(outcome.event->link, ev.time);
    }
  }

  bool all_parked() const {
    for (const VehicleState& v : vehicles) {
      if (v.status != VehicleStatus::parked) return false;
    }
    return !vehicles.empty();
  }

  bool step() {
    if (finished) return false;
    while (!queue.empty()) {
      const Event ev = queue.top();
      if (ev.time > cfg.duration_s) break;
      queue.pop();
      clock = ev.time;
      switch (ev.type) {
        case EventType::arrive:
          handle_arrive(ev);
          break;
        case EventType::transition:
          handle_transition(ev);
          break;
        case EventType::obstruction:
          handle_obstruction(ev);
          break;
        case EventType::feed_poll:
          handle_feed_poll(ev);
          break;
      }
      if (all_parked()) break;
      return true;
    }
    finish();
    return false;
  }

  void finish() {
    if (finished) return;
    finished = true;
    // Close out obstruction exposure for vehicles still driving.
    for (VehicleState& v : vehicles) {
      if (v.status == VehicleStatus::driving) {
        accumulate_obstruction(v, v.current_link, v.link_entry_time,
                               cfg.duration_s);
      }
    }
  }
};

Simulation::Simulation(const ScenarioConfig& cfg)
    : impl_(std::make_unique<Impl>(cfg)) {}
Simulation::~Simulation() = default;

bool Simulation::step() { return impl_->step(); }

TraceLog Simulation::take_log() {
  impl_->finish();
  return impl_->log;
}

double Simulation::clock() const { return impl_->clock; }
const RoadNetwork& Simulation::network() const { return impl_->net; }
const std::vector<VehicleState>& Simulation::vehicles() const {
  return impl_->vehicles;
}
const std::vector<int>& Simulation::lot_occupancy() const {
  return impl_->occupancy;
}
const std::vector<SourcePolicy>& Simulation::sources() const {
  return impl_->sources;
}

TraceLog run_scenario(const ScenarioConfig& cfg) {
  Simulation sim(cfg);
  while (sim.step()) {
  }
  return sim.take_log();
}

}  // namespace crawl
