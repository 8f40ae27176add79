#include "crawl/road_network.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

namespace crawl {

using nlohmann::json;

namespace {

void warn_unknown_fields(const json& obj, const std::set<std::string>& known,
                         const std::string& where,
                         std::vector<std::string>* warnings) {
  if (!warnings) return;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) {
      warnings->push_back("unknown field '" + it.key() + "' in " + where);
    }
  }
}

}  // namespace

RoadNetwork RoadNetwork::load_file(const std::string& path,
                                   std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw NetworkError("cannot open network file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load(buf.str(), warnings);
}

RoadNetwork RoadNetwork::load(const std::string& json_text,
                              std::vector<std::string>* warnings) {
  json doc = json::parse(json_text);
  warn_unknown_fields(doc, {"links", "lots"}, "network document", warnings);

  RoadNetwork net;
  if (!doc.contains("links") || !doc["links"].is_array()) {
    throw NetworkError("network document has no 'links' array");
  }

  for (const json& jl : doc["links"]) {
    warn_unknown_fields(jl, {"id", "length_m", "speed_mps", "out"},
                        "link entry", warnings);
    Link l;
    l.id = jl.at("id").get<std::string>();
    if (l.id.empty()) throw NetworkError("empty link id");
    l.length_m = jl.at("length_m").get<double>();
    l.speed_mps = jl.at("speed_mps").get<double>();
    if (l.length_m <= 0.0) throw NetworkError("non-positive length on " + l.id);
    if (l.speed_mps <= 0.0) throw NetworkError("non-positive speed on " + l.id);
    if (net.by_id_.count(l.id)) throw NetworkError("duplicate link id: " + l.id);
    net.by_id_[l.id] = static_cast<LinkIndex>(net.links_.size());
    net.links_.push_back(std::move(l));
  }

  // Second pass: resolve neighbor references, keeping file order.
  {
    std::size_t i = 0;
    for (const json& jl : doc["links"]) {
      Link& l = net.links_[i++];
      for (const json& out : jl.at("out")) {
        const std::string nid = out.get<std::string>();
        auto it = net.by_id_.find(nid);
        if (it == net.by_id_.end()) {
          throw NetworkError("link " + l.id + " references undefined neighbor " +
                             nid);
        }
        l.outgoing.push_back(it->second);
      }
    }
  }

  // Dead ends self-loop so every row has support.
  for (LinkIndex x = 0; x < net.link_count(); ++x) {
    if (net.links_[x].outgoing.empty()) net.links_[x].outgoing.push_back(x);
  }

  if (doc.contains("lots")) {
    for (const json& jp : doc["lots"]) {
      warn_unknown_fields(jp, {"id", "capacity", "adjacent"}, "lot entry",
                          warnings);
      ParkingLot p;
      p.id = jp.at("id").get<std::string>();
      p.capacity = jp.at("capacity").get<int>();
      if (p.capacity < 0) throw NetworkError("negative capacity on lot " + p.id);
      for (const json& a : jp.at("adjacent")) {
        LinkIndex x = net.index_of(a.get<std::string>());
        p.adjacent.push_back(x);
      }
      if (p.adjacent.empty()) {
        throw NetworkError("lot " + p.id + " has no adjacent links");
      }
      const int li = static_cast<int>(net.lots_.size());
      for (LinkIndex x : p.adjacent) net.links_[x].lot = li;
      net.lots_.push_back(std::move(p));
    }
  }

  return net;
}

LinkIndex RoadNetwork::index_of(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw UnknownLink(id);
  return it->second;
}

LinkIndex RoadNetwork::find(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? -1 : it->second;
}

int RoadNetwork::lot_index(const std::string& id) const {
  for (std::size_t i = 0; i < lots_.size(); ++i) {
    if (lots_[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

const std::vector<LinkIndex>& RoadNetwork::outgoing(LinkIndex x) const {
  if (x < 0 || x >= link_count()) throw UnknownLink(std::to_string(x));
  return links_[x].outgoing;
}

std::vector<std::vector<LinkIndex>> RoadNetwork::reachable_frontiers(
    LinkIndex x0, int steps) const {
  if (x0 < 0 || x0 >= link_count()) throw UnknownLink(std::to_string(x0));
  std::vector<std::vector<LinkIndex>> frontiers;
  frontiers.reserve(steps + 1);
  frontiers.push_back({x0});
  std::vector<char> seen(links_.size(), 0);
  for (int k = 1; k <= steps; ++k) {
    std::vector<LinkIndex> next;
    for (LinkIndex x : frontiers.back()) {
      for (LinkIndex y : links_[x].outgoing) {
        if (!seen[y]) {
          seen[y] = 1;
          next.push_back(y);
        }
      }
    }
    for (LinkIndex y : next) seen[y] = 0;
    std::sort(next.begin(), next.end());
    frontiers.push_back(std::move(next));
  }
  return frontiers;
}

std::vector<double> RoadNetwork::distances_to(LinkIndex dest) const {
  if (dest < 0 || dest >= link_count()) throw UnknownLink(std::to_string(dest));
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(links_.size(), inf);
  std::vector<std::vector<LinkIndex>> rev(links_.size());
  for (LinkIndex x = 0; x < link_count(); ++x) {
    for (LinkIndex y : links_[x].outgoing) rev[y].push_back(x);
  }
  using Item = std::pair<double, LinkIndex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[dest] = 0.0;
  pq.emplace(0.0, dest);
  while (!pq.empty()) {
    auto [d, y] = pq.top();
    pq.pop();
    if (d > dist[y]) continue;
    // Predecessor x pays the travel time of the link it enters (y).
    const double step = travel_time(y);
    for (LinkIndex x : rev[y]) {
      if (x == y) continue;
      const double nd = d + step;
      if (nd < dist[x]) {
        dist[x] = nd;
        pq.emplace(nd, x);
      }
    }
  }
  return dist;
}

LinkIndex RoadNetwork::next_hop(LinkIndex x, LinkIndex dest,
                                const std::vector<double>& dist) const {
  if (x == dest) return dest;
  LinkIndex best = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  for (LinkIndex y : outgoing(x)) {
    if (dist[y] == std::numeric_limits<double>::infinity()) continue;
    const double c = travel_time(y) + dist[y];
    if (c < best_cost - 1e-12 ||
        (c <= best_cost + 1e-12 && best >= 0 &&
         links_[y].id < links_[best].id)) {
      best_cost = c;
      best = y;
    }
  }
  return best;
}

std::vector<LinkIndex> RoadNetwork::shortest_path(LinkIndex from,
                                                  LinkIndex to) const {
  if (from < 0 || from >= link_count()) throw UnknownLink(std::to_string(from));
  if (to < 0 || to >= link_count()) throw UnknownLink(std::to_string(to));
  if (from == to) return {from};
  const std::vector<double> dist = distances_to(to);
  if (dist[from] == std::numeric_limits<double>::infinity()) {
    throw UnreachableDestination(links_[from].id, links_[to].id);
  }
  std::vector<LinkIndex> path{from};
  LinkIndex cur = from;
  while (cur != to) {
    cur = next_hop(cur, to, dist);
    path.push_back(cur);
  }
  return path;
}

double RoadNetwork::mean_out_degree() const {
  if (links_.empty()) return 0.0;
  std::size_t total = 0;
  for (const Link& l : links_) total += l.outgoing.size();
  return static_cast<double>(total) / static_cast<double>(links_.size());
}

}  // namespace crawl
