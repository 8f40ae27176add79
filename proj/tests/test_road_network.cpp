#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "crawl/road_network.hpp"

using namespace crawl;

namespace {

const char* kChain = R"({
  "links": [
    {"id": "A", "length_m": 100, "speed_mps": 10, "out": ["B"]},
    {"id": "B", "length_m": 100, "speed_mps": 10, "out": ["C"]},
    {"id": "C", "length_m": 100, "speed_mps": 10, "out": []}
  ],
  "lots": []
})";

// Depth-3 out-tree: root, 2 children, 4 grandchildren, 8 leaves.
std::string binary_tree_json() {
  std::ostringstream os;
  os << "{\"links\":[";
  bool first = true;
  auto emit = [&](const std::string& id, const std::string& l,
                  const std::string& r) {
    if (!first) os << ",";
    first = false;
    os << "{\"id\":\"" << id << "\",\"length_m\":50,\"speed_mps\":5,\"out\":[";
    if (!l.empty()) os << "\"" << l << "\",\"" << r << "\"";
    os << "]}";
  };
  emit("n", "n0", "n1");
  for (const std::string a : {"0", "1"}) emit("n" + a, "n" + a + "0", "n" + a + "1");
  for (const std::string a : {"00", "01", "10", "11"})
    emit("n" + a, "n" + a + "0", "n" + a + "1");
  for (const std::string a : {"000", "001", "010", "011", "100", "101", "110",
                              "111"})
    emit("n" + a, "", "");
  os << "],\"lots\":[]}";
  return os.str();
}

// Random strongly-sparse digraph used for shortest-path oracle checks.
RoadNetwork random_network(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> len(50.0, 300.0);
  std::uniform_real_distribution<double> spd(5.0, 30.0);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::uniform_int_distribution<int> deg(0, 3);
  std::ostringstream os;
  os << "{\"links\":[";
  for (int i = 0; i < n; ++i) {
    if (i) os << ",";
    std::set<int> outs;
    const int d = deg(rng);
    for (int j = 0; j < d; ++j) {
      int t = pick(rng);
      if (t != i) outs.insert(t);
    }
    os << "{\"id\":\"L" << i << "\",\"length_m\":" << len(rng)
       << ",\"speed_mps\":" << spd(rng) << ",\"out\":[";
    bool first = true;
    for (int t : outs) {
      if (!first) os << ",";
      first = false;
      os << "\"L" << t << "\"";
    }
    os << "]}";
  }
  os << "],\"lots\":[]}";
  return RoadNetwork::load(os.str());
}

// Independent Bellman-Ford oracle for distances_to.
std::vector<double> bellman_ford_to(const RoadNetwork& net, LinkIndex dest) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(net.link_count(), inf);
  dist[dest] = 0.0;
  for (int pass = 0; pass < net.link_count(); ++pass) {
    bool changed = false;
    for (LinkIndex x = 0; x < net.link_count(); ++x) {
      for (LinkIndex y : net.outgoing(x)) {
        const double cand = net.travel_time(y) + dist[y];
        if (cand < dist[x] - 1e-12) {
          dist[x] = cand;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return dist;
}

}  // namespace

TEST_CASE("load resolves links and keeps file order") {
  const RoadNetwork net = RoadNetwork::load(kChain);
  CHECK(net.link_count() == 3);
  const LinkIndex a = net.index_of("A");
  CHECK(net.outgoing(a).size() == 1);
  CHECK(net.link(net.outgoing(a)[0]).id == "B");
  CHECK(net.travel_time(a) == doctest::Approx(10.0));
}

TEST_CASE("dead ends get a self-loop") {
  const RoadNetwork net = RoadNetwork::load(kChain);
  const LinkIndex c = net.index_of("C");
  REQUIRE(net.outgoing(c).size() == 1);
  CHECK(net.outgoing(c)[0] == c);
}

TEST_CASE("load rejects malformed documents") {
  CHECK_THROWS_AS(RoadNetwork::load(R"({"links":[
    {"id":"A","length_m":1,"speed_mps":1,"out":[]},
    {"id":"A","length_m":1,"speed_mps":1,"out":[]}],"lots":[]})"),
                  NetworkError);  // duplicate id
  CHECK_THROWS_AS(RoadNetwork::load(R"({"links":[
    {"id":"A","length_m":1,"speed_mps":1,"out":["Z"]}],"lots":[]})"),
                  NetworkError);  // dangling neighbor
  CHECK_THROWS_AS(RoadNetwork::load(R"({"links":[
    {"id":"A","length_m":0,"speed_mps":1,"out":[]}],"lots":[]})"),
                  NetworkError);  // non-positive length
  CHECK_THROWS_AS(RoadNetwork::load(R"({"links":[
    {"id":"A","length_m":1,"speed_mps":-2,"out":[]}],"lots":[]})"),
                  NetworkError);  // non-positive speed
  CHECK_THROWS_AS(RoadNetwork::load(R"({"links":[
    {"id":"A","length_m":1,"speed_mps":1,"out":[]}],
    "lots":[{"id":"p","capacity":1,"adjacent":["Z"]}]})"),
                  NetworkError);  // lot adjacency dangling
}

TEST_CASE("unknown fields produce warnings, not failures") {
  std::vector<std::string> warnings;
  const RoadNetwork net = RoadNetwork::load(R"({"links":[
    {"id":"A","length_m":1,"speed_mps":1,"out":[],"color":"red"}],
    "lots":[]})", &warnings);
  CHECK(net.link_count() == 1);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("color") != std::string::npos);
}

TEST_CASE("lookup helpers") {
  const RoadNetwork net = RoadNetwork::load(kChain);
  CHECK(net.find("B") == net.index_of("B"));
  CHECK(net.find("missing") == -1);
  CHECK_THROWS_AS(net.index_of("missing"), UnknownLink);
}

TEST_CASE("reachable_frontiers on a chain") {
  const RoadNetwork net = RoadNetwork::load(kChain);
  const auto f = net.reachable_frontiers(net.index_of("A"), 2);
  REQUIRE(f.size() == 3);
  CHECK(f[0] == std::vector<LinkIndex>{net.index_of("A")});
  CHECK(f[1] == std::vector<LinkIndex>{net.index_of("B")});
  CHECK(f[2] == std::vector<LinkIndex>{net.index_of("C")});
}

TEST_CASE("reachable_frontiers sizes on a binary tree") {
  const RoadNetwork net = RoadNetwork::load(binary_tree_json());
  const auto f = net.reachable_frontiers(net.index_of("n"), 3);
  REQUIRE(f.size() == 4);
  CHECK(f[0].size() == 1);
  CHECK(f[1].size() == 2);
  CHECK(f[2].size() == 4);
  CHECK(f[3].size() == 8);
}

TEST_CASE("frontier equals independent BFS image on random graphs") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const RoadNetwork net = random_network(rng, 15);
    const LinkIndex x0 = static_cast<LinkIndex>(trial % net.link_count());
    const auto f = net.reachable_frontiers(x0, 4);
    std::set<LinkIndex> level{x0};
    for (int k = 0; k <= 4; ++k) {
      const std::vector<LinkIndex> expect(level.begin(), level.end());
      CHECK(f[k] == expect);
      std::set<LinkIndex> next;
      for (LinkIndex x : level)
        for (LinkIndex y : net.outgoing(x)) next.insert(y);
      level = std::move(next);
    }
  }
}

TEST_CASE("distances_to matches Bellman-Ford on random graphs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const RoadNetwork net = random_network(rng, 20);
    const LinkIndex dest = static_cast<LinkIndex>(trial % net.link_count());
    const auto dij = net.distances_to(dest);
    const auto oracle = bellman_ford_to(net, dest);
    for (LinkIndex x = 0; x < net.link_count(); ++x) {
      if (std::isinf(oracle[x])) {
        CHECK(std::isinf(dij[x]));
      } else {
        CHECK(dij[x] == doctest::Approx(oracle[x]).epsilon(1e-9));
      }
    }
    CHECK(dij[dest] == 0.0);
  }
}

TEST_CASE("shortest_path is consistent with distances and next hops") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const RoadNetwork net = random_network(rng, 20);
    const LinkIndex dest = static_cast<LinkIndex>((trial * 3) % net.link_count());
    const auto dist = net.distances_to(dest);
    for (LinkIndex from = 0; from < net.link_count(); ++from) {
      if (std::isinf(dist[from])) {
        CHECK_THROWS_AS(net.shortest_path(from, dest), UnreachableDestination);
        CHECK(net.next_hop(from, dest, dist) == -1);
        continue;
      }
      const auto path = net.shortest_path(from, dest);
      REQUIRE(!path.empty());
      CHECK(path.front() == from);
      CHECK(path.back() == dest);
      double cost = 0.0;
      for (std::size_t i = 1; i < path.size(); ++i) {
        const auto& outs = net.outgoing(path[i - 1]);
        CHECK(std::find(outs.begin(), outs.end(), path[i]) != outs.end());
        cost += net.travel_time(path[i]);
      }
      CHECK(cost == doctest::Approx(dist[from]).epsilon(1e-9));
    }
  }
}

TEST_CASE("shortest_path from == to") {
  const RoadNetwork net = RoadNetwork::load(kChain);
  const auto p = net.shortest_path(net.index_of("B"), net.index_of("B"));
  CHECK(p == std::vector<LinkIndex>{net.index_of("B")});
}

TEST_CASE("next_hop ties break on lexicographic link id") {
  // Two equal-cost parallel routes A->{B2,B1}->D; B1 must win.
  const RoadNetwork net = RoadNetwork::load(R"({"links":[
    {"id":"A","length_m":100,"speed_mps":10,"out":["B2","B1"]},
    {"id":"B2","length_m":100,"speed_mps":10,"out":["D"]},
    {"id":"B1","length_m":100,"speed_mps":10,"out":["D"]},
    {"id":"D","length_m":100,"speed_mps":10,"out":[]}],"lots":[]})");
  const LinkIndex d = net.index_of("D");
  const auto dist = net.distances_to(d);
  CHECK(net.next_hop(net.index_of("A"), d, dist) == net.index_of("B1"));
}

TEST_CASE("campus fixture loads with expected shape") {
  const RoadNetwork net =
      RoadNetwork::load_file(std::string(CRAWL_DATA_DIR) + "/campus.json");
  CHECK(net.link_count() == 364);
  CHECK(net.mean_out_degree() == doctest::Approx(7.35).epsilon(0.01));
  REQUIRE(net.lots().size() == 3);
  for (const ParkingLot& lot : net.lots()) {
    CHECK(lot.capacity == 10);
    CHECK(!lot.adjacent.empty());
  }
  // The highway ramp is the fastest way from the north entrance to the
  // terminal lot's street.
  const auto path = net.shortest_path(net.index_of("L_00_09"),
                                      net.index_of("L_03_10"));
  REQUIRE(path.size() >= 3);
  CHECK(net.link(path[1]).id == "R1");
  // Lot-adjacent links know their lot.
  CHECK(net.link(net.index_of("L_03_10")).lot == net.lot_index("terminal"));
}
