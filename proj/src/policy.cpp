#include "crawl/policy.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

namespace crawl {

using nlohmann::json;

void SourcePolicy::validate(const RoadNetwork& net) const {
  if (row_count() != net.link_count()) {
    throw PolicyError("policy '" + name_ + "' does not cover every link");
  }
  for (LinkIndex x = 0; x < net.link_count(); ++x) {
    const ConditionalRow& r = rows_[x];
    if (r.given != x || r.probs.size() != net.outgoing(x).size()) {
      throw PolicyError("policy '" + name_ + "' row mismatch at " +
                        net.link(x).id);
    }
    double sum = 0.0;
    for (double p : r.probs) {
      if (p < 0.0 || p > 1.0 + 1e-12) {
        throw PolicyError("probability out of range in policy '" + name_ +
                          "' at " + net.link(x).id);
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw PolicyError("row of policy '" + name_ + "' at " + net.link(x).id +
                        " sums to " + std::to_string(sum));
    }
  }
}

double kl_divergence(const ConditionalRow& a, const ConditionalRow& b) {
  if (a.given != b.given || a.probs.size() != b.probs.size()) {
    throw PolicyError("kl_divergence on rows with different conditioning");
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < a.probs.size(); ++i) {
    const double pa = a.probs[i];
    if (pa == 0.0) continue;
    const double pb = b.probs[i];
    if (pb == 0.0) {
      throw AbsoluteContinuityViolation(
          "source has mass on a neighbor with zero target probability");
    }
    kl += pa * std::log(pa / pb);
  }
  return kl < 0.0 ? 0.0 : kl;  // clamp -0 / rounding noise
}

SourcePolicy make_route_source(const RoadNetwork& net, LinkIndex destination,
                               double epsilon, std::string name) {
  if (destination < 0 || destination >= net.link_count()) {
    throw UnknownLink(std::to_string(destination));
  }
  if (epsilon <= 0.0 || epsilon >= 1.0) {
    throw PolicyError("epsilon must be in (0, 1)");
  }
  const std::vector<double> dist = net.distances_to(destination);
  std::vector<ConditionalRow> rows(net.link_count());
  for (LinkIndex x = 0; x < net.link_count(); ++x) {
    const auto& out = net.outgoing(x);
    const std::size_t d = out.size();
    ConditionalRow& r = rows[x];
    r.given = x;
    r.probs.assign(d, 0.0);
    const LinkIndex hop = net.next_hop(x, destination, dist);
    if (hop < 0) {
      r.probs.assign(d, 1.0 / static_cast<double>(d));
      continue;
    }
    if (d == 1) {
      r.probs[0] = 1.0;
      continue;
    }
    for (std::size_t i = 0; i < d; ++i) {
      r.probs[i] = out[i] == hop ? 1.0 - epsilon
                                 : epsilon / static_cast<double>(d - 1);
    }
  }
  return SourcePolicy(std::move(name), std::move(rows));
}

SourcePolicy merge_sources(const RoadNetwork& net,
                           const std::vector<const SourcePolicy*>& sources,
                           const std::vector<double>& weights,
                           std::string name) {
  if (sources.empty() || sources.size() != weights.size()) {
    throw PolicyError("merge_sources needs matching sources and weights");
  }
  double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(wsum - 1.0) > 1e-9) {
    throw PolicyError("merge weights must sum to 1");
  }
  for (const SourcePolicy* s : sources) {
    if (s->row_count() != net.link_count()) {
      throw PolicyError("merge_sources across different networks");
    }
  }
  std::vector<ConditionalRow> rows(net.link_count());
  for (LinkIndex x = 0; x < net.link_count(); ++x) {
    const std::size_t d = net.outgoing(x).size();
    ConditionalRow& r = rows[x];
    r.given = x;
    r.probs.assign(d, 0.0);
    for (std::size_t s = 0; s < sources.size(); ++s) {
      const ConditionalRow& src = sources[s]->row(x);
      for (std::size_t i = 0; i < d; ++i) r.probs[i] += weights[s] * src.probs[i];
    }
    // Absorb rounding only; anything larger is a caller bug.
    const double sum = std::accumulate(r.probs.begin(), r.probs.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-12) {
      for (double& p : r.probs) p /= sum;
    }
  }
  return SourcePolicy(std::move(name), std::move(rows));
}

SourcePolicy uniform_target(const RoadNetwork& net) {
  std::vector<ConditionalRow> rows(net.link_count());
  for (LinkIndex x = 0; x < net.link_count(); ++x) {
    const std::size_t d = net.outgoing(x).size();
    rows[x].given = x;
    rows[x].probs.assign(d, 1.0 / static_cast<double>(d));
  }
  return SourcePolicy("uniform", std::move(rows));
}

ContinuityReport validate_absolute_continuity(const RoadNetwork& net,
                                              const SourcePolicy& source,
                                              const SourcePolicy& target) {
  ContinuityReport report;
  for (LinkIndex x = 0; x < net.link_count(); ++x) {
    const ConditionalRow& a = source.row(x);
    const ConditionalRow& b = target.row(x);
    const auto& out = net.outgoing(x);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (a.probs[i] > 0.0 && b.probs[i] == 0.0) {
        report.violations.push_back({x, out[i]});
      }
    }
  }
  return report;
}

std::string SourcePolicy::to_json(const RoadNetwork& net) const {
  json doc = json::object();
  for (LinkIndex x = 0; x < net.link_count(); ++x) {
    json row = json::object();
    const auto& out = net.outgoing(x);
    for (std::size_t i = 0; i < out.size(); ++i) {
      row[net.link(out[i]).id] = rows_[x].probs[i];
    }
    doc[net.link(x).id] = std::move(row);
  }
  return doc.dump(2);
}

SourcePolicy SourcePolicy::from_json(const RoadNetwork& net,
                                     const std::string& json_text,
                                     std::string name) {
  json doc = json::parse(json_text);
  std::vector<ConditionalRow> rows(net.link_count());
  for (LinkIndex x = 0; x < net.link_count(); ++x) {
    const auto& out = net.outgoing(x);
    rows[x].given = x;
    rows[x].probs.assign(out.size(), 0.0);
    const json& row = doc.at(net.link(x).id);
    for (auto it = row.begin(); it != row.end(); ++it) {
      const LinkIndex y = net.index_of(it.key());
      bool found = false;
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] == y) {
          rows[x].probs[i] = it.value().get<double>();
          found = true;
          break;
        }
      }
      if (!found) {
        throw PolicyError("policy row at " + net.link(x).id +
                          " puts mass on non-neighbor " + it.key());
      }
    }
  }
  SourcePolicy p(std::move(name), std::move(rows));
  p.validate(net);
  return p;
}

}  // namespace crawl
