#pragma once

#include <string>
#include <vector>

#include "crawl/road_network.hpp"

namespace crawl {

struct AbsoluteContinuityViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PolicyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One conditional distribution pi(. | given). Probabilities are aligned
/// with net.outgoing(given), which pins support to the outgoing neighbors.
struct ConditionalRow {
  LinkIndex given = -1;
  std::vector<double> probs;
};

/// A full turning-probability table: one row per network link.
class SourcePolicy {
 public:
  SourcePolicy() = default;
  SourcePolicy(std::string name, std::vector<ConditionalRow> rows)
      : name_(std::move(name)), rows_(std::move(rows)) {}

  const std::string& name() const { return name_; }
  const ConditionalRow& row(LinkIndex x) const { return rows_.at(x); }
  int row_count() const { return static_cast<int>(rows_.size()); }

  /// Throws PolicyError if any row fails the sum-to-one invariant (1e-9)
  /// or has a probability outside [0, 1].
  void validate(const RoadNetwork& net) const;

  std::string to_json(const RoadNetwork& net) const;
  static SourcePolicy from_json(const RoadNetwork& net,
                                const std::string& json_text,
                                std::string name);

 private:
  std::string name_;
  std::vector<ConditionalRow> rows_;
};

/// KL divergence in nats between two rows conditioned on the same link.
/// 0*log0 contributes 0; throws AbsoluteContinuityViolation when a has
/// mass where b does not.
double kl_divergence(const ConditionalRow& a, const ConditionalRow& b);

/// Builds a routed source toward `destination`: the cheapest next hop gets
/// 1-epsilon, the remaining d-1 neighbors share epsilon uniformly. Links
/// with a single neighbor get probability 1; links that cannot reach the
/// destination get the uniform row.
SourcePolicy make_route_source(const RoadNetwork& net, LinkIndex destination,
                               double epsilon, std::string name);

/// Row-wise convex combination of same-network sources.
SourcePolicy merge_sources(const RoadNetwork& net,
                           const std::vector<const SourcePolicy*>& sources,
                           const std::vector<double>& weights,
                           std::string name);

SourcePolicy uniform_target(const RoadNetwork& net);

struct ContinuityReport {
  struct Pair {
    LinkIndex given;
    LinkIndex neighbor;
  };
  std::vector<Pair> violations;
  bool ok() const { return violations.empty(); }
};

/// ok iff support(source row) is contained in support(target row) for every
/// link; the report lists each offending (link, neighbor) pair.
ContinuityReport validate_absolute_continuity(const RoadNetwork& net,
                                              const SourcePolicy& source,
                                              const SourcePolicy& target);

}  // namespace crawl
