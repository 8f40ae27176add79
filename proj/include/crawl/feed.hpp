#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crawl/road_network.hpp"

namespace crawl {

struct FeedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FeedMessage {
  std::string author;
  std::string timestamp;  // ISO-8601 instant, e.g. 2023-05-12T08:30:00Z
  std::string text;
};

/// Seconds since the Unix epoch; throws FeedError on malformed input.
std::int64_t parse_instant(const std::string& iso8601);
/// Days since the Unix epoch (UTC day granularity).
std::int64_t day_of(std::int64_t epoch_seconds);

struct BlockEvent {
  LinkIndex link = -1;
  FeedMessage source_message;
  double detected_at = 0.0;  // simulation time, seconds
};

enum class IgnoreReason {
  missing_hashtag,
  missing_keyword,
  no_link_identifier,
  stale_date,
};

const char* to_string(IgnoreReason r);

struct ParseOutcome {
  std::optional<BlockEvent> event;
  IgnoreReason reason = IgnoreReason::missing_hashtag;
  bool accepted() const { return event.has_value(); }
};

/// Lowercased phrase -> link id. Longest token-span match wins.
using AliasTable = std::map<std::string, std::string>;

AliasTable load_alias_table(const std::string& path);

/// Applies the four acceptance conditions in fixed order: the
/// #sumo_experiment hashtag, the word "blocked", a known link phrase,
/// and a message date no earlier than `now_day`. Rejections carry the
/// first failed condition.
ParseOutcome parse_message(const FeedMessage& msg, const AliasTable& aliases,
                           const RoadNetwork& net, std::int64_t now_day,
                           double sim_time);

/// Replayable feed backed by a newline-delimited JSON file, ordered by
/// timestamp. poll() returns the messages whose timestamps have passed,
/// strictly after the cursor, and the advanced cursor.
class ReplayFeedSource {
 public:
  static ReplayFeedSource load(const std::string& path);

  std::pair<std::vector<FeedMessage>, std::size_t> poll(
      std::size_t cursor, std::int64_t now_epoch_seconds) const;

  const std::vector<FeedMessage>& messages() const { return messages_; }

 private:
  std::vector<FeedMessage> messages_;  // sorted by instant
  std::vector<std::int64_t> instants_;
};

}  // namespace crawl
