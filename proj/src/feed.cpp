#include "crawl/feed.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace crawl {

using nlohmann::json;

namespace {

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::string lowercase(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Whitespace split, then trim leading/trailing punctuation other than '#'
// and '_' so "blocked." and "#sumo_experiment!" still match.
std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(lowercase(text));
  std::string w;
  auto keep = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '#' || c == '_';
  };
  while (in >> w) {
    std::size_t b = 0, e = w.size();
    while (b < e && !keep(w[b])) ++b;
    while (e > b && !keep(w[e - 1])) --e;
    if (e > b) tokens.push_back(w.substr(b, e - b));
  }
  return tokens;
}

}  // namespace

std::int64_t parse_instant(const std::string& iso8601) {
  int y, mo, d, h = 0, mi = 0, s = 0;
  const int n = std::sscanf(iso8601.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d,
                            &h, &mi, &s);
  if (n < 3 || mo < 1 || mo > 12 || d < 1 || d > 31) {
    throw FeedError("unparseable timestamp: " + iso8601);
  }
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::int64_t day_of(std::int64_t epoch_seconds) {
  return epoch_seconds >= 0 ? epoch_seconds / 86400
                            : (epoch_seconds - 86399) / 86400;
}

const char* to_string(IgnoreReason r) {
  switch (r) {
    case IgnoreReason::missing_hashtag:
      return "missing-hashtag";
    case IgnoreReason::missing_keyword:
      return "missing-keyword";
    case IgnoreReason::no_link_identifier:
      return "no-link-identifier";
    case IgnoreReason::stale_date:
      return "stale-date";
  }
  return "?";
}

AliasTable load_alias_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FeedError("cannot open alias table: " + path);
  json doc = json::parse(in);
  AliasTable table;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string phrase = lowercase(it.key());
    if (phrase.empty()) throw FeedError("empty alias phrase");
    table[phrase] = it.value().get<std::string>();
  }
  return table;
}

ParseOutcome parse_message(const FeedMessage& msg, const AliasTable& aliases,
                           const RoadNetwork& net, std::int64_t now_day,
                           double sim_time) {
  ParseOutcome out;
  const std::vector<std::string> tokens = tokenize(msg.text);

  const bool tagged =
      std::find(tokens.begin(), tokens.end(), "#sumo_experiment") != tokens.end();
  if (!tagged) {
    out.reason = IgnoreReason::missing_hashtag;
    return out;
  }
  const bool keyword =
      std::find(tokens.begin(), tokens.end(), "blocked") != tokens.end();
  if (!keyword) {
    out.reason = IgnoreReason::missing_keyword;
    return out;
  }

  // Longest alias phrase over contiguous token spans; earliest span on ties.
  LinkIndex link = -1;
  std::size_t best_len = 0;
  for (std::size_t b = 0; b < tokens.size(); ++b) {
    std::string span;
    for (std::size_t e = b; e < tokens.size(); ++e) {
      if (e > b) span += ' ';
      span += tokens[e];
      auto it = aliases.find(span);
      if (it != aliases.end() && e - b + 1 > best_len) {
        const LinkIndex x = net.find(it->second);
        if (x >= 0) {
          best_len = e - b + 1;
          link = x;
        }
      }
    }
  }
  if (link < 0) {
    out.reason = IgnoreReason::no_link_identifier;
    return out;
  }

  if (day_of(parse_instant(msg.timestamp)) < now_day) {
    out.reason = IgnoreReason::stale_date;
    return out;
  }

  out.event = BlockEvent{link, msg, sim_time};
  return out;
}

ReplayFeedSource ReplayFeedSource::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FeedError("cannot open feed file: " + path);
  ReplayFeedSource src;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    FeedMessage m;
    try {
      json rec = json::parse(line);
      m.author = rec.at("author").get<std::string>();
      m.timestamp = rec.at("timestamp").get<std::string>();
      m.text = rec.at("text").get<std::string>();
    } catch (const json::exception& e) {
      throw FeedError("malformed feed record in " + path + ": " + e.what());
    }
    if (m.text.empty()) throw FeedError("empty message text in " + path);
    src.messages_.push_back(std::move(m));
  }
  std::stable_sort(src.messages_.begin(), src.messages_.end(),
                   [](const FeedMessage& a, const FeedMessage& b) {
                     return parse_instant(a.timestamp) < parse_instant(b.timestamp);
                   });
  for (const FeedMessage& m : src.messages_) {
    src.instants_.push_back(parse_instant(m.timestamp));
  }
  return src;
}

std::pair<std::vector<FeedMessage>, std::size_t> ReplayFeedSource::poll(
    std::size_t cursor, std::int64_t now_epoch_seconds) const {
  if (cursor > messages_.size()) throw FeedError("invalid feed cursor");
  std::vector<FeedMessage> fresh;
  std::size_t c = cursor;
  while (c < messages_.size() && instants_[c] <= now_epoch_seconds) {
    fresh.push_back(messages_[c]);
    ++c;
  }
  return {fresh, c};
}

}  // namespace crawl
