#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wtseq {

enum class Activity : std::uint8_t { Work = 0, Talk = 1 };

inline char to_char(Activity a) { return a == Activity::Work ? 'W' : 'T'; }

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kSecondsPerYear = 365.25 * kSecondsPerDay;

struct Event {
  std::string actor;
  std::string community;
  Activity kind = Activity::Work;
  Timestamp ts = 0;
  std::vector<std::string> files;  // sorted, unique; Work only
  std::int64_t lines_added = 0;    // Work only
  std::optional<std::string> message_id;  // Talk only
  std::optional<std::string> reply_to;    // Talk only

  friend bool operator==(const Event&, const Event&) = default;
};

/// An actor's ordered activity labels. labels.size() == timestamps.size().
struct WtSequence {
  std::string actor;
  std::string community;
  std::vector<Activity> labels;
  std::vector<Timestamp> timestamps;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::string label_string() const;

  /// Builds a sequence from a "WTTW..." string with timestamps 0, 1, 2, ...
  static WtSequence from_string(std::string_view labels);
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& field, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", field '" + field + "': " + what),
        line_(line),
        field_(field) {}
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EventFormat { Jsonl, Csv };

std::vector<Event> parse_events(std::istream& in, EventFormat format);
void write_events(std::ostream& out, const std::vector<Event>& events, EventFormat format);

/// raw identity -> canonical actor id. Keys are stored normalized.
class AliasMap {
 public:
  AliasMap() = default;

  /// Throws ConfigError if any canonical id is itself remapped elsewhere.
  explicit AliasMap(std::map<std::string, std::string> entries);

  static AliasMap parse_csv(std::istream& in);

  std::string resolve(std::string_view raw) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

/// Lowercase, surrounding whitespace removed.
std::string normalize_identity(std::string_view raw);

std::vector<Event> resolve_aliases(std::vector<Event> events, const AliasMap& aliases);

/// Keeps every Work event and the Talk events that reply to something.
std::vector<Event> filter_responses(std::vector<Event> events);

/// Drops the leading homogeneous run. Empty when the sequence never switches.
WtSequence trim_prefix(const WtSequence& seq);

/// Total order used to lay out an actor's events: time, then Work before
/// Talk, then metadata lexicographically.
bool event_order(const Event& a, const Event& b);

/// Sorts by event_order and removes exact duplicates.
std::vector<Event> sort_and_deduplicate(std::vector<Event> events);

struct Developer {
  std::string actor;
  WtSequence sequence;     // trimmed
  Timestamp first_ts = 0;  // untrimmed span
  Timestamp last_ts = 0;
  std::vector<Event> events;  // sorted, deduplicated
};

struct Community {
  std::string name;
  std::vector<Developer> developers;  // sorted by actor id
};

struct CommunityDataset {
  std::vector<Community> communities;  // sorted by name

  std::size_t developer_count() const;
  Timestamp max_timestamp() const;
};

struct CohortOptions {
  std::size_t min_activities = 500;
  std::size_t min_devs = 5;
  bool filter_pre_trim = false;
};

CommunityDataset build_dataset(const std::vector<Event>& events, const CohortOptions& options = {});

}  // namespace wtseq
