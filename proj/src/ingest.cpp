#include "wtseq/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <tuple>

#include "json.hpp"
#include "wtseq/csv.hpp"

namespace wtseq {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

Activity parse_kind(std::string_view s, std::size_t line) {
  if (s == "work") return Activity::Work;
  if (s == "talk") return Activity::Talk;
  throw ParseError(line, "kind", "unknown kind '" + std::string(s) + "'");
}

void normalize_files(std::vector<std::string>& files) {
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
}

void check_event(const Event& e, std::size_t line) {
  if (e.actor.empty()) throw ParseError(line, "actor", "empty");
  if (e.community.empty()) throw ParseError(line, "community", "empty");
  if (e.ts < 0) throw ParseError(line, "ts", "negative timestamp");
  if (e.lines_added < 0) throw ParseError(line, "lines_added", "negative");
  if (e.kind == Activity::Work) {
    if (e.message_id) throw ParseError(line, "message_id", "not allowed on work events");
    if (e.reply_to) throw ParseError(line, "reply_to", "not allowed on work events");
  } else {
    if (!e.files.empty()) throw ParseError(line, "files", "not allowed on talk events");
    if (e.lines_added != 0) throw ParseError(line, "lines_added", "not allowed on talk events");
  }
}

std::string required_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) throw ParseError(line, key, "missing");
  if (!it->is_string()) throw ParseError(line, key, "expected string");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(line, key, "expected string or null");
  return it->get<std::string>();
}

std::int64_t integer_field(const json& v, const char* key, std::size_t line) {
  if (!v.is_number_integer()) throw ParseError(line, key, "expected integer");
  return v.get<std::int64_t>();
}

Event event_from_json(const json& obj, std::size_t line) {
  if (!obj.is_object()) throw ParseError(line, "<record>", "expected a JSON object");
  Event e;
  e.actor = required_string(obj, "actor", line);
  e.community = required_string(obj, "community", line);
  e.kind = parse_kind(required_string(obj, "kind", line), line);
  auto ts = obj.find("ts");
  if (ts == obj.end() || ts->is_null()) throw ParseError(line, "ts", "missing");
  e.ts = integer_field(*ts, "ts", line);
  if (auto it = obj.find("files"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError(line, "files", "expected array of strings");
    for (const auto& f : *it) {
      if (!f.is_string()) throw ParseError(line, "files", "expected array of strings");
      e.files.push_back(f.get<std::string>());
    }
    normalize_files(e.files);
  }
  if (auto it = obj.find("lines_added"); it != obj.end() && !it->is_null())
    e.lines_added = integer_field(*it, "lines_added", line);
  e.message_id = optional_string(obj, "message_id", line);
  e.reply_to = optional_string(obj, "reply_to", line);
  check_event(e, line);
  return e;
}

std::int64_t parse_int(const std::string& s, const char* field, std::size_t line) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(line, field, "expected integer, got '" + s + "'");
  return v;
}

const std::vector<std::string> kCsvColumns = {"actor", "community", "kind", "ts",
                                              "files", "lines_added", "message_id", "reply_to"};

std::vector<Event> parse_csv(std::istream& in) {
  std::vector<Event> out;
  std::size_t line = 0;
  auto header = csv::read_record(in, line);
  if (!header) return out;
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header->size(); ++i) col[(*header)[i]] = i;
  for (const char* req : {"actor", "community", "kind", "ts"})
    if (!col.count(req)) throw ParseError(line, req, "missing column in header");

  while (auto rec = csv::read_record(in, line)) {
    if (rec->size() == 1 && (*rec)[0].empty()) continue;
    if (rec->size() != header->size())
      throw ParseError(line, "<record>", "expected " + std::to_string(header->size()) +
                                             " fields, got " + std::to_string(rec->size()));
    auto get = [&](const char* name) -> std::string {
      auto it = col.find(name);
      return it == col.end() ? std::string() : (*rec)[it->second];
    };
    Event e;
    e.actor = get("actor");
    e.community = get("community");
    e.kind = parse_kind(get("kind"), line);
    const auto ts = get("ts");
    if (ts.empty()) throw ParseError(line, "ts", "missing");
    e.ts = parse_int(ts, "ts", line);
    if (auto files = get("files"); !files.empty()) {
      std::size_t start = 0;
      for (;;) {
        auto pos = files.find(';', start);
        auto part = files.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
        if (!part.empty()) e.files.push_back(part);
        if (pos == std::string::npos) break;
        start = pos + 1;
      }
      normalize_files(e.files);
    }
    if (auto la = get("lines_added"); !la.empty()) e.lines_added = parse_int(la, "lines_added", line);
    if (auto m = get("message_id"); !m.empty()) e.message_id = m;
    if (auto r = get("reply_to"); !r.empty()) e.reply_to = r;
    check_event(e, line);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Event> parse_jsonl(std::istream& in) {
  std::vector<Event> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& err) {
      throw ParseError(line, "<record>", err.what());
    }
    out.push_back(event_from_json(obj, line));
  }
  return out;
}

std::string metadata_key(const Event& e) {
  std::string key;
  if (e.kind == Activity::Work) {
    for (const auto& f : e.files) {
      key += f;
      key += '\x1f';
    }
  } else {
    key += e.message_id.value_or("");
    key += '\x1f';
    key += e.reply_to.value_or("");
  }
  return key;
}

}  // namespace

std::string WtSequence::label_string() const {
  std::string s;
  s.reserve(labels.size());
  for (auto a : labels) s += to_char(a);
  return s;
}

WtSequence WtSequence::from_string(std::string_view labels) {
  WtSequence seq;
  for (char c : labels) {
    if (c == 'W' || c == 'w') {
      seq.labels.push_back(Activity::Work);
    } else if (c == 'T' || c == 't') {
      seq.labels.push_back(Activity::Talk);
    } else {
      throw std::invalid_argument(std::string("invalid activity label '") + c + "'");
    }
    seq.timestamps.push_back(static_cast<Timestamp>(seq.timestamps.size()));
  }
  return seq;
}

std::vector<Event> parse_events(std::istream& in, EventFormat format) {
  return format == EventFormat::Jsonl ? parse_jsonl(in) : parse_csv(in);
}

void write_events(std::ostream& out, const std::vector<Event>& events, EventFormat format) {
  if (format == EventFormat::Csv) csv::write_record(out, kCsvColumns);
  for (const auto& e : events) {
    if (format == EventFormat::Jsonl) {
      ordered_json obj;
      obj["actor"] = e.actor;
      obj["community"] = e.community;
      obj["kind"] = e.kind == Activity::Work ? "work" : "talk";
      obj["ts"] = e.ts;
      if (e.kind == Activity::Work) {
        obj["files"] = e.files;
        obj["lines_added"] = e.lines_added;
      }
      if (e.message_id) obj["message_id"] = *e.message_id;
      if (e.reply_to) obj["reply_to"] = *e.reply_to;
      out << obj.dump() << '\n';
    } else {
      std::string files;
      for (std::size_t i = 0; i < e.files.size(); ++i) {
        if (i) files += ';';
        files += e.files[i];
      }
      csv::write_record(out, {e.actor, e.community, e.kind == Activity::Work ? "work" : "talk",
                              std::to_string(e.ts), files,
                              e.kind == Activity::Work ? std::to_string(e.lines_added) : "",
                              e.message_id.value_or(""), e.reply_to.value_or("")});
    }
  }
}

std::string normalize_identity(std::string_view raw) {
  const auto first = raw.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = raw.find_last_not_of(" \t\r\n");
  std::string s(raw.substr(first, last - first + 1));
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

AliasMap::AliasMap(std::map<std::string, std::string> entries) {
  for (auto& [raw, canonical] : entries) entries_[normalize_identity(raw)] = canonical;
  for (const auto& [raw, canonical] : entries_) {
    auto it = entries_.find(normalize_identity(canonical));
    if (it != entries_.end() && it->second != canonical)
      throw ConfigError("alias map: canonical id '" + canonical + "' (target of '" + raw +
                        "') is itself mapped to '" + it->second + "'");
  }
}

AliasMap AliasMap::parse_csv(std::istream& in) {
  std::map<std::string, std::string> entries;
  std::size_t line = 0;
  while (auto rec = csv::read_record(in, line)) {
    if (rec->size() == 1 && (*rec)[0].empty()) continue;
    if (rec->size() != 2) throw ParseError(line, "<record>", "alias rows need exactly raw,canonical");
    if (line == 1 && (*rec)[0] == "raw" && (*rec)[1] == "canonical") continue;
    const auto key = normalize_identity((*rec)[0]);
    auto [it, inserted] = entries.emplace(key, (*rec)[1]);
    if (!inserted && it->second != (*rec)[1])
      throw ConfigError("alias map: '" + key + "' mapped to both '" + it->second + "' and '" +
                        (*rec)[1] + "'");
  }
  return AliasMap(std::move(entries));
}

std::string AliasMap::resolve(std::string_view raw) const {
  auto key = normalize_identity(raw);
  auto it = entries_.find(key);
  return it == entries_.end() ? key : it->second;
}

std::vector<Event> resolve_aliases(std::vector<Event> events, const AliasMap& aliases) {
  for (auto& e : events) e.actor = aliases.resolve(e.actor);
  return events;
}

std::vector<Event> filter_responses(std::vector<Event> events) {
  std::erase_if(events, [](const Event& e) { return e.kind == Activity::Talk && !e.reply_to; });
  return events;
}

WtSequence trim_prefix(const WtSequence& seq) {
  WtSequence out;
  out.actor = seq.actor;
  out.community = seq.community;
  if (seq.labels.empty()) return out;
  const auto first = seq.labels.front();
  auto it = std::find_if(seq.labels.begin(), seq.labels.end(), [&](Activity a) { return a != first; });
  const auto start = static_cast<std::size_t>(it - seq.labels.begin());
  out.labels.assign(seq.labels.begin() + start, seq.labels.end());
  out.timestamps.assign(seq.timestamps.begin() + start, seq.timestamps.end());
  return out;
}

bool event_order(const Event& a, const Event& b) {
  auto key = [](const Event& e) {
    return std::make_tuple(e.community, e.actor, e.ts, static_cast<int>(e.kind), metadata_key(e),
                           e.lines_added);
  };
  return key(a) < key(b);
}

std::vector<Event> sort_and_deduplicate(std::vector<Event> events) {
  std::sort(events.begin(), events.end(), event_order);
  events.erase(std::unique(events.begin(), events.end()), events.end());
  return events;
}

std::size_t CommunityDataset::developer_count() const {
  std::size_t n = 0;
  for (const auto& c : communities) n += c.developers.size();
  return n;
}

Timestamp CommunityDataset::max_timestamp() const {
  Timestamp t = 0;
  for (const auto& c : communities)
    for (const auto& d : c.developers) t = std::max(t, d.last_ts);
  return t;
}

CommunityDataset build_dataset(const std::vector<Event>& events, const CohortOptions& options) {
  const auto sorted = sort_and_deduplicate(events);
  CommunityDataset dataset;
  std::size_t i = 0;
  while (i < sorted.size()) {
    Community community{sorted[i].community, {}};
    while (i < sorted.size() && sorted[i].community == community.name) {
      Developer dev;
      dev.actor = sorted[i].actor;
      WtSequence raw{dev.actor, community.name, {}, {}};
      while (i < sorted.size() && sorted[i].community == community.name && sorted[i].actor == dev.actor) {
        raw.labels.push_back(sorted[i].kind);
        raw.timestamps.push_back(sorted[i].ts);
        dev.events.push_back(sorted[i]);
        ++i;
      }
      dev.first_ts = raw.timestamps.front();
      dev.last_ts = raw.timestamps.back();
      dev.sequence = trim_prefix(raw);
      const auto counted = options.filter_pre_trim ? raw.size() : dev.sequence.size();
      if (counted >= options.min_activities && !dev.sequence.empty())
        community.developers.push_back(std::move(dev));
    }
    if (community.developers.size() >= options.min_devs && !community.developers.empty())
      dataset.communities.push_back(std::move(community));
  }
  return dataset;
}

}  // namespace wtseq
