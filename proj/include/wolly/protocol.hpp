#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wolly/error.hpp"
#include "wolly/event.hpp"
#include "wolly/gridworld.hpp"

namespace wolly {

struct Event {
  std::int64_t seq = 0;  // >= 1, dense within a session
  std::int64_t ts = 0;   // ms since session start
  EventKind kind = EventKind::Beep;
  Json payload = Json::object();

  friend bool operator==(const Event&, const Event&) = default;
};

// Canonical form: {"seq":..,"ts":..,"kind":..,"payload":{..}} with no
// whitespace and payload keys in builder order.
inline std::string encode_event(const Event& e) {
  std::string out = "{\"seq\":";
  out += std::to_string(e.seq);
  out += ",\"ts\":";
  out += std::to_string(e.ts);
  out += ",\"kind\":\"";
  out += wire_name(e.kind);
  out += "\",\"payload\":";
  out += e.payload.dump(-1, ' ', false, Json::error_handler_t::strict);
  out += '}';
  return out;
}

inline Json event_to_json(const Event& e) {
  Json j = Json::object();
  j["seq"] = e.seq;
  j["ts"] = e.ts;
  j["kind"] = wire_name(e.kind);
  j["payload"] = e.payload;
  return j;
}

namespace detail {

inline void expect_keys(const Json& obj, std::initializer_list<std::string_view> keys,
                        const std::string& where) {
  if (!obj.is_object() || obj.size() != keys.size()) {
    throw FormatError(where + ": unexpected field set");
  }
  auto it = obj.begin();
  for (std::string_view key : keys) {
    if (it.key() != key) {
      throw FormatError(where + ": expected field '" + std::string(key) + "'");
    }
    ++it;
  }
}

inline void check_grid_pose(const Json& p, const std::string& where) {
  expect_keys(p, {"col", "row", "heading"}, where);
  if (!p["col"].is_number_integer() || !p["row"].is_number_integer() ||
      !p["heading"].is_string()) {
    throw FormatError(where + ": bad grid pose");
  }
}

inline void check_payload(EventKind kind, const Json& p) {
  const std::string where = std::string("payload of ") + wire_name(kind);
  auto require = [&](bool ok) {
    if (!ok) throw FormatError(where + ": field has wrong type");
  };
  switch (kind) {
    case EventKind::RuleExplanation:
      expect_keys(p, {"key"}, where);
      require(p["key"].is_string());
      break;
    case EventKind::Clue:
      expect_keys(p, {"index", "text"}, where);
      require(p["index"].is_number_integer() && p["text"].is_string());
      break;
    case EventKind::Beep: expect_keys(p, {}, where); break;
    case EventKind::Speech:
      expect_keys(p, {"key", "text"}, where);
      require(p["key"].is_string() && p["text"].is_string());
      break;
    case EventKind::EmotionChanged:
      expect_keys(p, {"emotion"}, where);
      require(p["emotion"].is_string() &&
              emotion_from_wire(p["emotion"].get<std::string>()).has_value());
      break;
    case EventKind::PoseChanged:
      expect_keys(p, {"pose", "grid_pose"}, where);
      expect_keys(p["pose"], {"x", "y", "theta"}, where);
      require(p["pose"]["x"].is_number() && p["pose"]["y"].is_number() &&
              p["pose"]["theta"].is_number());
      check_grid_pose(p["grid_pose"], where);
      break;
    case EventKind::ProgramStep:
      expect_keys(p, {"program_id", "index", "statement", "grid_pose"}, where);
      require(p["program_id"].is_number_integer() && p["index"].is_number_integer() &&
              p["statement"].is_string());
      check_grid_pose(p["grid_pose"], where);
      break;
    case EventKind::GameOver:
      expect_keys(p, {"won", "word"}, where);
      require(p["won"].is_boolean() && p["word"].is_string());
      break;
    case EventKind::FeedbackReceived:
      expect_keys(p, {"rating"}, where);
      require(p["rating"].is_number_integer());
      break;
  }
}

}  // namespace detail

inline Event event_from_json(const Json& j) {
  detail::expect_keys(j, {"seq", "ts", "kind", "payload"}, "event");
  if (!j["seq"].is_number_integer() || !j["ts"].is_number_integer() || !j["kind"].is_string()) {
    throw FormatError("event: bad header field");
  }
  const auto kind = event_kind_from_wire(j["kind"].get<std::string>());
  if (!kind) throw FormatError("event: unknown kind '" + j["kind"].get<std::string>() + "'");
  detail::check_payload(*kind, j["payload"]);
  return {j["seq"].get<std::int64_t>(), j["ts"].get<std::int64_t>(), *kind, j["payload"]};
}

inline Event decode_event(std::string_view bytes) {
  Json j;
  try {
    j = Json::parse(bytes);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("event is not valid JSON: ") + e.what());
  }
  return event_from_json(j);
}

// Append-only, single writer, many readers. append() assigns dense seq
// numbers; a batch becomes visible to readers all at once.
class EventLog {
 public:
  EventLog() = default;
  EventLog(const EventLog& other) {
    std::shared_lock lock(other.mutex_);
    events_ = other.events_;
  }
  EventLog& operator=(const EventLog&) = delete;

  std::vector<Event> append(std::span<const Occurrence> batch, std::int64_t ts) {
    std::unique_lock lock(mutex_);
    if (!events_.empty() && ts < events_.back().ts) {
      ts = events_.back().ts;  // ts is monotone even if the clock is not
    }
    std::vector<Event> added;
    added.reserve(batch.size());
    for (const auto& occ : batch) {
      events_.push_back({static_cast<std::int64_t>(events_.size()) + 1, ts, occ.kind, occ.payload});
      added.push_back(events_.back());
    }
    return added;
  }

  std::vector<Event> events_since(std::int64_t since) const {
    std::shared_lock lock(mutex_);
    if (since < 0) since = 0;
    if (since >= static_cast<std::int64_t>(events_.size())) return {};
    return {events_.begin() + since, events_.end()};
  }

  std::int64_t last_seq() const {
    std::shared_lock lock(mutex_);
    return static_cast<std::int64_t>(events_.size());
  }

 private:
  mutable std::shared_mutex mutex_;
  std::vector<Event> events_;
};

// Free-function form over a plain sequence; seq numbers are dense so the
// suffix starts at index `since`.
inline std::vector<Event> events_since(std::span<const Event> log, std::int64_t since) {
  std::vector<Event> out;
  for (const auto& e : log) {
    if (e.seq > since) out.push_back(e);
  }
  return out;
}

// Commands accepted under /api/v1.
namespace cmd {
struct Move {
  GridAction action;
};
struct Drive {
  double left;
  double right;
  std::int64_t duration_ms;
};
struct GetState {};
struct SubmitProgram {
  std::string source;
};
struct RunProgram {
  std::int64_t id;
};
struct StepProgram {
  std::int64_t id;
};
struct TabooStart {
  std::optional<std::uint64_t> seed;
};
struct TabooGuess {
  std::string word;
};
struct TabooReplay {
  std::string answer;
};
struct TabooState {};
struct Feedback {
  int rating;
};
struct FeedbackSummary {};
struct Events {
  std::int64_t since;
};
struct ClockAdvance {
  std::int64_t ms;
};
}  // namespace cmd

using Command = std::variant<cmd::Move, cmd::Drive, cmd::GetState, cmd::SubmitProgram,
                             cmd::RunProgram, cmd::StepProgram, cmd::TabooStart, cmd::TabooGuess,
                             cmd::TabooReplay, cmd::TabooState, cmd::Feedback,
                             cmd::FeedbackSummary, cmd::Events, cmd::ClockAdvance>;

struct CommandEnvelope {
  std::string method;
  std::string endpoint;
  Command command;
};

inline constexpr std::string_view kApiPrefix = "/api/v1";
inline constexpr std::int64_t kMaxDriveMs = 60'000;

namespace detail {

using Query = std::map<std::string, std::string, std::less<>>;

class BodyReader {
 public:
  BodyReader(std::string_view body, bool allow_empty) {
    if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) {
      if (!allow_empty) throw SchemaError("", "request body must be a JSON object");
      json_ = nlohmann::json::object();
      return;
    }
    try {
      json_ = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error&) {
      throw SchemaError("", "malformed JSON");
    }
    if (!json_.is_object()) throw SchemaError("", "request body must be a JSON object");
  }

  // Rejects any field not in `allowed`.
  void only(std::initializer_list<std::string_view> allowed) const {
    for (const auto& [key, _] : json_.items()) {
      bool ok = false;
      for (auto a : allowed) ok = ok || key == a;
      if (!ok) throw SchemaError(key, "unknown field");
    }
  }

  bool has(const std::string& field) const { return json_.contains(field); }

  const nlohmann::json& at(const std::string& field) const {
    if (!json_.contains(field)) throw SchemaError(field, "required");
    return json_.at(field);
  }

  std::string string(const std::string& field) const {
    const auto& v = at(field);
    if (!v.is_string()) throw SchemaError(field, "expected string");
    return v.get<std::string>();
  }

  std::int64_t integer(const std::string& field) const {
    const auto& v = at(field);
    if (!v.is_number_integer()) throw SchemaError(field, "expected integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > INT64_MAX) {
      throw SchemaError(field, "out of range");
    }
    return v.get<std::int64_t>();
  }

  double number(const std::string& field) const {
    const auto& v = at(field);
    if (!v.is_number()) throw SchemaError(field, "expected number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw SchemaError(field, "expected finite number");
    return d;
  }

 private:
  nlohmann::json json_;
};

inline std::optional<std::int64_t> parse_id(std::string_view s) {
  std::int64_t id = 0;
  if (s.empty() || s.size() > 18) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), id);
  if (ec != std::errc() || ptr != s.data() + s.size() || id < 0) return std::nullopt;
  return id;
}

}  // namespace detail

// Validates method, path, and body against the endpoint table. Unknown
// JSON fields are rejected. `query` carries URL query parameters.
inline CommandEnvelope decode_command(std::string_view method, std::string_view path,
                                      std::string_view body,
                                      const std::map<std::string, std::string, std::less<>>& query = {}) {
  const std::string m(method);
  const std::string endpoint(path);
  if (!path.starts_with(kApiPrefix)) {
    throw UnknownEndpoint(m + " " + endpoint);
  }
  std::string_view rest = path.substr(kApiPrefix.size());
  if (rest.size() > 1 && rest.back() == '/') rest.remove_suffix(1);

  auto envelope = [&](Command c) { return CommandEnvelope{m, endpoint, std::move(c)}; };
  const bool post = method == "POST";
  const bool get = method == "GET";

  if (post && rest == "/move") {
    detail::BodyReader b(body, false);
    b.only({"cmd"});
    const std::string c = b.string("cmd");
    if (c == "forward") return envelope(cmd::Move{GridAction::MoveForward});
    if (c == "left") return envelope(cmd::Move{GridAction::TurnLeft});
    if (c == "right") return envelope(cmd::Move{GridAction::TurnRight});
    throw SchemaError("cmd", "must be one of forward, left, right");
  }
  if (post && rest == "/drive") {
    detail::BodyReader b(body, false);
    b.only({"left", "right", "duration_ms"});
    cmd::Drive d{b.number("left"), b.number("right"), b.integer("duration_ms")};
    if (d.duration_ms < 1 || d.duration_ms > kMaxDriveMs) {
      throw SchemaError("duration_ms", "must be in 1.." + std::to_string(kMaxDriveMs));
    }
    return envelope(d);
  }
  if (get && rest == "/state") return envelope(cmd::GetState{});
  if (post && rest == "/program") {
    detail::BodyReader b(body, false);
    b.only({"source"});
    return envelope(cmd::SubmitProgram{b.string("source")});
  }
  if (post && rest.starts_with("/program/")) {
    std::string_view tail = rest.substr(std::string_view("/program/").size());
    const std::size_t slash = tail.find('/');
    if (slash != std::string_view::npos) {
      const auto id = detail::parse_id(tail.substr(0, slash));
      const std::string_view action = tail.substr(slash + 1);
      if (id && (action == "run" || action == "step")) {
        detail::BodyReader b(body, true);
        b.only({});
        if (action == "run") return envelope(cmd::RunProgram{*id});
        return envelope(cmd::StepProgram{*id});
      }
    }
  }
  if (post && rest == "/taboo/start") {
    detail::BodyReader b(body, true);
    b.only({"seed"});
    cmd::TabooStart s;
    if (b.has("seed")) {
      const auto& v = b.at("seed");
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                     v.get<std::int64_t>() < 0)) {
        throw SchemaError("seed", "expected non-negative integer");
      }
      s.seed = v.get<std::uint64_t>();
    }
    return envelope(s);
  }
  if (post && rest == "/taboo/guess") {
    detail::BodyReader b(body, false);
    b.only({"word"});
    std::string word = b.string("word");
    if (word.size() > 200) throw SchemaError("word", "too long");
    return envelope(cmd::TabooGuess{std::move(word)});
  }
  if (post && rest == "/taboo/replay") {
    detail::BodyReader b(body, false);
    b.only({"answer"});
    std::string answer = b.string("answer");
    if (answer != "yes" && answer != "no") throw SchemaError("answer", "must be yes or no");
    return envelope(cmd::TabooReplay{std::move(answer)});
  }
  if (get && rest == "/taboo/state") return envelope(cmd::TabooState{});
  if (post && rest == "/feedback") {
    detail::BodyReader b(body, false);
    b.only({"rating"});
    const std::int64_t rating = b.integer("rating");
    if (rating < 1 || rating > 5) throw SchemaError("rating", "must be in 1..5");
    return envelope(cmd::Feedback{static_cast<int>(rating)});
  }
  if (get && rest == "/feedback/summary") return envelope(cmd::FeedbackSummary{});
  if (get && rest == "/events") {
    std::int64_t since = 0;
    if (auto it = query.find("since"); it != query.end()) {
      const auto parsed = detail::parse_id(it->second);
      if (!parsed) throw SchemaError("since", "expected non-negative integer");
      since = *parsed;
    }
    return envelope(cmd::Events{since});
  }
  if (post && rest == "/clock/advance") {
    detail::BodyReader b(body, false);
    b.only({"ms"});
    const std::int64_t ms = b.integer("ms");
    if (ms < 0 || ms > 86'400'000) throw SchemaError("ms", "must be in 0..86400000");
    return envelope(cmd::ClockAdvance{ms});
  }
  throw UnknownEndpoint(m + " " + endpoint);
}

inline bool is_mutating(const Command& c) {
  return !std::holds_alternative<cmd::GetState>(c) && !std::holds_alternative<cmd::TabooState>(c) &&
         !std::holds_alternative<cmd::FeedbackSummary>(c) && !std::holds_alternative<cmd::Events>(c);
}

}  // namespace wolly
