#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "wolly/emotion.hpp"
#include "wolly/error.hpp"
#include "wolly/event.hpp"
#include "wolly/gridworld.hpp"
#include "wolly/kinematics.hpp"
#include "wolly/protocol.hpp"
#include "wolly/taboo.hpp"
#include "wolly/wollyscript.hpp"

namespace wolly {

inline constexpr int kDefaultPort = 8377;

inline constexpr std::string_view kDefaultMaze =
    "5x5 E\n"
    "S....\n"
    ".....\n"
    ".....\n"
    ".....\n"
    "....G\n";

inline constexpr std::string_view kDefaultDeck = R"([
  {"word": "chair", "clues": ["It has four legs but cannot walk",
                              "You find it around a table",
                              "You sit on it"]},
  {"word": "rain", "clues": ["It comes from the clouds",
                             "You need an umbrella",
                             "Drops of water falling from the sky"]},
  {"word": "panda", "clues": ["It lives in China",
                              "It is black and white",
                              "It eats bamboo",
                              "A big black and white bear"]},
  {"word": "oceans", "clues": ["Whales live there",
                               "They are salty",
                               "They cover most of the Earth",
                               "The Pacific and the Atlantic are two of them"]}
])";

struct ServerConfig {
  int port = kDefaultPort;
  std::string host = "0.0.0.0";
  std::string maze_path;
  std::string deck_path;
  double track_width = 0.2;
  double cell_size = 0.25;
  double v_max = 0.5;
  std::int64_t think_window_ms = 20'000;
  std::size_t step_limit = 10'000;
  std::uint64_t seed = 0;
  bool logical_clock = false;
  LedPalette palette;
};

namespace detail {

inline Rgb parse_rgb(const nlohmann::json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 3) throw FormatError(key + ": expected [r, g, b]");
  std::array<std::uint8_t, 3> c{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v[i].is_number_integer() || v[i].get<int>() < 0 || v[i].get<int>() > 255) {
      throw FormatError(key + ": components must be integers in 0..255");
    }
    c[i] = static_cast<std::uint8_t>(v[i].get<int>());
  }
  return {c[0], c[1], c[2]};
}

}  // namespace detail

// Applies a JSON config document on top of `base`. Unknown keys are errors.
inline ServerConfig apply_config_json(std::string_view text, ServerConfig base = {}) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("config must be a JSON object");

  auto number = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_number()) throw FormatError(key + ": expected number");
    return v.get<double>();
  };
  auto integer = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_number_integer()) throw FormatError(key + ": expected integer");
    return v.get<std::int64_t>();
  };
  auto string = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_string()) throw FormatError(key + ": expected string");
    return v.get<std::string>();
  };

  for (const auto& [key, v] : doc.items()) {
    if (key == "port") {
      const auto p = integer(v, key);
      if (p < 0 || p > 65535) throw FormatError("port: out of range");
      base.port = static_cast<int>(p);
    } else if (key == "host") {
      base.host = string(v, key);
    } else if (key == "maze") {
      base.maze_path = string(v, key);
    } else if (key == "deck") {
      base.deck_path = string(v, key);
    } else if (key == "track_width") {
      base.track_width = number(v, key);
    } else if (key == "cell_size") {
      base.cell_size = number(v, key);
    } else if (key == "v_max") {
      base.v_max = number(v, key);
    } else if (key == "think_window_ms") {
      base.think_window_ms = integer(v, key);
    } else if (key == "step_limit") {
      const auto s = integer(v, key);
      if (s < 1) throw FormatError("step_limit: must be positive");
      base.step_limit = static_cast<std::size_t>(s);
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) throw FormatError("seed: expected non-negative integer");
      base.seed = v.get<std::uint64_t>();
    } else if (key == "logical_clock") {
      if (!v.is_boolean()) throw FormatError("logical_clock: expected boolean");
      base.logical_clock = v.get<bool>();
    } else if (key == "led_colors") {
      if (!v.is_object()) throw FormatError("led_colors: expected object");
      for (const auto& [name, rgb] : v.items()) {
        const auto e = emotion_from_wire(name);
        if (!e) throw FormatError("led_colors: unknown emotion '" + name + "'");
        const Rgb c = detail::parse_rgb(rgb, "led_colors." + name);
        switch (*e) {
          case EmotionState::VeryHappy: base.palette.very_happy = c; break;
          case EmotionState::Happy: base.palette.happy = c; break;
          case EmotionState::Neutral: base.palette.neutral = c; break;
          case EmotionState::Sad: base.palette.sad = c; break;
        }
      }
    } else {
      throw FormatError("unknown config key '" + key + "'");
    }
  }
  if (!(base.track_width > 0.0)) throw FormatError("track_width: must be positive");
  if (!(base.cell_size > 0.0)) throw FormatError("cell_size: must be positive");
  if (!(base.v_max > 0.0)) throw FormatError("v_max: must be positive");
  if (base.think_window_ms < 0) throw FormatError("think_window_ms: must be non-negative");
  return base;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Response {
  int status = 200;
  std::string body;  // JSON

  static Response json(int status, const Json& j) { return {status, j.dump()}; }
  static Response error(int status, std::string_view code, const std::string& message = {}) {
    Json j = Json::object();
    j["error"] = code;
    if (!message.empty()) j["message"] = message;
    return json(status, j);
  }
};

inline Json face_to_json(const FaceDescriptor& f) {
  Json j = Json::object();
  j["eyes"] = wire_name(f.eyes);
  j["mouth"] = wire_name(f.mouth);
  j["nose"] = wire_name(f.nose);
  j["led_color"] = Json::array({f.led_color.r, f.led_color.g, f.led_color.b});
  return j;
}

// Histogram of smileyometer ratings 1..5.
struct FeedbackSummary {
  std::array<std::int64_t, 5> counts{};
  std::int64_t total = 0;

  friend bool operator==(const FeedbackSummary&, const FeedbackSummary&) = default;
};

inline FeedbackSummary feedback_summary(std::span<const int> ratings) {
  FeedbackSummary s;
  for (int r : ratings) {
    if (r < 1 || r > 5) throw InvalidParameter("rating must be in 1..5");
    ++s.counts[static_cast<std::size_t>(r - 1)];
    ++s.total;
  }
  return s;
}

// Everything the robot session owns except the clock and the event log.
// A plain value: copying it forks the session, which the sequential
// reference model in the tests relies on.
class SessionState {
 public:
  SessionState(const ServerConfig& config, Maze maze, Deck deck)
      : kin_{config.track_width, config.v_max},
        cell_size_(config.cell_size),
        think_window_ms_(config.think_window_ms),
        step_limit_(config.step_limit),
        seed_(config.seed),
        palette_(config.palette),
        maze_(std::move(maze)),
        deck_(std::move(deck)),
        grid_pose_(maze_.start()),
        pose_(to_continuous(grid_pose_, cell_size_)) {}

  using Sink = std::vector<Occurrence>;

  // Timer-driven transitions (the taboo think window).
  void tick(std::int64_t now, Sink& out) {
    if (!taboo_) return;
    auto t = wolly::tick(*taboo_, now);
    adopt(std::move(t), out);
  }

  Response apply(const Command& command, std::int64_t now, Sink& out) {
    try {
      return std::visit([&](const auto& c) { return on(c, now, out); }, command);
    } catch (const Error& e) {
      return map_error(e);
    }
  }

  const Pose& pose() const { return pose_; }
  const GridPose& grid_pose() const { return grid_pose_; }
  EmotionState emotion() const { return emotion_; }
  const Maze& maze() const { return maze_; }
  const std::optional<TabooGameState>& taboo() const { return taboo_; }
  FeedbackSummary feedback() const {
    FeedbackSummary s;
    s.counts = feedback_counts_;
    for (auto c : feedback_counts_) s.total += c;
    return s;
  }

  Json state_json() const {
    Json j = Json::object();
    j["pose"] = payload::pose(pose_);
    j["grid_pose"] = payload::grid_pose(grid_pose_);
    j["emotion"] = wire_name(emotion_);
    j["face"] = face_to_json(face_for(emotion_, palette_));
    return j;
  }

 private:
  struct StepCursor {
    std::vector<Statement> primitives;
    std::size_t next = 0;
    Executor exec;
  };
  struct ProgramEntry {
    Program program;
    std::optional<StepCursor> cursor;
  };

  static Response map_error(const Error& e) {
    switch (e.code()) {
      case ErrorCode::WallCollision:
      case ErrorCode::NotListening:
      case ErrorCode::InvalidPhase:
        return Response::error(409, to_string(e.code()), e.what());
      case ErrorCode::UnknownEndpoint: return Response::error(404, to_string(e.code()), e.what());
      case ErrorCode::SyntaxError: {
        const auto& se = static_cast<const SyntaxError&>(e);
        Json j = Json::object();
        j["error"] = "syntax_error";
        j["line"] = se.line();
        j["col"] = se.col();
        j["message"] = se.detail();
        return Response::json(400, j);
      }
      default: return Response::error(400, to_string(e.code()), e.what());
    }
  }

  void set_emotion(EmotionState e, Sink& out) {
    emotion_ = e;
    out.push_back(emotion_changed_event(e));
  }

  void adopt(TabooTransition t, Sink& out) {
    for (auto& occ : t.events) out.push_back(std::move(occ));
    emotion_ = t.state.emotion;
    taboo_ = std::move(t.state);
  }

  void move_to(const GridPose& g) {
    grid_pose_ = g;
    pose_ = to_continuous(g, cell_size_);
  }

  Json pose_body() const {
    Json j = Json::object();
    j["pose"] = payload::pose(pose_);
    j["grid_pose"] = payload::grid_pose(grid_pose_);
    return j;
  }

  // Events for one executed primitive.
  void emit_step(std::int64_t program_id, std::size_t index, const TraceStep& step, Sink& out) {
    out.push_back(program_step_event(program_id, static_cast<std::int64_t>(index),
                                     statement_text(step.statement), step.pose));
    switch (step.statement.kind) {
      case Statement::Kind::Beep: out.push_back(beep_event()); break;
      case Statement::Kind::Say: out.push_back(speech_event(msg::kSay, step.statement.text)); break;
      case Statement::Kind::Emote: set_emotion(step.statement.emotion, out); break;
      default: break;
    }
  }

  ProgramEntry& program(std::int64_t id) {
    auto it = programs_.find(id);
    if (it == programs_.end()) throw UnknownEndpoint("no program with id " + std::to_string(id));
    return it->second;
  }

  Response on(const cmd::Move& c, std::int64_t, Sink& out) {
    move_to(apply_action(grid_pose_, c.action, maze_));
    out.push_back(pose_changed_event(pose_, grid_pose_));
    return Response::json(200, pose_body());
  }

  Response on(const cmd::Drive& c, std::int64_t, Sink& out) {
    const WheelSpeeds wheels{c.left, c.right};
    try {
      check_wheel_limits(wheels, kin_.v_max);
    } catch (const InvalidParameter& e) {
      throw SchemaError("left/right", e.what());
    }
    pose_ = step(pose_, wheels, kin_, static_cast<double>(c.duration_ms) / 1000.0);
    out.push_back(pose_changed_event(pose_, grid_pose_));
    return Response::json(200, pose_body());
  }

  Response on(const cmd::GetState&, std::int64_t, Sink&) { return Response::json(200, state_json()); }

  Response on(const cmd::SubmitProgram& c, std::int64_t, Sink&) {
    ScriptLimits limits;
    limits.step_limit = step_limit_;
    Program p = parse(c.source, limits);
    const std::int64_t id = next_program_id_++;
    programs_.emplace(id, ProgramEntry{std::move(p), std::nullopt});
    Json j = Json::object();
    j["program_id"] = id;
    return Response::json(201, j);
  }

  Response on(const cmd::RunProgram& c, std::int64_t, Sink& out) {
    ProgramEntry& entry = program(c.id);
    const GridPose before = grid_pose_;
    const ExecutionTrace trace = execute(entry.program, maze_, step_limit_);
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
      emit_step(c.id, i + 1, trace.steps[i], out);
    }
    move_to(trace.final_pose);
    if (grid_pose_ != before) out.push_back(pose_changed_event(pose_, grid_pose_));
    Json j = Json::object();
    j["outcome"] = wire_name(trace.outcome.kind);
    j["steps"] = trace.steps.size();
    if (trace.outcome.step > 0) j["at_step"] = trace.outcome.step;
    j["grid_pose"] = payload::grid_pose(grid_pose_);
    return Response::json(200, j);
  }

  Response on(const cmd::StepProgram& c, std::int64_t, Sink& out) {
    ProgramEntry& entry = program(c.id);
    if (!entry.cursor || entry.cursor->exec.done()) {
      // A finished cursor restarts from the maze start.
      entry.cursor = StepCursor{flatten(entry.program, step_limit_), 0,
                                Executor(maze_, maze_.start(), step_limit_)};
      if (grid_pose_ != maze_.start()) {
        move_to(maze_.start());
        out.push_back(pose_changed_event(pose_, grid_pose_));
      }
    }
    StepCursor& cur = *entry.cursor;
    Json j = Json::object();
    if (cur.next >= cur.primitives.size()) {
      cur.exec.finish();
      j["step"] = nullptr;
    } else {
      const GridPose before = grid_pose_;
      cur.exec.feed(cur.primitives[cur.next++]);
      const TraceStep& step = cur.exec.trace().steps.back();
      const std::size_t index = cur.exec.trace().steps.size();
      emit_step(c.id, index, step, out);
      move_to(cur.exec.pose());
      if (grid_pose_ != before) out.push_back(pose_changed_event(pose_, grid_pose_));
      Json s = Json::object();
      s["index"] = index;
      s["statement"] = statement_text(step.statement);
      s["grid_pose"] = payload::grid_pose(step.pose);
      j["step"] = s;
      if (cur.next >= cur.primitives.size()) cur.exec.finish();
    }
    j["done"] = cur.exec.done();
    if (cur.exec.done()) j["outcome"] = wire_name(cur.exec.trace().outcome.kind);
    return Response::json(200, j);
  }

  Response on(const cmd::TabooStart& c, std::int64_t now, Sink& out) {
    if (emotion_ != EmotionState::Neutral) {
      set_emotion(emotion_for(GameEvent::game_start()), out);
    }
    TabooConfig cfg;
    cfg.think_window_ms = think_window_ms_;
    adopt(start_game(deck_, c.seed.value_or(seed_), now, cfg), out);
    // A zero-length window ends immediately.
    tick(now, out);
    return Response::json(200, to_json(*taboo_));
  }

  Response on(const cmd::TabooGuess& c, std::int64_t now, Sink& out) {
    if (!taboo_) return Response::error(409, "invalid_phase", "no game in progress");
    adopt(submit_guess(*taboo_, c.word, now), out);
    tick(now, out);
    return Response::json(200, to_json(*taboo_));
  }

  Response on(const cmd::TabooReplay& c, std::int64_t now, Sink& out) {
    if (!taboo_) return Response::error(409, "invalid_phase", "no game in progress");
    adopt(answer_replay(*taboo_, deck_, c.answer, now), out);
    tick(now, out);
    return Response::json(200, to_json(*taboo_));
  }

  Response on(const cmd::TabooState&, std::int64_t, Sink&) {
    if (!taboo_) {
      Json j = Json::object();
      j["phase"] = "idle";
      return Response::json(200, j);
    }
    return Response::json(200, to_json(*taboo_));
  }

  Response on(const cmd::Feedback& c, std::int64_t, Sink& out) {
    ++feedback_counts_[static_cast<std::size_t>(c.rating - 1)];
    out.push_back(feedback_received_event(c.rating));
    Json j = Json::object();
    j["rating"] = c.rating;
    j["total"] = feedback().total;
    return Response::json(201, j);
  }

  Response on(const cmd::FeedbackSummary&, std::int64_t, Sink&) {
    const auto s = feedback();
    Json j = Json::object();
    j["counts"] = s.counts;
    j["total"] = s.total;
    return Response::json(200, j);
  }

  // Served by Session, which owns the log and the clock.
  Response on(const cmd::Events&, std::int64_t, Sink&) {
    return Response::error(500, "internal", "events are served by the session");
  }
  Response on(const cmd::ClockAdvance&, std::int64_t, Sink&) {
    return Response::error(500, "internal", "clock is owned by the session");
  }

  KinematicsConfig kin_;
  double cell_size_;
  std::int64_t think_window_ms_;
  std::size_t step_limit_;
  std::uint64_t seed_;
  LedPalette palette_;
  Maze maze_;
  Deck deck_;
  GridPose grid_pose_;
  Pose pose_;
  EmotionState emotion_ = EmotionState::Neutral;
  std::map<std::int64_t, ProgramEntry> programs_;
  std::int64_t next_program_id_ = 1;
  std::optional<TabooGameState> taboo_;
  std::array<std::int64_t, 5> feedback_counts_{};
};

class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() const = 0;
};

// Advances only when told to.
class LogicalClock final : public Clock {
 public:
  std::int64_t now_ms() const override { return now_.load(); }
  void advance(std::int64_t ms) { now_ += ms; }

 private:
  std::atomic<std::int64_t> now_{0};
};

// Milliseconds since construction.
class WallClock final : public Clock {
 public:
  std::int64_t now_ms() const override {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::string encode_events_response(const std::vector<Event>& events) {
  std::string out = "{\"events\":[";
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i > 0) out += ',';
    out += encode_event(events[i]);
  }
  out += "]}";
  return out;
}

// One robot session. Mutations are serialized by a single mutex and their
// events are committed to the log in the same critical section; event reads
// only take the log's shared lock.
class Session {
 public:
  Session(const ServerConfig& config, Maze maze, Deck deck)
      : state_(config, std::move(maze), std::move(deck)) {
    if (config.logical_clock) {
      logical_ = std::make_shared<LogicalClock>();
      clock_ = logical_;
    } else {
      clock_ = std::make_shared<WallClock>();
    }
  }

  Response execute(const CommandEnvelope& envelope) { return execute(envelope.command); }

  Response execute(const Command& command) {
    if (const auto* ev = std::get_if<cmd::Events>(&command)) {
      return {200, encode_events_response(log_.events_since(ev->since))};
    }
    std::lock_guard lock(mutex_);
    SessionState::Sink out;
    if (const auto* adv = std::get_if<cmd::ClockAdvance>(&command)) {
      if (!logical_) {
        return Response::error(404, "unknown_endpoint", "clock control requires --logical-clock");
      }
      logical_->advance(adv->ms);
      const std::int64_t now = clock_->now_ms();
      state_.tick(now, out);
      log_.append(out, now);
      Json j = Json::object();
      j["now_ms"] = now;
      return Response::json(200, j);
    }
    const std::int64_t now = clock_->now_ms();
    state_.tick(now, out);
    Response r = state_.apply(command, now, out);
    log_.append(out, now);
    return r;
  }

  void tick() {
    std::lock_guard lock(mutex_);
    SessionState::Sink out;
    const std::int64_t now = clock_->now_ms();
    state_.tick(now, out);
    log_.append(out, now);
  }

  const EventLog& log() const { return log_; }
  bool logical_clock() const { return logical_ != nullptr; }
  std::int64_t now_ms() const { return clock_->now_ms(); }

  // Snapshot of the state, taken under the command lock.
  SessionState snapshot() const {
    std::lock_guard lock(mutex_);
    return state_;
  }

 private:
  mutable std::mutex mutex_;
  SessionState state_;
  EventLog log_;
  std::shared_ptr<Clock> clock_;
  std::shared_ptr<LogicalClock> logical_;
};

inline std::unique_ptr<Session> make_session(const ServerConfig& config) {
  Maze maze = parse_maze(config.maze_path.empty() ? std::string(kDefaultMaze)
                                                  : read_file(config.maze_path));
  Deck deck = load_deck(config.deck_path.empty() ? std::string(kDefaultDeck)
                                                 : read_file(config.deck_path));
  return std::make_unique<Session>(config, std::move(maze), std::move(deck));
}

// Decodes one HTTP request and runs it against the session.
inline Response dispatch(Session& session, std::string_view method, std::string_view path,
                         std::string_view body,
                         const std::map<std::string, std::string, std::less<>>& query = {}) {
  try {
    return session.execute(decode_command(method, path, body, query));
  } catch (const SchemaError& e) {
    Json j = Json::object();
    j["error"] = "schema_error";
    j["field"] = e.field();
    j["reason"] = e.reason();
    return Response::json(400, j);
  } catch (const UnknownEndpoint& e) {
    return Response::error(404, "unknown_endpoint", e.what());
  }
}

// HTTP transport for a Session. In wall-clock mode a background thread
// evaluates the taboo timer at 20 Hz.
class HttpServer {
 public:
  explicit HttpServer(Session& session) : session_(session) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      std::map<std::string, std::string, std::less<>> query;
      for (const auto& [k, v] : req.params) query.emplace(k, v);
      Response r;
      try {
        r = dispatch(session_, req.method, req.path, req.body, query);
      } catch (const std::exception& e) {
        r = Response::error(500, "internal", e.what());
      }
      res.status = r.status;
      res.set_content(r.body, "application/json");
    };
    server_.Get(R"(/.*)", handler);
    server_.Post(R"(/.*)", handler);
    server_.Put(R"(/.*)", handler);
    server_.Delete(R"(/.*)", handler);
    server_.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  }

  ~HttpServer() { stop(); }

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and serves on a background thread. Port 0 picks a free port.
  int start(const std::string& host, int port) {
    const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    listener_ = std::thread([this] { server_.listen_after_bind(); });
    if (!session_.logical_clock()) {
      running_ = true;
      ticker_ = std::thread([this] {
        while (running_) {
          session_.tick();
          std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
      });
    }
    server_.wait_until_ready();
    return bound;
  }

  void stop() {
    running_ = false;
    server_.stop();
    if (listener_.joinable()) listener_.join();
    if (ticker_.joinable()) ticker_.join();
  }

 private:
  Session& session_;
  httplib::Server server_;
  std::thread listener_;
  std::thread ticker_;
  std::atomic<bool> running_{false};
};

}  // namespace wolly
