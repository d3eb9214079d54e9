// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "support/generators.hpp"
#include "support/linearizability.hpp"
#include "wolly/server.hpp"

namespace {

using namespace wolly;
using Clock = std::chrono::steady_clock;

struct Check {
  bool ok = true;
  std::ostringstream why;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) why << what;
    ok = ok && cond;
  }
};

const std::string kPandaDeck =
    R"([{"word":"panda","clues":["It lives in China","It is black and white","It eats bamboo","A big black and white bear"]}])";
const std::string kChairDeck =
    R"([{"word":"chair","clues":["It has four legs","You find it around a table","You sit on it"]}])";
const std::string kOpenMaze = "5x5 E\nS....\n.....\n.....\n.....\n....G";

std::unique_ptr<Session> logical_session(std::string_view deck, std::string_view maze = kOpenMaze) {
  ServerConfig cfg;
  cfg.logical_clock = true;
  return std::make_unique<Session>(cfg, parse_maze(maze), load_deck(deck));
}

Response post(Session& s, const std::string& path, const std::string& body = "") {
  return dispatch(s, "POST", "/api/v1" + path, body);
}

std::vector<Event> events_of(Session& s) {
  const Json j = Json::parse(dispatch(s, "GET", "/api/v1/events", "", {{"since", "0"}}).body);
  std::vector<Event> out;
  for (const auto& e : j["events"]) out.push_back(event_from_json(e));
  return out;
}

Check golden_transcript_a() {
  Check c;
  const auto t0 = Clock::now();
  std::string first;
  for (int run = 0; run < 10; ++run) {
    auto s = logical_session(kPandaDeck);
    post(*s, "/taboo/start", R"({"seed":7})");
    post(*s, "/clock/advance", R"({"ms":20000})");
    post(*s, "/taboo/guess", R"({"word":"panda"})");
    const auto ev = events_of(*s);
    std::string bytes;
    for (const auto& e : ev) bytes += encode_event(e) + "\n";
    if (run == 0) {
      first = bytes;
      c.expect(ev.size() == 6, "expected 6 events");
      if (ev.size() == 6) {
        c.expect(ev[0].kind == EventKind::RuleExplanation, "event 1 not rule_explanation");
        c.expect(ev[1].kind == EventKind::Clue && ev[1].payload["index"] == 1, "event 2 not clue(1)");
        c.expect(ev[2].kind == EventKind::Beep && ev[2].ts == 20'000, "event 3 not beep@20000");
        c.expect(ev[3].kind == EventKind::EmotionChanged && ev[3].payload["emotion"] == "very_happy",
                 "event 4 not emotion_changed(very_happy)");
        c.expect(ev[4].kind == EventKind::Speech && ev[4].payload["key"] == "compliment",
                 "event 5 not compliment");
        c.expect(ev[5].kind == EventKind::Speech && ev[5].payload["key"] == "ask_replay",
                 "event 6 not replay question");
      }
    } else {
      c.expect(bytes == first, "run " + std::to_string(run) + " differs");
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  c.expect(secs < 1.0, "took " + std::to_string(secs) + " s");
  c.why << (c.ok ? "" : "; ") << "10 runs in " << secs << " s";
  return c;
}

Check golden_transcript_b() {
  Check c;
  auto s = logical_session(kChairDeck);
  post(*s, "/taboo/start", "");
  for (int i = 0; i < 3; ++i) {
    post(*s, "/clock/advance", R"({"ms":20000})");
    post(*s, "/taboo/guess", R"({"word":"stool"})");
  }
  std::vector<int> clues;
  bool sad = false;
  bool reveal = false;
  for (const auto& e : events_of(*s)) {
    if (e.kind == EventKind::Clue) clues.push_back(e.payload["index"].get<int>());
    if (e.kind == EventKind::EmotionChanged && e.payload["emotion"] == "sad") sad = true;
    if (e.kind == EventKind::Speech && e.payload["key"] == "reveal_word" && e.payload["text"] == "chair") {
      reveal = true;
    }
  }
  c.expect(clues == std::vector<int>{1, 2, 3}, "clue indices not 1,2,3");
  c.expect(sad, "no emotion_changed(sad)");
  c.expect(reveal, "no word-reveal speech");
  return c;
}

Check beep_gate() {
  Check c;
  {
    auto s = logical_session(kPandaDeck);
    HttpServer server(*s);
    const int port = server.start("127.0.0.1", 0);
    httplib::Client cli("127.0.0.1", port);
    cli.Post("/api/v1/taboo/start", R"({"seed":1})", "application/json");
    const auto before = s->log().last_seq();
    auto res = cli.Post("/api/v1/taboo/guess", R"({"word":"panda"})", "application/json");
    c.expect(res && res->status == 409, "guess during thinking not 409");
    c.expect(res && Json::parse(res->body)["error"] == "not_listening", "error is not not_listening");
    c.expect(s->log().last_seq() == before, "events appended by rejected guess");
    server.stop();
  }
  gen::Rng rng(2718);
  int rejected = 0;
  for (int trial = 0; trial < 200 && c.ok; ++trial) {
    auto s = logical_session(kDefaultDeck);
    post(*s, "/taboo/start", R"({"seed":)" + std::to_string(trial) + "}");
    for (int i = 0; i < 30 && c.ok; ++i) {
      switch (gen::uniform_int(rng, 0, 3)) {
        case 0:
          post(*s, "/clock/advance", R"({"ms":)" + std::to_string(gen::uniform_int(rng, 0, 25'000)) + "}");
          break;
        case 1: post(*s, "/taboo/replay", R"({"answer":"yes"})"); break;
        default: {
          const Json st = Json::parse(dispatch(*s, "GET", "/api/v1/taboo/state", "").body);
          const auto before = s->log().last_seq();
          const Response r = post(*s, "/taboo/guess", R"({"word":"chair"})");
          if (st["phase"] == "thinking") {
            c.expect(r.status == 409, "guess while thinking accepted");
            c.expect(s->log().last_seq() == before, "rejected guess appended events");
            ++rejected;
          } else if (r.status == 409) {
            c.expect(s->log().last_seq() == before, "rejected guess appended events");
          }
        }
      }
    }
  }
  c.why << (c.ok ? "" : "; ") << rejected << " gated guesses over 200 random sessions";
  return c;
}

Check deck_validation() {
  Check c;
  auto card = [](int n) {
    Json clues = Json::array();
    for (int i = 0; i < n; ++i) clues.push_back("clue number " + std::to_string(i + 1));
    return Json::array({{{"word", "kite"}, {"clues", clues}}}).dump();
  };
  for (int n : {2, 5}) {
    bool card_error = false;
    try {
      load_deck(card(n));
    } catch (const CardError&) {
      card_error = true;
    } catch (...) {
    }
    c.expect(card_error, std::to_string(n) + " clues not rejected with CardError");
  }
  for (int n : {3, 4}) {
    try {
      c.expect(load_deck(card(n))[0].clues.size() == static_cast<std::size_t>(n), "clue count changed");
    } catch (...) {
      c.expect(false, std::to_string(n) + " clues rejected");
    }
  }
  return c;
}

Check emotion_table() {
  Check c;
  const std::pair<GameEvent, EmotionState> table[] = {
      {GameEvent::guessed_at_clue(1), EmotionState::VeryHappy},
      {GameEvent::guessed_at_clue(2), EmotionState::Happy},
      {GameEvent::guessed_at_clue(3), EmotionState::Happy},
      {GameEvent::guessed_at_clue(4), EmotionState::Happy},
      {GameEvent::failed_all_clues(), EmotionState::Sad},
      {GameEvent::wrong_attempt(), EmotionState::Neutral},
  };
  int i = 0;
  for (const auto& [event, expected] : table) {
    ++i;
    c.expect(emotion_for(event) == expected, "case " + std::to_string(i) + " wrong");
  }
  return c;
}

Check interpreter_equivalence() {
  Check c;
  gen::Rng rng(1000);
  std::size_t steps = 0;
  const auto t0 = Clock::now();
  for (int i = 0; i < 1000 && c.ok; ++i) {
    const Program p = gen::random_program(rng, 3, 5, 5);
    const Maze m = i % 2 == 0 ? gen::random_maze(rng, 41, 41, 0.0)
                              : gen::random_maze(rng, gen::uniform_int(rng, 3, 12),
                                                 gen::uniform_int(rng, 3, 12), 0.2);
    const ExecutionTrace tree = execute(p, m);
    steps += tree.steps.size();
    c.expect(tree == execute_flattened(p, m), "program " + std::to_string(i) + " differs");
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  c.expect(secs < 10.0, "took " + std::to_string(secs) + " s");
  c.why << (c.ok ? "" : "; ") << "1000 programs, " << steps << " steps in " << secs << " s";
  return c;
}

Check kinematics_oracle() {
  Check c;
  constexpr double kTwoPi = 2 * std::numbers::pi;
  gen::Rng rng(4242);
  double max_pos = 0;
  double max_head = 0;
  for (int i = 0; i < 1000; ++i) {
    const Pose p{gen::uniform_real(rng, -5, 5), gen::uniform_real(rng, -5, 5),
                 gen::uniform_real(rng, 0, kTwoPi)};
    const WheelSpeeds w{gen::uniform_real(rng, -0.5, 0.5), gen::uniform_real(rng, -0.5, 0.5)};
    const Pose closed = step(p, w, 0.2, 1.0);
    Pose e = p;
    const double v = (w.left + w.right) / 2;
    const double omega = (w.right - w.left) / 0.2;
    for (int k = 0; k < 10'000; ++k) {
      e.x += v * std::cos(e.theta) * 1e-4;
      e.y += v * std::sin(e.theta) * 1e-4;
      e.theta += omega * 1e-4;
    }
    max_pos = std::max(max_pos, std::hypot(closed.x - e.x, closed.y - e.y));
    max_head = std::max(max_head, std::abs(heading_difference(closed.theta, e.theta)));
  }
  c.expect(max_pos < 1e-3, "position error " + std::to_string(max_pos));
  c.expect(max_head < 1e-3, "heading error " + std::to_string(max_head));

  double drift = 0;
  for (int i = 0; i < 1000; ++i) {
    const Pose p{gen::uniform_real(rng, -5, 5), gen::uniform_real(rng, -5, 5),
                 gen::uniform_real(rng, 0, kTwoPi)};
    const double s = gen::uniform_real(rng, -0.5, 0.5);
    const Pose q = step(p, {-s, s}, 0.2, gen::uniform_real(rng, 0.01, 10));
    drift = std::max(drift, std::hypot(q.x - p.x, q.y - p.y));
  }
  c.expect(drift < 1e-9, "rotation drift " + std::to_string(drift));

  const Maze m = parse_maze("2x1 N\nSG");
  for (int h = 0; h < 4; ++h) {
    GridPose g{0, 0, static_cast<GridHeading>(h)};
    const GridPose start = g;
    for (int k = 0; k < 4; ++k) g = apply_action(g, GridAction::TurnLeft, m);
    c.expect(g == start, "TurnLeft^4 is not identity");
  }
  c.why << (c.ok ? "" : "; ") << "max pos err " << max_pos << " m, max heading err " << max_head
        << " rad, max drift " << drift << " m";
  return c;
}

Check robot_relative() {
  Check c;
  const Maze m = parse_maze("2x1 N\nSG");
  using H = GridHeading;
  const std::tuple<H, GridAction, H> cases[] = {
      {H::North, GridAction::TurnLeft, H::West},  {H::North, GridAction::TurnRight, H::East},
      {H::East, GridAction::TurnLeft, H::North},  {H::East, GridAction::TurnRight, H::South},
      {H::South, GridAction::TurnLeft, H::East},  {H::South, GridAction::TurnRight, H::West},
      {H::West, GridAction::TurnLeft, H::South},  {H::West, GridAction::TurnRight, H::North},
  };
  for (const auto& [from, action, to] : cases) {
    const GridPose got = apply_action({0, 0, from}, action, m);
    c.expect(got == GridPose{0, 0, to}, std::string("wrong turn from ") + heading_letter(from));
  }
  return c;
}

Check protocol_replay() {
  Check c;
  auto s = logical_session(kDefaultDeck);
  HttpServer server(*s);
  const int port = server.start("127.0.0.1", 0);
  httplib::Client cli("127.0.0.1", port);
  const std::pair<const char*, const char*> script[] = {
      {"/api/v1/move", R"({"cmd":"forward"})"},
      {"/api/v1/move", R"({"cmd":"right"})"},
      {"/api/v1/program", R"({"source":"REPEAT 2 { MOVE BEEP } SAY \"hi\" EMOTE happy"})"},
      {"/api/v1/program/1/run", ""},
      {"/api/v1/taboo/start", R"({"seed":3})"},
      {"/api/v1/clock/advance", R"({"ms":20000})"},
      {"/api/v1/taboo/guess", R"({"word":"nope"})"},
      {"/api/v1/feedback", R"({"rating":4})"},
  };
  for (const auto& [path, body] : script) cli.Post(path, body, "application/json");

  auto a = cli.Get("/api/v1/events?since=0");
  auto b = cli.Get("/api/v1/events?since=0");
  c.expect(a && b && a->status == 200, "events request failed");
  if (a && b) {
    c.expect(a->body == b->body, "repeated queries differ");
    std::vector<Event> got;
    const Json j = Json::parse(a->body);
    for (const auto& e : j["events"]) got.push_back(event_from_json(e));
    const auto full = s->log().events_since(0);
    c.expect(got == full, "replay does not match the session log");
    c.expect(static_cast<std::int64_t>(got.size()) == s->log().last_seq(), "log truncated");
    for (std::size_t i = 0; i < got.size(); ++i) {
      c.expect(got[i].seq == static_cast<std::int64_t>(i) + 1, "seq not dense");
    }
    c.expect(got.size() > 10, "scripted session produced too few events");
    c.why << (c.ok ? "" : "; ") << got.size() << " events";
  }
  server.stop();
  return c;
}

Check linearizability() {
  Check c;
  auto s = logical_session(kDefaultDeck);
  const SessionState initial = s->snapshot();
  HttpServer server(*s);
  const int port = server.start("127.0.0.1", 0);

  gen::Rng rng(60);
  std::vector<std::vector<gen::Request>> reqs(3);
  for (auto& list : reqs)
    for (int i = 0; i < 20; ++i) list.push_back(gen::random_request(rng));
  std::vector<std::vector<Response>> resps(3);
  std::vector<std::thread> clients;
  for (std::size_t k = 0; k < 3; ++k) {
    clients.emplace_back([&, k] {
      httplib::Client cli("127.0.0.1", port);
      for (const auto& r : reqs[k]) {
        auto res = r.method == "GET" ? cli.Get(r.path) : cli.Post(r.path, r.body, "application/json");
        resps[k].push_back(res ? Response{res->status, res->body} : Response{0, ""});
      }
    });
  }
  for (auto& t : clients) t.join();
  const auto log = s->log().events_since(0);
  server.stop();

  gen::LinearizationSearch search(reqs, resps, log, 0);
  c.expect(search.run(initial), "no sequential order reproduces the log");
  c.why << (c.ok ? "" : "; ") << "60 commands, " << log.size() << " events";
  return c;
}

Check feedback_bounds() {
  Check c;
  auto s = logical_session(kDefaultDeck);
  for (int r : {-1, 0, 6, 7, 100}) {
    const Response resp = post(*s, "/feedback", R"({"rating":)" + std::to_string(r) + "}");
    c.expect(resp.status == 400, "rating " + std::to_string(r) + " not rejected");
  }
  gen::Rng rng(5);
  std::array<std::int64_t, 5> oracle{};
  for (int i = 0; i < 1000; ++i) {
    const int r = gen::uniform_int(rng, 1, 5);
    ++oracle[static_cast<std::size_t>(r - 1)];
    c.expect(post(*s, "/feedback", R"({"rating":)" + std::to_string(r) + "}").status == 201,
             "valid rating rejected");
  }
  const Json summary = Json::parse(dispatch(*s, "GET", "/api/v1/feedback/summary", "").body);
  for (std::size_t i = 0; i < 5; ++i) {
    c.expect(summary["counts"][i].get<std::int64_t>() == oracle[i], "histogram mismatch");
  }
  c.expect(summary["total"] == 1000, "total mismatch");
  return c;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Check()>> criteria[] = {
      {"taboo golden transcript A", golden_transcript_a},
      {"taboo golden transcript B", golden_transcript_b},
      {"beep gate", beep_gate},
      {"deck validation", deck_validation},
      {"emotion mapping table", emotion_table},
      {"interpreter equivalence", interpreter_equivalence},
      {"kinematics oracle", kinematics_oracle},
      {"robot-relative semantics", robot_relative},
      {"protocol replay", protocol_replay},
      {"linearizability smoke test", linearizability},
      {"feedback bounds", feedback_bounds},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Check c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.why << "exception: " << e.what();
    }
    failed += c.ok ? 0 : 1;
    const std::string detail = c.why.str();
    std::cout << (c.ok ? "PASS" : "FAIL") << "  " << name << (detail.empty() ? "" : "  (" + detail + ")")
              << '\n';
  }
  std::cout << (static_cast<int>(std::size(criteria)) - failed) << "/" << static_cast<int>(std::size(criteria)) << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
