#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "wolly/error.hpp"
#include "wolly/event.hpp"
#include "wolly/gridworld.hpp"
#include "wolly/protocol.hpp"
#include "wolly/server.hpp"
#include "wolly/taboo.hpp"
#include "wolly/wollyscript.hpp"

namespace wolly::cli {

enum ExitCode : int { kOk = 0, kContentError = 1, kUsageError = 2 };

inline std::string format_grid_pose(const GridPose& p) {
  return "(" + std::to_string(p.col) + "," + std::to_string(p.row) + "," +
         heading_letter(p.heading) + ")";
}

// One transcript line per event. Shared by the taboo REPL and `replay` so a
// re-rendered log matches the live transcript.
inline std::string render_event(const Event& e) {
  const Json& p = e.payload;
  auto grid = [](const Json& g) {
    return "(" + std::to_string(g["col"].get<int>()) + "," + std::to_string(g["row"].get<int>()) +
           "," + g["heading"].get<std::string>() + ")";
  };
  switch (e.kind) {
    case EventKind::RuleExplanation: return "SAY: " + p["key"].get<std::string>();
    case EventKind::Clue:
      return "CLUE " + std::to_string(p["index"].get<int>()) + ": " + p["text"].get<std::string>();
    case EventKind::Beep: return "*** BEEP ***";
    case EventKind::Speech: {
      std::string line = "SAY: " + p["key"].get<std::string>();
      const auto text = p["text"].get<std::string>();
      if (!text.empty()) line += " (" + text + ")";
      return line;
    }
    case EventKind::EmotionChanged: return "EMOTION: " + p["emotion"].get<std::string>();
    case EventKind::PoseChanged: {
      std::ostringstream ss;
      ss << std::fixed << std::setprecision(3) << "POSE: x=" << p["pose"]["x"].get<double>()
         << " y=" << p["pose"]["y"].get<double>() << " theta=" << p["pose"]["theta"].get<double>()
         << " grid=" << grid(p["grid_pose"]);
      return ss.str();
    }
    case EventKind::ProgramStep:
      return "STEP " + std::to_string(p["index"].get<std::int64_t>()) + ": " +
             p["statement"].get<std::string>() + " -> " + grid(p["grid_pose"]);
    case EventKind::GameOver:
      return std::string("GAME OVER: ") + (p["won"].get<bool>() ? "won" : "lost") + " (" +
             p["word"].get<std::string>() + ")";
    case EventKind::FeedbackReceived:
      return "FEEDBACK: " + std::to_string(p["rating"].get<int>());
  }
  return {};
}

inline std::string render_trace_step(std::size_t index, const TraceStep& step, bool collided) {
  std::string line = std::to_string(index) + ": " + statement_text(step.statement);
  if (collided) return line + " -> wall collision";
  if (!step.statement.is_expressive()) line += " -> " + format_grid_pose(step.pose);
  return line;
}

// Renders an execution trace: one line per step, then the outcome.
inline void print_trace(const ExecutionTrace& trace, std::ostream& out) {
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const bool collided = trace.outcome.kind == Outcome::Kind::WallCollision &&
                          trace.outcome.step == i + 1;
    out << render_trace_step(i + 1, trace.steps[i], collided) << '\n';
  }
  out << describe(trace.outcome) << '\n';
}

inline int exit_code_for(const Outcome& o) {
  return o.kind == Outcome::Kind::Success || o.kind == Outcome::Kind::ReachedGoal ? kOk
                                                                                  : kContentError;
}

inline int run_program_text(std::string_view source, std::string_view maze_text,
                            std::ostream& out, std::ostream& err, std::size_t step_limit = 10'000) {
  try {
    const Maze maze = parse_maze(maze_text);
    ScriptLimits limits;
    limits.step_limit = step_limit;
    const Program program = parse(source, limits);
    const ExecutionTrace trace = execute(program, maze, step_limit);
    print_trace(trace, out);
    return exit_code_for(trace.outcome);
  } catch (const Error& e) {
    err << to_string(e.code()) << ": " << e.what() << '\n';
    return kContentError;
  }
}

inline int run_program(const std::string& program_path, const std::string& maze_path,
                       std::ostream& out, std::ostream& err) {
  std::string source;
  std::string maze;
  try {
    source = read_file(program_path);
    maze = read_file(maze_path);
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kUsageError;
  }
  return run_program_text(source, maze, out, err);
}

// Every problem found in a deck file, not just the first.
inline std::vector<std::string> deck_diagnostics(std::string_view text) {
  std::vector<std::string> found;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    return {std::string("FormatError: ") + e.what()};
  }
  if (!doc.is_array()) return {"FormatError: deck must be a JSON array of cards"};
  if (doc.empty()) return {"FormatError: deck has no cards"};
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string where = "card " + std::to_string(i + 1);
    try {
      // Re-use the loader on a one-card deck for per-card format checks.
      const Deck one = load_deck(nlohmann::json::array({doc[i]}).dump());
      const std::string word = normalize_word(one[0].word);
      if (!seen.insert(word).second) {
        found.push_back(where + ": CardError: card '" + one[0].word + "': duplicate word in deck");
      }
    } catch (const CardError& e) {
      found.push_back(where + ": CardError: " + e.what());
    } catch (const FormatError& e) {
      found.push_back(std::string("FormatError: ") + e.what());
    }
  }
  return found;
}

enum class ContentKind { Deck, Maze, Program };

inline ContentKind detect_content(const std::string& path, std::string_view text) {
  const auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".json") return ContentKind::Deck;
  if (ext == ".maze") return ContentKind::Maze;
  if (ext == ".wolly" || ext == ".ws") return ContentKind::Program;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '[') return ContentKind::Deck;
  const auto eol = text.find('\n');
  const std::string_view head = text.substr(0, eol);
  if (!head.empty() && std::isdigit(static_cast<unsigned char>(head[0])) &&
      head.find('x') != std::string_view::npos) {
    return ContentKind::Maze;
  }
  return ContentKind::Program;
}

inline int validate_text(const std::string& path, std::string_view text, std::ostream& out) {
  std::vector<std::string> problems;
  switch (detect_content(path, text)) {
    case ContentKind::Deck: problems = deck_diagnostics(text); break;
    case ContentKind::Maze:
      try {
        parse_maze(text);
      } catch (const SyntaxError& e) {
        problems.push_back("SyntaxError at line " + std::to_string(e.line()) + ", col " +
                           std::to_string(e.col()) + ": " + e.detail());
      } catch (const SemanticError& e) {
        problems.push_back(std::string("SemanticError: ") + e.what());
      }
      break;
    case ContentKind::Program:
      try {
        const Program p = parse(text);
        flatten(p);
      } catch (const SyntaxError& e) {
        problems.push_back("SyntaxError at line " + std::to_string(e.line()) + ", col " +
                           std::to_string(e.col()) + ": " + e.detail());
      } catch (const LimitError& e) {
        problems.push_back(std::string("LimitError: ") + e.what());
      }
      break;
  }
  if (problems.empty()) {
    out << "OK\n";
    return kOk;
  }
  for (const auto& p : problems) out << path << ": " << p << '\n';
  return kContentError;
}

inline int validate(const std::string& path, std::ostream& out, std::ostream& err) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kUsageError;
  }
  return validate_text(path, text, out);
}

// Accepts either {"events":[...]} as served by /events or a bare array.
inline std::vector<Event> parse_event_log(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("event log is not valid JSON: ") + e.what());
  }
  const Json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("events") || doc.size() != 1) throw FormatError("expected {\"events\":[...]}");
    list = &doc["events"];
  }
  if (!list->is_array()) throw FormatError("events must be an array");
  std::vector<Event> events;
  for (const auto& item : *list) {
    events.push_back(event_from_json(item));
    if (events.back().seq != static_cast<std::int64_t>(events.size())) {
      throw FormatError("event seq " + std::to_string(events.back().seq) + " breaks the sequence");
    }
  }
  return events;
}

inline int replay_text(std::string_view text, std::ostream& out, std::ostream& err) {
  try {
    for (const auto& e : parse_event_log(text)) out << render_event(e) << '\n';
    return kOk;
  } catch (const Error& e) {
    err << to_string(e.code()) << ": " << e.what() << '\n';
    return kContentError;
  }
}

inline int replay(const std::string& path, std::ostream& out, std::ostream& err) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kUsageError;
  }
  return replay_text(text, out, err);
}

struct ReplClock {
  std::function<std::int64_t()> now;
  std::function<void(std::int64_t)> sleep_ms;

  static ReplClock wall() {
    auto start = std::chrono::steady_clock::now();
    return {[start] {
              return std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - start)
                  .count();
            },
            [](std::int64_t ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); }};
  }
};

struct ReplOptions {
  std::uint64_t seed = 0;
  std::int64_t think_ms = 20'000;
  ReplClock clock = ReplClock::wall();
  std::ostream* prompt = nullptr;  // hints that are not part of the transcript
};

// Terminal Taboo: clues and robot reactions print as they happen; guesses and
// yes/no answers are read line by line from `in`. Returns the session log.
inline EventLog taboo_repl(const Deck& deck, const ReplOptions& opts, std::istream& in,
                           std::ostream& out) {
  EventLog log;
  auto publish = [&](const std::vector<Occurrence>& batch) {
    for (const auto& e : log.append(batch, opts.clock.now())) {
      out << render_event(e) << '\n';
    }
    out.flush();
  };
  auto hint = [&](const char* text) {
    if (opts.prompt) *opts.prompt << text << std::flush;
  };

  TabooConfig cfg;
  cfg.think_window_ms = opts.think_ms;
  auto t = start_game(deck, opts.seed, opts.clock.now(), cfg);
  publish(t.events);
  TabooGameState state = std::move(t.state);

  std::string line;
  while (true) {
    if (const auto* thinking = std::get_if<phase::Thinking>(&state.phase)) {
      const std::int64_t wait = thinking->deadline_ms - opts.clock.now();
      if (wait > 0) opts.clock.sleep_ms(wait);
      auto ticked = tick(state, std::max(opts.clock.now(), thinking->deadline_ms));
      publish(ticked.events);
      state = std::move(ticked.state);
    } else if (std::holds_alternative<phase::AwaitingGuess>(state.phase)) {
      hint("your guess> ");
      if (!std::getline(in, line)) break;
      auto next = submit_guess(state, line, opts.clock.now());
      publish(next.events);
      state = std::move(next.state);
    } else if (std::holds_alternative<phase::AskReplay>(state.phase)) {
      hint("play again? (yes/no)> ");
      ReplayAnswer answer = ReplayAnswer::No;
      if (std::getline(in, line)) {
        try {
          answer = parse_replay_answer(line);
        } catch (const InvalidAnswer&) {
          hint("please answer yes or no\n");
          continue;
        }
      }
      auto next = answer_replay(state, deck, answer, opts.clock.now());
      publish(next.events);
      state = std::move(next.state);
    } else {
      break;
    }
  }
  return log;
}

}  // namespace wolly::cli
