#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wolly/emotion.hpp"
#include "wolly/error.hpp"
#include "wolly/gridworld.hpp"

namespace wolly {

struct ScriptLimits {
  int max_depth = 8;
  int max_repeat = 100;
  std::size_t max_say_length = 200;  // code points
  std::size_t step_limit = 10'000;
};

// One block of a child's program. Repeat is the only compound statement;
// every other kind is a primitive.
struct Statement {
  enum class Kind { MoveForward, TurnLeft, TurnRight, Beep, Say, Emote, Repeat };

  Kind kind = Kind::MoveForward;
  std::string text;                             // Say
  EmotionState emotion = EmotionState::Neutral;  // Emote
  int count = 0;                                // Repeat
  std::vector<Statement> body;                  // Repeat

  static Statement move() { return {Kind::MoveForward, {}, EmotionState::Neutral, 0, {}}; }
  static Statement left() { return {Kind::TurnLeft, {}, EmotionState::Neutral, 0, {}}; }
  static Statement right() { return {Kind::TurnRight, {}, EmotionState::Neutral, 0, {}}; }
  static Statement beep() { return {Kind::Beep, {}, EmotionState::Neutral, 0, {}}; }
  static Statement say(std::string text) {
    return {Kind::Say, std::move(text), EmotionState::Neutral, 0, {}};
  }
  static Statement emote(EmotionState e) { return {Kind::Emote, {}, e, 0, {}}; }
  static Statement repeat(int count, std::vector<Statement> body) {
    return {Kind::Repeat, {}, EmotionState::Neutral, count, std::move(body)};
  }

  bool is_primitive() const { return kind != Kind::Repeat; }
  bool is_expressive() const {
    return kind == Kind::Beep || kind == Kind::Say || kind == Kind::Emote;
  }

  friend bool operator==(const Statement&, const Statement&) = default;
};

struct Program {
  std::vector<Statement> statements;

  friend bool operator==(const Program&, const Program&) = default;
};

namespace detail {

inline std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct Token {
  enum class Kind { Word, Int, String, LBrace, RBrace, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view source) : src_(source) {}

  Token next() {
    skip_blank();
    Token tok;
    tok.line = line_;
    tok.col = col_;
    if (pos_ >= src_.size()) {
      tok.kind = Token::Kind::End;
      return tok;
    }
    const char c = src_[pos_];
    if (c == '{' || c == '}') {
      tok.kind = c == '{' ? Token::Kind::LBrace : Token::Kind::RBrace;
      tok.text = std::string(1, c);
      advance();
      return tok;
    }
    if (c == '"') {
      tok.kind = Token::Kind::String;
      tok.text = read_string(tok.line, tok.col);
      return tok;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      tok.kind = Token::Kind::Int;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        tok.text += src_[pos_];
        advance();
      }
      if (pos_ < src_.size() && is_word_char(src_[pos_])) {
        throw SyntaxError(tok.line, tok.col, "malformed number");
      }
      return tok;
    }
    if (is_word_start(c)) {
      tok.kind = Token::Kind::Word;
      while (pos_ < src_.size() && is_word_char(src_[pos_])) {
        tok.text += src_[pos_];
        advance();
      }
      return tok;
    }
    throw SyntaxError(line_, col_, std::string("unexpected character '") + c + "'");
  }

 private:
  static bool is_word_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }
  static bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else if ((static_cast<unsigned char>(src_[pos_]) & 0xC0) != 0x80) {
      ++col_;
    }
    ++pos_;
  }

  void skip_blank() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string read_string(int line, int col) {
    advance();  // opening quote
    std::string out;
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') {
        throw SyntaxError(line, col, "unterminated string");
      }
      const char c = src_[pos_];
      if (c == '"') {
        advance();
        return out;
      }
      if (c == '\\') {
        advance();
        if (pos_ >= src_.size()) throw SyntaxError(line, col, "unterminated string");
        const char esc = src_[pos_];
        switch (esc) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          default:
            throw SyntaxError(line_, col_, std::string("unknown escape '\\") + esc + "'");
        }
        advance();
        continue;
      }
      out += c;
      advance();
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::string_view source, const ScriptLimits& limits) : lexer_(source), limits_(limits) {
    current_ = lexer_.next();
  }

  Program parse_program() {
    Program program;
    program.statements = parse_block(0);
    if (current_.kind == Token::Kind::RBrace) {
      throw SyntaxError(current_.line, current_.col, "unmatched '}'");
    }
    return program;
  }

 private:
  Token take() {
    Token tok = std::move(current_);
    current_ = lexer_.next();
    return tok;
  }

  // Reads statements until '}' or end of input (neither consumed).
  std::vector<Statement> parse_block(int depth) {
    std::vector<Statement> out;
    while (current_.kind != Token::Kind::End && current_.kind != Token::Kind::RBrace) {
      out.push_back(parse_statement(depth));
    }
    return out;
  }

  Statement parse_statement(int depth) {
    const Token tok = take();
    if (tok.kind != Token::Kind::Word) {
      throw SyntaxError(tok.line, tok.col, "expected a command, found '" + tok.text + "'");
    }
    const std::string keyword = upper(tok.text);
    if (keyword == "MOVE") return Statement::move();
    if (keyword == "LEFT") return Statement::left();
    if (keyword == "RIGHT") return Statement::right();
    if (keyword == "BEEP") return Statement::beep();
    if (keyword == "SAY") {
      const Token str = take();
      if (str.kind != Token::Kind::String) {
        throw SyntaxError(str.line, str.col, "SAY expects a quoted string");
      }
      if (utf8_length(str.text) > limits_.max_say_length) {
        throw LimitError(std::to_string(str.line) + ":" + std::to_string(str.col) +
                         ": SAY text longer than " + std::to_string(limits_.max_say_length) +
                         " characters");
      }
      return Statement::say(str.text);
    }
    if (keyword == "EMOTE") {
      const Token name = take();
      if (name.kind != Token::Kind::Word) {
        throw SyntaxError(name.line, name.col, "EMOTE expects an emotion name");
      }
      const auto emotion = emotion_from_wire(lower(name.text));
      if (!emotion) {
        throw SyntaxError(name.line, name.col, "unknown emotion '" + name.text + "'");
      }
      return Statement::emote(*emotion);
    }
    if (keyword == "REPEAT") {
      const Token num = take();
      if (num.kind != Token::Kind::Int) {
        throw SyntaxError(num.line, num.col, "REPEAT expects a count");
      }
      const std::string where = std::to_string(num.line) + ":" + std::to_string(num.col) + ": ";
      int count = 0;
      if (num.text.size() > 4 || (count = std::stoi(num.text)) < 1 ||
          count > limits_.max_repeat) {
        throw LimitError(where + "REPEAT count must be in 1.." +
                         std::to_string(limits_.max_repeat));
      }
      if (depth + 1 > limits_.max_depth) {
        throw LimitError(where + "REPEAT nesting deeper than " +
                         std::to_string(limits_.max_depth));
      }
      const Token open = take();
      if (open.kind != Token::Kind::LBrace) {
        throw SyntaxError(open.line, open.col, "expected '{' after REPEAT count");
      }
      auto body = parse_block(depth + 1);
      if (current_.kind != Token::Kind::RBrace) {
        throw SyntaxError(open.line, open.col, "unterminated REPEAT block");
      }
      take();
      return Statement::repeat(count, std::move(body));
    }
    throw SyntaxError(tok.line, tok.col, "unknown command '" + tok.text + "'");
  }

  Lexer lexer_;
  const ScriptLimits& limits_;
  Token current_;
};

inline std::string quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  out += '"';
  return out;
}

inline void print_block(const std::vector<Statement>& block, int indent, std::string& out);

}  // namespace detail

// Source text of a single primitive, e.g. `SAY "hi"`. Repeat renders its
// header only.
inline std::string statement_text(const Statement& s) {
  switch (s.kind) {
    case Statement::Kind::MoveForward: return "MOVE";
    case Statement::Kind::TurnLeft: return "LEFT";
    case Statement::Kind::TurnRight: return "RIGHT";
    case Statement::Kind::Beep: return "BEEP";
    case Statement::Kind::Say: return "SAY " + detail::quote(s.text);
    case Statement::Kind::Emote: return std::string("EMOTE ") + wire_name(s.emotion);
    case Statement::Kind::Repeat: return "REPEAT " + std::to_string(s.count);
  }
  return {};
}

inline void detail::print_block(const std::vector<Statement>& block, int indent,
                                std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  for (const auto& s : block) {
    out += pad + statement_text(s);
    if (s.kind == Statement::Kind::Repeat) {
      out += " {\n";
      print_block(s.body, indent + 1, out);
      out += pad + "}";
    }
    out += '\n';
  }
}

inline Program parse(std::string_view source, const ScriptLimits& limits = {}) {
  return detail::Parser(source, limits).parse_program();
}

// Canonical source form; parse(to_source(p)) == p.
inline std::string to_source(const Program& program) {
  std::string out;
  detail::print_block(program.statements, 0, out);
  return out;
}

// Number of primitives after loop unrolling, saturating at `cap`.
inline std::uint64_t flattened_size(std::span<const Statement> block,
                                    std::uint64_t cap = UINT64_MAX) {
  std::uint64_t total = 0;
  for (const auto& s : block) {
    std::uint64_t n = 1;
    if (s.kind == Statement::Kind::Repeat) {
      const std::uint64_t inner = flattened_size(s.body, cap);
      n = inner > cap / static_cast<std::uint64_t>(s.count) ? cap
                                                             : inner * static_cast<std::uint64_t>(s.count);
    }
    total = n > cap - total ? cap : total + n;
  }
  return total;
}

namespace detail {

// Appends at most `max` primitives; returns false once truncated.
inline bool unroll(std::span<const Statement> block, std::size_t max, std::vector<Statement>& out) {
  for (const auto& s : block) {
    if (s.kind == Statement::Kind::Repeat) {
      for (int i = 0; i < s.count; ++i) {
        if (!unroll(s.body, max, out)) return false;
      }
    } else {
      if (out.size() >= max) return false;
      out.push_back(s);
    }
  }
  return true;
}

}  // namespace detail

// The first `max` primitives of the unrolled program.
inline std::vector<Statement> flatten_prefix(const Program& program, std::size_t max) {
  std::vector<Statement> out;
  detail::unroll(program.statements, max, out);
  return out;
}

inline std::vector<Statement> flatten(const Program& program, std::size_t step_limit = 10'000) {
  const std::uint64_t size = flattened_size(program.statements, std::uint64_t{step_limit} + 1);
  if (size > step_limit) {
    throw LimitError("program expands to more than " + std::to_string(step_limit) + " steps");
  }
  return flatten_prefix(program, step_limit);
}

struct Outcome {
  enum class Kind { Success, ReachedGoal, WallCollision, StepLimitExceeded };
  Kind kind = Kind::Success;
  std::size_t step = 0;  // 1-based step for ReachedGoal / WallCollision

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

inline const char* wire_name(Outcome::Kind k) {
  switch (k) {
    case Outcome::Kind::Success: return "success";
    case Outcome::Kind::ReachedGoal: return "reached_goal";
    case Outcome::Kind::WallCollision: return "wall_collision";
    case Outcome::Kind::StepLimitExceeded: return "step_limit_exceeded";
  }
  return "success";
}

inline std::string describe(const Outcome& o) {
  switch (o.kind) {
    case Outcome::Kind::Success: return "Success";
    case Outcome::Kind::ReachedGoal: return "ReachedGoal after step " + std::to_string(o.step);
    case Outcome::Kind::WallCollision: return "WallCollision at step " + std::to_string(o.step);
    case Outcome::Kind::StepLimitExceeded: return "StepLimitExceeded";
  }
  return {};
}

// A primitive and the robot pose after it ran. Expressive primitives carry
// the unchanged pose; the statement itself is the event.
struct TraceStep {
  Statement statement;
  GridPose pose;

  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct ExecutionTrace {
  std::vector<TraceStep> steps;
  Outcome outcome;
  GridPose final_pose;

  friend bool operator==(const ExecutionTrace&, const ExecutionTrace&) = default;
};

// Primitive-level semantics shared by both traversal strategies.
class Executor {
 public:
  Executor(Maze maze, GridPose start, std::size_t step_limit)
      : maze_(std::move(maze)), pose_(start), step_limit_(step_limit) {
    trace_.final_pose = start;
  }

  // Runs one primitive. Returns false once execution has stopped (goal,
  // collision, or step limit); later calls are ignored.
  bool feed(const Statement& primitive) {
    if (done_) return false;
    if (trace_.steps.size() >= step_limit_) {
      finish({Outcome::Kind::StepLimitExceeded, 0});
      return false;
    }
    const std::size_t index = trace_.steps.size() + 1;
    switch (primitive.kind) {
      case Statement::Kind::MoveForward:
      case Statement::Kind::TurnLeft:
      case Statement::Kind::TurnRight:
        try {
          pose_ = apply_action(pose_, to_action(primitive.kind), maze_);
        } catch (const WallCollision&) {
          trace_.steps.push_back({primitive, pose_});
          finish({Outcome::Kind::WallCollision, index});
          return false;
        }
        break;
      case Statement::Kind::Beep:
      case Statement::Kind::Say:
      case Statement::Kind::Emote:
        break;
      case Statement::Kind::Repeat:
        throw InvalidParameter("Executor::feed expects primitives only");
    }
    trace_.steps.push_back({primitive, pose_});
    if (at_goal(pose_, maze_)) {
      finish({Outcome::Kind::ReachedGoal, index});
      return false;
    }
    return true;
  }

  // Marks normal completion if nothing stopped execution earlier.
  ExecutionTrace finish() {
    if (!done_) finish({Outcome::Kind::Success, 0});
    return trace_;
  }

  bool done() const { return done_; }
  const GridPose& pose() const { return pose_; }
  const ExecutionTrace& trace() const { return trace_; }

 private:
  static GridAction to_action(Statement::Kind k) {
    switch (k) {
      case Statement::Kind::TurnLeft: return GridAction::TurnLeft;
      case Statement::Kind::TurnRight: return GridAction::TurnRight;
      default: return GridAction::MoveForward;
    }
  }

  void finish(Outcome outcome) {
    done_ = true;
    trace_.outcome = outcome;
    trace_.final_pose = pose_;
  }

  Maze maze_;
  GridPose pose_;
  std::size_t step_limit_;
  ExecutionTrace trace_;
  bool done_ = false;
};

namespace detail {

inline bool walk(std::span<const Statement> block, Executor& exec) {
  for (const auto& s : block) {
    if (s.kind == Statement::Kind::Repeat) {
      for (int i = 0; i < s.count; ++i) {
        if (!walk(s.body, exec)) return false;
      }
    } else if (!exec.feed(s)) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

// Tree-walking interpreter.
inline ExecutionTrace execute(const Program& program, const Maze& maze,
                              std::size_t step_limit = 10'000) {
  Executor exec(maze, maze.start(), step_limit);
  detail::walk(program.statements, exec);
  return exec.finish();
}

// Runs an already-unrolled primitive sequence.
inline ExecutionTrace execute_flat(std::span<const Statement> primitives, const Maze& maze,
                                   std::size_t step_limit = 10'000) {
  Executor exec(maze, maze.start(), step_limit);
  for (const auto& s : primitives) {
    if (!exec.feed(s)) break;
  }
  return exec.finish();
}

// Flattening interpreter: unrolls first, then runs the primitive list.
inline ExecutionTrace execute_flattened(const Program& program, const Maze& maze,
                                        std::size_t step_limit = 10'000) {
  // One primitive past the limit is enough to observe StepLimitExceeded.
  const auto primitives = flatten_prefix(program, step_limit + 1);
  return execute_flat(primitives, maze, step_limit);
}

}  // namespace wolly
