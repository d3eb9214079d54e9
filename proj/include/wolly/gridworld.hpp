#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wolly/error.hpp"
#include "wolly/kinematics.hpp"

namespace wolly {

// Clockwise order, so turning right is +1 and turning left is -1 (mod 4).
enum class GridHeading { North = 0, East = 1, South = 2, West = 3 };

inline GridHeading turn_left(GridHeading h) {
  return static_cast<GridHeading>((static_cast<int>(h) + 3) % 4);
}

inline GridHeading turn_right(GridHeading h) {
  return static_cast<GridHeading>((static_cast<int>(h) + 1) % 4);
}

inline char heading_letter(GridHeading h) {
  switch (h) {
    case GridHeading::North: return 'N';
    case GridHeading::East: return 'E';
    case GridHeading::South: return 'S';
    case GridHeading::West: return 'W';
  }
  return '?';
}

inline bool heading_from_letter(char c, GridHeading& out) {
  switch (std::toupper(static_cast<unsigned char>(c))) {
    case 'N': out = GridHeading::North; return true;
    case 'E': out = GridHeading::East; return true;
    case 'S': out = GridHeading::South; return true;
    case 'W': out = GridHeading::West; return true;
    default: return false;
  }
}

// Row 0 is the top text row, so North means row - 1.
inline std::pair<int, int> heading_delta(GridHeading h) {
  switch (h) {
    case GridHeading::North: return {0, -1};
    case GridHeading::East: return {1, 0};
    case GridHeading::South: return {0, 1};
    case GridHeading::West: return {-1, 0};
  }
  return {0, 0};
}

struct Cell {
  int col = 0;
  int row = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct GridPose {
  int col = 0;
  int row = 0;
  GridHeading heading = GridHeading::East;

  Cell cell() const { return {col, row}; }

  friend bool operator==(const GridPose&, const GridPose&) = default;
};

enum class GridAction { MoveForward, TurnLeft, TurnRight };

// Immutable after parse_maze.
class Maze {
 public:
  Maze(int width, int height, std::set<Cell> blocked, GridPose start, Cell goal)
      : width_(width), height_(height), blocked_(std::move(blocked)), start_(start), goal_(goal) {
    if (width_ < 1 || height_ < 1) {
      throw SemanticError("maze must be at least 1x1");
    }
    if (!free(start_.cell())) {
      throw SemanticError("start cell is out of bounds or blocked");
    }
    if (!free(goal_)) {
      throw SemanticError("goal cell is out of bounds or blocked");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  const std::set<Cell>& blocked() const { return blocked_; }
  const GridPose& start() const { return start_; }
  const Cell& goal() const { return goal_; }

  bool in_bounds(Cell c) const {
    return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_;
  }
  bool free(Cell c) const { return in_bounds(c) && !blocked_.contains(c); }

  // Renders back to the text format accepted by parse_maze.
  std::string to_text() const {
    std::string out = std::to_string(width_) + "x" + std::to_string(height_) + " " +
                      heading_letter(start_.heading) + "\n";
    for (int row = 0; row < height_; ++row) {
      for (int col = 0; col < width_; ++col) {
        const Cell c{col, row};
        if (c == start_.cell()) out += 'S';
        else if (c == goal_) out += 'G';
        else if (blocked_.contains(c)) out += '#';
        else out += '.';
      }
      out += '\n';
    }
    return out;
  }

  friend bool operator==(const Maze&, const Maze&) = default;

 private:
  int width_;
  int height_;
  std::set<Cell> blocked_;
  GridPose start_;
  Cell goal_;
};

namespace detail {

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.remove_suffix(1);
    }
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) {
    lines.pop_back();
  }
  return lines;
}

inline bool parse_positive(std::string_view s, int& out) {
  if (s.empty() || s.size() > 6) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && out >= 1;
}

}  // namespace detail

// Format:
//   WxH <N|E|S|W>
//   one row per line of '.', '#', 'S', 'G'
// LF or CRLF, trailing whitespace ignored.
inline Maze parse_maze(std::string_view text) {
  const auto lines = detail::split_lines(text);
  if (lines.empty()) {
    throw SyntaxError(1, 1, "empty maze file");
  }

  const std::string_view header = lines[0];
  const std::size_t x = header.find('x');
  const std::size_t space = header.find(' ');
  if (x == std::string_view::npos || space == std::string_view::npos || x > space) {
    throw SyntaxError(1, 1, "expected header 'WxH <heading>'");
  }
  int width = 0;
  int height = 0;
  if (!detail::parse_positive(header.substr(0, x), width)) {
    throw SyntaxError(1, 1, "invalid width");
  }
  if (!detail::parse_positive(header.substr(x + 1, space - x - 1), height)) {
    throw SyntaxError(1, static_cast<int>(x) + 2, "invalid height");
  }
  std::string_view heading_part = header.substr(space + 1);
  while (!heading_part.empty() && heading_part.front() == ' ') heading_part.remove_prefix(1);
  GridHeading heading{};
  if (heading_part.size() != 1 || !heading_from_letter(heading_part[0], heading)) {
    throw SyntaxError(1, static_cast<int>(space) + 2, "heading must be one of N, E, S, W");
  }

  if (static_cast<int>(lines.size()) - 1 != height) {
    const int line = std::min<int>(static_cast<int>(lines.size()), height + 1) + 1;
    throw SyntaxError(line, 1,
                      "expected " + std::to_string(height) + " rows, found " +
                          std::to_string(lines.size() - 1));
  }

  std::set<Cell> blocked;
  std::vector<Cell> starts;
  std::vector<Cell> goals;
  for (int row = 0; row < height; ++row) {
    const std::string_view line = lines[static_cast<std::size_t>(row) + 1];
    const int line_no = row + 2;
    if (static_cast<int>(line.size()) != width) {
      throw SyntaxError(line_no, std::min<int>(static_cast<int>(line.size()), width) + 1,
                        "expected " + std::to_string(width) + " cells");
    }
    for (int col = 0; col < width; ++col) {
      switch (line[static_cast<std::size_t>(col)]) {
        case '.': break;
        case '#': blocked.insert({col, row}); break;
        case 'S': starts.push_back({col, row}); break;
        case 'G': goals.push_back({col, row}); break;
        default:
          throw SyntaxError(line_no, col + 1,
                            std::string("unexpected character '") +
                                line[static_cast<std::size_t>(col)] + "'");
      }
    }
  }

  if (starts.empty()) throw SemanticError("maze has no start cell 'S'");
  if (starts.size() > 1) throw SemanticError("maze has more than one start cell 'S'");
  if (goals.empty()) throw SemanticError("maze has no goal cell 'G'");
  if (goals.size() > 1) throw SemanticError("maze has more than one goal cell 'G'");

  return Maze(width, height, std::move(blocked), GridPose{starts[0].col, starts[0].row, heading},
              goals[0]);
}

// Throws WallCollision when the target cell is blocked or outside the maze;
// the caller's pose is untouched in that case.
inline GridPose apply_action(const GridPose& pose, GridAction action, const Maze& maze) {
  switch (action) {
    case GridAction::TurnLeft: return {pose.col, pose.row, turn_left(pose.heading)};
    case GridAction::TurnRight: return {pose.col, pose.row, turn_right(pose.heading)};
    case GridAction::MoveForward: {
      const auto [dc, dr] = heading_delta(pose.heading);
      const Cell target{pose.col + dc, pose.row + dr};
      if (!maze.free(target)) {
        throw WallCollision("cannot move to (" + std::to_string(target.col) + "," +
                            std::to_string(target.row) + ")");
      }
      return {target.col, target.row, pose.heading};
    }
  }
  return pose;
}

inline bool at_goal(const GridPose& pose, const Maze& maze) { return pose.cell() == maze.goal(); }

inline double heading_radians(GridHeading h) {
  switch (h) {
    case GridHeading::East: return 0.0;
    case GridHeading::North: return std::numbers::pi / 2.0;
    case GridHeading::West: return std::numbers::pi;
    case GridHeading::South: return 3.0 * std::numbers::pi / 2.0;
  }
  return 0.0;
}

// Continuous counterpart of a grid pose: cell (0,0) at the origin, columns
// along +x, rows along -y (row 0 is the top row, North is +y).
inline Pose to_continuous(const GridPose& pose, double cell_size) {
  return {pose.col * cell_size, -pose.row * cell_size, heading_radians(pose.heading)};
}

}  // namespace wolly
