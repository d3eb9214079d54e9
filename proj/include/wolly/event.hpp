#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wolly/emotion.hpp"
#include "wolly/gridworld.hpp"
#include "wolly/kinematics.hpp"

namespace wolly {

// Insertion-ordered so payload keys keep their documented order on the wire.
using Json = nlohmann::ordered_json;

enum class EventKind {
  RuleExplanation,
  Clue,
  Beep,
  Speech,
  EmotionChanged,
  PoseChanged,
  ProgramStep,
  GameOver,
  FeedbackReceived,
};

inline constexpr std::array<EventKind, 9> kAllEventKinds = {
    EventKind::RuleExplanation, EventKind::Clue,        EventKind::Beep,
    EventKind::Speech,          EventKind::EmotionChanged, EventKind::PoseChanged,
    EventKind::ProgramStep,     EventKind::GameOver,    EventKind::FeedbackReceived};

inline const char* wire_name(EventKind k) {
  switch (k) {
    case EventKind::RuleExplanation: return "rule_explanation";
    case EventKind::Clue: return "clue";
    case EventKind::Beep: return "beep";
    case EventKind::Speech: return "speech";
    case EventKind::EmotionChanged: return "emotion_changed";
    case EventKind::PoseChanged: return "pose_changed";
    case EventKind::ProgramStep: return "program_step";
    case EventKind::GameOver: return "game_over";
    case EventKind::FeedbackReceived: return "feedback_received";
  }
  return "";
}

inline std::optional<EventKind> event_kind_from_wire(std::string_view name) {
  for (EventKind k : kAllEventKinds) {
    if (name == wire_name(k)) return k;
  }
  return std::nullopt;
}

// An event before the log assigns seq and ts.
struct Occurrence {
  EventKind kind;
  Json payload = Json::object();

  friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

// Keys of the speech message catalog. Transcripts carry keys; prose is
// resolved by whoever renders them.
namespace msg {
inline constexpr std::string_view kRules = "rules";
inline constexpr std::string_view kCompliment = "compliment";
inline constexpr std::string_view kTryAgain = "try_again";
inline constexpr std::string_view kComfort = "comfort";
inline constexpr std::string_view kRevealWord = "reveal_word";
inline constexpr std::string_view kAskReplay = "ask_replay";
inline constexpr std::string_view kGoodbye = "goodbye";
inline constexpr std::string_view kSay = "say";  // free text from a program
}  // namespace msg

// Default English catalog.
inline std::string message_text(std::string_view key) {
  if (key == msg::kRules)
    return "I will give you clues about a secret word. Think together, wait for the beep, "
           "then tell me your answer!";
  if (key == msg::kCompliment) return "Well done, that's right!";
  if (key == msg::kTryAgain) return "Not quite, try again! Here is another clue.";
  if (key == msg::kComfort) return "Don't give up, you'll get it next time!";
  if (key == msg::kRevealWord) return "The word was:";
  if (key == msg::kAskReplay) return "Do you want to play again? Say yes or no.";
  if (key == msg::kGoodbye) return "Thanks for playing!";
  return std::string(key);
}

// Payload builders. Key order here is the canonical wire order.
namespace payload {

inline Json pose(const Pose& p) {
  Json j = Json::object();
  j["x"] = p.x;
  j["y"] = p.y;
  j["theta"] = p.theta;
  return j;
}

inline Json grid_pose(const GridPose& p) {
  Json j = Json::object();
  j["col"] = p.col;
  j["row"] = p.row;
  j["heading"] = std::string(1, heading_letter(p.heading));
  return j;
}

}  // namespace payload

inline Occurrence rule_explanation_event() {
  Json p = Json::object();
  p["key"] = msg::kRules;
  return {EventKind::RuleExplanation, p};
}

inline Occurrence clue_event(int index, const std::string& text) {
  Json p = Json::object();
  p["index"] = index;
  p["text"] = text;
  return {EventKind::Clue, p};
}

inline Occurrence beep_event() { return {EventKind::Beep, Json::object()}; }

inline Occurrence speech_event(std::string_view key, const std::string& text = {}) {
  Json p = Json::object();
  p["key"] = key;
  p["text"] = text;
  return {EventKind::Speech, p};
}

inline Occurrence emotion_changed_event(EmotionState e) {
  Json p = Json::object();
  p["emotion"] = wire_name(e);
  return {EventKind::EmotionChanged, p};
}

inline Occurrence pose_changed_event(const Pose& pose, const GridPose& grid) {
  Json p = Json::object();
  p["pose"] = payload::pose(pose);
  p["grid_pose"] = payload::grid_pose(grid);
  return {EventKind::PoseChanged, p};
}

inline Occurrence program_step_event(std::int64_t program_id, std::int64_t index,
                                     const std::string& statement, const GridPose& grid) {
  Json p = Json::object();
  p["program_id"] = program_id;
  p["index"] = index;
  p["statement"] = statement;
  p["grid_pose"] = payload::grid_pose(grid);
  return {EventKind::ProgramStep, p};
}

inline Occurrence game_over_event(bool won, const std::string& word) {
  Json p = Json::object();
  p["won"] = won;
  p["word"] = word;
  return {EventKind::GameOver, p};
}

inline Occurrence feedback_received_event(int rating) {
  Json p = Json::object();
  p["rating"] = rating;
  return {EventKind::FeedbackReceived, p};
}

}  // namespace wolly
