#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "wolly/error.hpp"

namespace wolly {

enum class EmotionState { VeryHappy, Happy, Neutral, Sad };

inline constexpr std::array<EmotionState, 4> kAllEmotions = {
    EmotionState::VeryHappy, EmotionState::Happy, EmotionState::Neutral, EmotionState::Sad};

inline const char* wire_name(EmotionState e) {
  switch (e) {
    case EmotionState::VeryHappy: return "very_happy";
    case EmotionState::Happy: return "happy";
    case EmotionState::Neutral: return "neutral";
    case EmotionState::Sad: return "sad";
  }
  return "neutral";
}

inline std::optional<EmotionState> emotion_from_wire(std::string_view name) {
  for (EmotionState e : kAllEmotions) {
    if (name == wire_name(e)) return e;
  }
  return std::nullopt;
}

// Something that happened during a game and that the robot reacts to.
class GameEvent {
 public:
  enum class Kind { GuessedAtClue, FailedAllClues, WrongAttempt, GameStart };

  static GameEvent guessed_at_clue(int index) {
    if (index < 1 || index > 4) {
      throw InvalidParameter("clue index must be in 1..4");
    }
    return GameEvent(Kind::GuessedAtClue, index);
  }
  static GameEvent failed_all_clues() { return GameEvent(Kind::FailedAllClues, 0); }
  static GameEvent wrong_attempt() { return GameEvent(Kind::WrongAttempt, 0); }
  static GameEvent game_start() { return GameEvent(Kind::GameStart, 0); }

  Kind kind() const { return kind_; }
  // Only meaningful for GuessedAtClue.
  int clue_index() const { return clue_index_; }

 private:
  GameEvent(Kind kind, int clue_index) : kind_(kind), clue_index_(clue_index) {}

  Kind kind_;
  int clue_index_;
};

inline EmotionState emotion_for(const GameEvent& event) {
  switch (event.kind()) {
    case GameEvent::Kind::GuessedAtClue:
      return event.clue_index() == 1 ? EmotionState::VeryHappy : EmotionState::Happy;
    case GameEvent::Kind::FailedAllClues: return EmotionState::Sad;
    case GameEvent::Kind::WrongAttempt: return EmotionState::Neutral;
    case GameEvent::Kind::GameStart: return EmotionState::Neutral;
  }
  return EmotionState::Neutral;
}

enum class Eyes { Round, Heart, Droopy };
enum class Mouth { Smile, BigSmile, Flat, Frown };
// The face has no nose; the type admits a single value.
enum class Nose { Absent };

inline const char* wire_name(Eyes e) {
  switch (e) {
    case Eyes::Round: return "round";
    case Eyes::Heart: return "heart";
    case Eyes::Droopy: return "droopy";
  }
  return "round";
}

inline const char* wire_name(Mouth m) {
  switch (m) {
    case Mouth::Smile: return "smile";
    case Mouth::BigSmile: return "big_smile";
    case Mouth::Flat: return "flat";
    case Mouth::Frown: return "frown";
  }
  return "flat";
}

inline const char* wire_name(Nose) { return "absent"; }

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct FaceDescriptor {
  Eyes eyes = Eyes::Round;
  Mouth mouth = Mouth::Flat;
  Nose nose = Nose::Absent;
  Rgb led_color{255, 255, 255};

  friend bool operator==(const FaceDescriptor&, const FaceDescriptor&) = default;
};

// LED color per emotion; overridable from the server config.
struct LedPalette {
  Rgb very_happy{255, 64, 128};
  Rgb happy{0, 200, 0};
  Rgb neutral{255, 255, 255};
  Rgb sad{0, 64, 255};

  const Rgb& operator[](EmotionState e) const {
    switch (e) {
      case EmotionState::VeryHappy: return very_happy;
      case EmotionState::Happy: return happy;
      case EmotionState::Neutral: return neutral;
      case EmotionState::Sad: return sad;
    }
    return neutral;
  }
};

inline FaceDescriptor face_for(EmotionState emotion, const LedPalette& palette = {}) {
  switch (emotion) {
    case EmotionState::VeryHappy:
      return {Eyes::Heart, Mouth::BigSmile, Nose::Absent, palette[emotion]};
    case EmotionState::Happy: return {Eyes::Round, Mouth::Smile, Nose::Absent, palette[emotion]};
    case EmotionState::Neutral: return {Eyes::Round, Mouth::Flat, Nose::Absent, palette[emotion]};
    case EmotionState::Sad: return {Eyes::Droopy, Mouth::Frown, Nose::Absent, palette[emotion]};
  }
  return {};
}

}  // namespace wolly
