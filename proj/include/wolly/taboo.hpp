#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wolly/emotion.hpp"
#include "wolly/error.hpp"
#include "wolly/event.hpp"

namespace wolly {

inline constexpr std::size_t kMinClues = 3;
inline constexpr std::size_t kMaxClues = 4;

struct TabooCard {
  std::string word;
  std::vector<std::string> clues;  // ordered from hardest to most evident

  friend bool operator==(const TabooCard&, const TabooCard&) = default;
};

// Case-folded, whitespace-trimmed form used for guess matching.
inline std::string normalize_word(std::string_view s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  auto first = std::find_if(s.begin(), s.end(), not_space);
  auto last = std::find_if(s.rbegin(), s.rend(), not_space).base();
  std::string out;
  if (first < last) out.assign(first, last);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline void validate_card(const TabooCard& card) {
  const std::string word = normalize_word(card.word);
  if (word.empty()) {
    throw CardError(card.word, "word is empty");
  }
  if (card.clues.size() < kMinClues || card.clues.size() > kMaxClues) {
    throw CardError(card.word, "has " + std::to_string(card.clues.size()) +
                                   " clues, expected 3 or 4");
  }
  for (std::size_t i = 0; i < card.clues.size(); ++i) {
    const std::string clue = normalize_word(card.clues[i]);
    if (clue.empty()) {
      throw CardError(card.word, "clue " + std::to_string(i + 1) + " is empty");
    }
    if (clue.find(word) != std::string::npos) {
      throw CardError(card.word, "clue " + std::to_string(i + 1) + " contains the word");
    }
  }
}

class Deck {
 public:
  explicit Deck(std::vector<TabooCard> cards) : cards_(std::move(cards)) {
    if (cards_.empty()) {
      throw FormatError("deck has no cards");
    }
    std::set<std::string> seen;
    for (const auto& card : cards_) {
      validate_card(card);
      if (!seen.insert(normalize_word(card.word)).second) {
        throw CardError(card.word, "duplicate word in deck");
      }
    }
  }

  const std::vector<TabooCard>& cards() const { return cards_; }
  std::size_t size() const { return cards_.size(); }
  const TabooCard& operator[](std::size_t i) const { return cards_.at(i); }

 private:
  std::vector<TabooCard> cards_;
};

// Deck file: JSON array of {"word": string, "clues": [string, ...]}.
inline Deck load_deck(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("deck is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) {
    throw FormatError("deck must be a JSON array of cards");
  }
  std::vector<TabooCard> cards;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string where = "card " + std::to_string(i + 1) + ": ";
    if (!item.is_object()) throw FormatError(where + "expected an object");
    for (const auto& [key, _] : item.items()) {
      if (key != "word" && key != "clues") throw FormatError(where + "unknown field '" + key + "'");
    }
    if (!item.contains("word") || !item["word"].is_string()) {
      throw FormatError(where + "'word' must be a string");
    }
    if (!item.contains("clues") || !item["clues"].is_array()) {
      throw FormatError(where + "'clues' must be an array");
    }
    TabooCard card;
    card.word = item["word"].get<std::string>();
    for (const auto& clue : item["clues"]) {
      if (!clue.is_string()) throw FormatError(where + "clues must be strings");
      card.clues.push_back(clue.get<std::string>());
    }
    cards.push_back(std::move(card));
  }
  return Deck(std::move(cards));
}

struct TabooConfig {
  std::int64_t think_window_ms = 20'000;
};

namespace phase {
// Transient: start_game explains the rules and moves straight to Thinking.
struct ExplainingRules {
  friend bool operator==(const ExplainingRules&, const ExplainingRules&) = default;
};
struct Thinking {
  int clue_index = 1;
  std::int64_t deadline_ms = 0;
  friend bool operator==(const Thinking&, const Thinking&) = default;
};
struct AwaitingGuess {
  int clue_index = 1;
  friend bool operator==(const AwaitingGuess&, const AwaitingGuess&) = default;
};
struct AskReplay {
  bool won = false;
  int clue_index = 1;
  friend bool operator==(const AskReplay&, const AskReplay&) = default;
};
struct Finished {
  bool won = false;
  friend bool operator==(const Finished&, const Finished&) = default;
};
}  // namespace phase

using TabooPhase = std::variant<phase::ExplainingRules, phase::Thinking, phase::AwaitingGuess,
                                phase::AskReplay, phase::Finished>;

inline const char* phase_name(const TabooPhase& p) {
  switch (p.index()) {
    case 0: return "explaining_rules";
    case 1: return "thinking";
    case 2: return "awaiting_guess";
    case 3: return "ask_replay";
    case 4: return "finished";
  }
  return "";
}

struct TabooGameState {
  TabooPhase phase;
  TabooCard card;
  std::size_t card_index = 0;
  EmotionState emotion = EmotionState::Neutral;
  std::uint64_t rng_seed = 0;
  std::int64_t think_window_ms = 20'000;
  int round = 1;

  friend bool operator==(const TabooGameState&, const TabooGameState&) = default;
};

struct TabooTransition {
  TabooGameState state;
  std::vector<Occurrence> events;
};

namespace detail {

inline std::size_t first_card(std::uint64_t seed, std::size_t deck_size) {
  std::mt19937_64 rng(seed);
  return static_cast<std::size_t>(rng() % deck_size);
}

// Always a different card than `previous` when the deck allows it.
inline std::size_t next_card(std::uint64_t seed, std::size_t previous, std::size_t deck_size) {
  if (deck_size < 2) return 0;
  std::mt19937_64 rng(seed);
  return (previous + 1 + static_cast<std::size_t>(rng() % (deck_size - 1))) % deck_size;
}

inline TabooTransition begin_round(const Deck& deck, std::size_t card_index, std::uint64_t seed,
                                   std::int64_t now, std::int64_t think_window_ms, int round) {
  TabooTransition t;
  t.state.card = deck[card_index];
  t.state.card_index = card_index;
  t.state.emotion = emotion_for(GameEvent::game_start());
  t.state.rng_seed = seed;
  t.state.think_window_ms = think_window_ms;
  t.state.round = round;
  t.state.phase = phase::ExplainingRules{};
  t.events.push_back(rule_explanation_event());
  t.events.push_back(clue_event(1, t.state.card.clues[0]));
  t.state.phase = phase::Thinking{1, now + think_window_ms};
  return t;
}

}  // namespace detail

inline TabooTransition start_game(const Deck& deck, std::uint64_t seed, std::int64_t now,
                                  const TabooConfig& config = {}) {
  if (config.think_window_ms < 0) {
    throw InvalidParameter("think window must be non-negative");
  }
  return detail::begin_round(deck, detail::first_card(seed, deck.size()), seed, now,
                             config.think_window_ms, 1);
}

// Ends the think window once the deadline has passed.
inline TabooTransition tick(const TabooGameState& state, std::int64_t now) {
  TabooTransition t{state, {}};
  if (const auto* thinking = std::get_if<phase::Thinking>(&state.phase)) {
    if (now >= thinking->deadline_ms) {
      t.events.push_back(beep_event());
      t.state.phase = phase::AwaitingGuess{thinking->clue_index};
    }
  }
  return t;
}

inline bool is_listening(const TabooGameState& state) {
  return std::holds_alternative<phase::AwaitingGuess>(state.phase);
}

inline TabooTransition submit_guess(const TabooGameState& state, std::string_view guess,
                                    std::int64_t now) {
  const auto* awaiting = std::get_if<phase::AwaitingGuess>(&state.phase);
  if (awaiting == nullptr) {
    throw NotListening(std::string("not listening in phase ") + phase_name(state.phase));
  }
  const int index = awaiting->clue_index;
  const int total = static_cast<int>(state.card.clues.size());

  TabooTransition t{state, {}};
  auto set_emotion = [&t](const GameEvent& cause) {
    t.state.emotion = emotion_for(cause);
    t.events.push_back(emotion_changed_event(t.state.emotion));
  };

  if (normalize_word(guess) == normalize_word(state.card.word)) {
    set_emotion(GameEvent::guessed_at_clue(index));
    t.events.push_back(speech_event(msg::kCompliment));
    t.events.push_back(speech_event(msg::kAskReplay));
    t.state.phase = phase::AskReplay{true, index};
  } else if (index < total) {
    t.events.push_back(speech_event(msg::kTryAgain));
    set_emotion(GameEvent::wrong_attempt());
    t.events.push_back(clue_event(index + 1, state.card.clues[static_cast<std::size_t>(index)]));
    t.state.phase = phase::Thinking{index + 1, now + state.think_window_ms};
  } else {
    set_emotion(GameEvent::failed_all_clues());
    t.events.push_back(speech_event(msg::kComfort));
    t.events.push_back(speech_event(msg::kRevealWord, state.card.word));
    t.events.push_back(speech_event(msg::kAskReplay));
    t.state.phase = phase::AskReplay{false, index};
  }
  return t;
}

enum class ReplayAnswer { Yes, No };

inline ReplayAnswer parse_replay_answer(std::string_view text) {
  const std::string answer = normalize_word(text);
  if (answer == "yes") return ReplayAnswer::Yes;
  if (answer == "no") return ReplayAnswer::No;
  throw InvalidAnswer("answer must be 'yes' or 'no'");
}

inline TabooTransition answer_replay(const TabooGameState& state, const Deck& deck,
                                     ReplayAnswer answer, std::int64_t now) {
  const auto* ask = std::get_if<phase::AskReplay>(&state.phase);
  if (ask == nullptr) {
    throw InvalidPhase(std::string("no replay question pending in phase ") +
                       phase_name(state.phase));
  }
  if (answer == ReplayAnswer::No) {
    TabooTransition t{state, {}};
    t.events.push_back(speech_event(msg::kGoodbye));
    t.events.push_back(game_over_event(ask->won, state.card.word));
    t.state.phase = phase::Finished{ask->won};
    return t;
  }
  const std::uint64_t seed = state.rng_seed + 1;
  const std::size_t index = detail::next_card(seed, state.card_index, deck.size());
  auto t = detail::begin_round(deck, index, seed, now, state.think_window_ms, state.round + 1);
  t.events.insert(t.events.begin(), emotion_changed_event(t.state.emotion));
  return t;
}

inline TabooTransition answer_replay(const TabooGameState& state, const Deck& deck,
                                     std::string_view answer, std::int64_t now) {
  if (!std::holds_alternative<phase::AskReplay>(state.phase)) {
    throw InvalidPhase(std::string("no replay question pending in phase ") +
                       phase_name(state.phase));
  }
  return answer_replay(state, deck, parse_replay_answer(answer), now);
}

// Wire view of the game. The secret word is only included once the round
// is over.
inline Json to_json(const TabooGameState& s) {
  Json j = Json::object();
  j["phase"] = phase_name(s.phase);
  j["round"] = s.round;
  j["clues_total"] = s.card.clues.size();
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, phase::Thinking>) {
          j["clue_index"] = p.clue_index;
          j["clue"] = s.card.clues[static_cast<std::size_t>(p.clue_index - 1)];
          j["deadline_ms"] = p.deadline_ms;
        } else if constexpr (std::is_same_v<P, phase::AwaitingGuess>) {
          j["clue_index"] = p.clue_index;
          j["clue"] = s.card.clues[static_cast<std::size_t>(p.clue_index - 1)];
        } else if constexpr (std::is_same_v<P, phase::AskReplay>) {
          j["clue_index"] = p.clue_index;
          j["won"] = p.won;
          j["word"] = s.card.word;
        } else if constexpr (std::is_same_v<P, phase::Finished>) {
          j["won"] = p.won;
          j["word"] = s.card.word;
        }
      },
      s.phase);
  j["listening"] = is_listening(s);
  j["emotion"] = wire_name(s.emotion);
  j["think_window_ms"] = s.think_window_ms;
  return j;
}

}  // namespace wolly
