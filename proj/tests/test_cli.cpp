#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "wolly/cli.hpp"
#include "wolly/server.hpp"

#ifndef WOLLY_CLI_PATH
#define WOLLY_CLI_PATH "wolly"
#endif
#ifndef WOLLY_CONTENT_DIR
#define WOLLY_CONTENT_DIR "content"
#endif

namespace {

using namespace wolly;

const std::string kContent = WOLLY_CONTENT_DIR;

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const std::string command = std::string(WOLLY_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class TempDir : public ::testing::Test {
 protected:
  std::filesystem::path dir = std::filesystem::temp_directory_path() /
                              ("wolly_cli_" + std::to_string(::getpid()) + "_" +
                               ::testing::UnitTest::GetInstance()->current_test_info()->name());
  void SetUp() override { std::filesystem::create_directories(dir); }
  void TearDown() override { std::filesystem::remove_all(dir); }

  std::string write(const std::string& name, const std::string& text) {
    const auto path = dir / name;
    std::ofstream(path, std::ios::binary) << text;
    return path.string();
  }
};

// Deterministic clock for the REPL: sleeping advances time instantly.
cli::ReplOptions logical_options(std::uint64_t seed, std::int64_t think_ms) {
  auto now = std::make_shared<std::int64_t>(0);
  cli::ReplOptions o;
  o.seed = seed;
  o.think_ms = think_ms;
  o.clock = {[now] { return *now; }, [now](std::int64_t ms) { *now += ms; }};
  return o;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST(RunProgram, Examples) {
  std::ostringstream out;
  std::ostringstream err;
  EXPECT_EQ(cli::run_program_text("MOVE MOVE", "3x1 E\nS.G", out, err), cli::kOk);
  EXPECT_EQ(out.str(), "1: MOVE -> (1,0,E)\n2: MOVE -> (2,0,E)\nReachedGoal after step 2\n");

  out.str("");
  EXPECT_EQ(cli::run_program_text("", "3x1 E\nS.G", out, err), cli::kOk);
  EXPECT_EQ(out.str(), "Success\n");

  out.str("");
  EXPECT_EQ(cli::run_program_text("MOVE", "3x1 E\nS#G", out, err), cli::kContentError);
  EXPECT_EQ(out.str(), "1: MOVE -> wall collision\nWallCollision at step 1\n");

  out.str("");
  err.str("");
  EXPECT_EQ(cli::run_program_text("REPEAT {", "3x1 E\nS.G", out, err), cli::kContentError);
  EXPECT_NE(err.str().find("syntax_error"), std::string::npos);
}

TEST_F(TempDir, BinaryRunExitCodes) {
  const auto maze = write("m.maze", "3x1 E\nS.G\n");
  const auto wall = write("w.maze", "3x1 E\nS#G\n");
  const auto prog = write("p.wolly", "MOVE MOVE\n");
  const auto empty = write("e.wolly", "");
  const auto one = write("one.wolly", "MOVE\n");

  CliRun r = run_cli("run " + prog + " --maze " + maze);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("ReachedGoal"), std::string::npos);
  EXPECT_EQ(run_cli("run " + empty + " --maze " + maze).code, 0);
  r = run_cli("run " + one + " --maze " + wall);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("WallCollision at step 1"), std::string::npos);
  EXPECT_EQ(run_cli("run " + (dir / "missing.wolly").string() + " --maze " + maze).code, 2);
  EXPECT_EQ(run_cli("run " + prog).code, 2);
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
}

TEST_F(TempDir, BinaryOutputMatchesApi) {
  for (const char* name : {"reach_goal.wolly", "square.wolly", "corridor.wolly"}) {
    const std::string maze = std::string(name) == "corridor.wolly" ? "corridor.maze" : "open5.maze";
    const CliRun r = run_cli("run " + kContent + "/" + name + " --maze " + kContent + "/" + maze);
    std::ostringstream api;
    std::ostringstream err;
    const int code = cli::run_program_text(read_file(kContent + "/" + name),
                                           read_file(kContent + "/" + maze), api, err);
    EXPECT_EQ(r.out, api.str()) << name;
    EXPECT_EQ(r.code, code) << name;

    // Independent of the CLI renderer: the trace from the interpreter.
    const ExecutionTrace trace =
        execute(parse(read_file(kContent + "/" + name)), parse_maze(read_file(kContent + "/" + maze)));
    EXPECT_EQ(lines(r.out).size(), trace.steps.size() + 1) << name;
  }
}

TEST_F(TempDir, ValidateExamples) {
  const auto good_deck = write("good.json", std::string(kDefaultDeck));
  const auto five = write(
      "five.json", R"([{"word":"lamp","clues":["light","desk","bulb","switch","shade"]}])");
  const auto no_goal = write("nogoal.maze", "3x1 E\nS..\n");
  const auto bad_prog = write("bad.wolly", "MOVE\nREPEAT 3 {\n");

  CliRun r = run_cli("validate " + good_deck);
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "OK\n");

  r = run_cli("validate " + five);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("CardError"), std::string::npos);
  EXPECT_NE(r.out.find("lamp"), std::string::npos);

  r = run_cli("validate " + no_goal);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("SemanticError"), std::string::npos);

  r = run_cli("validate " + bad_prog);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("SyntaxError at line 2, col 10"), std::string::npos);

  EXPECT_EQ(run_cli("validate " + (dir / "nope.json").string()).code, 2);
  for (const char* f : {"deck.json", "minimal.maze", "open5.maze", "corridor.maze", "reach_goal.wolly",
                        "square.wolly", "corridor.wolly"}) {
    EXPECT_EQ(run_cli("validate " + kContent + "/" + f).code, 0) << f;
  }
}

TEST(Validate, ReportsEveryBadCard) {
  std::ostringstream out;
  const std::string deck = R"([
    {"word":"a","clues":["x","y"]},
    {"word":"b","clues":["x","y","z"]},
    {"word":"c","clues":["x","y","z","w","v"]}
  ])";
  EXPECT_EQ(cli::validate_text("d.json", deck, out), cli::kContentError);
  const auto ls = lines(out.str());
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_NE(ls[0].find("card 1"), std::string::npos);
  EXPECT_NE(ls[1].find("card 3"), std::string::npos);
}

TEST(TabooRepl, CorrectFirstGuessIsVeryHappy) {
  const Deck deck = load_deck(
      R"([{"word":"panda","clues":["It lives in China","It is black and white","It eats bamboo"]}])");
  std::istringstream in("panda\nno\n");
  std::ostringstream out;
  const EventLog log = cli::taboo_repl(deck, logical_options(1, 20'000), in, out);
  EXPECT_EQ(out.str(),
            "SAY: rules\n"
            "CLUE 1: It lives in China\n"
            "*** BEEP ***\n"
            "EMOTION: very_happy\n"
            "SAY: compliment\n"
            "SAY: ask_replay\n"
            "SAY: goodbye\n"
            "GAME OVER: won (panda)\n");
  EXPECT_EQ(log.events_since(0)[2].ts, 20'000);
}

TEST(TabooRepl, AllWrongOnThreeClueCard) {
  const Deck deck = load_deck(
      R"([{"word":"chair","clues":["It has four legs","You find it around a table","You sit on it"]}])");
  std::istringstream in("table\nsofa\nbench\nno\n");
  std::ostringstream out;
  cli::taboo_repl(deck, logical_options(0, 20'000), in, out);
  const auto ls = lines(out.str());
  std::vector<std::size_t> clue_lines;
  std::size_t reveal = 0;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    if (ls[i].starts_with("CLUE ")) clue_lines.push_back(i);
    if (ls[i] == "SAY: reveal_word (chair)") reveal = i;
  }
  ASSERT_EQ(clue_lines.size(), 3u);
  EXPECT_EQ(ls[clue_lines[0]].substr(0, 7), "CLUE 1:");
  EXPECT_EQ(ls[clue_lines[2]].substr(0, 7), "CLUE 3:");
  EXPECT_GT(reveal, clue_lines[2]);
  EXPECT_NE(out.str().find("EMOTION: sad"), std::string::npos);
}

TEST(TabooRepl, ZeroThinkWindowBeepsRightAfterEachClue) {
  const Deck deck = load_deck(kDefaultDeck);
  std::istringstream in("x\ny\nz\nw\nno\n");
  std::ostringstream out;
  cli::taboo_repl(deck, logical_options(5, 0), in, out);
  const auto ls = lines(out.str());
  int clues = 0;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    if (ls[i].starts_with("CLUE ")) {
      ++clues;
      ASSERT_LT(i + 1, ls.size());
      EXPECT_EQ(ls[i + 1], "*** BEEP ***");
    }
  }
  EXPECT_GE(clues, 3);
}

TEST(TabooRepl, ReplayAnswerStartsANewRound) {
  const Deck deck = load_deck(R"([{"word":"sun","clues":["hot","bright","sky"]}])");
  std::istringstream in("sun\nmaybe\nyes\n");
  std::ostringstream out;
  const EventLog log = cli::taboo_repl(deck, logical_options(2, 0), in, out);
  int rules = 0;
  for (const auto& e : log.events_since(0)) rules += e.kind == EventKind::RuleExplanation;
  EXPECT_EQ(rules, 2);
}

TEST(TabooRepl, ReplayRerendersTheTranscript) {
  const Deck deck = load_deck(kDefaultDeck);
  std::istringstream in("rain\nwrong\nno\n");
  std::ostringstream live;
  const EventLog log = cli::taboo_repl(deck, logical_options(3, 20'000), in, live);

  const std::string exported = encode_events_response(log.events_since(0));
  std::ostringstream replayed;
  std::ostringstream err;
  EXPECT_EQ(cli::replay_text(exported, replayed, err), cli::kOk);
  EXPECT_EQ(replayed.str(), live.str());

  // The bare-array form is accepted too.
  const Json doc = Json::parse(exported);
  std::ostringstream again;
  EXPECT_EQ(cli::replay_text(doc["events"].dump(), again, err), cli::kOk);
  EXPECT_EQ(again.str(), live.str());
}

TEST(Replay, RejectsBrokenLogs) {
  std::ostringstream out;
  std::ostringstream err;
  EXPECT_EQ(cli::replay_text("nope", out, err), cli::kContentError);
  EXPECT_EQ(cli::replay_text(R"([{"seq":2,"ts":0,"kind":"beep","payload":{}}])", out, err),
            cli::kContentError);
  EXPECT_EQ(cli::replay_text(R"({"events":[],"x":1})", out, err), cli::kContentError);
}

TEST_F(TempDir, BinaryTabooExportAndReplay) {
  const auto deck = write("d.json", R"([{"word":"rain","clues":["clouds","umbrella","wet drops"]}])");
  const auto input = write("in.txt", "snow\nrain\nno\n");
  const auto exported = (dir / "log.json").string();
  const CliRun live = run_cli("taboo --deck " + deck + " --seed 4 --think-ms 0 --export " + exported +
                           " < " + input);
  EXPECT_EQ(live.code, 0);
  EXPECT_NE(live.out.find("EMOTION: happy"), std::string::npos);
  const CliRun replayed = run_cli("replay " + exported);
  EXPECT_EQ(replayed.code, 0);
  EXPECT_EQ(replayed.out, live.out);

  const auto bad = write("bad.json", R"([{"word":"rain","clues":["a","b"]}])");
  EXPECT_EQ(run_cli("taboo --deck " + bad + " < " + input).code, 1);
}

}  // namespace
