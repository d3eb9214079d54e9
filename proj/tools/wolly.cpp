#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "wolly/cli.hpp"
#include "wolly/server.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

int serve(const std::string& config_path, std::optional<int> port_flag, bool logical_clock) {
  wolly::ServerConfig config;
  try {
    if (!config_path.empty()) config = wolly::apply_config_json(wolly::read_file(config_path));
    if (const char* env = std::getenv("WOLLY_PORT")) {
      config.port = std::stoi(env);
    }
  } catch (const std::exception& e) {
    std::cerr << "config: " << e.what() << '\n';
    return wolly::cli::kContentError;
  }
  if (port_flag) config.port = *port_flag;
  if (logical_clock) config.logical_clock = true;

  std::unique_ptr<wolly::Session> session;
  try {
    session = wolly::make_session(config);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return wolly::cli::kContentError;
  }

  wolly::HttpServer server(*session);
  int port = 0;
  try {
    port = server.start(config.host, config.port);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return wolly::cli::kUsageError;
  }
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "wolly listening on http://" << config.host << ":" << port << "/api/v1"
            << (session->logical_clock() ? " (logical clock)" : "") << std::endl;
  while (g_stop == 0) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return wolly::cli::kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wolly - simulated educational robot"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<int> port;
  bool logical_clock = false;
  auto* serve_cmd = app.add_subcommand("serve", "Run the robot's HTTP control service");
  serve_cmd->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", port, "Listen port (default 8377)")->check(CLI::Range(0, 65535));
  serve_cmd->add_flag("--logical-clock", logical_clock,
                      "Time advances only via POST /api/v1/clock/advance");

  std::string program_path;
  std::string maze_path;
  auto* run_cmd = app.add_subcommand("run", "Run a wollyscript program on a maze");
  run_cmd->add_option("program", program_path, "Program file")->required();
  run_cmd->add_option("--maze", maze_path, "Maze file")->required();

  std::string deck_path;
  std::uint64_t seed = 0;
  std::int64_t think_ms = 20'000;
  std::string export_path;
  auto* taboo_cmd = app.add_subcommand("taboo", "Play Taboo in the terminal");
  taboo_cmd->add_option("--deck", deck_path, "Deck JSON file")->required();
  taboo_cmd->add_option("--seed", seed, "Card selection seed");
  taboo_cmd->add_option("--think-ms", think_ms, "Think window before the beep")
      ->check(CLI::NonNegativeNumber);
  taboo_cmd->add_option("--export", export_path, "Write the event log to this file");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a deck, maze, or program file");
  validate_cmd->add_option("path", validate_path, "Content file")->required();

  std::string events_path;
  auto* replay_cmd = app.add_subcommand("replay", "Re-render an exported event log");
  replay_cmd->add_option("events", events_path, "Event log JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : wolly::cli::kUsageError;
  }

  if (*serve_cmd) return serve(config_path, port, logical_clock);
  if (*run_cmd) return wolly::cli::run_program(program_path, maze_path, std::cout, std::cerr);
  if (*validate_cmd) return wolly::cli::validate(validate_path, std::cout, std::cerr);
  if (*replay_cmd) return wolly::cli::replay(events_path, std::cout, std::cerr);
  if (*taboo_cmd) {
    std::string text;
    try {
      text = wolly::read_file(deck_path);
    } catch (const std::exception& e) {
      std::cerr << e.what() << '\n';
      return wolly::cli::kUsageError;
    }
    try {
      const wolly::Deck deck = wolly::load_deck(text);
      wolly::cli::ReplOptions opts;
      opts.seed = seed;
      opts.think_ms = think_ms;
      opts.prompt = &std::cerr;
      const auto log = wolly::cli::taboo_repl(deck, opts, std::cin, std::cout);
      if (!export_path.empty()) {
        std::ofstream out(export_path, std::ios::binary);
        out << wolly::encode_events_response(log.events_since(0)) << '\n';
      }
      return wolly::cli::kOk;
    } catch (const wolly::Error& e) {
      std::cerr << wolly::to_string(e.code()) << ": " << e.what() << '\n';
      return wolly::cli::kContentError;
    }
  }
  return wolly::cli::kUsageError;
}
