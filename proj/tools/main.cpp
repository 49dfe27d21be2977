#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <thread>

#include "commands.hpp"
#include "threebox/errors.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("threebox");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("THREEBOX_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace threebox;
  setup_logging();

  CLI::App app{"Three-box game simulator, Leggett-Garg analysis and game service"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path = "out";
  std::optional<std::uint64_t> seed;
  std::string policy = "fair";
  std::string bind = "127.0.0.1:8080";
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::size_t pairs = 10000;
  std::size_t budget = 100000;
  bool lock_disturbance = false;
  std::string records_path;
  std::string targets_path;
  long idle_minutes = 30;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Session config JSON");
    cmd->add_option("--out", out_path, "Output directory");
    cmd->add_option("--seed", seed, "Override the config seed");
  };

  auto* simulate = app.add_subcommand("simulate", "Play a batch session and write records");
  add_common(simulate);
  simulate->add_option("--threads", threads, "Worker threads");

  auto* verify = app.add_subcommand("verify", "Run Bob's sequential-measurement checks");
  add_common(verify);
  verify->add_option("--pairs", pairs, "Pairs per (M_j, M_k) combination");
  verify->add_option("--threads", threads, "Worker threads");

  auto* analyze = app.add_subcommand("analyze", "Leggett-Garg analysis of a record CSV");
  analyze->add_option("records", records_path, "Record CSV")->required();
  analyze->add_option("--policy", policy, "fair | adverse")->check(CLI::IsMember({"fair", "adverse"}));
  auto* analyze_out = analyze->add_option("--out", out_path, "Write the report as JSON to this file");

  auto* mrscan = app.add_subcommand("mrscan", "Fit macrorealist strategies to target statistics");
  mrscan->add_option("targets", targets_path, "Targets JSON")->required();
  mrscan->add_option("--budget", budget, "Strategy evaluations");
  mrscan->add_option("--seed", seed, "Search seed");
  mrscan->add_option("--out", out_path, "Output directory");
  mrscan->add_flag("--lock-disturbance", lock_disturbance, "Hold Bob's disturbance at identity");

  auto* serve = app.add_subcommand("serve", "Serve interactive game sessions over HTTP");
  serve->add_option("--config", config_path, "Default session config");
  serve->add_option("--bind", bind, "HOST:PORT");
  serve->add_option("--idle-minutes", idle_minutes, "Session idle timeout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  auto load = [&]() -> std::optional<SessionConfig> {
    SessionConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    if (seed) config.seed = *seed;
    return config;
  };

  std::optional<SessionConfig> config;
  try {
    if (simulate->parsed() || verify->parsed() || (serve->parsed() && !config_path.empty())) {
      config = load();
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cli::kExitConfig;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return cli::kExitIo;
  }

  if (simulate->parsed()) return cli::cmd_simulate(*config, out_path, threads, std::cout, std::cerr);
  if (verify->parsed()) return cli::cmd_verify(*config, out_path, pairs, threads, std::cout, std::cerr);
  if (analyze->parsed()) {
    std::optional<std::filesystem::path> json_out;
    if (analyze_out->count() > 0) json_out = out_path;
    return cli::cmd_analyze(records_path, parse_policy(policy), json_out, std::cout, std::cerr);
  }
  if (mrscan->parsed()) {
    return cli::cmd_mrscan(targets_path, budget, seed.value_or(0), lock_disturbance, out_path,
                           std::cout, std::cerr);
  }
  return cli::cmd_serve(config, bind, std::chrono::minutes(idle_minutes), std::cout, std::cerr);
}
