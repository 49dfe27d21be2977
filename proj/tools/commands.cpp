#include "commands.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "threebox/errors.hpp"
#include "threebox/mr_search.hpp"
#include "threebox/noise.hpp"
#include "threebox/protocol.hpp"
#include "threebox/records.hpp"
#include "threebox/serve.hpp"

namespace threebox::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::ios_base::failure("cannot write " + path.string());
  f << text;
  f.flush();
  if (!f) throw std::ios_base::failure("write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::ios_base::failure("cannot create " + dir.string() + ": " + ec.message());
}

json report_or_null(std::span<const RoundRecord> records, SamplingPolicy policy) {
  try {
    return to_json(lg_report(records, policy));
  } catch (const InsufficientData&) {
    return nullptr;
  }
}

template <typename Fn>
int run_guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const InsufficientData& e) {
    err << "insufficient data: " << e.what() << "\n";
    return kExitInsufficientData;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const RecordFormatError& e) {
    err << "malformed records: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace

int cmd_simulate(const SessionConfig& config, const fs::path& out_dir, unsigned threads,
                 std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    config.validate();
    if (config.context_schedule.kind == ScheduleKind::kExternal) {
      throw ConfigError("simulate needs a non-external context schedule");
    }
    const auto started = std::chrono::steady_clock::now();
    const auto records = run_session(config, threads);
    spdlog::info("simulated {} rounds in {:.3f} s", records.size(),
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());

    const GameSummary summary = summarize(records, config.odds);
    json doc = {{"config", to_json(config)},
                {"summary", to_json(summary)},
                {"lg_fair", report_or_null(records, SamplingPolicy::kFairSampling)},
                {"lg_adverse", report_or_null(records, SamplingPolicy::kAdverse)},
                {"herald_attempts_expected", expected_herald_attempts(config.noise, records.size())}};
    doc["k_direct"] = config.engine == Engine::kMacroreal ? json(k_direct(records)) : json(nullptr);

    ensure_dir(out_dir);
    save_records_csv(out_dir / "records.csv", records);
    write_text(out_dir / "summary.json", doc.dump(2) + "\n");

    out << format_summary(summary);
    try {
      out << format_report(lg_report(records, SamplingPolicy::kFairSampling));
    } catch (const InsufficientData& e) {
      out << "Leggett-Garg report unavailable: " << e.what() << "\n";
    }
    return kExitOk;
  });
}

int cmd_verify(const SessionConfig& config, const fs::path& out_dir, std::size_t pairs_per_combination,
               unsigned threads, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    if (pairs_per_combination == 0) throw ConfigError("--pairs must be at least 1");
    const VerificationTables tables = run_verification(config, pairs_per_combination, threads);
    const VerificationReport report = verification_report(tables);
    ensure_dir(out_dir);
    json doc = to_json(report);
    doc["pairs_per_combination"] = pairs_per_combination;
    write_text(out_dir / "verification.json", doc.dump(2) + "\n");
    out << format_verification(report);
    return kExitOk;
  });
}

int cmd_analyze(const fs::path& records_path, SamplingPolicy policy,
                const std::optional<fs::path>& json_out, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    const auto records = load_records_csv(records_path);
    const LgReport report = lg_report(records, policy);
    out << format_report(report);
    bool all_macroreal = !records.empty();
    for (const auto& r : records) all_macroreal = all_macroreal && r.ground_truth_boxes.has_value();
    json doc = to_json(report);
    if (all_macroreal) {
      const double k = k_direct(records);
      doc["k_direct"] = k;
      out << "  K (direct, ground truth) = " << std::setprecision(6) << k << "\n";
    }
    if (json_out) {
      if (json_out->has_parent_path()) ensure_dir(json_out->parent_path());
      write_text(*json_out, doc.dump(2) + "\n");
    }
    return kExitOk;
  });
}

int cmd_mrscan(const fs::path& targets_path, std::size_t budget, std::uint64_t seed,
               bool lock_disturbance, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    std::ifstream in(targets_path);
    if (!in) throw std::ios_base::failure("cannot open " + targets_path.string());
    json j;
    try {
      in >> j;
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("targets are not valid JSON: ") + e.what());
    }
    const FitTargets targets = targets_from_json(j);
    if (budget < 1000) throw ConfigError("--budget must be at least 1000");

    Rng rng = Rng::for_stream(seed, StreamDomain::kSearch, 0);
    const FitResult fit = best_noncontextual_fit(targets, {budget, lock_disturbance}, rng);
    const DeterministicScan scan = scan_deterministic_strategies(!lock_disturbance);

    json doc = to_json(fit);
    doc["targets"] = to_json(targets);
    doc["seed"] = seed;
    doc["deterministic_scan"] = {{"strategies", scan.strategies},
                                 {"max_conditional_sum", scan.max_conditional_sum},
                                 {"min_k", scan.min_k}};
    ensure_dir(out_dir);
    write_text(out_dir / "fit.json", doc.dump(2) + "\n");

    std::ostringstream csv;
    csv << std::setprecision(17) << "disturbance,fit_error\n";
    for (const auto& p : fit.frontier) csv << p.disturbance << ',' << p.fit_error << '\n';
    write_text(out_dir / "frontier.csv", csv.str());

    out << std::setprecision(6) << "best fit error " << fit.fit_error << " at disturbance "
        << fit.disturbance << " (" << fit.evaluations << " evaluations, " << fit.restarts
        << " restarts)\n"
        << "deterministic scan: " << scan.strategies << " strategies, max P_M1(B|A) + P_M2(B|A) = "
        << scan.max_conditional_sum << "\n";
    return kExitOk;
  });
}

int cmd_serve(const std::optional<SessionConfig>& default_config, const std::string& bind,
              std::chrono::seconds idle_timeout, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos) throw ConfigError("--bind must be HOST:PORT");
    const std::string host = bind.substr(0, colon);
    int port = 0;
    try {
      port = std::stoi(bind.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("--bind port is not a number");
    }
    if (default_config) default_config->validate();

    ServeOptions options;
    options.idle_timeout = idle_timeout;
    SessionManager sessions(options);
    HttpServer server(sessions, default_config);
    const int bound = server.bind(host, port);
    if (bound < 0) throw std::ios_base::failure("cannot bind " + bind);
    out << "serving on " << host << ":" << bound << std::endl;
    spdlog::info("serving on {}:{}", host, bound);
    return server.listen() ? kExitOk : kExitIo;
  });
}

}  // namespace threebox::cli
