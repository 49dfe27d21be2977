#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "threebox/lg_stats.hpp"
#include "threebox/session_config.hpp"

namespace threebox::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitInsufficientData = 4;

// Writes <out_dir>/records.csv and <out_dir>/summary.json.
int cmd_simulate(const SessionConfig& config, const std::filesystem::path& out_dir, unsigned threads,
                 std::ostream& out, std::ostream& err);

// Writes <out_dir>/verification.json.
int cmd_verify(const SessionConfig& config, const std::filesystem::path& out_dir,
               std::size_t pairs_per_combination, unsigned threads, std::ostream& out,
               std::ostream& err);

// Prints the report; also writes JSON to `json_out` when given.
int cmd_analyze(const std::filesystem::path& records_path, SamplingPolicy policy,
                const std::optional<std::filesystem::path>& json_out, std::ostream& out,
                std::ostream& err);

// Writes <out_dir>/fit.json and <out_dir>/frontier.csv.
int cmd_mrscan(const std::filesystem::path& targets_path, std::size_t budget, std::uint64_t seed,
               bool lock_disturbance, const std::filesystem::path& out_dir, std::ostream& out,
               std::ostream& err);

// Blocks serving HTTP on `bind` ("host:port").
int cmd_serve(const std::optional<SessionConfig>& default_config, const std::string& bind,
              std::chrono::seconds idle_timeout, std::ostream& out, std::ostream& err);

}  // namespace threebox::cli
