#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "threebox/noise.hpp"
#include "threebox/types.hpp"

namespace threebox {

enum class ScheduleKind { kAlternate, kUniformRandom, kBlocks, kExternal };

// How Bob's context is chosen per round. Alternate is Blocks with block = 1.
// The cycle runs over `contexts`, which defaults to {M1, M2}.
struct ContextSchedule {
  ScheduleKind kind = ScheduleKind::kAlternate;
  std::size_t block = 1;
  std::vector<Context> contexts = {Context::kM1, Context::kM2};

  static ContextSchedule alternate(std::vector<Context> contexts = {Context::kM1, Context::kM2});
  static ContextSchedule blocks(std::size_t n,
                                std::vector<Context> contexts = {Context::kM1, Context::kM2});
  static ContextSchedule uniform_random(
      std::vector<Context> contexts = {Context::kM1, Context::kM2});
  static ContextSchedule external();

  // Context for 1-based round_id. Throws ConfigError for kExternal.
  Context context_for(std::uint64_t round_id, std::uint64_t seed) const;

  bool operator==(const ContextSchedule&) const = default;
};

struct SessionConfig {
  Engine engine = Engine::kQuantum;
  NoiseParams noise;
  std::optional<MrStrategy> mr_strategy;
  std::size_t rounds = 2400;
  ContextSchedule context_schedule = ContextSchedule::blocks(1200);
  double odds = 2.0;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void validate() const;

  bool operator==(const SessionConfig&) const = default;
};

// JSON mapping with the field names of SessionConfig, NoiseParams and
// MrStrategy. Missing keys take defaults; unknown keys throw ConfigError.
SessionConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SessionConfig& c);
nlohmann::json to_json(const NoiseParams& n);
nlohmann::json to_json(const MrStrategy& s);
NoiseParams noise_from_json(const nlohmann::json& j);
MrStrategy strategy_from_json(const nlohmann::json& j);

// Reads and validates a config file. Throws ConfigError for parse or
// validation failures and std::ios_base::failure when unreadable.
SessionConfig load_config(const std::filesystem::path& path);

}  // namespace threebox
