#include "threebox/session_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "threebox/errors.hpp"

namespace threebox {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError(std::string("unknown key '") + key + "' in " + where);
    }
  }
}

double number(const json& j, const char* name) {
  if (!j.is_number()) throw ConfigError(std::string(name) + " must be a number");
  return j.get<double>();
}

std::uint64_t unsigned_integer(const json& j, const char* name) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw ConfigError(std::string(name) + " must be a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

Eigen::Vector3d vector3(const json& j, const char* name) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(std::string(name) + " must have 3 entries");
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) v[i] = number(j[static_cast<std::size_t>(i)], name);
  return v;
}

StochasticMatrix matrix3(const json& j, const char* name) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(std::string(name) + " must have 3 rows");
  StochasticMatrix m;
  for (int r = 0; r < 3; ++r) m.row(r) = vector3(j[static_cast<std::size_t>(r)], name).transpose();
  return m;
}

json matrix_json(const StochasticMatrix& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

std::vector<Context> contexts_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("context_schedule.contexts must be a non-empty array");
  std::vector<Context> out;
  for (const auto& c : j) {
    if (!c.is_string()) throw ConfigError("context_schedule.contexts entries must be strings");
    out.push_back(parse_context(c.get<std::string>()));
  }
  return out;
}

ScheduleKind parse_schedule_kind(const std::string& s) {
  if (s == "alternate") return ScheduleKind::kAlternate;
  if (s == "uniform_random") return ScheduleKind::kUniformRandom;
  if (s == "blocks") return ScheduleKind::kBlocks;
  if (s == "external") return ScheduleKind::kExternal;
  throw ConfigError("unknown context_schedule kind '" + s + "'");
}

const char* schedule_kind_name(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::kAlternate:
      return "alternate";
    case ScheduleKind::kUniformRandom:
      return "uniform_random";
    case ScheduleKind::kBlocks:
      return "blocks";
    case ScheduleKind::kExternal:
      return "external";
  }
  return "alternate";
}

ContextSchedule schedule_from_json(const json& j) {
  ContextSchedule s;
  if (j.is_string()) {
    s.kind = parse_schedule_kind(j.get<std::string>());
    if (s.kind == ScheduleKind::kBlocks) throw ConfigError("blocks schedule needs an object with 'block'");
    return s;
  }
  reject_unknown_keys(j, {"kind", "block", "contexts"}, "context_schedule");
  if (!j.contains("kind") || !j["kind"].is_string()) {
    throw ConfigError("context_schedule.kind must be a string");
  }
  s.kind = parse_schedule_kind(j["kind"].get<std::string>());
  if (j.contains("block")) {
    s.block = static_cast<std::size_t>(unsigned_integer(j["block"], "context_schedule.block"));
  } else if (s.kind == ScheduleKind::kBlocks) {
    throw ConfigError("blocks schedule needs 'block'");
  }
  if (j.contains("contexts")) s.contexts = contexts_from_json(j["contexts"]);
  return s;
}

json schedule_to_json(const ContextSchedule& s) {
  json contexts = json::array();
  for (auto c : s.contexts) contexts.push_back(std::string(to_string(c)));
  return {{"kind", schedule_kind_name(s.kind)}, {"block", s.block}, {"contexts", contexts}};
}

}  // namespace

ContextSchedule ContextSchedule::alternate(std::vector<Context> contexts) {
  return {ScheduleKind::kAlternate, 1, std::move(contexts)};
}

ContextSchedule ContextSchedule::blocks(std::size_t n, std::vector<Context> contexts) {
  return {ScheduleKind::kBlocks, n, std::move(contexts)};
}

ContextSchedule ContextSchedule::uniform_random(std::vector<Context> contexts) {
  return {ScheduleKind::kUniformRandom, 1, std::move(contexts)};
}

ContextSchedule ContextSchedule::external() { return {ScheduleKind::kExternal, 1, {Context::kM1, Context::kM2}}; }

Context ContextSchedule::context_for(std::uint64_t round_id, std::uint64_t seed) const {
  if (contexts.empty() && kind != ScheduleKind::kExternal) {
    throw ConfigError("context schedule has no contexts");
  }
  const std::uint64_t index = round_id == 0 ? 0 : round_id - 1;
  switch (kind) {
    case ScheduleKind::kAlternate:
      return contexts[index % contexts.size()];
    case ScheduleKind::kBlocks:
      return contexts[(index / (block == 0 ? 1 : block)) % contexts.size()];
    case ScheduleKind::kUniformRandom: {
      Rng rng = Rng::for_stream(seed, StreamDomain::kSchedule, round_id);
      return contexts[rng.index(contexts.size())];
    }
    case ScheduleKind::kExternal:
      break;
  }
  throw ConfigError("external schedule: contexts are supplied per round");
}

void SessionConfig::validate() const {
  noise.validate();
  if (rounds < 1) throw ConfigError("rounds must be at least 1");
  if (!std::isfinite(odds) || !(odds > 1.0)) throw ConfigError("odds must be greater than 1");
  if (engine == Engine::kMacroreal && !mr_strategy) {
    throw ConfigError("engine 'macroreal' requires mr_strategy");
  }
  if (engine == Engine::kQuantum && mr_strategy) {
    throw ConfigError("mr_strategy is only valid with engine 'macroreal'");
  }
  if (mr_strategy) mr_strategy->validate();
  if (context_schedule.kind == ScheduleKind::kBlocks && context_schedule.block == 0) {
    throw ConfigError("context_schedule.block must be at least 1");
  }
  if (context_schedule.kind != ScheduleKind::kExternal && context_schedule.contexts.empty()) {
    throw ConfigError("context_schedule.contexts must not be empty");
  }
}

NoiseParams noise_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"f_herald", "herald_success_rate", "f_readout", "p_preserve",
                       "p_undetermined_given_loss", "rf_epsilon", "dephasing_rate"},
                      "noise");
  NoiseParams n;
  const std::pair<const char*, double*> fields[] = {
      {"f_herald", &n.f_herald},
      {"herald_success_rate", &n.herald_success_rate},
      {"f_readout", &n.f_readout},
      {"p_preserve", &n.p_preserve},
      {"p_undetermined_given_loss", &n.p_undetermined_given_loss},
      {"rf_epsilon", &n.rf_epsilon},
      {"dephasing_rate", &n.dephasing_rate},
  };
  for (const auto& [key, dst] : fields) {
    if (j.contains(key)) *dst = number(j[key], key);
  }
  return n;
}

json to_json(const NoiseParams& n) {
  return {{"f_herald", n.f_herald},
          {"herald_success_rate", n.herald_success_rate},
          {"f_readout", n.f_readout},
          {"p_preserve", n.p_preserve},
          {"p_undetermined_given_loss", n.p_undetermined_given_loss},
          {"rf_epsilon", n.rf_epsilon},
          {"dephasing_rate", n.dephasing_rate}};
}

MrStrategy strategy_from_json(const json& j) {
  reject_unknown_keys(j, {"placement", "shuffle_I", "shuffle_F", "measurement_disturbance"},
                      "mr_strategy");
  MrStrategy s;
  if (j.contains("placement")) s.placement = vector3(j["placement"], "placement");
  if (j.contains("shuffle_I")) s.shuffle_I = matrix3(j["shuffle_I"], "shuffle_I");
  if (j.contains("shuffle_F")) s.shuffle_F = matrix3(j["shuffle_F"], "shuffle_F");
  if (j.contains("measurement_disturbance")) {
    s.measurement_disturbance = matrix3(j["measurement_disturbance"], "measurement_disturbance");
  }
  return s;
}

json to_json(const MrStrategy& s) {
  return {{"placement", {s.placement[0], s.placement[1], s.placement[2]}},
          {"shuffle_I", matrix_json(s.shuffle_I)},
          {"shuffle_F", matrix_json(s.shuffle_F)},
          {"measurement_disturbance", matrix_json(s.measurement_disturbance)}};
}

SessionConfig config_from_json(const json& j) {
  reject_unknown_keys(
      j, {"engine", "noise", "mr_strategy", "rounds", "context_schedule", "odds", "seed"}, "config");
  SessionConfig c;
  if (j.contains("engine")) {
    if (!j["engine"].is_string()) throw ConfigError("engine must be a string");
    c.engine = parse_engine(j["engine"].get<std::string>());
  }
  if (j.contains("noise")) c.noise = noise_from_json(j["noise"]);
  if (j.contains("mr_strategy") && !j["mr_strategy"].is_null()) {
    c.mr_strategy = strategy_from_json(j["mr_strategy"]);
  }
  if (j.contains("rounds")) c.rounds = static_cast<std::size_t>(unsigned_integer(j["rounds"], "rounds"));
  if (j.contains("context_schedule")) c.context_schedule = schedule_from_json(j["context_schedule"]);
  if (j.contains("odds")) c.odds = number(j["odds"], "odds");
  if (j.contains("seed")) c.seed = unsigned_integer(j["seed"], "seed");
  c.validate();
  return c;
}

json to_json(const SessionConfig& c) {
  json j = {{"engine", std::string(to_string(c.engine))},
            {"noise", to_json(c.noise)},
            {"rounds", c.rounds},
            {"context_schedule", schedule_to_json(c.context_schedule)},
            {"odds", c.odds},
            {"seed", c.seed}};
  j["mr_strategy"] = c.mr_strategy ? to_json(*c.mr_strategy) : json(nullptr);
  return j;
}

SessionConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::ios_base::failure("cannot open config file " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return config_from_json(j);
}

}  // namespace threebox
