#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "threebox/errors.hpp"
#include "threebox/protocol.hpp"
#include "threebox/records.hpp"
#include "threebox/session_config.hpp"

namespace threebox {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

TEST(RecordsCsv, RoundTripAcrossEnginesAndContexts) {
  Rng strategy_rng(1);
  for (Engine engine : {Engine::kQuantum, Engine::kMacroreal}) {
    SessionConfig c;
    c.engine = engine;
    if (engine == Engine::kMacroreal) c.mr_strategy = MrStrategy::random(strategy_rng, true);
    c.rounds = 3000;
    c.seed = 77;
    c.context_schedule = ContextSchedule::uniform_random({Context::kM1, Context::kM2, Context::kNone});
    const auto records = run_session(c);
    std::stringstream buffer;
    write_records_csv(buffer, records);
    EXPECT_EQ(read_records_csv(buffer), records);
  }
}

TEST(RecordsCsv, HeaderAndEmptyOptionals) {
  RoundRecord r;
  r.round_id = 4;
  r.context = Context::kNone;
  r.seed_path = "1:4";
  EXPECT_EQ(to_csv_row(r), "4,quantum,none,,false,false,,,,,1:4");
  std::stringstream out;
  write_records_csv(out, std::vector<RoundRecord>{r});
  std::string header;
  std::getline(out, header);
  EXPECT_EQ(header, kRecordCsvHeader);
}

TEST(RecordsCsv, RejectsMalformedRows) {
  EXPECT_THROW(parse_csv_row("1,quantum,M1"), RecordFormatError);
  EXPECT_THROW(parse_csv_row("x,quantum,M1,true,true,true,true,,,,0:1"), RecordFormatError);
  // A bet in a measured context must carry a win/loss.
  EXPECT_THROW(parse_csv_row("1,quantum,M1,true,true,true,,,,,0:1"), RecordFormatError);
  // Alice bets exactly when her M3 reads true.
  EXPECT_THROW(parse_csv_row("1,quantum,M1,true,true,false,,,,,0:1"), RecordFormatError);
  std::stringstream bad_header("round_id,engine\n");
  EXPECT_THROW(read_records_csv(bad_header), RecordFormatError);
}

TEST(RecordsCsv, MissingFileIsIoError) {
  EXPECT_THROW(load_records_csv("/nonexistent/records.csv"), std::ios_base::failure);
}

TEST(Config, DefaultsAndRoundTrip) {
  const SessionConfig defaults = config_from_json(json::object());
  EXPECT_EQ(defaults, SessionConfig{});
  EXPECT_EQ(defaults.rounds, 2400u);
  EXPECT_EQ(defaults.context_schedule, ContextSchedule::blocks(1200));

  SessionConfig c;
  c.engine = Engine::kMacroreal;
  c.mr_strategy = MrStrategy::deterministic(1, {2, 2, 3}, {3, 1, 1});
  c.noise.rf_epsilon = 0.01;
  c.context_schedule = ContextSchedule::uniform_random({Context::kM1, Context::kM2, Context::kNone});
  c.seed = 18446744073709551615ull;
  c.odds = 3.5;
  EXPECT_EQ(config_from_json(to_json(c)), c);
}

TEST(Config, UnknownKeysAreErrors) {
  EXPECT_THROW(config_from_json(json{{"round", 10}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"noise", {{"f_readot", 0.9}}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"context_schedule", {{"kind", "blocks"}, {"size", 3}}}}),
               ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"engine":"macroreal","mr_strategy":{"placment":[0,0,1]}})")),
               ConfigError);
}

TEST(Config, ValidationErrors) {
  EXPECT_THROW(config_from_json(json{{"engine", "macroreal"}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"rounds", 0}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"odds", 1.0}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"engine", "classical"}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"noise", {{"p_preserve", 1.2}}}}), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(
                   R"({"engine":"macroreal","mr_strategy":{"shuffle_I":[[1,0,0],[0,1,0],[0.5,0.6,0]]}})")),
               ConfigError);
}

TEST(Config, ScheduleForms) {
  EXPECT_EQ(config_from_json(json{{"context_schedule", "alternate"}}).context_schedule,
            ContextSchedule::alternate());
  EXPECT_EQ(config_from_json(json{{"context_schedule", "external"}}).context_schedule,
            ContextSchedule::external());
  const auto blocks = config_from_json(json::parse(
      R"({"context_schedule":{"kind":"blocks","block":5,"contexts":["M1","none"]}})"));
  EXPECT_EQ(blocks.context_schedule, ContextSchedule::blocks(5, {Context::kM1, Context::kNone}));
  EXPECT_EQ(blocks.context_schedule.context_for(5, 0), Context::kM1);
  EXPECT_EQ(blocks.context_schedule.context_for(6, 0), Context::kNone);
  EXPECT_EQ(blocks.context_schedule.context_for(11, 0), Context::kM1);
  EXPECT_THROW(ContextSchedule::external().context_for(1, 0), ConfigError);
}

TEST(Config, LoadFromFile) {
  const fs::path dir = fs::temp_directory_path() / "threebox_config_test";
  fs::create_directories(dir);
  std::ofstream(dir / "good.json") << R"({"rounds": 10, "seed": 4})";
  std::ofstream(dir / "broken.json") << R"({"rounds": )";
  EXPECT_EQ(load_config(dir / "good.json").rounds, 10u);
  EXPECT_THROW(load_config(dir / "broken.json"), ConfigError);
  EXPECT_THROW(load_config(dir / "missing.json"), std::ios_base::failure);
  fs::remove_all(dir);
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Rng a = Rng::for_stream(1, StreamDomain::kRound, 7);
  Rng b = Rng::for_stream(1, StreamDomain::kRound, 7);
  Rng c = Rng::for_stream(1, StreamDomain::kVerification, 7);
  const double x = a.uniform();
  EXPECT_EQ(x, b.uniform());
  EXPECT_NE(x, c.uniform());
  Rng d(0);
  for (int i = 0; i < 10000; ++i) {
    const double u = d.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

}  // namespace
}  // namespace threebox
