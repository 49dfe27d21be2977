#include "threebox/errors.hpp"
#include "threebox/records.hpp"
#include "threebox/serve.hpp"

// After the project headers: httplib pulls in <resolv.h>, whose `_res` macro
// breaks Eigen.
#include <gtest/gtest.h>
#include <httplib.h>

#include <set>
#include <thread>

namespace threebox {
namespace {

using nlohmann::json;

SessionConfig interactive(NoiseParams noise = NoiseParams::ideal(), std::size_t rounds = 20) {
  SessionConfig c;
  c.noise = noise;
  c.rounds = rounds;
  c.context_schedule = ContextSchedule::external();
  return c;
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(commitment_hash("00ff", "row"), sha256_hex("00ff|row"));
  EXPECT_EQ(random_hex(16).size(), 32u);
}

TEST(SessionManager, CreateValidates) {
  SessionManager m;
  const auto a = m.create_session(interactive());
  const auto b = m.create_session(interactive());
  EXPECT_EQ(a.size(), 32u);
  EXPECT_NE(a, b);
  SessionConfig mr = interactive();
  mr.engine = Engine::kMacroreal;
  EXPECT_THROW(m.create_session(mr), ConfigError);
  EXPECT_THROW(m.create_session(SessionConfig{}), ConfigError);  // scheduled, not external
  EXPECT_EQ(m.session_count(), 2u);
}

TEST(SessionManager, UnknownSessionAndWrongPhase) {
  SessionManager m;
  EXPECT_THROW(m.submit_context("deadbeef", Context::kM1), UnknownSession);
  EXPECT_THROW(m.reveal_and_settle("deadbeef"), UnknownSession);
  EXPECT_THROW(m.session_report("deadbeef"), UnknownSession);

  const auto id = m.create_session(interactive(NoiseParams::ideal(), 1));
  EXPECT_THROW(m.reveal_and_settle(id), WrongPhase);
  m.submit_context(id, Context::kM1);
  EXPECT_THROW(m.submit_context(id, Context::kM2), WrongPhase);
  const auto s = m.reveal_and_settle(id);
  EXPECT_EQ(s.phase, Phase::kSettled);
  EXPECT_THROW(m.submit_context(id, Context::kM1), WrongPhase);
  EXPECT_THROW(m.reveal_and_settle(id), WrongPhase);
}

TEST(SessionManager, ControlArmHidesBobOutcome) {
  SessionManager m;
  const auto id = m.create_session(interactive());
  const auto view = m.submit_context(id, Context::kNone);
  EXPECT_FALSE(view.bob_outcome.has_value());
  EXPECT_FALSE(to_json(view).contains("bob_outcome"));
  const auto s = m.reveal_and_settle(id);
  EXPECT_EQ(s.payoff_delta, 0.0);
}

TEST(SessionManager, SubmitRevealsOnlyBobsOutcome) {
  SessionManager m;
  const auto id = m.create_session(interactive());
  const json j = to_json(m.submit_context(id, Context::kM1));
  for (const char* secret : {"alice_m3", "alice_bets", "alice_wins", "salt", "record"}) {
    EXPECT_FALSE(j.contains(secret)) << secret;
  }
  EXPECT_EQ(j.at("commitment_hash").get<std::string>().size(), 64u);
  EXPECT_EQ(m.session_report(id).history.size(), 0u);
}

// Random call sequences: exactly one settlement per submitted round, rounds
// numbered without gaps.
TEST(SessionManager, PhaseMachineProperty) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    SessionManager m;
    const std::size_t rounds = 1 + rng.index(8);
    const auto id = m.create_session(interactive(NoiseParams{}, rounds));
    Phase expected = Phase::kAwaitingContext;
    std::uint64_t next = 1;
    std::size_t settled = 0;
    for (int step = 0; step < 60; ++step) {
      const int action = static_cast<int>(rng.index(3));
      if (action == 0) {
        const Context c = static_cast<Context>(rng.index(3));
        if (expected == Phase::kAwaitingContext) {
          const auto v = m.submit_context(id, c);
          ASSERT_EQ(v.round_id, next);
          expected = Phase::kAwaitingReveal;
        } else {
          ASSERT_THROW(m.submit_context(id, c), WrongPhase);
        }
      } else if (action == 1) {
        if (expected == Phase::kAwaitingReveal) {
          const auto s = m.reveal_and_settle(id);
          ASSERT_EQ(s.round_id, next);
          ++settled;
          ++next;
          expected = next > rounds ? Phase::kSettled : Phase::kAwaitingContext;
          ASSERT_EQ(s.phase, expected);
        } else {
          ASSERT_THROW(m.reveal_and_settle(id), WrongPhase);
        }
      } else {
        const auto r = m.session_report(id);
        ASSERT_EQ(r.phase, expected);
        ASSERT_EQ(r.history.size(), settled);
        ASSERT_EQ(r.next_round_id, next);
      }
    }
  }
}

// Scripted 20-round client: ledger equals the sum of deltas, every
// commitment verifies, and the revealed row matches what was shown.
void play_transcript(SessionManager& m, const SessionConfig& config) {
  const auto id = m.create_session(config);
  const std::array<Context, 3> script = {Context::kM1, Context::kM2, Context::kNone};
  double sum = 0.0;
  for (std::uint64_t round = 1; round <= 20; ++round) {
    const Context c = script[round % 3];
    const auto submitted = m.submit_context(id, c);
    const auto s = m.reveal_and_settle(id);
    sum += s.payoff_delta;
    ASSERT_EQ(s.commitment_hash, submitted.commitment_hash);
    ASSERT_EQ(sha256_hex(s.salt + "|" + s.record), submitted.commitment_hash);
    const RoundRecord revealed = parse_csv_row(s.record);
    ASSERT_EQ(revealed.round_id, round);
    ASSERT_EQ(revealed.context, c);
    ASSERT_EQ(revealed.bob_outcome, submitted.bob_outcome);
    ASSERT_EQ(revealed.alice_bets, s.alice_bets);
    ASSERT_EQ(revealed.alice_wins, s.alice_wins);
    ASSERT_DOUBLE_EQ(s.payoff_delta, settle(revealed, config.odds));
    ASSERT_DOUBLE_EQ(s.ledger, sum);
    if (!s.alice_bets) ASSERT_EQ(s.payoff_delta, 0.0);
  }
  const auto report = m.session_report(id);
  EXPECT_EQ(report.phase, Phase::kSettled);
  EXPECT_DOUBLE_EQ(report.ledger, sum);
  EXPECT_EQ(report.history.size(), 20u);
}

TEST(SessionManager, ScriptedTranscript) {
  SessionManager m;
  play_transcript(m, interactive(NoiseParams::ideal()));
  play_transcript(m, interactive(NoiseParams{}));
}

TEST(SessionManager, IdealAliceWinsEveryBet) {
  SessionManager m;
  const auto id = m.create_session(interactive(NoiseParams::ideal(), 600));
  for (int i = 0; i < 600; ++i) {
    m.submit_context(id, i % 2 ? Context::kM1 : Context::kM2);
    const auto s = m.reveal_and_settle(id);
    if (s.alice_bets) ASSERT_EQ(s.alice_wins, true);
  }
  const auto r = m.session_report(id);
  ASSERT_TRUE(r.report.has_value());
  EXPECT_NEAR(r.report->k_hat, -13.0 / 9.0, 1e-12);
}

TEST(SessionManager, DefaultNoiseAliceWinsMostBets) {
  SessionManager m;
  const auto id = m.create_session(interactive(NoiseParams{}, 2400));
  std::size_t bets = 0, wins = 0;
  for (int i = 0; i < 2400; ++i) {
    m.submit_context(id, i % 2 ? Context::kM1 : Context::kM2);
    const auto s = m.reveal_and_settle(id);
    bets += s.alice_bets;
    wins += s.alice_wins.value_or(false);
  }
  EXPECT_GT(static_cast<double>(wins) / bets, 0.5);
}

TEST(SessionManager, IdleSessionsExpire) {
  auto now = SessionManager::Clock::time_point{};
  ServeOptions options;
  options.idle_timeout = std::chrono::minutes(30);
  SessionManager m(options, [&now] { return now; });
  const auto stale = m.create_session(interactive());
  now += std::chrono::minutes(20);
  const auto fresh = m.create_session(interactive());
  now += std::chrono::minutes(15);
  EXPECT_EQ(m.expire_idle(), 1u);
  EXPECT_THROW(m.submit_context(stale, Context::kM1), UnknownSession);
  EXPECT_NO_THROW(m.submit_context(fresh, Context::kM1));
  now += std::chrono::minutes(31);
  EXPECT_THROW(m.reveal_and_settle(fresh), UnknownSession);
  EXPECT_EQ(m.session_count(), 0u);
}

TEST(SessionManager, ConcurrentSessions) {
  SessionManager m;
  std::vector<std::string> ids;
  for (int i = 0; i < 8; ++i) ids.push_back(m.create_session(interactive(NoiseParams{}, 50)));
  std::vector<std::jthread> workers;
  for (const auto& id : ids) {
    workers.emplace_back([&m, id] {
      for (int r = 0; r < 50; ++r) {
        m.submit_context(id, Context::kM1);
        m.reveal_and_settle(id);
      }
    });
  }
  workers.clear();
  for (const auto& id : ids) EXPECT_EQ(m.session_report(id).phase, Phase::kSettled);
}

class HttpFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    server_ = std::make_unique<HttpServer>(sessions_, interactive(NoiseParams{}, 5));
    port_ = server_->bind("127.0.0.1", 0);
    ASSERT_GT(port_, 0);
    thread_ = std::jthread([this] { server_->listen(); });
    server_->wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override {
    server_->stop();
    thread_ = {};
  }

  SessionManager sessions_;
  std::unique_ptr<HttpServer> server_;
  int port_ = 0;
  std::jthread thread_;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(HttpFixture, FullRoundOverHttp) {
  auto created = client_->Post("/sessions", "", "application/json");
  ASSERT_TRUE(created);
  ASSERT_EQ(created->status, 201);
  const json c = json::parse(created->body);
  EXPECT_EQ(c.at("phase"), "awaiting_context");
  EXPECT_EQ(c.at("round_id"), 1);
  const std::string id = c.at("session_id");

  double ledger = 0.0;
  for (int round = 1; round <= 5; ++round) {
    auto sub = client_->Post("/sessions/" + id + "/context", R"({"context":"M2"})", "application/json");
    ASSERT_EQ(sub->status, 200);
    const json s = json::parse(sub->body);
    EXPECT_EQ(s.at("phase"), "awaiting_reveal");
    EXPECT_EQ(s.at("round_id"), round);
    EXPECT_TRUE(s.contains("bob_outcome"));

    auto rev = client_->Post("/sessions/" + id + "/reveal", "", "application/json");
    ASSERT_EQ(rev->status, 200);
    const json r = json::parse(rev->body);
    EXPECT_EQ(sha256_hex(r.at("salt").get<std::string>() + "|" + r.at("record").get<std::string>()),
              s.at("commitment_hash"));
    ledger += r.at("payoff_delta").get<double>();
    EXPECT_DOUBLE_EQ(r.at("ledger").get<double>(), ledger);
  }

  auto report = client_->Get("/sessions/" + id + "/report");
  ASSERT_EQ(report->status, 200);
  const json rep = json::parse(report->body);
  EXPECT_EQ(rep.at("phase"), "settled");
  EXPECT_EQ(rep.at("history").size(), 5u);
}

TEST_F(HttpFixture, StructuredErrors) {
  auto unknown = client_->Post("/sessions/nope/context", R"({"context":"M1"})", "application/json");
  ASSERT_EQ(unknown->status, 404);
  EXPECT_EQ(json::parse(unknown->body).at("code"), "UnknownSession");

  const std::string id = json::parse(client_->Post("/sessions", "", "application/json")->body).at("session_id");
  auto early = client_->Post("/sessions/" + id + "/reveal", "", "application/json");
  ASSERT_EQ(early->status, 409);
  EXPECT_EQ(json::parse(early->body).at("code"), "WrongPhase");

  auto bad_json = client_->Post("/sessions/" + id + "/context", "{", "application/json");
  ASSERT_EQ(bad_json->status, 400);
  EXPECT_EQ(json::parse(bad_json->body).at("code"), "InvalidJson");

  auto bad_config = client_->Post("/sessions", R"({"engine":"macroreal","context_schedule":"external"})",
                                  "application/json");
  ASSERT_EQ(bad_config->status, 400);
  EXPECT_EQ(json::parse(bad_config->body).at("code"), "InvalidConfig");
  EXPECT_TRUE(json::parse(bad_config->body).contains("message"));
}

}  // namespace
}  // namespace threebox
