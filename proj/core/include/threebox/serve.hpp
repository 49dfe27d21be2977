#pragma once

// Interactive game sessions: a human plays Bob, the server plays Alice.
//
// Alice's turn runs when Bob submits his context, and the finished round is
// committed with SHA-256(salt_hex + "|" + csv_row) before anything about
// Alice is shown. The reveal discloses the row and the salt so the client can
// check the commitment.

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "threebox/lg_stats.hpp"
#include "threebox/session_config.hpp"
#include "threebox/types.hpp"

namespace threebox {

enum class Phase { kAwaitingContext, kAwaitingReveal, kSettled };
std::string_view to_string(Phase p);

std::string sha256_hex(const std::string& data);
std::string random_hex(std::size_t bytes);
std::string commitment_hash(const std::string& salt_hex, const std::string& canonical_record);

struct SubmitView {
  Phase phase = Phase::kAwaitingReveal;
  std::uint64_t round_id = 0;
  Context context = Context::kM1;
  std::optional<BobOutcome> bob_outcome;  // absent for the control arm
  std::string commitment_hash;
};

struct SettlementView {
  Phase phase = Phase::kAwaitingContext;
  std::uint64_t round_id = 0;
  bool alice_m3 = false;
  bool alice_bets = false;
  std::optional<bool> alice_wins;
  double payoff_delta = 0.0;
  double ledger = 0.0;
  std::string salt;
  std::string record;  // canonical CSV row
  std::string commitment_hash;
};

struct SessionReportView {
  Phase phase = Phase::kAwaitingContext;
  std::uint64_t next_round_id = 0;
  double ledger = 0.0;
  std::optional<LgReport> report;
  std::vector<RoundRecord> history;
};

nlohmann::json to_json(const SubmitView& v);
nlohmann::json to_json(const SettlementView& v);
nlohmann::json to_json(const SessionReportView& v);

struct ServeOptions {
  std::chrono::seconds idle_timeout{30 * 60};
  SamplingPolicy report_policy = SamplingPolicy::kFairSampling;
};

class SessionManager {
 public:
  using Clock = std::chrono::steady_clock;

  explicit SessionManager(ServeOptions options = {},
                          std::function<Clock::time_point()> now = [] { return Clock::now(); });

  // Requires an external context schedule. Throws ConfigError.
  std::string create_session(const SessionConfig& config);

  // Throw UnknownSession or WrongPhase.
  SubmitView submit_context(const std::string& session_id, Context context);
  SettlementView reveal_and_settle(const std::string& session_id);
  SessionReportView session_report(const std::string& session_id);

  // Drops sessions idle for longer than the timeout; returns how many.
  std::size_t expire_idle();
  std::size_t session_count() const;

 private:
  struct PendingRound {
    RoundRecord record;
    std::string canonical;
    std::string salt;
    std::string hash;
  };

  struct Session {
    std::mutex mutex;
    SessionConfig config;
    Phase phase = Phase::kAwaitingContext;
    std::uint64_t next_round = 1;
    double ledger = 0.0;
    std::optional<PendingRound> pending;
    std::vector<RoundRecord> history;
    Clock::time_point last_used;
  };

  std::shared_ptr<Session> find(const std::string& session_id);

  ServeOptions options_;
  std::function<Clock::time_point()> now_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

// HTTP + JSON front end over a SessionManager.
//   POST /sessions                 body: SessionConfig JSON
//   POST /sessions/{id}/context    body: {"context": "M1" | "M2" | "none"}
//   POST /sessions/{id}/reveal
//   GET  /sessions/{id}/report
// Errors are {"code": ..., "message": ...}.
class HttpServer {
 public:
  // `default_config` is used when POST /sessions has an empty body.
  explicit HttpServer(SessionManager& sessions,
                      std::optional<SessionConfig> default_config = std::nullopt);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace threebox
