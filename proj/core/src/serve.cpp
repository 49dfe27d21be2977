#include "threebox/serve.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <array>
#include <stdexcept>

#include "threebox/errors.hpp"
#include "threebox/protocol.hpp"
#include "threebox/records.hpp"

namespace threebox {

using nlohmann::json;

namespace {

std::string to_hex(const unsigned char* data, std::size_t n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(kDigits[data[i] >> 4]);
    out.push_back(kDigits[data[i] & 0xf]);
  }
  return out;
}

}  // namespace

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::kAwaitingContext:
      return "awaiting_context";
    case Phase::kAwaitingReveal:
      return "awaiting_reveal";
    case Phase::kSettled:
      return "settled";
  }
  return "settled";
}

std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  return to_hex(digest.data(), len);
}

std::string random_hex(std::size_t bytes) {
  std::vector<unsigned char> buf(bytes);
  if (RAND_bytes(buf.data(), static_cast<int>(buf.size())) != 1) {
    throw std::runtime_error("secure random generator failed");
  }
  return to_hex(buf.data(), buf.size());
}

std::string commitment_hash(const std::string& salt_hex, const std::string& canonical_record) {
  return sha256_hex(salt_hex + "|" + canonical_record);
}

json to_json(const SubmitView& v) {
  json j = {{"phase", std::string(to_string(v.phase))},
            {"round_id", v.round_id},
            {"context", std::string(to_string(v.context))},
            {"commitment_hash", v.commitment_hash}};
  if (v.bob_outcome) j["bob_outcome"] = std::string(to_string(*v.bob_outcome));
  return j;
}

json to_json(const SettlementView& v) {
  return {{"phase", std::string(to_string(v.phase))},
          {"round_id", v.round_id},
          {"alice_m3", v.alice_m3},
          {"alice_bets", v.alice_bets},
          {"alice_wins", v.alice_wins ? json(*v.alice_wins) : json(nullptr)},
          {"payoff_delta", v.payoff_delta},
          {"ledger", v.ledger},
          {"salt", v.salt},
          {"record", v.record},
          {"commitment_hash", v.commitment_hash}};
}

json to_json(const SessionReportView& v) {
  json history = json::array();
  for (const auto& r : v.history) history.push_back(to_json(r));
  json report = nullptr;
  if (v.report) report = to_json(*v.report);
  return {{"phase", std::string(to_string(v.phase))},
          {"round_id", v.next_round_id},
          {"ledger", v.ledger},
          {"report", report},
          {"history", history}};
}

SessionManager::SessionManager(ServeOptions options, std::function<Clock::time_point()> now)
    : options_(options), now_(std::move(now)) {}

std::string SessionManager::create_session(const SessionConfig& config) {
  config.validate();
  if (config.context_schedule.kind != ScheduleKind::kExternal) {
    throw ConfigError("interactive sessions need context_schedule 'external'");
  }
  auto session = std::make_shared<Session>();
  session->config = config;
  session->last_used = now_();

  expire_idle();
  std::lock_guard lock(mutex_);
  std::string id;
  do {
    id = random_hex(16);
  } while (sessions_.contains(id));
  sessions_.emplace(id, std::move(session));
  return id;
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& session_id) {
  expire_idle();
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw UnknownSession("unknown session '" + session_id + "'");
  return it->second;
}

SubmitView SessionManager::submit_context(const std::string& session_id, Context context) {
  auto session = find(session_id);
  std::lock_guard lock(session->mutex);
  session->last_used = now_();
  if (session->phase != Phase::kAwaitingContext) {
    throw WrongPhase("context already submitted or session settled (phase " +
                     std::string(to_string(session->phase)) + ")");
  }

  PendingRound p;
  p.record = play_round(session->config, session->next_round, context);
  p.canonical = to_csv_row(p.record);
  p.salt = random_hex(16);
  p.hash = commitment_hash(p.salt, p.canonical);

  SubmitView view;
  view.phase = Phase::kAwaitingReveal;
  view.round_id = p.record.round_id;
  view.context = context;
  view.bob_outcome = p.record.bob_outcome;
  view.commitment_hash = p.hash;

  session->pending = std::move(p);
  session->phase = Phase::kAwaitingReveal;
  return view;
}

SettlementView SessionManager::reveal_and_settle(const std::string& session_id) {
  auto session = find(session_id);
  std::lock_guard lock(session->mutex);
  session->last_used = now_();
  if (session->phase != Phase::kAwaitingReveal || !session->pending) {
    throw WrongPhase("nothing to reveal (phase " + std::string(to_string(session->phase)) + ")");
  }

  const PendingRound& p = *session->pending;
  const double delta = settle(p.record, session->config.odds);
  session->ledger += delta;
  session->history.push_back(p.record);
  ++session->next_round;
  session->phase =
      session->next_round > session->config.rounds ? Phase::kSettled : Phase::kAwaitingContext;

  SettlementView view;
  view.phase = session->phase;
  view.round_id = p.record.round_id;
  view.alice_m3 = p.record.alice_m3;
  view.alice_bets = p.record.alice_bets;
  view.alice_wins = p.record.alice_wins;
  view.payoff_delta = delta;
  view.ledger = session->ledger;
  view.salt = p.salt;
  view.record = p.canonical;
  view.commitment_hash = p.hash;
  session->pending.reset();
  return view;
}

SessionReportView SessionManager::session_report(const std::string& session_id) {
  auto session = find(session_id);
  std::lock_guard lock(session->mutex);
  session->last_used = now_();
  SessionReportView view;
  view.phase = session->phase;
  view.next_round_id = session->next_round;
  view.ledger = session->ledger;
  view.history = session->history;
  try {
    view.report = lg_report(session->history, options_.report_policy);
  } catch (const InsufficientData&) {
  }
  return view;
}

std::size_t SessionManager::expire_idle() {
  const auto now = now_();
  std::lock_guard lock(mutex_);
  std::size_t dropped = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    bool idle = false;
    {
      std::lock_guard session_lock(it->second->mutex);
      idle = now - it->second->last_used > options_.idle_timeout;
    }
    if (idle) {
      it = sessions_.erase(it);
      ++dropped;
    } else {
      ++it;
    }
  }
  return dropped;
}

std::size_t SessionManager::session_count() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

}  // namespace threebox
