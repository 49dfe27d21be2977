// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// if any primary criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "threebox/errors.hpp"
#include "threebox/hilbert.hpp"
#include "threebox/lg_stats.hpp"
#include "threebox/mr_search.hpp"
#include "threebox/protocol.hpp"
#include "threebox/records.hpp"
#include "threebox/serve.hpp"

namespace {

using namespace threebox;
namespace fs = std::filesystem;

constexpr double kAlgebraTol = 1e-12;
constexpr double kMcSigmas = 3.0;
constexpr double kMrSigmas = 4.0;
constexpr double kPaperK = -1.265;
constexpr double kPaperKTol = 0.002;
constexpr double kPaperSigma = 11.5;
constexpr double kPaperSigmaTol = 0.3;
constexpr double kPaperForcedSe = 0.023;
constexpr double kPaperP = 0.798;
constexpr std::size_t kPaperN = 180;
constexpr double kBetRateLo = 0.10;
constexpr double kBetRateHi = 0.20;
constexpr double kPreserve = 0.70;

constexpr double kLimitAnalytic = 1.0;
constexpr double kLimitIdealMc = 10.0;
constexpr double kLimitScan = 30.0;
constexpr double kLimitMrMc = 60.0;
constexpr double kLimitNoise = 10.0;

struct Outcome {
  bool pass = true;
  std::string detail;
  double limit_seconds = 0.0;  // 0 = no runtime bound
};

class Checker {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (!failures_.empty()) failures_ += "; ";
      failures_ += what;
    }
  }
  void note(const std::string& s) {
    if (!notes_.empty()) notes_ += ", ";
    notes_ += s;
  }
  Outcome done(double limit = 0.0) const {
    return {pass_, pass_ ? notes_ : "failed: " + failures_ + " | " + notes_, limit};
  }

 private:
  bool pass_ = true;
  std::string failures_;
  std::string notes_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double binomial_sigma(double p, std::size_t n) { return std::sqrt(p * (1 - p) / static_cast<double>(n)); }

Outcome ideal_analytics() {
  Checker c;
  const auto i = StateVector::initial().amplitudes();
  const auto f = StateVector::final_state().amplitudes();
  double worst = 0.0;
  for (int j : {1, 2}) {
    const double through = std::norm(f.dot(Projector::box(j).matrix() * i));
    const double around = std::norm(f.dot(Projector::box_complement(j).matrix() * i));
    worst = std::max({worst, std::abs(through - 1.0 / 9.0), std::abs(around)});
  }
  c.check(worst <= kAlgebraTol, "transition probabilities off by " + fmt("%.3g", worst));
  c.note("max deviation " + fmt("%.2g", worst));
  return c.done(kLimitAnalytic);
}

Outcome ideal_monte_carlo() {
  Checker c;
  SessionConfig config;
  config.noise = NoiseParams::ideal();
  config.rounds = 100000;
  config.seed = 20240101;
  config.context_schedule = ContextSchedule::alternate({Context::kM1, Context::kM2, Context::kNone});
  const auto records = run_session(config);
  const auto summary = summarize(records, config.odds);
  for (const auto& t : summary.per_context) {
    const double rate = t.bet_rate();
    const double tol = kMcSigmas * binomial_sigma(1.0 / 9.0, t.rounds);
    c.check(std::abs(rate - 1.0 / 9.0) <= tol,
            std::string(to_string(t.context)) + " bet rate " + fmt("%.5f", rate));
    c.note(std::string(to_string(t.context)) + " bet rate " + fmt("%.5f", rate));
  }
  std::size_t cheats = 0;
  for (const auto& r : records) {
    if (r.alice_m3 && r.context != Context::kNone && r.bob_outcome != BobOutcome::kTrue) ++cheats;
  }
  c.check(cheats == 0, std::to_string(cheats) + " bet rounds with Bob not true");
  const auto est = estimate_conditionals(records, SamplingPolicy::kFairSampling);
  c.check(est[0].p_hat == 1.0 && est[1].p_hat == 1.0, "P(B|A) != 1");
  const double k = k_from_conditionals(est[0].p_hat, est[1].p_hat);
  c.check(std::abs(k + 13.0 / 9.0) <= kAlgebraTol, "K = " + fmt("%.15g", k));
  c.note("P(B|A) = " + fmt("%g", est[0].p_hat) + ", " + fmt("%g", est[1].p_hat) + ", K = " + fmt("%.12f", k));
  return c.done(kLimitIdealMc);
}

Outcome mr_exhaustive() {
  Checker c;
  std::multiset<double> values;
  for (const auto& h : enumerate_histories()) values.insert(h.k_value);
  c.check(values == std::multiset<double>{-1.0, -1.0, -1.0, 3.0}, "history K values");
  const auto [lo, hi] = k_bounds();
  c.check(lo == -1.0 && hi == 3.0, "K bounds");

  const auto fixed = scan_deterministic_strategies(false);
  const auto full = scan_deterministic_strategies(true);
  c.check(fixed.max_conditional_sum == 1.0,
          "non-disturbing max sum " + fmt("%.15g", fixed.max_conditional_sum));
  c.check(full.strategies == 59049, "scan size " + std::to_string(full.strategies));
  c.check(full.max_conditional_sum <= 1.0, "full scan max sum " + fmt("%.15g", full.max_conditional_sum));
  c.check(k_from_conditionals(0.5, 0.5) >= -1.0 - kAlgebraTol && fixed.min_k >= -1.0 - kAlgebraTol, "K below -1");
  c.note("histories {3,-1,-1,-1}, " + std::to_string(fixed.strategies) + " + " +
         std::to_string(full.strategies) + " strategies, max P1+P2 = " + fmt("%g", fixed.max_conditional_sum));
  return c.done(kLimitScan);
}

Outcome mr_monte_carlo() {
  Checker c;
  Rng draws = Rng::for_stream(7, StreamDomain::kStrategy, 0);
  std::size_t estimable = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    SessionConfig config;
    config.engine = Engine::kMacroreal;
    config.noise = NoiseParams::ideal();
    config.mr_strategy = MrStrategy::random(draws, i % 2 == 1);
    config.rounds = 10000;
    config.seed = 1000 + static_cast<std::uint64_t>(i);
    config.context_schedule = ContextSchedule::alternate();
    const auto records = run_session(config);
    try {
      const auto r = lg_report(records, SamplingPolicy::kFairSampling);
      ++estimable;
      const double floor = -1.0 - kMrSigmas * r.k_std_err;
      worst_margin = std::min(worst_margin, r.k_hat - floor);
      c.check(r.k_hat >= floor, "strategy " + std::to_string(i) + " K = " + fmt("%.4f", r.k_hat));
    } catch (const InsufficientData&) {
      // Alice never bets in some context: no estimate, nothing to violate.
    }
  }
  c.note(std::to_string(estimable) + "/100 strategies estimable, min K - (-1 - 4se) = " +
         fmt("%.4f", worst_margin));
  return c.done(kLimitMrMc);
}

Outcome paper_pipeline() {
  Checker c;
  const double wald = binomial_sigma(kPaperP, kPaperN);
  const std::array<ConditionalEstimate, 2> fed = {
      ConditionalEstimate{Context::kM1, kPaperN, 0, kPaperP, wald},
      ConditionalEstimate{Context::kM2, kPaperN, 0, kPaperP, wald}};
  const double k = k_from_conditionals(fed[0].p_hat, fed[1].p_hat);
  c.check(std::abs(k - kPaperK) <= kPaperKTol, "K = " + fmt("%.5f", k));
  const double sigma = sigma_violation(k, kPaperForcedSe);
  c.check(std::abs(sigma - kPaperSigma) <= kPaperSigmaTol, "sigma = " + fmt("%.3f", sigma));

  // Same path through records: 144 of 180 Bob-true per context.
  std::vector<RoundRecord> records;
  for (Context ctx : {Context::kM1, Context::kM2}) {
    for (std::size_t n = 0; n < kPaperN; ++n) {
      RoundRecord r;
      r.round_id = records.size() + 1;
      r.context = ctx;
      r.bob_outcome = n < 144 ? BobOutcome::kTrue : BobOutcome::kFalse;
      r.alice_m3 = r.alice_bets = true;
      r.alice_wins = r.bob_outcome == BobOutcome::kTrue;
      records.push_back(r);
    }
  }
  const auto report = lg_report(records, SamplingPolicy::kFairSampling);
  c.check(std::abs(report.k_hat - kPaperK) <= kPaperKTol, "record K = " + fmt("%.5f", report.k_hat));
  c.note("K = " + fmt("%.5f", k) + ", sigma(se=0.023) = " + fmt("%.3f", sigma) + " vs paper 11.3, records K = " +
         fmt("%.5f", report.k_hat) + " +- " + fmt("%.4f", report.k_std_err));
  return c.done();
}

Outcome noise_robustness() {
  Checker c;
  SessionConfig config;  // default noise, 2 x 1200 blocks
  config.seed = 2024;
  const auto records = run_session(config);
  const auto summary = summarize(records, config.odds);
  c.check(summary.bet_rate() >= kBetRateLo && summary.bet_rate() <= kBetRateHi,
          "bet rate " + fmt("%.4f", summary.bet_rate()));
  for (int j = 0; j < 2; ++j) {
    const auto w = summary.per_context[j].win_rate();
    c.check(w && *w > 0.5, std::string(to_string(summary.per_context[j].context)) + " win rate");
    c.note(std::string(to_string(summary.per_context[j].context)) + " win " + fmt("%.3f", w.value_or(0)));
  }
  const auto fair = lg_report(records, SamplingPolicy::kFairSampling);
  const auto adverse = lg_report(records, SamplingPolicy::kAdverse);
  c.check(fair.k_hat < -1.0, "fair K = " + fmt("%.4f", fair.k_hat));
  c.check(adverse.sigma <= fair.sigma, "adverse sigma exceeds fair");
  c.note("bet rate " + fmt("%.4f", summary.bet_rate()) + ", K fair " + fmt("%.4f", fair.k_hat) + " +- " +
         fmt("%.4f", fair.k_std_err) + " (" + fmt("%.2f", fair.sigma) + " sigma), adverse " +
         fmt("%.2f", adverse.sigma) + " sigma");
  return c.done(kLimitNoise);
}

std::string file_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome determinism() {
  Checker c;
  const fs::path dir = fs::temp_directory_path() / "threebox_acceptance";
  fs::create_directories(dir);
  SessionConfig config;
  config.seed = 99;
  config.context_schedule = ContextSchedule::uniform_random({Context::kM1, Context::kM2, Context::kNone});
  save_records_csv(dir / "a.csv", run_session(config, 1));
  save_records_csv(dir / "b.csv", run_session(config, 1));
  const std::string a = file_bytes(dir / "a.csv");
  c.check(!a.empty() && a == file_bytes(dir / "b.csv"), "record files differ");

  const auto base = run_session(config, 1);
  const auto base_report = lg_report(base, SamplingPolicy::kFairSampling);
  for (unsigned threads : {2u, 3u, 8u}) {
    const auto other = run_session(config, threads);
    c.check(other == base, "records differ at " + std::to_string(threads) + " threads");
    const auto r = lg_report(other, SamplingPolicy::kFairSampling);
    c.check(r.k_hat == base_report.k_hat && r.k_std_err == base_report.k_std_err,
            "statistics differ at " + std::to_string(threads) + " threads");
  }
  const auto t1 = run_verification(config, 1000, 1);
  const auto t4 = run_verification(config, 1000, 4);
  c.check(t1.pairs == t4.pairs && t1.tags == t4.tags, "verification tables differ across threads");
  fs::remove_all(dir);
  c.note("identical " + std::to_string(a.size()) + "-byte record files; threads 1/2/3/8 agree");
  return c.done();
}

Outcome verification_tables() {
  Checker c;
  SessionConfig ideal;
  ideal.noise = NoiseParams::ideal();
  ideal.seed = 5;
  const auto t = run_verification(ideal, 10000);
  for (int j = 1; j <= 3; ++j) {
    const double m = t.marginal_true(j);
    c.check(std::abs(m - 1.0 / 3.0) <= kMcSigmas * binomial_sigma(1.0 / 3.0, t.first_total(j)),
            "marginal M" + std::to_string(j) + " = " + fmt("%.4f", m));
    for (int k = 1; k <= 3; ++k) {
      c.check(t.repeat_probability(j, BobOutcome::kTrue, k) == (j == k ? 1.0 : 0.0), "repeatability row");
    }
    c.check(t.repeat_probability(j, BobOutcome::kFalse, j) == 0.0, "false repeatability");
    c.note("M" + std::to_string(j) + " " + fmt("%.4f", m));
  }

  SessionConfig noisy;
  noisy.seed = 6;
  const auto n = run_verification(noisy, 10000);
  const double preserved = n.preserved_fraction();
  c.check(std::abs(preserved - kPreserve) <= kMcSigmas * binomial_sigma(kPreserve, n.tag_total()),
          "preserved " + fmt("%.4f", preserved));
  c.note("preserved " + fmt("%.4f", preserved) + " of " + std::to_string(n.tag_total()));
  return c.done();
}

Outcome interactive_transcript() {
  Checker c;
  SessionManager sessions;
  SessionConfig config;
  config.rounds = 20;
  config.context_schedule = ContextSchedule::external();
  const auto id = sessions.create_session(config);
  double sum = 0.0, ledger = 0.0;
  std::size_t verified = 0;
  for (int i = 0; i < 20; ++i) {
    const Context ctx = static_cast<Context>(i % 3);
    const auto submitted = sessions.submit_context(id, ctx);
    const auto s = sessions.reveal_and_settle(id);
    sum += s.payoff_delta;
    ledger = s.ledger;
    verified += sha256_hex(s.salt + "|" + s.record) == submitted.commitment_hash ? 1 : 0;
  }
  c.check(ledger == sum, "ledger " + fmt("%g", ledger) + " vs deltas " + fmt("%g", sum));
  c.check(verified == 20, std::to_string(verified) + "/20 commitments verify");
  c.note("ledger " + fmt("%g", ledger) + ", 20/20 commitments verified");
  return c.done();
}

}  // namespace

int main() {
  struct Criterion {
    const char* label;
    bool primary;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"ideal analytics", true, ideal_analytics},
      {"ideal Monte Carlo", true, ideal_monte_carlo},
      {"macrorealist bound, exhaustive", true, mr_exhaustive},
      {"macrorealist Monte Carlo", true, mr_monte_carlo},
      {"published statistics pipeline", true, paper_pipeline},
      {"noise robustness", true, noise_robustness},
      {"determinism", true, determinism},
      {"verification tables", true, verification_tables},
      {"interactive transcript (secondary)", false, interactive_transcript},
  };

  int primary_failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what(), 0.0};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt("%.2f s", secs);
    if (o.limit_seconds > 0) {
      timing += fmt(" < %g s", o.limit_seconds);
      if (secs >= o.limit_seconds) {
        o.pass = false;
        timing += " EXCEEDED";
      }
    }
    if (!o.pass && criteria[i].primary) ++primary_failures;
    std::printf("%s [%zu] %s: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].label, o.detail.c_str(),
                timing.c_str());
  }
  std::printf("%d primary criteria failed\n", primary_failures);
  return primary_failures == 0 ? 0 : 1;
}
