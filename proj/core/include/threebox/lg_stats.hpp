#pragma once

// Leggett-Garg estimation for three-box game records.
//
// K = <Q1 Q2> + <Q2 Q3> + <Q1 Q3> with Q1 = +1 fixed by heralding. For the
// quantum game K is estimated from Bob's conditionals given Alice's M3-true:
//   K = (4/9) (1 - P_M1(B|A) - P_M2(B|A)) - 1,
// bounded below by -1 for macrorealist systems and by -13/9 quantum mechanically.

#include <nlohmann/json.hpp>

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "threebox/protocol.hpp"
#include "threebox/types.hpp"

namespace threebox {

// kFairSampling drops rounds where Bob's reading was undetermined.
// kAdverse keeps them with Bob counted false, as if each were Alice cheating.
enum class SamplingPolicy { kFairSampling, kAdverse };

std::string_view to_string(SamplingPolicy p);
SamplingPolicy parse_policy(std::string_view s);  // "fair" | "adverse"

inline constexpr double kMacrorealKMin = -1.0;
inline constexpr double kMacrorealKMax = 3.0;
inline constexpr double kQuantumKMin = -13.0 / 9.0;

struct ConditionalEstimate {
  Context context = Context::kM1;
  std::size_t n_alice_true = 0;
  std::size_t n_joint_true = 0;
  double p_hat = 0.0;
  double std_err = 0.0;  // Wald
};

// Raw counts for one measured context; merging partial counts is addition.
struct ConditionalCounts {
  std::size_t alice_true_determined = 0;
  std::size_t alice_true_undetermined = 0;
  std::size_t joint_true = 0;

  ConditionalCounts& operator+=(const ConditionalCounts& o);
};

std::array<ConditionalCounts, 2> count_conditionals(std::span<const RoundRecord> records);

ConditionalEstimate make_estimate(Context context, const ConditionalCounts& counts,
                                  SamplingPolicy policy);

// Index 0 is M1, index 1 is M2. Throws InsufficientData when a context has no
// Alice-true rounds under the policy.
std::array<ConditionalEstimate, 2> estimate_conditionals(std::span<const RoundRecord> records,
                                                         SamplingPolicy policy);

double k_from_conditionals(double p1, double p2);
double k_std_err(double std_err_1, double std_err_2);
double k_std_err(const std::array<ConditionalEstimate, 2>& conditionals);
// Standard errors below the macrorealist bound; 0 when k_hat >= -1.
double sigma_violation(double k_hat, double k_std_err);

// Direct three-time correlator from macrorealist ground truth, Q_t = +1 iff
// the ball is in box 3 at time t. Throws MissingGroundTruth for quantum records.
double k_direct(std::span<const RoundRecord> records);

struct LgReport {
  SamplingPolicy policy = SamplingPolicy::kFairSampling;
  double k_hat = 0.0;
  double k_std_err = 0.0;
  double sigma = 0.0;  // under `policy`
  std::optional<double> sigma_fair;
  std::optional<double> sigma_adverse;
  std::array<ConditionalEstimate, 2> conditionals{};
  int q1 = 1;
  std::size_t undetermined_alice_true = 0;
  std::vector<std::string> notes;
};

// Throws InsufficientData if `policy` cannot be estimated.
LgReport lg_report(std::span<const RoundRecord> records, SamplingPolicy policy);
double sigma_violation(const LgReport& report);

nlohmann::json to_json(const LgReport& r);
std::string format_report(const LgReport& r);

// Per-context game tallies (bet rate, win rate, payoff).
struct ContextTally {
  Context context = Context::kM1;
  std::size_t rounds = 0;
  std::size_t bets = 0;
  std::size_t wins = 0;
  std::size_t bob_true = 0;
  std::size_t bob_undetermined = 0;

  double bet_rate() const;
  std::optional<double> win_rate() const;
};

struct GameSummary {
  std::size_t rounds = 0;
  std::size_t bets = 0;
  double payoff = 0.0;  // to Alice, in stakes
  std::array<ContextTally, 3> per_context{};  // M1, M2, none

  double bet_rate() const;
};

GameSummary summarize(std::span<const RoundRecord> records, double odds);
nlohmann::json to_json(const GameSummary& s);
std::string format_summary(const GameSummary& s);

// Wald interval p +- 2 sigma, clipped to [0, 1].
struct Interval {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
};
Interval two_sigma_interval(std::size_t successes, std::size_t n);

struct VerificationReport {
  Engine engine = Engine::kQuantum;
  std::array<Interval, 3> marginals{};                 // P(M_j true) on the fresh state
  std::array<double, 3> undetermined_fraction{};       // first readings recorded undetermined
  // repeat_true[j][k]: P(second M_k true | first M_j true); similarly for false.
  std::array<std::array<std::optional<Interval>, 3>, 3> repeat_true{};
  std::array<std::array<std::optional<Interval>, 3>, 3> repeat_false{};
  Interval preserved{};
  std::array<std::array<std::size_t, kTagCount>, 3> tags{};
};

VerificationReport verification_report(const VerificationTables& tables);
nlohmann::json to_json(const VerificationReport& r);
std::string format_verification(const VerificationReport& r);

}  // namespace threebox
