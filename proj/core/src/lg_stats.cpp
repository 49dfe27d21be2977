#include "threebox/lg_stats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "threebox/errors.hpp"

namespace threebox {

using nlohmann::json;

namespace {

std::size_t context_slot(Context c) {
  switch (c) {
    case Context::kM1:
      return 0;
    case Context::kM2:
      return 1;
    case Context::kNone:
      return 2;
  }
  return 2;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json estimate_json(const ConditionalEstimate& e) {
  return {{"context", std::string(to_string(e.context))},
          {"n_alice_true", e.n_alice_true},
          {"n_joint_true", e.n_joint_true},
          {"p_hat", e.p_hat},
          {"std_err", e.std_err}};
}

json interval_json(const Interval& i) {
  return {{"estimate", i.estimate}, {"lo", i.lo}, {"hi", i.hi}, {"n", i.n}};
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string fmt_interval(const Interval& i) {
  return fmt(i.estimate) + " [" + fmt(i.lo) + ", " + fmt(i.hi) + "]";
}

}  // namespace

std::string_view to_string(SamplingPolicy p) {
  return p == SamplingPolicy::kFairSampling ? "fair" : "adverse";
}

SamplingPolicy parse_policy(std::string_view s) {
  if (s == "fair") return SamplingPolicy::kFairSampling;
  if (s == "adverse") return SamplingPolicy::kAdverse;
  throw ConfigError("unknown sampling policy '" + std::string(s) + "'");
}

ConditionalCounts& ConditionalCounts::operator+=(const ConditionalCounts& o) {
  alice_true_determined += o.alice_true_determined;
  alice_true_undetermined += o.alice_true_undetermined;
  joint_true += o.joint_true;
  return *this;
}

std::array<ConditionalCounts, 2> count_conditionals(std::span<const RoundRecord> records) {
  std::array<ConditionalCounts, 2> counts{};
  for (const auto& r : records) {
    if (r.context == Context::kNone || !r.alice_m3 || !r.bob_outcome) continue;
    auto& c = counts[context_slot(r.context)];
    if (*r.bob_outcome == BobOutcome::kUndetermined) {
      ++c.alice_true_undetermined;
    } else {
      ++c.alice_true_determined;
      if (*r.bob_outcome == BobOutcome::kTrue) ++c.joint_true;
    }
  }
  return counts;
}

ConditionalEstimate make_estimate(Context context, const ConditionalCounts& counts,
                                  SamplingPolicy policy) {
  ConditionalEstimate e;
  e.context = context;
  e.n_joint_true = counts.joint_true;
  e.n_alice_true = counts.alice_true_determined +
                   (policy == SamplingPolicy::kAdverse ? counts.alice_true_undetermined : 0);
  if (e.n_alice_true == 0) {
    throw InsufficientData("no Alice-true rounds in context " + std::string(to_string(context)) +
                           " under " + std::string(to_string(policy)) + " sampling");
  }
  const auto n = static_cast<double>(e.n_alice_true);
  e.p_hat = static_cast<double>(e.n_joint_true) / n;
  e.std_err = std::sqrt(e.p_hat * (1.0 - e.p_hat) / n);
  return e;
}

std::array<ConditionalEstimate, 2> estimate_conditionals(std::span<const RoundRecord> records,
                                                         SamplingPolicy policy) {
  const auto counts = count_conditionals(records);
  return {make_estimate(Context::kM1, counts[0], policy),
          make_estimate(Context::kM2, counts[1], policy)};
}

double k_from_conditionals(double p1, double p2) { return (4.0 / 9.0) * (1.0 - p1 - p2) - 1.0; }

double k_std_err(double std_err_1, double std_err_2) {
  return (4.0 / 9.0) * std::sqrt(std_err_1 * std_err_1 + std_err_2 * std_err_2);
}

double k_std_err(const std::array<ConditionalEstimate, 2>& c) {
  return k_std_err(c[0].std_err, c[1].std_err);
}

double sigma_violation(double k_hat, double k_se) {
  if (!(k_hat < kMacrorealKMin)) return 0.0;
  if (k_se <= 0.0) return std::numeric_limits<double>::infinity();
  return (kMacrorealKMin - k_hat) / k_se;
}

double k_direct(std::span<const RoundRecord> records) {
  if (records.empty()) throw InsufficientData("no records");
  double sum = 0.0;
  for (const auto& r : records) {
    if (!r.ground_truth_boxes) {
      throw MissingGroundTruth("round " + std::to_string(r.round_id) + " has no ground truth");
    }
    const auto& b = *r.ground_truth_boxes;
    const int q1 = b[0] == 3 ? 1 : -1;
    const int q2 = b[1] == 3 ? 1 : -1;
    const int q3 = b[2] == 3 ? 1 : -1;
    sum += q1 * q2 + q2 * q3 + q1 * q3;
  }
  return sum / static_cast<double>(records.size());
}

LgReport lg_report(std::span<const RoundRecord> records, SamplingPolicy policy) {
  const auto counts = count_conditionals(records);
  LgReport r;
  r.policy = policy;
  r.conditionals = {make_estimate(Context::kM1, counts[0], policy),
                    make_estimate(Context::kM2, counts[1], policy)};
  r.k_hat = k_from_conditionals(r.conditionals[0].p_hat, r.conditionals[1].p_hat);
  r.k_std_err = k_std_err(r.conditionals);
  r.sigma = sigma_violation(r.k_hat, r.k_std_err);
  r.undetermined_alice_true = counts[0].alice_true_undetermined + counts[1].alice_true_undetermined;

  for (auto p : {SamplingPolicy::kFairSampling, SamplingPolicy::kAdverse}) {
    std::optional<double> sigma;
    try {
      const auto e0 = make_estimate(Context::kM1, counts[0], p);
      const auto e1 = make_estimate(Context::kM2, counts[1], p);
      sigma = sigma_violation(k_from_conditionals(e0.p_hat, e1.p_hat), k_std_err(e0.std_err, e1.std_err));
    } catch (const InsufficientData&) {
    }
    (p == SamplingPolicy::kFairSampling ? r.sigma_fair : r.sigma_adverse) = sigma;
  }

  r.notes.push_back("Q1 = +1 fixed by the heralded initial state");
  r.notes.push_back(policy == SamplingPolicy::kFairSampling
                        ? "undetermined Bob readings dropped from numerator and denominator"
                        : "undetermined Bob readings on Alice-true rounds counted as Bob false");
  return r;
}

double sigma_violation(const LgReport& report) {
  return sigma_violation(report.k_hat, report.k_std_err);
}

json to_json(const LgReport& r) {
  return {{"policy", std::string(to_string(r.policy))},
          {"k_hat", r.k_hat},
          {"k_std_err", r.k_std_err},
          {"sigma", r.sigma},
          {"sigma_fair", optional_json(r.sigma_fair)},
          {"sigma_adverse", optional_json(r.sigma_adverse)},
          {"conditionals", {estimate_json(r.conditionals[0]), estimate_json(r.conditionals[1])}},
          {"q1", r.q1},
          {"undetermined_alice_true", r.undetermined_alice_true},
          {"notes", r.notes}};
}

std::string format_report(const LgReport& r) {
  std::ostringstream os;
  os << "Leggett-Garg report (" << to_string(r.policy) << " sampling)\n";
  os << "  context  n(A)      n(A,B)    P(B|A)      std err\n";
  for (const auto& c : r.conditionals) {
    os << "  " << std::left << std::setw(8) << to_string(c.context) << " " << std::setw(9)
       << c.n_alice_true << " " << std::setw(9) << c.n_joint_true << " " << std::setw(11)
       << fmt(c.p_hat) << " " << fmt(c.std_err) << "\n";
  }
  os << "  K       = " << fmt(r.k_hat) << " +- " << fmt(r.k_std_err) << "\n";
  os << "  bounds  : macrorealist [-1, 3], quantum >= " << fmt(kQuantumKMin) << "\n";
  os << "  sigma   = " << fmt(r.sigma) << "\n";
  os << "  sigma (fair)    = " << (r.sigma_fair ? fmt(*r.sigma_fair) : std::string("n/a")) << "\n";
  os << "  sigma (adverse) = " << (r.sigma_adverse ? fmt(*r.sigma_adverse) : std::string("n/a"))
     << "\n";
  os << "  undetermined Alice-true rounds: " << r.undetermined_alice_true << "\n";
  return os.str();
}

// Game tallies ------------------------------------------------------------------

double ContextTally::bet_rate() const {
  return rounds == 0 ? 0.0 : static_cast<double>(bets) / static_cast<double>(rounds);
}

std::optional<double> ContextTally::win_rate() const {
  if (context == Context::kNone || bets == 0) return std::nullopt;
  return static_cast<double>(wins) / static_cast<double>(bets);
}

double GameSummary::bet_rate() const {
  return rounds == 0 ? 0.0 : static_cast<double>(bets) / static_cast<double>(rounds);
}

GameSummary summarize(std::span<const RoundRecord> records, double odds) {
  GameSummary s;
  s.per_context[0].context = Context::kM1;
  s.per_context[1].context = Context::kM2;
  s.per_context[2].context = Context::kNone;
  for (const auto& r : records) {
    auto& t = s.per_context[context_slot(r.context)];
    ++t.rounds;
    ++s.rounds;
    if (r.bob_outcome == BobOutcome::kTrue) ++t.bob_true;
    if (r.bob_outcome == BobOutcome::kUndetermined) ++t.bob_undetermined;
    if (r.alice_bets) {
      ++t.bets;
      ++s.bets;
    }
    if (r.alice_wins.value_or(false)) ++t.wins;
    s.payoff += settle(r, odds);
  }
  return s;
}

json to_json(const GameSummary& s) {
  json contexts = json::array();
  for (const auto& t : s.per_context) {
    contexts.push_back({{"context", std::string(to_string(t.context))},
                        {"rounds", t.rounds},
                        {"bets", t.bets},
                        {"wins", t.wins},
                        {"bob_true", t.bob_true},
                        {"bob_undetermined", t.bob_undetermined},
                        {"bet_rate", t.bet_rate()},
                        {"win_rate", optional_json(t.win_rate())}});
  }
  return {{"rounds", s.rounds},
          {"bets", s.bets},
          {"bet_rate", s.bet_rate()},
          {"payoff", s.payoff},
          {"per_context", contexts}};
}

std::string format_summary(const GameSummary& s) {
  std::ostringstream os;
  os << "rounds " << s.rounds << ", Alice bets " << s.bets << " (rate " << fmt(s.bet_rate())
     << "), payoff to Alice " << fmt(s.payoff) << "\n";
  os << "  context  rounds    bet rate    win rate\n";
  for (const auto& t : s.per_context) {
    if (t.rounds == 0) continue;
    const auto w = t.win_rate();
    os << "  " << std::left << std::setw(8) << to_string(t.context) << " " << std::setw(9)
       << t.rounds << " " << std::setw(11) << fmt(t.bet_rate()) << " "
       << (w ? fmt(*w) : std::string("-")) << "\n";
  }
  return os.str();
}

// Verification ------------------------------------------------------------------

Interval two_sigma_interval(std::size_t successes, std::size_t n) {
  Interval i;
  i.n = n;
  if (n == 0) return i;
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  const double half = 2.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  i.estimate = p;
  i.lo = std::max(0.0, p - half);
  i.hi = std::min(1.0, p + half);
  return i;
}

VerificationReport verification_report(const VerificationTables& t) {
  VerificationReport r;
  r.engine = t.engine;
  const std::size_t kTrue = outcome_index(BobOutcome::kTrue);
  const std::size_t kUndet = outcome_index(BobOutcome::kUndetermined);
  for (int j = 1; j <= 3; ++j) {
    const auto jj = static_cast<std::size_t>(j - 1);
    const std::size_t n = t.first_total(j);
    r.marginals[jj] = two_sigma_interval(t.first[jj][kTrue], n);
    r.undetermined_fraction[jj] =
        n == 0 ? 0.0 : static_cast<double>(t.first[jj][kUndet]) / static_cast<double>(n);
    for (int k = 1; k <= 3; ++k) {
      const auto kk = static_cast<std::size_t>(k - 1);
      for (auto first : {BobOutcome::kTrue, BobOutcome::kFalse}) {
        const std::size_t cond = t.conditioning_count(j, first, k);
        if (cond == 0) continue;
        const std::size_t hits = t.pairs[jj][kk][outcome_index(first)][kTrue];
        auto& cell = first == BobOutcome::kTrue ? r.repeat_true[jj][kk] : r.repeat_false[jj][kk];
        cell = two_sigma_interval(hits, cond);
      }
    }
  }
  std::size_t preserved = 0;
  for (const auto& row : t.tags) preserved += row[tag_index(RepopulationTag::kPreserved)];
  r.preserved = two_sigma_interval(preserved, t.tag_total());
  r.tags = t.tags;
  return r;
}

json to_json(const VerificationReport& r) {
  json marginals = json::array();
  for (const auto& m : r.marginals) marginals.push_back(interval_json(m));
  auto matrix = [](const std::array<std::array<std::optional<Interval>, 3>, 3>& m) {
    json rows = json::array();
    for (const auto& row : m) {
      json cells = json::array();
      for (const auto& c : row) cells.push_back(c ? interval_json(*c) : json(nullptr));
      rows.push_back(cells);
    }
    return rows;
  };
  json tags = json::array();
  for (const auto& row : r.tags) {
    tags.push_back({{"preserved", row[0]}, {"undetermined", row[1]}, {"flipped", row[2]}});
  }
  return {{"engine", std::string(to_string(r.engine))},
          {"marginals", marginals},
          {"undetermined_fraction", r.undetermined_fraction},
          {"repeat_given_true", matrix(r.repeat_true)},
          {"repeat_given_false", matrix(r.repeat_false)},
          {"preserved", interval_json(r.preserved)},
          {"tags", tags}};
}

std::string format_verification(const VerificationReport& r) {
  std::ostringstream os;
  os << "Verification (" << to_string(r.engine) << " engine), intervals are +-2 sigma\n";
  os << "  first reading P(M_j true):\n";
  for (int j = 0; j < 3; ++j) {
    os << "    M" << j + 1 << ": " << fmt_interval(r.marginals[static_cast<std::size_t>(j)])
       << "  undetermined " << fmt(r.undetermined_fraction[static_cast<std::size_t>(j)]) << "\n";
  }
  auto print_matrix = [&](const char* title,
                          const std::array<std::array<std::optional<Interval>, 3>, 3>& m) {
    os << "  " << title << " (rows: first M_j, columns: second M_k)\n";
    for (int j = 0; j < 3; ++j) {
      os << "    M" << j + 1 << ":";
      for (int k = 0; k < 3; ++k) {
        const auto& c = m[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
        os << "  " << std::left << std::setw(10) << (c ? fmt(c->estimate) : std::string("-"));
      }
      os << "\n";
    }
  };
  print_matrix("P(second true | first true)", r.repeat_true);
  print_matrix("P(second true | first false)", r.repeat_false);
  if (r.preserved.n > 0) {
    os << "  box label preserved after a true reading: " << fmt_interval(r.preserved) << "\n";
  }
  return os.str();
}

}  // namespace threebox
