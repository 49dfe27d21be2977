#pragma once

// The three-box game as a round state machine.
//
// Quantum engine: Alice heralds |3>, rotates it to |I>, Bob applies one of the
// box projectors, Alice rotates |F> onto |3> and reads M3. Macroreal engine:
// a hidden ball moved by row-stochastic maps.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "threebox/hilbert.hpp"
#include "threebox/noise.hpp"
#include "threebox/session_config.hpp"
#include "threebox/types.hpp"

namespace threebox {

// What the engines need from a session: which engine, its noise and, for the
// macrorealist, the strategy. Built from a SessionConfig.
struct GameModel {
  Engine engine = Engine::kQuantum;
  NoiseParams noise;
  std::optional<MrStrategy> mr_strategy;

  static GameModel from_config(const SessionConfig& config);
};

struct QuantumState {
  DensityMatrix rho;
};

// Ball position plus its history at the three observation times: after
// heralding, after Bob's turn, after Alice's final shuffle.
struct BallState {
  int box = 3;
  std::array<int, 3> history = {0, 0, 0};
};

using EngineState = std::variant<QuantumState, BallState>;

// Alice's preparation operator |3> -> |I> and post-selection operator |F> -> |3>.
const Unitary& preparation_unitary();
const Unitary& post_selection_unitary();

EngineState alice_prepare(const GameModel& model, Rng& rng);

// Full result of reading a single box projector, including what the record
// hides: the projection that actually happened and the reset tag.
struct BoxReading {
  EngineState state;
  BobOutcome recorded;
  bool actual = false;
  std::optional<RepopulationTag> tag;
};

// Reads "is the system in box `box`?" for any box 1..3. Used by Bob's game
// turn and by the relaxed verification rules.
BoxReading read_box(const EngineState& state, int box, const GameModel& model, Rng& rng);

// Throws InvalidContext for Context::kNone.
std::pair<EngineState, BobOutcome> bob_measure(const EngineState& state, Context context,
                                               const GameModel& model, Rng& rng);

std::pair<EngineState, bool> alice_measure(const EngineState& state, const GameModel& model,
                                           Rng& rng);

// Signed payoff to Alice in stakes: 0 on a pass or a control-arm round, +1 on a
// won bet, -(odds - 1) on a lost bet. Throws SettleBeforeComplete when a bet
// in context M1/M2 has no win/loss, std::invalid_argument if odds <= 1.
double settle(const RoundRecord& record, double odds);

// Plays round `round_id` with its own random stream derived from
// (config.seed, round_id). The context comes from the schedule, or from
// `context` when given (required for external schedules).
RoundRecord play_round(const SessionConfig& config, std::uint64_t round_id,
                       std::optional<Context> context = std::nullopt);

// Rounds 1..config.rounds in order. Work is split across `threads` workers;
// the result does not depend on the thread count.
std::vector<RoundRecord> run_session(const SessionConfig& config, unsigned threads = 1);

inline constexpr std::size_t kOutcomeCount = 3;  // true, false, undetermined
inline constexpr std::size_t kTagCount = 3;      // preserved, undetermined, flipped

std::size_t outcome_index(BobOutcome o);
std::size_t tag_index(RepopulationTag t);

// Counts from sequential measurement pairs with the game rules relaxed: every
// ordered pair (M_j, M_k), j, k in 1..3, is run pairs_per_combination times.
// Indices are [box - 1] and outcome_index().
struct VerificationTables {
  Engine engine = Engine::kQuantum;
  std::size_t pairs_per_combination = 0;
  // first[j][o]: first reading of box j+1 recorded as outcome o.
  std::array<std::array<std::size_t, kOutcomeCount>, 3> first{};
  // pairs[j][k][o1][o2]: first box j+1 recorded o1, second box k+1 recorded o2.
  std::array<std::array<std::array<std::array<std::size_t, kOutcomeCount>, kOutcomeCount>, 3>, 3>
      pairs{};
  // tags[j][t]: reset tags after first readings of box j+1 that truly projected.
  std::array<std::array<std::size_t, kTagCount>, 3> tags{};

  // P(second box k reads true | first box j recorded o1); nullopt with no data.
  std::optional<double> repeat_probability(int first_box, BobOutcome first, int second_box) const;
  // Conditioning count behind repeat_probability.
  std::size_t conditioning_count(int first_box, BobOutcome first, int second_box) const;
  double marginal_true(int box) const;
  std::size_t first_total(int box) const;
  double preserved_fraction() const;
  std::size_t tag_total() const;
};

VerificationTables run_verification(const SessionConfig& config, std::size_t pairs_per_combination,
                                    unsigned threads = 1);

}  // namespace threebox
