#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "threebox/rng.hpp"

namespace threebox {

enum class Engine { kQuantum, kMacroreal };

// Bob's measurement context. kNone is the control arm: Bob does not measure.
enum class Context { kM1, kM2, kNone };

enum class BobOutcome { kTrue, kFalse, kUndetermined };

std::string_view to_string(Engine e);
std::string_view to_string(Context c);
std::string_view to_string(BobOutcome o);

// Throw ConfigError on unknown spellings.
Engine parse_engine(std::string_view s);
Context parse_context(std::string_view s);
BobOutcome parse_bob_outcome(std::string_view s);

// Box label Bob asks about in context c (1 or 2). Throws InvalidContext for kNone.
int context_box(Context c);

using StochasticMatrix = Eigen::Matrix3d;
using Distribution3 = Eigen::Vector3d;

// Returns "" when every row is a probability distribution within `tol`,
// otherwise a description of the first violation.
std::string stochastic_violation(const StochasticMatrix& m, double tol = 1e-12);

// Hidden-ball model of the game as a macrorealist sees it. Entries are indexed
// by box label minus one: placement(b) is P(ball starts in box b + 1) and row
// r of each matrix is the distribution of the ball's next box given box r + 1.
struct MrStrategy {
  Distribution3 placement = Distribution3(0.0, 0.0, 1.0);
  StochasticMatrix shuffle_I = StochasticMatrix::Identity();
  StochasticMatrix shuffle_F = StochasticMatrix::Identity();
  StochasticMatrix measurement_disturbance = StochasticMatrix::Identity();

  // Throws ConfigError if any row or the placement is not a distribution.
  void validate() const;

  // Deterministic vertex: placement at `start`, each map sends box b to f[b-1].
  static MrStrategy deterministic(int start, const std::array<int, 3>& shuffle_I_map,
                                  const std::array<int, 3>& shuffle_F_map,
                                  const std::array<int, 3>& disturbance_map = {1, 2, 3});

  // Dirichlet(1) rows. The disturbance stays the identity unless `disturbing`.
  static MrStrategy random(Rng& rng, bool disturbing = false);

  bool operator==(const MrStrategy&) const = default;
};

// One full game round. Optional fields are empty exactly when the game leaves
// them undefined (no Bob measurement, no bet, or quantum engine).
struct RoundRecord {
  std::uint64_t round_id = 0;
  Engine engine = Engine::kQuantum;
  Context context = Context::kM1;
  std::optional<BobOutcome> bob_outcome;
  bool alice_m3 = false;
  bool alice_bets = false;
  std::optional<bool> alice_wins;
  std::optional<std::array<int, 3>> ground_truth_boxes;
  std::string seed_path;

  bool operator==(const RoundRecord&) const = default;
};

}  // namespace threebox
