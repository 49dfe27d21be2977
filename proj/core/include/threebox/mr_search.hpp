#pragma once

// Macrorealist model space: deterministic histories, the K polytope, and
// searches over stochastic hidden-ball strategies.

#include <nlohmann/json.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "threebox/rng.hpp"
#include "threebox/types.hpp"

namespace threebox {

struct HistoryAssignment {
  std::array<int, 3> q{};  // each +1 or -1
  double k_value = 0.0;
};

// The four Q histories with Q1 = +1.
std::vector<HistoryAssignment> enumerate_histories();

// (min, max) of K over enumerate_histories().
std::pair<double, double> k_bounds();

// Exact, noise-free game statistics of a strategy.
struct MrObservables {
  std::array<double, 3> p_alice{};  // P(alice M3 true | context), order M1, M2, none
  std::array<double, 2> p_joint{};  // P(alice true and Bob true | context)
  // P(Bob true | Alice true); empty when P(alice true | context) is zero.
  std::array<std::optional<double>, 2> p_bob_given_alice;

  // max over M1, M2 of |P(A | ctx) - P(A | none)|.
  double disturbance() const;
};

MrObservables evaluate_strategy(const MrStrategy& s);

// Every deterministic strategy: 3 placements x 27 maps for each of shuffle_I,
// shuffle_F and (unless held at identity) measurement_disturbance.
struct DeterministicScan {
  std::size_t strategies = 0;
  std::size_t with_alice_true = 0;  // strategies where P(A) > 0 in both contexts
  double max_conditional_sum = 0.0;
  double min_k = 0.0;  // through k_from_conditionals at the maximizing sum
  MrStrategy argmax;
};

DeterministicScan scan_deterministic_strategies(bool vary_disturbance);

// Observable targets for the fit: P(A | M1, M2, none) and P(B|A | M1, M2).
struct FitTargets {
  std::array<double, 3> p_alice{};
  std::array<double, 2> p_bob_given_alice{};

  static FitTargets ideal_quantum();
  static FitTargets from_strategy(const MrStrategy& s);
};

FitTargets targets_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FitTargets& t);

// Max absolute deviation over the five observables. An undefined P(B|A)
// counts as 0.
double fit_error(const MrObservables& obs, const FitTargets& targets);

struct FrontierPoint {
  double disturbance = 0.0;
  double fit_error = 0.0;
};

struct FitOptions {
  std::size_t budget = 100000;  // strategy evaluations
  bool lock_disturbance_identity = false;
};

struct FitResult {
  MrStrategy strategy;
  double fit_error = 0.0;
  double disturbance = 0.0;
  std::size_t evaluations = 0;
  std::size_t restarts = 0;
  // Staircase of the archive: for increasing disturbance, the lowest fit
  // error reachable at or below it.
  std::vector<FrontierPoint> frontier;
};

// Random-restart coordinate descent over the stochastic-matrix entries, each
// step projected back onto the probability simplex. Deterministic given rng.
// Throws std::invalid_argument if budget < 1000.
FitResult best_noncontextual_fit(const FitTargets& targets, const FitOptions& options, Rng& rng);

// Euclidean projection of v onto {x >= 0, sum x = 1}.
Eigen::Vector3d project_to_simplex(const Eigen::Vector3d& v);

nlohmann::json to_json(const FitResult& r);

}  // namespace threebox
