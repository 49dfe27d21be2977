#pragma once

#include <cstddef>

#include "threebox/hilbert.hpp"
#include "threebox/rng.hpp"

namespace threebox {

// Error model for the box system. Defaults reproduce the figures quoted for
// the nitrogen-vacancy experiment: 95% herald fidelity, 1% herald success,
// 96% single-shot readout fidelity, 70% population preservation after a
// bright readout.
struct NoiseParams {
  double f_herald = 0.95;
  double herald_success_rate = 0.01;
  double f_readout = 0.96;
  double p_preserve = 0.70;
  double p_undetermined_given_loss = 0.5;
  double rf_epsilon = 0.0;  // radians
  double dephasing_rate = 0.0;

  static NoiseParams ideal();

  // Throws ConfigError when a probability leaves [0, 1] or a value is not finite.
  void validate() const;

  bool operator==(const NoiseParams&) const = default;
};

// Every stochastic operation below consumes a fixed number of draws, so
// changing parameters never shifts the rest of a round's random stream.

// |3><3| with probability f_herald, otherwise |1><1| or |2><2| evenly. Two draws.
DensityMatrix noisy_initial_state(const NoiseParams& params, Rng& rng);

// Reports the true outcome with probability f_readout. One draw.
bool flip_readout(bool true_outcome, const NoiseParams& params, Rng& rng);

enum class RepopulationTag { kPreserved, kUndetermined, kFlipped };

struct Repopulation {
  DensityMatrix state;
  RepopulationTag tag;
};

// Back-action of the reset sequence that follows a bright (true) readout.
// Preserved with p_preserve; Undetermined with (1 - p_preserve) *
// p_undetermined_given_loss; otherwise the box label moves to one of the two
// other boxes uniformly. Two draws.
Repopulation repopulation_channel(const DensityMatrix& rho, const NoiseParams& params, Rng& rng);

// Composes `ideal` with a rotation by rf_epsilon in the (a, b) basis plane.
Unitary perturbed_unitary(const Unitary& ideal, const NoiseParams& params, std::size_t a = 0,
                          std::size_t b = 2);

// Box-basis dephasing at params.dephasing_rate. Identity when the rate is 0.
DensityMatrix dephase(const DensityMatrix& rho, const NoiseParams& params);

// Preparation attempts needed on average for `rounds` heralded rounds.
double expected_herald_attempts(const NoiseParams& params, std::size_t rounds);

}  // namespace threebox
