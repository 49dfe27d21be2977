#include "threebox/noise.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "threebox/errors.hpp"

namespace threebox {
namespace {

void check_probability(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    throw ConfigError(std::string("noise parameter ") + name + " must lie in [0, 1]");
  }
}

}  // namespace

NoiseParams NoiseParams::ideal() {
  NoiseParams p;
  p.f_herald = 1.0;
  p.herald_success_rate = 1.0;
  p.f_readout = 1.0;
  p.p_preserve = 1.0;
  p.p_undetermined_given_loss = 0.0;
  p.rf_epsilon = 0.0;
  p.dephasing_rate = 0.0;
  return p;
}

void NoiseParams::validate() const {
  check_probability(f_herald, "f_herald");
  check_probability(herald_success_rate, "herald_success_rate");
  check_probability(f_readout, "f_readout");
  check_probability(p_preserve, "p_preserve");
  check_probability(p_undetermined_given_loss, "p_undetermined_given_loss");
  check_probability(dephasing_rate, "dephasing_rate");
  if (!std::isfinite(rf_epsilon)) {
    throw ConfigError("noise parameter rf_epsilon must be finite");
  }
}

DensityMatrix noisy_initial_state(const NoiseParams& params, Rng& rng) {
  const bool heralded_correctly = rng.bernoulli(params.f_herald);
  const bool second = rng.bernoulli(0.5);
  if (heralded_correctly) return DensityMatrix::box(3);
  return DensityMatrix::box(second ? 2 : 1);
}

bool flip_readout(bool true_outcome, const NoiseParams& params, Rng& rng) {
  return rng.bernoulli(params.f_readout) ? true_outcome : !true_outcome;
}

Repopulation repopulation_channel(const DensityMatrix& rho, const NoiseParams& params, Rng& rng) {
  const double u = rng.uniform();
  const bool pick_higher = rng.bernoulli(0.5);

  const double p_undetermined = (1.0 - params.p_preserve) * params.p_undetermined_given_loss;
  if (u < params.p_preserve) return {rho, RepopulationTag::kPreserved};
  if (u < params.p_preserve + p_undetermined) return {rho, RepopulationTag::kUndetermined};

  const int from = rho.dominant_box();
  int others[2];
  int n = 0;
  for (int b = 1; b <= 3; ++b) {
    if (b != from) others[n++] = b;
  }
  const int to = others[pick_higher ? 1 : 0];
  const Channel swap = Channel::swap_boxes(from, to, 1.0);
  return {apply_channel(swap, rho), RepopulationTag::kFlipped};
}

Unitary perturbed_unitary(const Unitary& ideal, const NoiseParams& params, std::size_t a,
                          std::size_t b) {
  if (params.rf_epsilon == 0.0) return ideal;
  return Unitary::plane_rotation(a, b, params.rf_epsilon) * ideal;
}

DensityMatrix dephase(const DensityMatrix& rho, const NoiseParams& params) {
  if (params.dephasing_rate == 0.0) return rho;
  return apply_channel(Channel::dephasing(params.dephasing_rate), rho);
}

double expected_herald_attempts(const NoiseParams& params, std::size_t rounds) {
  if (params.herald_success_rate <= 0.0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(rounds) / params.herald_success_rate;
}

}  // namespace threebox
