#include "threebox/types.hpp"

#include <cmath>
#include <sstream>

#include "threebox/errors.hpp"

namespace threebox {

std::string_view to_string(Engine e) { return e == Engine::kQuantum ? "quantum" : "macroreal"; }

std::string_view to_string(Context c) {
  switch (c) {
    case Context::kM1:
      return "M1";
    case Context::kM2:
      return "M2";
    case Context::kNone:
      return "none";
  }
  return "none";
}

std::string_view to_string(BobOutcome o) {
  switch (o) {
    case BobOutcome::kTrue:
      return "true";
    case BobOutcome::kFalse:
      return "false";
    case BobOutcome::kUndetermined:
      return "undetermined";
  }
  return "undetermined";
}

Engine parse_engine(std::string_view s) {
  if (s == "quantum") return Engine::kQuantum;
  if (s == "macroreal") return Engine::kMacroreal;
  throw ConfigError("unknown engine '" + std::string(s) + "'");
}

Context parse_context(std::string_view s) {
  if (s == "M1") return Context::kM1;
  if (s == "M2") return Context::kM2;
  if (s == "none") return Context::kNone;
  throw ConfigError("unknown context '" + std::string(s) + "'");
}

BobOutcome parse_bob_outcome(std::string_view s) {
  if (s == "true") return BobOutcome::kTrue;
  if (s == "false") return BobOutcome::kFalse;
  if (s == "undetermined") return BobOutcome::kUndetermined;
  throw ConfigError("unknown Bob outcome '" + std::string(s) + "'");
}

int context_box(Context c) {
  switch (c) {
    case Context::kM1:
      return 1;
    case Context::kM2:
      return 2;
    case Context::kNone:
      break;
  }
  throw InvalidContext("context 'none' has no Bob measurement");
}

namespace {

std::string distribution_violation(const Eigen::Vector3d& row, double tol) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < 3; ++i) {
    if (!std::isfinite(row[i]) || row[i] < 0.0) {
      std::ostringstream os;
      os << "entry " << i << " is " << row[i];
      return os.str();
    }
    sum += row[i];
  }
  if (std::abs(sum - 1.0) > tol) {
    std::ostringstream os;
    os << "entries sum to " << sum;
    return os.str();
  }
  return {};
}

StochasticMatrix map_matrix(const std::array<int, 3>& map) {
  StochasticMatrix m = StochasticMatrix::Zero();
  for (int r = 0; r < 3; ++r) {
    const int to = map[static_cast<std::size_t>(r)];
    if (to < 1 || to > 3) throw ConfigError("box map entries must be 1, 2 or 3");
    m(r, to - 1) = 1.0;
  }
  return m;
}

Eigen::Vector3d dirichlet_row(Rng& rng) {
  Eigen::Vector3d v(rng.exponential(), rng.exponential(), rng.exponential());
  return v / v.sum();
}

StochasticMatrix random_stochastic(Rng& rng) {
  StochasticMatrix m;
  for (int r = 0; r < 3; ++r) m.row(r) = dirichlet_row(rng).transpose();
  return m;
}

}  // namespace

std::string stochastic_violation(const StochasticMatrix& m, double tol) {
  for (int r = 0; r < 3; ++r) {
    const std::string why = distribution_violation(m.row(r).transpose(), tol);
    if (!why.empty()) return "row " + std::to_string(r) + ": " + why;
  }
  return {};
}

void MrStrategy::validate() const {
  if (auto why = distribution_violation(placement, 1e-12); !why.empty()) {
    throw ConfigError("mr_strategy.placement: " + why);
  }
  const std::pair<const char*, const StochasticMatrix*> maps[] = {
      {"shuffle_I", &shuffle_I},
      {"shuffle_F", &shuffle_F},
      {"measurement_disturbance", &measurement_disturbance},
  };
  for (const auto& [name, m] : maps) {
    if (auto why = stochastic_violation(*m); !why.empty()) {
      throw ConfigError(std::string("mr_strategy.") + name + ": " + why);
    }
  }
}

MrStrategy MrStrategy::deterministic(int start, const std::array<int, 3>& shuffle_I_map,
                                     const std::array<int, 3>& shuffle_F_map,
                                     const std::array<int, 3>& disturbance_map) {
  if (start < 1 || start > 3) throw ConfigError("placement box must be 1, 2 or 3");
  MrStrategy s;
  s.placement = Distribution3::Zero();
  s.placement[start - 1] = 1.0;
  s.shuffle_I = map_matrix(shuffle_I_map);
  s.shuffle_F = map_matrix(shuffle_F_map);
  s.measurement_disturbance = map_matrix(disturbance_map);
  return s;
}

MrStrategy MrStrategy::random(Rng& rng, bool disturbing) {
  MrStrategy s;
  s.placement = dirichlet_row(rng);
  s.shuffle_I = random_stochastic(rng);
  s.shuffle_F = random_stochastic(rng);
  if (disturbing) s.measurement_disturbance = random_stochastic(rng);
  return s;
}

}  // namespace threebox
