#include "threebox/mr_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "threebox/errors.hpp"
#include "threebox/lg_stats.hpp"
#include "threebox/session_config.hpp"

namespace threebox {

using nlohmann::json;

std::vector<HistoryAssignment> enumerate_histories() {
  std::vector<HistoryAssignment> out;
  for (int q2 : {1, -1}) {
    for (int q3 : {1, -1}) {
      const int q1 = 1;
      out.push_back({{q1, q2, q3}, static_cast<double>(q1 * q2 + q2 * q3 + q1 * q3)});
    }
  }
  return out;
}

std::pair<double, double> k_bounds() {
  const auto h = enumerate_histories();
  const auto [lo, hi] = std::minmax_element(
      h.begin(), h.end(), [](const auto& a, const auto& b) { return a.k_value < b.k_value; });
  return {lo->k_value, hi->k_value};
}

double MrObservables::disturbance() const {
  return std::max(std::abs(p_alice[0] - p_alice[2]), std::abs(p_alice[1] - p_alice[2]));
}

MrObservables evaluate_strategy(const MrStrategy& s) {
  // Row vector of the ball distribution Bob sees.
  const Eigen::RowVector3d prepared = s.placement.transpose() * s.shuffle_I;
  const Eigen::Vector3d final_in_3 = s.shuffle_F.col(2);

  MrObservables obs;
  obs.p_alice[2] = prepared * final_in_3;
  const Eigen::Vector3d after_bob_then_alice = s.measurement_disturbance * final_in_3;
  for (int c = 0; c < 2; ++c) {
    const int box = c + 1;
    const double p_alice = prepared * after_bob_then_alice;
    const double p_joint = prepared[box - 1] * after_bob_then_alice[box - 1];
    obs.p_alice[static_cast<std::size_t>(c)] = p_alice;
    obs.p_joint[static_cast<std::size_t>(c)] = p_joint;
    if (p_alice > 1e-15) obs.p_bob_given_alice[static_cast<std::size_t>(c)] = p_joint / p_alice;
  }
  return obs;
}

DeterministicScan scan_deterministic_strategies(bool vary_disturbance) {
  std::vector<std::array<int, 3>> maps;
  for (int a = 1; a <= 3; ++a)
    for (int b = 1; b <= 3; ++b)
      for (int c = 1; c <= 3; ++c) maps.push_back({a, b, c});
  const std::vector<std::array<int, 3>> identity_only = {{1, 2, 3}};
  const auto& disturbances = vary_disturbance ? maps : identity_only;

  DeterministicScan scan;
  scan.max_conditional_sum = -1.0;
  for (int start = 1; start <= 3; ++start) {
    for (const auto& fi : maps) {
      for (const auto& ff : maps) {
        for (const auto& fd : disturbances) {
          const MrStrategy s = MrStrategy::deterministic(start, fi, ff, fd);
          ++scan.strategies;
          const MrObservables obs = evaluate_strategy(s);
          if (!obs.p_bob_given_alice[0] || !obs.p_bob_given_alice[1]) continue;
          ++scan.with_alice_true;
          const double sum = *obs.p_bob_given_alice[0] + *obs.p_bob_given_alice[1];
          if (sum > scan.max_conditional_sum) {
            scan.max_conditional_sum = sum;
            scan.argmax = s;
          }
        }
      }
    }
  }
  const double half = scan.max_conditional_sum / 2.0;
  scan.min_k = k_from_conditionals(half, half);
  return scan;
}

FitTargets FitTargets::ideal_quantum() {
  return {{1.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0}, {1.0, 1.0}};
}

FitTargets FitTargets::from_strategy(const MrStrategy& s) {
  const MrObservables obs = evaluate_strategy(s);
  return {obs.p_alice, {obs.p_bob_given_alice[0].value_or(0.0), obs.p_bob_given_alice[1].value_or(0.0)}};
}

FitTargets targets_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("targets must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "p_alice" && key != "p_bob_given_alice") {
      throw ConfigError("unknown key '" + key + "' in targets");
    }
  }
  auto read = [&](const char* key, std::size_t n) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != n) {
      throw ConfigError(std::string("targets.") + key + " must be an array of " + std::to_string(n));
    }
    std::vector<double> v;
    for (const auto& x : j[key]) {
      if (!x.is_number()) throw ConfigError(std::string("targets.") + key + " entries must be numbers");
      const double d = x.get<double>();
      if (!(d >= 0.0 && d <= 1.0)) throw ConfigError(std::string("targets.") + key + " entries must lie in [0, 1]");
      v.push_back(d);
    }
    return v;
  };
  const auto a = read("p_alice", 3);
  const auto b = read("p_bob_given_alice", 2);
  return {{a[0], a[1], a[2]}, {b[0], b[1]}};
}

json to_json(const FitTargets& t) {
  return {{"p_alice", t.p_alice}, {"p_bob_given_alice", t.p_bob_given_alice}};
}

double fit_error(const MrObservables& obs, const FitTargets& t) {
  double worst = 0.0;
  for (std::size_t c = 0; c < 3; ++c) worst = std::max(worst, std::abs(obs.p_alice[c] - t.p_alice[c]));
  for (std::size_t c = 0; c < 2; ++c) {
    worst = std::max(worst, std::abs(obs.p_bob_given_alice[c].value_or(0.0) - t.p_bob_given_alice[c]));
  }
  return worst;
}

Eigen::Vector3d project_to_simplex(const Eigen::Vector3d& v) {
  std::array<double, 3> u = {v[0], v[1], v[2]};
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    cumulative += u[i];
    const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  Eigen::Vector3d out;
  for (int i = 0; i < 3; ++i) out[i] = std::max(v[i] - theta, 0.0);
  // Remove the last ulp of drift so validate() sees an exact distribution.
  return out / out.sum();
}

namespace {

// Smooth surrogate minimized by the descent; the reported error is the max.
double squared_error(const MrObservables& obs, const FitTargets& t) {
  double s = 0.0;
  for (std::size_t c = 0; c < 3; ++c) s += std::pow(obs.p_alice[c] - t.p_alice[c], 2);
  for (std::size_t c = 0; c < 2; ++c) {
    s += std::pow(obs.p_bob_given_alice[c].value_or(0.0) - t.p_bob_given_alice[c], 2);
  }
  return s;
}

// Pointers to the simplices being searched: placement plus each matrix row.
struct Simplex {
  bool is_placement = false;
  StochasticMatrix* matrix = nullptr;
  int row = 0;
};

Eigen::Vector3d get(const MrStrategy& s, const Simplex& x) {
  return x.is_placement ? s.placement : Eigen::Vector3d(x.matrix->row(x.row).transpose());
}

void set(MrStrategy& s, const Simplex& x, const Eigen::Vector3d& v) {
  if (x.is_placement) {
    s.placement = v;
  } else {
    x.matrix->row(x.row) = v.transpose();
  }
}

std::vector<Simplex> simplices(MrStrategy& s, bool lock_disturbance) {
  std::vector<Simplex> out;
  out.push_back({true, nullptr, 0});
  for (auto* m : {&s.shuffle_I, &s.shuffle_F}) {
    for (int r = 0; r < 3; ++r) out.push_back({false, m, r});
  }
  if (!lock_disturbance) {
    for (int r = 0; r < 3; ++r) out.push_back({false, &s.measurement_disturbance, r});
  }
  return out;
}

class Archive {
 public:
  void add(double disturbance, double error) {
    // Quantize disturbance so the archive stays small.
    const double key = std::round(disturbance * 1e6) / 1e6;
    auto [it, inserted] = best_.try_emplace(key, error);
    if (!inserted) it->second = std::min(it->second, error);
  }

  std::vector<FrontierPoint> frontier() const {
    std::vector<FrontierPoint> out;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [d, e] : best_) {
      if (e < best) {
        best = e;
        out.push_back({d, e});
      }
    }
    return out;
  }

 private:
  std::map<double, double> best_;
};

}  // namespace

FitResult best_noncontextual_fit(const FitTargets& targets, const FitOptions& options, Rng& rng) {
  if (options.budget < 1000) throw std::invalid_argument("search budget must be at least 1000");

  FitResult best;
  best.fit_error = std::numeric_limits<double>::infinity();
  double best_sq = std::numeric_limits<double>::infinity();
  Archive archive;
  std::size_t evaluations = 0;

  auto evaluate = [&](const MrStrategy& s) {
    ++evaluations;
    const MrObservables obs = evaluate_strategy(s);
    const double err = fit_error(obs, targets);
    const double sq = squared_error(obs, targets);
    archive.add(obs.disturbance(), err);
    if (sq < best_sq || (sq == best_sq && err < best.fit_error)) {
      best_sq = sq;
      best.strategy = s;
      best.fit_error = err;
      best.disturbance = obs.disturbance();
    }
    return sq;
  };

  while (evaluations < options.budget) {
    ++best.restarts;
    MrStrategy current = MrStrategy::random(rng, !options.lock_disturbance_identity);
    double current_sq = evaluate(current);
    auto coords = simplices(current, options.lock_disturbance_identity);

    double step = 0.25;
    while (step > 1e-9 && evaluations < options.budget) {
      bool improved = false;
      for (const auto& x : coords) {
        for (int i = 0; i < 3 && evaluations < options.budget; ++i) {
          for (double sign : {1.0, -1.0}) {
            const Eigen::Vector3d old = get(current, x);
            Eigen::Vector3d moved = old;
            moved[i] += sign * step;
            moved = project_to_simplex(moved);
            if ((moved - old).cwiseAbs().maxCoeff() < 1e-15) continue;
            set(current, x, moved);
            const double sq = evaluate(current);
            if (sq < current_sq) {
              current_sq = sq;
              improved = true;
            } else {
              set(current, x, old);
            }
            if (evaluations >= options.budget) break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
  }

  best.evaluations = evaluations;
  best.frontier = archive.frontier();
  return best;
}

json to_json(const FitResult& r) {
  json frontier = json::array();
  for (const auto& p : r.frontier) frontier.push_back({{"disturbance", p.disturbance}, {"fit_error", p.fit_error}});
  return {{"strategy", to_json(r.strategy)},
          {"fit_error", r.fit_error},
          {"disturbance", r.disturbance},
          {"evaluations", r.evaluations},
          {"restarts", r.restarts},
          {"frontier", frontier}};
}

}  // namespace threebox
