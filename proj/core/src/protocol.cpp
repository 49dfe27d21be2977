#include "threebox/protocol.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

#include "threebox/errors.hpp"

namespace threebox {
namespace {

// Rotation planes (basis indices) that Alice's two control pulses couple.
constexpr std::size_t kPrepPlaneA = 0, kPrepPlaneB = 2;
constexpr std::size_t kPostPlaneA = 1, kPostPlaneB = 2;

int sample_box(const Eigen::Vector3d& distribution, double u) {
  double cumulative = 0.0;
  int last_possible = 1;
  for (int b = 1; b <= 3; ++b) {
    const double p = distribution[b - 1];
    if (p > 0.0) last_possible = b;
    cumulative += p;
    if (p > 0.0 && u < cumulative) return b;
  }
  return last_possible;
}

int step_ball(const StochasticMatrix& map, int from, double u) {
  return sample_box(map.row(from - 1).transpose(), u);
}

const MrStrategy& strategy_of(const GameModel& model) {
  if (!model.mr_strategy) throw ConfigError("macroreal engine has no mr_strategy");
  return *model.mr_strategy;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  if (workers == 1) {
    fn(std::size_t{0}, n, std::size_t{0});
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    pool.emplace_back([&fn, begin, end, w] { fn(begin, end, w); });
  }
}

}  // namespace

GameModel GameModel::from_config(const SessionConfig& config) {
  return {config.engine, config.noise, config.mr_strategy};
}

const Unitary& preparation_unitary() {
  static const Unitary u = unitary_from_pair(StateVector::box(3), StateVector::initial());
  return u;
}

const Unitary& post_selection_unitary() {
  static const Unitary u = unitary_from_pair(StateVector::final_state(), StateVector::box(3));
  return u;
}

EngineState alice_prepare(const GameModel& model, Rng& rng) {
  if (model.engine == Engine::kQuantum) {
    const DensityMatrix heralded = noisy_initial_state(model.noise, rng);
    const Unitary u = perturbed_unitary(preparation_unitary(), model.noise, kPrepPlaneA, kPrepPlaneB);
    return QuantumState{dephase(apply_unitary(u, heralded), model.noise)};
  }
  const MrStrategy& s = strategy_of(model);
  BallState ball;
  const int start = sample_box(s.placement, rng.uniform());
  ball.box = step_ball(s.shuffle_I, start, rng.uniform());
  ball.history = {start, ball.box, 0};
  return ball;
}

BoxReading read_box(const EngineState& state, int box, const GameModel& model, Rng& rng) {
  if (box < 1 || box > 3) throw std::invalid_argument("box label must be 1, 2 or 3");

  if (const auto* q = std::get_if<QuantumState>(&state)) {
    const std::array<Projector, 2> basis = {Projector::box(box), Projector::box_complement(box)};
    const Measurement m = measure_in_basis(q->rho, basis, rng);
    const bool actual = m.index == 0;
    // Drawn on both branches so later draws stay aligned.
    const Repopulation repop = repopulation_channel(m.post, model.noise, rng);
    const bool reported = flip_readout(actual, model.noise, rng);

    BoxReading r{QuantumState{m.post}, reported ? BobOutcome::kTrue : BobOutcome::kFalse, actual,
                 std::nullopt};
    if (actual) {
      r.state = QuantumState{repop.state};
      r.tag = repop.tag;
      if (repop.tag == RepopulationTag::kUndetermined) r.recorded = BobOutcome::kUndetermined;
    }
    std::get<QuantumState>(r.state).rho = dephase(std::get<QuantumState>(r.state).rho, model.noise);
    return r;
  }

  const MrStrategy& s = strategy_of(model);
  BallState ball = std::get<BallState>(state);
  const bool actual = ball.box == box;
  ball.box = step_ball(s.measurement_disturbance, ball.box, rng.uniform());
  ball.history[1] = ball.box;
  const bool reported = flip_readout(actual, model.noise, rng);
  return {ball, reported ? BobOutcome::kTrue : BobOutcome::kFalse, actual, std::nullopt};
}

std::pair<EngineState, BobOutcome> bob_measure(const EngineState& state, Context context,
                                               const GameModel& model, Rng& rng) {
  if (context == Context::kNone) {
    throw InvalidContext("bob_measure called with context 'none'");
  }
  BoxReading r = read_box(state, context_box(context), model, rng);
  return {std::move(r.state), r.recorded};
}

std::pair<EngineState, bool> alice_measure(const EngineState& state, const GameModel& model,
                                           Rng& rng) {
  if (const auto* q = std::get_if<QuantumState>(&state)) {
    const Unitary u =
        perturbed_unitary(post_selection_unitary(), model.noise, kPostPlaneA, kPostPlaneB);
    const DensityMatrix rotated = dephase(apply_unitary(u, q->rho), model.noise);
    const std::array<Projector, 2> basis = {Projector::box(3), Projector::box_complement(3)};
    const Measurement m = measure_in_basis(rotated, basis, rng);
    const bool reported = flip_readout(m.index == 0, model.noise, rng);
    return {QuantumState{m.post}, reported};
  }

  const MrStrategy& s = strategy_of(model);
  BallState ball = std::get<BallState>(state);
  ball.box = step_ball(s.shuffle_F, ball.box, rng.uniform());
  ball.history[2] = ball.box;
  const bool reported = flip_readout(ball.box == 3, model.noise, rng);
  return {ball, reported};
}

double settle(const RoundRecord& record, double odds) {
  if (!(odds > 1.0)) throw std::invalid_argument("odds must be greater than 1");
  if (!record.alice_bets || record.context == Context::kNone) return 0.0;
  if (!record.alice_wins) {
    throw SettleBeforeComplete("round " + std::to_string(record.round_id) +
                               " is a bet with no win/loss outcome");
  }
  return *record.alice_wins ? 1.0 : -(odds - 1.0);
}

RoundRecord play_round(const SessionConfig& config, std::uint64_t round_id,
                       std::optional<Context> context) {
  const Context ctx = context ? *context : config.context_schedule.context_for(round_id, config.seed);
  const GameModel model = GameModel::from_config(config);
  Rng rng = Rng::for_stream(config.seed, StreamDomain::kRound, round_id);

  RoundRecord rec;
  rec.round_id = round_id;
  rec.engine = config.engine;
  rec.context = ctx;
  rec.seed_path = seed_path(config.seed, round_id);

  EngineState state = alice_prepare(model, rng);
  if (ctx != Context::kNone) {
    auto [next, outcome] = bob_measure(state, ctx, model, rng);
    state = std::move(next);
    rec.bob_outcome = outcome;
  }
  auto [final_state, m3] = alice_measure(state, model, rng);
  rec.alice_m3 = m3;
  rec.alice_bets = m3;
  if (rec.alice_bets && ctx != Context::kNone) {
    rec.alice_wins = rec.bob_outcome == BobOutcome::kTrue;
  }
  if (const auto* ball = std::get_if<BallState>(&final_state)) {
    rec.ground_truth_boxes = ball->history;
  }
  return rec;
}

std::vector<RoundRecord> run_session(const SessionConfig& config, unsigned threads) {
  config.validate();
  if (config.context_schedule.kind == ScheduleKind::kExternal) {
    throw ConfigError("batch sessions cannot use an external context schedule");
  }
  std::vector<RoundRecord> records(config.rounds);
  parallel_for(config.rounds, threads, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) records[i] = play_round(config, i + 1);
  });
  return records;
}

// Verification ----------------------------------------------------------------

std::size_t outcome_index(BobOutcome o) {
  switch (o) {
    case BobOutcome::kTrue:
      return 0;
    case BobOutcome::kFalse:
      return 1;
    case BobOutcome::kUndetermined:
      return 2;
  }
  return 2;
}

std::size_t tag_index(RepopulationTag t) {
  switch (t) {
    case RepopulationTag::kPreserved:
      return 0;
    case RepopulationTag::kUndetermined:
      return 1;
    case RepopulationTag::kFlipped:
      return 2;
  }
  return 2;
}

std::size_t VerificationTables::conditioning_count(int first_box, BobOutcome first,
                                                   int second_box) const {
  const auto& row = pairs[static_cast<std::size_t>(first_box - 1)]
                         [static_cast<std::size_t>(second_box - 1)][outcome_index(first)];
  std::size_t n = 0;
  for (auto c : row) n += c;
  return n;
}

std::optional<double> VerificationTables::repeat_probability(int first_box, BobOutcome first,
                                                             int second_box) const {
  const std::size_t n = conditioning_count(first_box, first, second_box);
  if (n == 0) return std::nullopt;
  const auto& row = pairs[static_cast<std::size_t>(first_box - 1)]
                         [static_cast<std::size_t>(second_box - 1)][outcome_index(first)];
  return static_cast<double>(row[outcome_index(BobOutcome::kTrue)]) / static_cast<double>(n);
}

std::size_t VerificationTables::first_total(int box) const {
  std::size_t n = 0;
  for (auto c : first[static_cast<std::size_t>(box - 1)]) n += c;
  return n;
}

double VerificationTables::marginal_true(int box) const {
  const std::size_t n = first_total(box);
  if (n == 0) return 0.0;
  return static_cast<double>(first[static_cast<std::size_t>(box - 1)][0]) / static_cast<double>(n);
}

std::size_t VerificationTables::tag_total() const {
  std::size_t n = 0;
  for (const auto& row : tags)
    for (auto c : row) n += c;
  return n;
}

double VerificationTables::preserved_fraction() const {
  const std::size_t n = tag_total();
  if (n == 0) return 0.0;
  std::size_t preserved = 0;
  for (const auto& row : tags) preserved += row[tag_index(RepopulationTag::kPreserved)];
  return static_cast<double>(preserved) / static_cast<double>(n);
}

VerificationTables run_verification(const SessionConfig& config, std::size_t pairs_per_combination,
                                    unsigned threads) {
  config.validate();
  const GameModel model = GameModel::from_config(config);
  const std::size_t total = 9 * pairs_per_combination;

  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, total));
  std::vector<VerificationTables> partial(workers);
  parallel_for(total, static_cast<unsigned>(workers),
               [&](std::size_t begin, std::size_t end, std::size_t w) {
                 VerificationTables& t = partial[w];
                 for (std::size_t i = begin; i < end; ++i) {
                   const std::size_t combo = i / pairs_per_combination;
                   const int first_box = static_cast<int>(combo / 3) + 1;
                   const int second_box = static_cast<int>(combo % 3) + 1;
                   Rng rng = Rng::for_stream(config.seed, StreamDomain::kVerification, i);

                   const EngineState prepared = alice_prepare(model, rng);
                   const BoxReading r1 = read_box(prepared, first_box, model, rng);
                   const BoxReading r2 = read_box(r1.state, second_box, model, rng);

                   const auto j = static_cast<std::size_t>(first_box - 1);
                   const auto k = static_cast<std::size_t>(second_box - 1);
                   ++t.first[j][outcome_index(r1.recorded)];
                   ++t.pairs[j][k][outcome_index(r1.recorded)][outcome_index(r2.recorded)];
                   if (r1.tag) ++t.tags[j][tag_index(*r1.tag)];
                 }
               });

  VerificationTables out;
  out.engine = config.engine;
  out.pairs_per_combination = pairs_per_combination;
  for (const auto& t : partial) {
    for (std::size_t j = 0; j < 3; ++j) {
      for (std::size_t o = 0; o < kOutcomeCount; ++o) out.first[j][o] += t.first[j][o];
      for (std::size_t g = 0; g < kTagCount; ++g) out.tags[j][g] += t.tags[j][g];
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t a = 0; a < kOutcomeCount; ++a)
          for (std::size_t b = 0; b < kOutcomeCount; ++b) out.pairs[j][k][a][b] += t.pairs[j][k][a][b];
    }
  }
  return out;
}

}  // namespace threebox
