#include "keystone/rollout.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "keystone/rng.hpp"

namespace keystone {

void RoundModel::validate() const {
  if (modes.empty()) throw Error(ErrorCode::kInvalidConfig, "round model has no modes");
  if (dimension == 0) throw Error(ErrorCode::kInvalidConfig, "round model dimension must be positive");
  if (chunk_steps == 0 || dimension % chunk_steps != 0) {
    throw Error(ErrorCode::kInvalidConfig, "chunk_steps must divide the dimension");
  }
  double total = 0.0;
  bool any_success = false;
  for (const auto& mode : modes) {
    if (mode.center.size() != dimension) {
      throw Error(ErrorCode::kInvalidConfig, "mode center length differs from the round dimension");
    }
    if (!(mode.spread >= 0.0) || !std::isfinite(mode.spread)) {
      throw Error(ErrorCode::kInvalidConfig, "mode spread must be a nonnegative number");
    }
    if (!(mode.weight > 0.0 && mode.weight <= 1.0)) {
      throw Error(ErrorCode::kInvalidConfig, "mode weight must lie in (0, 1]");
    }
    total += mode.weight;
    any_success = any_success || mode.success;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::kInvalidConfig, "mode weights must sum to 1");
  if (!any_success) throw Error(ErrorCode::kInvalidConfig, "round model needs at least one success mode");
}

double RoundModel::success_weight() const {
  double total = 0.0;
  for (const auto& mode : modes) {
    if (mode.success) total += mode.weight;
  }
  return total;
}

void EpisodeModel::validate() const {
  if (rounds.empty()) throw Error(ErrorCode::kInvalidConfig, "episode needs at least one round");
  for (const auto& round : rounds) round.validate();
}

EpisodeModel EpisodeModel::repeated(std::string name, const RoundModel& round, std::size_t rounds) {
  return EpisodeModel{std::move(name), std::vector<RoundModel>(rounds, round)};
}

Policy Policy::single_sample() { return Policy{}; }

Policy Policy::keystone(std::size_t samples, SelectorConfig selector) {
  Policy policy;
  policy.name = "keystone";
  policy.kind = Kind::kKeystone;
  policy.samples = samples;
  policy.selector = selector;
  return policy;
}

void Policy::validate() const {
  if (samples == 0) throw Error(ErrorCode::kInvalidConfig, "policy must draw at least one sample");
  if (kind == Kind::kKeystone) selector.validate();
}

DrawnCandidates draw_candidates(const RoundModel& round, std::size_t count, std::mt19937_64& rng) {
  std::vector<double> weights;
  weights.reserve(round.modes.size());
  for (const auto& mode : round.modes) weights.push_back(mode.weight);
  std::discrete_distribution<std::size_t> pick_mode(weights.begin(), weights.end());
  std::normal_distribution<double> noise(0.0, 1.0);

  const std::size_t dim = round.dimension;
  std::vector<double> values(count * dim);
  std::vector<bool> success(count);
  for (std::size_t i = 0; i < count; ++i) {
    const ModeSpec& mode = round.modes[pick_mode(rng)];
    success[i] = mode.success;
    for (std::size_t d = 0; d < dim; ++d) {
      values[i * dim + d] = mode.spread == 0.0 ? mode.center[d] : mode.center[d] + mode.spread * noise(rng);
    }
  }
  return {CandidateBatch(count, round.chunk_steps, dim / round.chunk_steps, std::move(values)), std::move(success)};
}

bool run_round(const RoundModel& round, const Policy& policy, std::uint64_t round_seed) {
  std::mt19937_64 rng(round_seed);
  const std::size_t count = policy.kind == Policy::Kind::kSingleSample ? 1 : policy.samples;
  const DrawnCandidates drawn = draw_candidates(round, count, rng);
  if (policy.kind == Policy::Kind::kSingleSample) return drawn.success.front();
  SelectorConfig config = policy.selector;
  config.seed = derive_seed(round_seed, {1});
  return drawn.success[select(drawn.batch, config).selected_index];
}

bool run_episode(const EpisodeModel& episode, const Policy& policy, std::uint64_t episode_seed) {
  for (std::size_t t = 0; t < episode.rounds.size(); ++t) {
    if (!run_round(episode.rounds[t], policy, derive_seed(episode_seed, {t}))) return false;
  }
  return true;
}

RolloutStats estimate_success(const EpisodeModel& episode, const Policy& policy, std::size_t episodes_per_repeat,
                              std::size_t repeats, std::uint64_t seed, unsigned threads) {
  if (episodes_per_repeat == 0 || repeats == 0) {
    throw Error(ErrorCode::kInvalidConfig, "episode and repeat counts must be positive");
  }
  episode.validate();
  policy.validate();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, episodes_per_repeat));

  RolloutStats stats;
  stats.repeats = repeats;
  stats.episodes_per_repeat = episodes_per_repeat;
  for (std::size_t r = 0; r < repeats; ++r) {
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> successes{0};
    auto worker = [&] {
      std::size_t local = 0;
      for (std::size_t e = next++; e < episodes_per_repeat; e = next++) {
        if (run_episode(episode, policy, derive_seed(seed, {r, e}))) ++local;
      }
      successes += local;
    };
    if (threads == 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    stats.repeat_rates.push_back(static_cast<double>(successes.load()) / static_cast<double>(episodes_per_repeat));
  }
  const double n = static_cast<double>(repeats);
  stats.mean_success = std::accumulate(stats.repeat_rates.begin(), stats.repeat_rates.end(), 0.0) / n;
  if (repeats > 1) {
    double ss = 0.0;
    for (double rate : stats.repeat_rates) ss += (rate - stats.mean_success) * (rate - stats.mean_success);
    stats.std_success = std::sqrt(ss / (n - 1.0));
  }
  return stats;
}

std::vector<SweepRow> ablation_sweep(const EpisodeModel& episode, const Policy& base, const SweepAxes& axes,
                                     std::size_t episodes_per_repeat, std::size_t repeats, std::uint64_t seed,
                                     unsigned threads) {
  if (base.kind != Policy::Kind::kKeystone) {
    throw Error(ErrorCode::kInvalidConfig, "ablation sweeps vary a keystone policy");
  }
  std::vector<std::pair<std::string, Policy>> configs;
  if (axes.empty()) configs.emplace_back("base", base);
  for (Metric metric : axes.metrics) {
    Policy p = base;
    p.selector.metric = metric;
    configs.emplace_back("metric=" + std::string(to_string(metric)), p);
  }
  for (std::size_t k : axes.k_values) {
    Policy p = base;
    p.samples = k;
    configs.emplace_back("K=" + std::to_string(k), p);
  }
  for (std::size_t c : axes.c_values) {
    Policy p = base;
    p.selector.num_clusters = c;
    configs.emplace_back("C=" + std::to_string(c), p);
  }
  std::vector<SweepRow> rows;
  rows.reserve(configs.size());
  for (auto& [id, policy] : configs) {
    policy.validate();
    rows.push_back({id, policy, estimate_success(episode, policy, episodes_per_repeat, repeats, seed, threads)});
  }
  return rows;
}

}  // namespace keystone
