#pragma once

// Sample-and-execute loop over labeled mixture models: each round draws K
// candidates, a policy picks one to execute, and an episode succeeds only if
// every executed chunk came from a success mode.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "keystone/selector.hpp"

namespace keystone {

struct ModeSpec {
  std::vector<double> center;
  double spread = 0.0;  // isotropic standard deviation
  double weight = 1.0;
  bool success = true;
};

struct RoundModel {
  std::vector<ModeSpec> modes;
  std::size_t dimension = 0;
  /// Chunks are reshaped to (chunk_steps, dimension / chunk_steps).
  std::size_t chunk_steps = 1;

  void validate() const;
  /// Total weight of success modes.
  double success_weight() const;
};

struct EpisodeModel {
  std::string name;
  std::vector<RoundModel> rounds;

  void validate() const;
  /// The same round model repeated `rounds` times.
  static EpisodeModel repeated(std::string name, const RoundModel& round, std::size_t rounds);
};

struct Policy {
  enum class Kind { kSingleSample, kKeystone };
  std::string name = "single_sample";
  Kind kind = Kind::kSingleSample;
  std::size_t samples = 1;
  SelectorConfig selector;

  static Policy single_sample();
  static Policy keystone(std::size_t samples, SelectorConfig selector = {});
  void validate() const;
};

struct DrawnCandidates {
  CandidateBatch batch;
  std::vector<bool> success;
};

/// Each candidate picks a mode by weight, then adds spread * N(0, I).
DrawnCandidates draw_candidates(const RoundModel& round, std::size_t count, std::mt19937_64& rng);

/// One sample-select-execute cycle; true when the executed chunk is a success.
bool run_round(const RoundModel& round, const Policy& policy, std::uint64_t round_seed);

/// Rounds use streams derived from episode_seed and the round index; the
/// episode stops at its first failed round.
bool run_episode(const EpisodeModel& episode, const Policy& policy, std::uint64_t episode_seed);

struct RolloutStats {
  double mean_success = 0.0;
  /// Sample standard deviation of the per-repeat success rates.
  double std_success = 0.0;
  std::size_t repeats = 0;
  std::size_t episodes_per_repeat = 0;
  std::vector<double> repeat_rates;

  friend bool operator==(const RolloutStats&, const RolloutStats&) = default;
};

/// Deterministic in `seed`; episode e of repeat r runs on
/// derive_seed(seed, {r, e}) whatever the thread count.
RolloutStats estimate_success(const EpisodeModel& episode, const Policy& policy, std::size_t episodes_per_repeat,
                              std::size_t repeats, std::uint64_t seed, unsigned threads = 0);

struct SweepAxes {
  std::vector<Metric> metrics;
  std::vector<std::size_t> k_values;
  std::vector<std::size_t> c_values;

  bool empty() const { return metrics.empty() && k_values.empty() && c_values.empty(); }
};

struct SweepRow {
  std::string config_id;
  Policy policy;
  RolloutStats stats;
};

/// One-at-a-time sweep around `base`: a row per listed axis value, or a
/// single base row when no axis is given. Every row shares the master seed.
std::vector<SweepRow> ablation_sweep(const EpisodeModel& episode, const Policy& base, const SweepAxes& axes,
                                     std::size_t episodes_per_repeat, std::size_t repeats, std::uint64_t seed,
                                     unsigned threads = 0);

}  // namespace keystone
