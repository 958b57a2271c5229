#include <gtest/gtest.h>

#include <cmath>

#include "keystone/rng.hpp"
#include "keystone/rollout.hpp"
#include "oracles/oracles.hpp"

namespace keystone {
namespace {

ModeSpec mode(std::vector<double> center, double spread, double weight, bool success) {
  return ModeSpec{std::move(center), spread, weight, success};
}

/// Success mode at the origin, one failure mode far away. With the default
/// spreads the failure mode is the denser one, so an exact split at even K
/// goes to failure and keystone executes a success iff successes are a strict
/// majority.
RoundModel two_mode_round(double success_weight, std::size_t dim = 4, double success_spread = 0.2,
                          double failure_spread = 0.01) {
  RoundModel round;
  round.dimension = dim;
  round.modes.push_back(mode(std::vector<double>(dim, 0.0), success_spread, success_weight, true));
  if (success_weight < 1.0) {
    round.modes.push_back(mode(std::vector<double>(dim, 30.0), failure_spread, 1.0 - success_weight, false));
  }
  return round;
}

TEST(RoundModel, Validation) {
  RoundModel round = two_mode_round(0.7);
  EXPECT_NO_THROW(round.validate());
  round.modes[0].weight = 0.5;
  EXPECT_THROW(round.validate(), Error);
  round = two_mode_round(0.7);
  round.modes[0].success = false;
  EXPECT_THROW(round.validate(), Error);
  round = two_mode_round(0.7);
  round.modes[1].center.pop_back();
  EXPECT_THROW(round.validate(), Error);
  round = two_mode_round(0.7);
  round.chunk_steps = 3;
  EXPECT_THROW(round.validate(), Error);
  EXPECT_THROW(EpisodeModel{}.validate(), Error);
}

TEST(DrawCandidates, ZeroSpreadRepeatsCenter) {
  RoundModel round;
  round.dimension = 3;
  round.modes.push_back(mode({1, 2, 3}, 0.0, 1.0, true));
  std::mt19937_64 rng(1);
  const auto drawn = draw_candidates(round, 5, rng);
  ASSERT_EQ(drawn.batch.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(std::vector<double>(drawn.batch.flat(i).begin(), drawn.batch.flat(i).end()),
              (std::vector<double>{1, 2, 3}));
    EXPECT_TRUE(drawn.success[i]);
  }
}

TEST(DrawCandidates, ChunkShapeFollowsSteps) {
  RoundModel round = two_mode_round(0.7, 6);
  round.chunk_steps = 3;
  std::mt19937_64 rng(1);
  const auto drawn = draw_candidates(round, 2, rng);
  EXPECT_EQ(drawn.batch.steps(), 3u);
  EXPECT_EQ(drawn.batch.dims(), 2u);
}

TEST(DrawCandidates, LabelFrequencyMatchesWeight) {
  std::mt19937_64 rng(2);
  const std::size_t n = 100000;
  const auto drawn = draw_candidates(two_mode_round(0.7), n, rng);
  std::size_t hits = 0;
  for (bool s : drawn.success) hits += s;
  EXPECT_NEAR(double(hits) / n, 0.7, 0.01);
}

TEST(RunEpisode, AllSuccessAlwaysSucceeds) {
  const auto episode = EpisodeModel::repeated("sure", two_mode_round(1.0), 5);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    EXPECT_TRUE(run_episode(episode, Policy::single_sample(), seed));
    EXPECT_TRUE(run_episode(episode, Policy::keystone(8), seed));
  }
}

TEST(RunEpisode, SingleSampleCompoundsAcrossRounds) {
  const auto episode = EpisodeModel::repeated("p09", two_mode_round(0.9), 10);
  const auto stats = estimate_success(episode, Policy::single_sample(), 100000, 1, 17);
  EXPECT_NEAR(stats.mean_success, oracle::episode_closed_form(std::vector<double>(10, 0.9)), 0.005);
}

TEST(RunEpisode, AnalyticAgreementAcrossHorizons) {
  for (std::size_t t : {1u, 2u, 5u, 13u, 20u}) {
    const auto episode = EpisodeModel::repeated("h", two_mode_round(0.85), t);
    const std::size_t n = 20000;
    const auto stats = estimate_success(episode, Policy::single_sample(), n, 1, 100 + t);
    const double p = oracle::episode_closed_form(std::vector<double>(t, 0.85));
    EXPECT_NEAR(stats.mean_success, p, 3 * oracle::binomial_standard_error(p, n)) << "T=" << t;
  }
}

TEST(RunEpisode, KeystoneMatchesMajorityOracleOnSeparableModes) {
  const auto episode = EpisodeModel::repeated("round", two_mode_round(0.7), 1);
  const std::size_t n = 20000;
  const auto stats = estimate_success(episode, Policy::keystone(16), n, 1, 5);
  const double q = oracle::binomial_majority(16, 0.7);
  EXPECT_NEAR(stats.mean_success, q, 3 * oracle::binomial_standard_error(q, n));
}

TEST(EstimateSuccess, TrivialAndDeterministic) {
  const auto sure = EpisodeModel::repeated("sure", two_mode_round(1.0), 3);
  const auto one = estimate_success(sure, Policy::single_sample(), 1, 1, 0);
  EXPECT_EQ(one.mean_success, 1.0);
  EXPECT_EQ(one.std_success, 0.0);

  const auto episode = EpisodeModel::repeated("p", two_mode_round(0.8), 4);
  const auto a = estimate_success(episode, Policy::keystone(8), 500, 3, 99, 1);
  const auto b = estimate_success(episode, Policy::keystone(8), 500, 3, 99, 4);
  EXPECT_EQ(a, b);
  EXPECT_THROW(estimate_success(episode, Policy::single_sample(), 0, 1, 0), Error);
}

TEST(EstimateSuccess, LowPerRoundSuccessOverTenRounds) {
  const auto episode = EpisodeModel::repeated("p07", two_mode_round(0.7), 10);
  const auto stats = estimate_success(episode, Policy::single_sample(), 10000, 5, 3);
  EXPECT_NEAR(stats.mean_success, std::pow(0.7, 10), 0.004);
  EXPECT_EQ(stats.repeat_rates.size(), 5u);
}

TEST(DeriveSeed, DistinctStreams) {
  EXPECT_NE(derive_seed(1, {0, 0}), derive_seed(1, {0, 1}));
  EXPECT_NE(derive_seed(1, {0, 1}), derive_seed(1, {1, 0}));
  EXPECT_NE(derive_seed(1, {0}), derive_seed(2, {0}));
  EXPECT_EQ(derive_seed(7, {3, 4}), derive_seed(7, {3, 4}));
}

TEST(AblationSweep, RowLayout) {
  const auto episode = EpisodeModel::repeated("p", two_mode_round(0.8), 2);
  const auto base = Policy::keystone(8);
  EXPECT_EQ(ablation_sweep(episode, base, {}, 50, 2, 1).size(), 1u);
  SweepAxes axes;
  axes.k_values = {1, 4, 8, 16};
  const auto rows = ablation_sweep(episode, base, axes, 50, 2, 1);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].config_id, "K=1");
  EXPECT_EQ(rows[3].policy.samples, 16u);
  EXPECT_THROW(ablation_sweep(episode, Policy::single_sample(), axes, 50, 2, 1), Error);
}

TEST(AblationSweep, MoreSamplesNeverHurtOnPlantedInstances) {
  // Dense success mode, diffuse failure mode: exact splits go to success, so
  // a round succeeds iff at least half the draws are successes.
  const auto episode = EpisodeModel::repeated("p", two_mode_round(0.7, 4, 0.05, 1.0), 3);
  SweepAxes axes;
  axes.k_values = {1, 4, 8, 16};
  const auto rows = ablation_sweep(episode, Policy::keystone(16), axes, 2000, 3, 21);
  const std::size_t n = 2000 * 3;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double prev = rows[i - 1].stats.mean_success;
    const double cur = rows[i].stats.mean_success;
    EXPECT_GE(cur, prev - 3 * oracle::binomial_standard_error(std::max(prev, 0.01), n));
    const std::size_t k = rows[i].policy.samples;
    const double q = std::pow(oracle::binomial_at_least(k, (k + 1) / 2, 0.7), 3);
    EXPECT_NEAR(cur, q, 4 * oracle::binomial_standard_error(q, n)) << "K=" << k;
  }
  // Seeded sweeps reproduce exactly.
  const auto again = ablation_sweep(episode, Policy::keystone(16), axes, 2000, 3, 21);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].stats, again[i].stats);
}

}  // namespace
}  // namespace keystone
