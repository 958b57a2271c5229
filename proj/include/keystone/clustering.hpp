#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "keystone/geometry.hpp"

namespace keystone {

struct ClusterConfig {
  std::size_t num_clusters = 2;
  std::size_t max_iterations = 10;
  std::uint64_t seed = 0;
  /// Cosine clusters unit-normalized vectors; euclidean clusters raw ones.
  Metric metric = Metric::kEuclidean;

  void validate() const;
};

struct ClusterAssignment {
  std::vector<std::size_t> labels;
  std::size_t num_clusters = 0;
  std::size_t iterations_run = 0;
  bool converged = false;
  /// Within-cluster sum of squared deviations after each centroid update.
  std::vector<double> objective_history;

  std::vector<std::size_t> cluster_sizes() const;
  std::vector<std::size_t> members(std::size_t cluster) const;
};

/// C distinct candidate indices drawn uniformly without replacement.
std::vector<std::size_t> init_centroids(std::size_t num_candidates, std::size_t num_clusters, std::mt19937_64& rng);

/// Lloyd iterations from explicit starting centroid indices. Points are the
/// rows of the batch (normalized first under the cosine metric).
ClusterAssignment kmeans_from(const CandidateBatch& batch, std::span<const std::size_t> initial,
                              const ClusterConfig& config);

/// Seeded k-means: centroids start at init_centroids(seed) and iterate up to
/// max_iterations, stopping once labels repeat.
ClusterAssignment kmeans(const CandidateBatch& batch, const ClusterConfig& config);

/// Largest cluster; ties prefer the smaller within-cluster distance total,
/// then the lower smallest member index.
std::size_t largest_cluster(const ClusterAssignment& assignment, const DistanceMatrix& dm);

/// Member minimizing the summed distance to the other members (ties to the
/// smallest index). Throws kInternal on an empty member list.
std::size_t cluster_medoid(const DistanceMatrix& dm, std::span<const std::size_t> members);

/// Within-cluster sum of squared deviations of the labels in the given points.
double within_cluster_ss(const CandidateBatch& batch, std::span<const std::size_t> labels, std::size_t num_clusters);

}  // namespace keystone
