#include "keystone/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace keystone {

void ClusterConfig::validate() const {
  if (num_clusters < 2) throw Error(ErrorCode::kInvalidConfig, "num_clusters must be at least 2");
  if (max_iterations < 1) throw Error(ErrorCode::kInvalidConfig, "max_iterations must be at least 1");
}

std::vector<std::size_t> ClusterAssignment::cluster_sizes() const {
  std::vector<std::size_t> sizes(num_clusters, 0);
  for (auto label : labels) ++sizes[label];
  return sizes;
}

std::vector<std::size_t> ClusterAssignment::members(std::size_t cluster) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == cluster) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> init_centroids(std::size_t num_candidates, std::size_t num_clusters, std::mt19937_64& rng) {
  if (num_candidates < num_clusters) {
    throw Error(ErrorCode::kInsufficientCandidates, std::to_string(num_candidates) +
                                                        " candidates cannot seed " + std::to_string(num_clusters) +
                                                        " clusters");
  }
  // Partial Fisher-Yates.
  std::vector<std::size_t> pool(num_candidates);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t c = 0; c < num_clusters; ++c) {
    std::uniform_int_distribution<std::size_t> pick(c, num_candidates - 1);
    std::swap(pool[c], pool[pick(rng)]);
  }
  pool.resize(num_clusters);
  return pool;
}

namespace {

/// K x D working copy of the points being clustered.
struct Points {
  std::size_t count;
  std::size_t dim;
  std::vector<double> data;

  std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

Points clustering_points(const CandidateBatch& batch, Metric metric) {
  const auto values = batch.values();
  Points points{batch.size(), batch.dimension(), {values.begin(), values.end()}};
  if (metric == Metric::kCosine) {
    for (std::size_t i = 0; i < points.count; ++i) {
      double* x = points.data.data() + i * points.dim;
      double norm = 0.0;
      for (std::size_t d = 0; d < points.dim; ++d) norm += x[d] * x[d];
      if (norm == 0.0) continue;
      norm = std::sqrt(norm);
      for (std::size_t d = 0; d < points.dim; ++d) x[d] /= norm;
    }
  }
  return points;
}

double squared_distance(std::span<const double> a, std::span<const double> b) { return squared_euclidean(a, b); }

std::vector<double> centroid_means(const Points& points, const std::vector<std::size_t>& labels,
                                   std::size_t num_clusters) {
  std::vector<double> centroids(num_clusters * points.dim, 0.0);
  std::vector<std::size_t> counts(num_clusters, 0);
  for (std::size_t i = 0; i < points.count; ++i) {
    const auto x = points.row(i);
    double* c = centroids.data() + labels[i] * points.dim;
    for (std::size_t d = 0; d < points.dim; ++d) c[d] += x[d];
    ++counts[labels[i]];
  }
  for (std::size_t c = 0; c < num_clusters; ++c) {
    if (counts[c] == 0) continue;
    const double inv = 1.0 / static_cast<double>(counts[c]);
    for (std::size_t d = 0; d < points.dim; ++d) centroids[c * points.dim + d] *= inv;
  }
  return centroids;
}

double objective(const Points& points, const std::vector<std::size_t>& labels, std::size_t num_clusters) {
  const auto centroids = centroid_means(points, labels, num_clusters);
  double total = 0.0;
  for (std::size_t i = 0; i < points.count; ++i) {
    total += squared_distance(points.row(i), {centroids.data() + labels[i] * points.dim, points.dim});
  }
  return total;
}

// Moves the point farthest from its centroid (among clusters that can spare
// one) into each empty cluster. Ties go to the highest index so the lowest
// indices keep their original cluster.
void repair_empty_clusters(const Points& points, const std::vector<double>& centroids,
                           std::vector<std::size_t>& labels, std::size_t num_clusters) {
  std::vector<std::size_t> counts(num_clusters, 0);
  for (auto label : labels) ++counts[label];
  std::vector<bool> moved(points.count, false);
  for (std::size_t empty = 0; empty < num_clusters; ++empty) {
    if (counts[empty] != 0) continue;
    std::size_t donor = points.count;
    double farthest = -1.0;
    for (std::size_t i = 0; i < points.count; ++i) {
      if (moved[i] || counts[labels[i]] < 2) continue;
      const double d = squared_distance(points.row(i), {centroids.data() + labels[i] * points.dim, points.dim});
      if (d >= farthest) {
        farthest = d;
        donor = i;
      }
    }
    if (donor == points.count) throw Error(ErrorCode::kInternal, "no point available to refill an empty cluster");
    --counts[labels[donor]];
    labels[donor] = empty;
    ++counts[empty];
    moved[donor] = true;
  }
}

}  // namespace

ClusterAssignment kmeans_from(const CandidateBatch& batch, std::span<const std::size_t> initial,
                              const ClusterConfig& config) {
  config.validate();
  const std::size_t k = batch.size();
  const std::size_t num_clusters = config.num_clusters;
  if (k < num_clusters) {
    throw Error(ErrorCode::kInsufficientCandidates,
                std::to_string(k) + " candidates cannot form " + std::to_string(num_clusters) + " clusters");
  }
  if (initial.size() != num_clusters) {
    throw Error(ErrorCode::kInvalidConfig, "expected one initial index per cluster");
  }
  const Points points = clustering_points(batch, config.metric);

  std::vector<double> centroids(num_clusters * points.dim);
  for (std::size_t c = 0; c < num_clusters; ++c) {
    if (initial[c] >= k) throw Error(ErrorCode::kInvalidConfig, "initial centroid index out of range");
    const auto x = points.row(initial[c]);
    std::copy(x.begin(), x.end(), centroids.begin() + static_cast<std::ptrdiff_t>(c * points.dim));
  }

  ClusterAssignment result;
  result.num_clusters = num_clusters;
  std::vector<std::size_t> labels(k, 0);
  for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
    for (std::size_t i = 0; i < k; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < num_clusters; ++c) {
        const double d = squared_distance(points.row(i), {centroids.data() + c * points.dim, points.dim});
        if (d < best) {
          best = d;
          labels[i] = c;
        }
      }
    }
    repair_empty_clusters(points, centroids, labels, num_clusters);
    ++result.iterations_run;
    if (iter > 0 && labels == result.labels) {
      result.converged = true;
      break;
    }
    result.labels = labels;
    centroids = centroid_means(points, labels, num_clusters);
    result.objective_history.push_back(objective(points, labels, num_clusters));
  }
  return result;
}

ClusterAssignment kmeans(const CandidateBatch& batch, const ClusterConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  const auto initial = init_centroids(batch.size(), config.num_clusters, rng);
  return kmeans_from(batch, initial, config);
}

std::size_t largest_cluster(const ClusterAssignment& assignment, const DistanceMatrix& dm) {
  if (assignment.labels.size() != dm.size()) {
    throw Error(ErrorCode::kInternal, "assignment and distance matrix disagree on K");
  }
  const std::size_t num_clusters = assignment.num_clusters;
  std::vector<std::size_t> sizes(num_clusters, 0);
  std::vector<double> spread(num_clusters, 0.0);
  std::vector<std::size_t> first(num_clusters, dm.size());
  for (std::size_t i = 0; i < dm.size(); ++i) {
    const std::size_t c = assignment.labels[i];
    ++sizes[c];
    first[c] = std::min(first[c], i);
    for (std::size_t j = i + 1; j < dm.size(); ++j) {
      if (assignment.labels[j] == c) spread[c] += dm(i, j);
    }
  }
  std::size_t best = num_clusters;
  for (std::size_t c = 0; c < num_clusters; ++c) {
    if (sizes[c] == 0) continue;
    if (best == num_clusters || sizes[c] > sizes[best] ||
        (sizes[c] == sizes[best] &&
         (strictly_less_sum(spread[c], spread[best]) ||
          (!strictly_less_sum(spread[best], spread[c]) && first[c] < first[best])))) {
      best = c;
    }
  }
  if (best == num_clusters) throw Error(ErrorCode::kInternal, "assignment has no nonempty cluster");
  return best;
}

std::size_t cluster_medoid(const DistanceMatrix& dm, std::span<const std::size_t> members) {
  if (members.empty()) throw Error(ErrorCode::kInternal, "cluster medoid of an empty member set");
  std::size_t best = members.front();
  double best_sum = std::numeric_limits<double>::infinity();
  for (auto i : members) {
    double sum = 0.0;
    for (auto j : members) sum += dm(i, j);
    if (best_sum == std::numeric_limits<double>::infinity() || strictly_less_sum(sum, best_sum) ||
        (!strictly_less_sum(best_sum, sum) && i < best)) {
      best = i;
      best_sum = sum;
    }
  }
  return best;
}

double within_cluster_ss(const CandidateBatch& batch, std::span<const std::size_t> labels, std::size_t num_clusters) {
  const Points points = clustering_points(batch, Metric::kEuclidean);
  return objective(points, {labels.begin(), labels.end()}, num_clusters);
}

}  // namespace keystone
