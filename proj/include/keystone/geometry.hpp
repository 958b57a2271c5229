#pragma once

// Action chunks, candidate batches and the distance primitives the selector
// is built from. Everything here is a pure function of immutable values.

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "keystone/error.hpp"

namespace keystone {

enum class Metric { kEuclidean, kCosine };

std::string_view to_string(Metric metric) noexcept;
/// Accepts "euclidean"/"l2" and "cosine"; throws kInvalidConfig otherwise.
Metric parse_metric(std::string_view name);

/// A T x A block of finite commands, stored step-major.
class ActionChunk {
 public:
  ActionChunk(std::size_t steps, std::size_t dims, std::vector<double> values);
  /// Nested rows; every row must have the same length.
  static ActionChunk from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t steps() const noexcept { return steps_; }
  std::size_t dims() const noexcept { return dims_; }
  std::span<const double> values() const noexcept { return values_; }
  double at(std::size_t step, std::size_t dim) const { return values_.at(step * dims_ + dim); }

  friend bool operator==(const ActionChunk&, const ActionChunk&) = default;

 private:
  std::size_t steps_;
  std::size_t dims_;
  std::vector<double> values_;
};

/// Row-major (step, then dimension) flattening; length steps * dims.
std::vector<double> flatten(const ActionChunk& chunk);

/// K >= 1 chunks sharing one (T, A) shape, held as a contiguous K x D block.
class CandidateBatch {
 public:
  /// Validates shape and finiteness; reports the first offending candidate.
  CandidateBatch(std::size_t count, std::size_t steps, std::size_t dims, std::vector<double> values);
  explicit CandidateBatch(const std::vector<ActionChunk>& chunks);

  std::size_t size() const noexcept { return count_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t dims() const noexcept { return dims_; }
  /// Flattened dimension D = T * A.
  std::size_t dimension() const noexcept { return steps_ * dims_; }

  /// Flattened view of candidate i.
  std::span<const double> flat(std::size_t i) const noexcept {
    return {values_.data() + i * dimension(), dimension()};
  }
  ActionChunk chunk(std::size_t i) const;
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const CandidateBatch&, const CandidateBatch&) = default;

 private:
  std::size_t count_;
  std::size_t steps_;
  std::size_t dims_;
  std::vector<double> values_;
};

/// Symmetric K x K matrix of pairwise distances with a zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix(std::size_t size, Metric metric, std::vector<double> entries)
      : size_(size), metric_(metric), entries_(std::move(entries)) {}

  std::size_t size() const noexcept { return size_; }
  Metric metric() const noexcept { return metric_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * size_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {entries_.data() + i * size_, size_}; }

 private:
  std::size_t size_;
  Metric metric_;
  std::vector<double> entries_;
};

/// Accumulated in four interleaved lanes so the loop vectorizes.
double squared_euclidean(std::span<const double> a, std::span<const double> b) noexcept;
double euclidean_distance(std::span<const double> a, std::span<const double> b) noexcept;
/// 1 - cos(a, b); a zero vector is orthogonal to any nonzero vector and
/// identical to another zero vector.
double cosine_distance(std::span<const double> a, std::span<const double> b) noexcept;

DistanceMatrix pairwise_distances(const CandidateBatch& batch, Metric metric = Metric::kEuclidean);

/// Distance sums within this relative gap count as tied. Sums that are equal
/// in exact arithmetic (e.g. the two middle points of an even 1-D batch) can
/// otherwise differ by an ulp depending on summation order.
inline constexpr double kSumTieTolerance = 1e-12;
bool strictly_less_sum(double candidate, double incumbent) noexcept;

/// argmin of row sums; ties go to the smallest index.
std::size_t global_medoid(const DistanceMatrix& dm);

/// Median of the strict upper triangle (mean of the middle pair for an even
/// count). Requires K >= 2, otherwise throws kDegenerateInput.
double median_pairwise(const DistanceMatrix& dm);

struct GuardScore {
  double score;
  std::size_t medoid;
};

/// s = |mean - x_medoid|_2 / (median_pairwise + eps). The numerator is always
/// euclidean; only the denominator follows dm's metric.
GuardScore unimodality_score(const CandidateBatch& batch, const DistanceMatrix& dm, double eps);

}  // namespace keystone
