#include "keystone/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace keystone {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kNonFiniteValue: return "non_finite_value";
    case ErrorCode::kEmptyBatch: return "empty_batch";
    case ErrorCode::kDegenerateInput: return "degenerate_input";
    case ErrorCode::kInsufficientCandidates: return "insufficient_candidates";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kParseError: return "parse_error";
    case ErrorCode::kRowCountMismatch: return "row_count_mismatch";
    case ErrorCode::kIoError: return "io_error";
    case ErrorCode::kInternal: return "internal";
  }
  return "internal";
}

std::string_view to_string(Metric metric) noexcept {
  return metric == Metric::kCosine ? "cosine" : "euclidean";
}

Metric parse_metric(std::string_view name) {
  if (name == "euclidean" || name == "l2") return Metric::kEuclidean;
  if (name == "cosine") return Metric::kCosine;
  throw Error(ErrorCode::kInvalidConfig, "unknown metric '" + std::string(name) + "'");
}

namespace {

void require_finite(std::span<const double> values, std::size_t stride, std::optional<std::size_t> candidate_base) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      const std::size_t candidate = candidate_base.value_or(0) + (stride == 0 ? 0 : i / stride);
      throw Error(ErrorCode::kNonFiniteValue,
                  "candidate " + std::to_string(candidate) + " contains a non-finite value", candidate);
    }
  }
}

}  // namespace

ActionChunk::ActionChunk(std::size_t steps, std::size_t dims, std::vector<double> values)
    : steps_(steps), dims_(dims), values_(std::move(values)) {
  if (steps_ == 0 || dims_ == 0) {
    throw Error(ErrorCode::kShapeMismatch, "action chunk needs at least one step and one dimension");
  }
  if (values_.size() != steps_ * dims_) {
    throw Error(ErrorCode::kShapeMismatch, "action chunk holds " + std::to_string(values_.size()) +
                                               " values, expected " + std::to_string(steps_ * dims_));
  }
  require_finite(values_, 0, std::nullopt);
}

ActionChunk ActionChunk::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t dims = rows.empty() ? 0 : rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * dims);
  for (const auto& row : rows) {
    if (row.size() != dims) throw Error(ErrorCode::kShapeMismatch, "ragged action chunk rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return ActionChunk(rows.size(), dims, std::move(values));
}

std::vector<double> flatten(const ActionChunk& chunk) {
  const auto v = chunk.values();
  return {v.begin(), v.end()};
}

CandidateBatch::CandidateBatch(std::size_t count, std::size_t steps, std::size_t dims, std::vector<double> values)
    : count_(count), steps_(steps), dims_(dims), values_(std::move(values)) {
  if (count_ == 0) throw Error(ErrorCode::kEmptyBatch, "candidate batch is empty");
  if (steps_ == 0 || dims_ == 0) {
    throw Error(ErrorCode::kShapeMismatch, "candidates need at least one step and one dimension");
  }
  if (values_.size() != count_ * steps_ * dims_) {
    throw Error(ErrorCode::kShapeMismatch, "batch holds " + std::to_string(values_.size()) + " values, expected " +
                                               std::to_string(count_ * steps_ * dims_));
  }
  require_finite(values_, steps_ * dims_, 0);
}

CandidateBatch::CandidateBatch(const std::vector<ActionChunk>& chunks)
    : count_(chunks.size()), steps_(0), dims_(0) {
  if (chunks.empty()) throw Error(ErrorCode::kEmptyBatch, "candidate batch is empty");
  steps_ = chunks.front().steps();
  dims_ = chunks.front().dims();
  values_.reserve(count_ * steps_ * dims_);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    if (chunks[i].steps() != steps_ || chunks[i].dims() != dims_) {
      throw Error(ErrorCode::kShapeMismatch,
                  "candidate " + std::to_string(i) + " has shape (" + std::to_string(chunks[i].steps()) + ", " +
                      std::to_string(chunks[i].dims()) + "), expected (" + std::to_string(steps_) + ", " +
                      std::to_string(dims_) + ")",
                  i);
    }
    const auto v = chunks[i].values();
    values_.insert(values_.end(), v.begin(), v.end());
  }
}

ActionChunk CandidateBatch::chunk(std::size_t i) const {
  const auto v = flat(i);
  return ActionChunk(steps_, dims_, {v.begin(), v.end()});
}

double squared_euclidean(std::span<const double> a, std::span<const double> b) noexcept {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t n = a.size();
  std::size_t d = 0;
  for (; d + 4 <= n; d += 4) {
    for (std::size_t l = 0; l < 4; ++l) {
      const double diff = a[d + l] - b[d + l];
      lane[l] += diff * diff;
    }
  }
  for (; d < n; ++d) {
    const double diff = a[d] - b[d];
    lane[0] += diff * diff;
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) noexcept {
  return std::sqrt(squared_euclidean(a, b));
}

double cosine_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    dot += a[d] * b[d];
    na += a[d] * a[d];
    nb += b[d] * b[d];
  }
  if (na == 0.0 || nb == 0.0) return (na == 0.0 && nb == 0.0) ? 0.0 : 1.0;
  // Rounding can push |cos| slightly past 1.
  const double cos = std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
  return 1.0 - cos;
}

DistanceMatrix pairwise_distances(const CandidateBatch& batch, Metric metric) {
  const std::size_t k = batch.size();
  std::vector<double> entries(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double d = metric == Metric::kCosine ? cosine_distance(batch.flat(i), batch.flat(j))
                                                 : euclidean_distance(batch.flat(i), batch.flat(j));
      entries[i * k + j] = d;
      entries[j * k + i] = d;
    }
  }
  return DistanceMatrix(k, metric, std::move(entries));
}

bool strictly_less_sum(double candidate, double incumbent) noexcept {
  return candidate < incumbent - kSumTieTolerance * std::abs(incumbent);
}

std::size_t global_medoid(const DistanceMatrix& dm) {
  std::size_t best = 0;
  double best_sum = 0.0;
  for (std::size_t i = 0; i < dm.size(); ++i) {
    const auto row = dm.row(i);
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    if (i == 0 || strictly_less_sum(sum, best_sum)) {
      best = i;
      best_sum = sum;
    }
  }
  return best;
}

double median_pairwise(const DistanceMatrix& dm) {
  const std::size_t k = dm.size();
  if (k < 2) throw Error(ErrorCode::kDegenerateInput, "median pairwise distance needs at least two candidates");
  std::vector<double> upper;
  upper.reserve(k * (k - 1) / 2);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) upper.push_back(dm(i, j));
  }
  const std::size_t mid = upper.size() / 2;
  std::nth_element(upper.begin(), upper.begin() + static_cast<std::ptrdiff_t>(mid), upper.end());
  const double hi = upper[mid];
  if (upper.size() % 2 == 1) return hi;
  const double lo = *std::max_element(upper.begin(), upper.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

GuardScore unimodality_score(const CandidateBatch& batch, const DistanceMatrix& dm, double eps) {
  if (dm.size() != batch.size()) {
    throw Error(ErrorCode::kShapeMismatch, "distance matrix does not match the batch");
  }
  const double median = median_pairwise(dm);
  const std::size_t medoid = global_medoid(dm);
  const std::size_t dim = batch.dimension();
  std::vector<double> mean(dim, 0.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto x = batch.flat(i);
    for (std::size_t d = 0; d < dim; ++d) mean[d] += x[d];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& m : mean) m *= inv;
  const double offset = euclidean_distance(mean, batch.flat(medoid));
  return {offset / (median + eps), medoid};
}

}  // namespace keystone
