#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace keystone::oracle {

std::size_t brute_medoid(const Points& points) {
  std::size_t best = 0;
  double best_sum = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < points.size(); ++j) {
      double sq = 0.0;
      for (std::size_t d = 0; d < points[i].size(); ++d) {
        sq += (points[i][d] - points[j][d]) * (points[i][d] - points[j][d]);
      }
      sum += std::sqrt(sq);
    }
    // Same tie convention as the library: sums within 1e-12 relative are equal.
    if (i == 0 || sum < best_sum - 1e-12 * std::abs(best_sum)) {
      best_sum = sum;
      best = i;
    }
  }
  return best;
}

double partition_objective(const Points& points, const std::vector<int>& side) {
  double total = 0.0;
  for (int s = 0; s < 2; ++s) {
    std::vector<double> mean(points.empty() ? 0 : points[0].size(), 0.0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (side[i] != s) continue;
      for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += points[i][d];
      ++n;
    }
    if (n == 0) continue;
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (side[i] != s) continue;
      for (std::size_t d = 0; d < mean.size(); ++d) total += (points[i][d] - mean[d]) * (points[i][d] - mean[d]);
    }
  }
  return total;
}

TwoPartition best_two_partition(const Points& points) {
  const std::size_t k = points.size();
  if (k < 2 || k > 14) throw std::out_of_range("best_two_partition needs 2 <= K <= 14");
  TwoPartition best;
  best.objective = std::numeric_limits<double>::infinity();
  // Point 0 stays on side 0; mask bit j puts point j+1 on side 1.
  const unsigned limit = 1u << (k - 1);
  for (unsigned mask = 1; mask < limit; ++mask) {
    std::vector<int> side(k, 0);
    for (std::size_t j = 1; j < k; ++j) side[j] = (mask >> (j - 1)) & 1u;
    const double obj = partition_objective(points, side);
    if (obj < best.objective) {
      best.objective = obj;
      best.side = side;
    }
  }
  return best;
}

bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) return false;
  std::map<std::size_t, std::size_t> forward, backward;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [f, fnew] = forward.emplace(a[i], b[i]);
    auto [r, rnew] = backward.emplace(b[i], a[i]);
    if (f->second != b[i] || r->second != a[i]) return false;
  }
  return true;
}

double binomial_majority(std::size_t k, double p) { return binomial_at_least(k, k / 2 + 1, p); }

double binomial_at_least(std::size_t k, std::size_t m, double p) {
  double total = 0.0;
  for (std::size_t s = m; s <= k; ++s) {
    // C(k, s) via lgamma keeps this independent of any integer overflow.
    const double log_choose = std::lgamma(static_cast<double>(k) + 1) - std::lgamma(static_cast<double>(s) + 1) -
                              std::lgamma(static_cast<double>(k - s) + 1);
    const double term = std::exp(log_choose) * std::pow(p, static_cast<double>(s)) *
                        std::pow(1.0 - p, static_cast<double>(k - s));
    total += term;
  }
  return total;
}

double episode_closed_form(const std::vector<double>& per_round_success) {
  double product = 1.0;
  for (double p : per_round_success) product *= p;
  return product;
}

double binomial_standard_error(double p, std::size_t n) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

OracleReport compare(std::string case_id, double oracle_value, double candidate_value, double tolerance) {
  return {std::move(case_id), oracle_value, candidate_value, tolerance,
          std::abs(oracle_value - candidate_value) <= tolerance};
}

}  // namespace keystone::oracle
