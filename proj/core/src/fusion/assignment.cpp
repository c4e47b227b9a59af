#include "ssf/fusion/assignment.hpp"

#include <algorithm>
#include <limits>

namespace ssf::fusion {

namespace {

// Potential-based Kuhn-Munkres, minimization over a square cost matrix.
std::vector<int> hungarian_min(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = match[j0], j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (match[j] > 0) row_to_col[match[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& utility) {
  const int rows = static_cast<int>(utility.size());
  const int cols = rows == 0 ? 0 : static_cast<int>(utility[0].size());
  if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);

  // Zero-padded square; a dummy column/row stands for "unmatched".
  const int n = std::max(rows, cols);
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) cost[i][j] = -std::max(utility[i][j], 0.0);

  std::vector<int> assignment = hungarian_min(cost);
  std::vector<int> result(rows, -1);
  for (int i = 0; i < rows; ++i) {
    int j = assignment[i];
    if (j >= 0 && j < cols && utility[i][j] > 0) result[i] = j;
  }
  return result;
}

double max_weight_score(const std::vector<std::vector<double>>& utility) {
  std::vector<int> assignment = max_weight_assignment(utility);
  double score = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] >= 0) score += utility[i][assignment[i]];
  return score;
}

}  // namespace ssf::fusion
