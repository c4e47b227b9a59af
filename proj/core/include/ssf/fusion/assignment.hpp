#pragma once

#include <vector>

namespace ssf::fusion {

/// Maximum-weight assignment over a rows x cols utility matrix (entries may be
/// any reals; pairs left unmatched contribute 0). Returns row -> col, -1 for
/// unmatched rows. Exact O(n^3) Kuhn-Munkres on the zero-padded square matrix.
std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& utility);

/// Best achievable matching score of the given utility matrix.
double max_weight_score(const std::vector<std::vector<double>>& utility);

}  // namespace ssf::fusion
