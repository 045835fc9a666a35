#pragma once

#include <cstdint>
#include <vector>

namespace ionqec::matching {

// Exact minimum-weight perfect matching on a complete graph with an even
// number of nodes. Dense weights, row-major. Returns mate[] with mate[i] = j.
// Small instances go through an exact subset DP; larger ones through the
// O(n^3) blossom algorithm on integer-scaled weights.
std::vector<int> min_weight_perfect_matching(const std::vector<double>& w, int n);

// Exact DP over subsets, n <= 20 (intended for n <= 12). Used as the oracle
// in tests and as the fast path for small defect sets.
std::vector<int> min_weight_matching_dp(const std::vector<double>& w, int n);

// Maximum-weight perfect matching with integer weights (blossom, O(n^3)).
// Exposed for tests. Weights must be non-negative.
std::vector<int> max_weight_perfect_matching_int(const std::vector<int64_t>& w, int n);

}  // namespace ionqec::matching
