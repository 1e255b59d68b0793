#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bgw/offspring.hpp"

namespace bgw {

/// Calls visit(degrees, weight) for every ordered tree with n vertices whose
/// degrees lie in the support of the model, in lexicographic order of the
/// Lukasiewicz sequence. weight = prod_v P(xi = k_v) = P(tau = t).
/// Exponential in n; intended for n <= 12.
void enumerate_trees(const OffspringModel& model, std::int64_t n,
                     const std::function<void(std::span<const std::int32_t>, double)>& visit);

/// P(|tau| = n) by summing the weights of all trees with n vertices.
double enumerated_size_probability(const OffspringModel& model, std::int64_t n);

/// P(S_n = k) for k = 0..max_sum, where S_n is a sum of n i.i.d. offspring
/// draws; exact iterated convolution by binary powering, O(max_sum^2 log n).
std::vector<double> walk_distribution(const OffspringModel& model, std::int64_t n, std::int64_t max_sum);

/// P(S_n = n - 1), which equals n P(|tau| = n).
double prob_walk_hits(const OffspringModel& model, std::int64_t n);

}  // namespace bgw
