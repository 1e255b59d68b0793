#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bgw/offspring.hpp"
#include "bgw/rng.hpp"

namespace bgw {

/// Ordered rooted tree in depth-first (Neveu) order, vertex 0 is the root.
///
/// Heights count edges: a leaf has subtree_height 0 and the root has depth 0.
struct AnnotatedTree {
  static constexpr std::int32_t kNoParent = -1;

  std::int64_t n = 0;
  std::vector<std::int32_t> parent;  // parent[0] == kNoParent
  std::vector<std::int32_t> degree;
  std::vector<std::int32_t> subtree_size;
  std::vector<std::int32_t> subtree_height;
  std::vector<std::int32_t> depth;
  std::int32_t height = 0;

  std::int64_t internal_count() const;
  std::int64_t leaf_count() const { return n - internal_count(); }

  /// Checks every structural invariant; throws std::logic_error on the first violation.
  void validate() const;
};

class SamplerBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SamplerOptions {
  /// Budget is multiplier * ceil(b_n / (span * g(0))) rejections.
  double attempt_multiplier = 10.0;
  /// Hard override of the budget when > 0.
  std::int64_t max_attempts = 0;
};

struct SamplerStats {
  std::int64_t attempts = 0;
};

/// Expected number of attempts b_n / (span g(0)) from the local limit theorem.
double expected_attempts(const OffspringModel& model, std::int64_t n);
std::int64_t attempt_budget(const OffspringModel& model, std::int64_t n, const SamplerOptions& options);

/// n i.i.d. offspring draws conditioned on summing to n - 1, in uniformly random order.
std::vector<std::int32_t> sample_degree_sequence(const OffspringModel& model, std::int64_t n, Rng& rng,
                                                 const SamplerOptions& options = {},
                                                 SamplerStats* stats = nullptr);

/// The unique r such that degrees rotated left by r is a Lukasiewicz sequence.
std::size_t cycle_rotate(std::span<const std::int32_t> degrees);

/// True iff the partial sums of (d_i - 1) stay >= 0 before the last step and end at -1.
bool is_lukasiewicz(std::span<const std::int32_t> degrees);

/// Builds and annotates the tree coded by a Lukasiewicz sequence; O(n), no recursion.
AnnotatedTree build_and_annotate(std::span<const std::int32_t> degrees);

/// Exact sample of a BGW(model) tree conditioned to have n vertices.
AnnotatedTree sample_conditioned(const OffspringModel& model, std::int64_t n, Rng& rng,
                                 const SamplerOptions& options = {}, SamplerStats* stats = nullptr);

/// CSV dump "index,parent,degree,depth,subtree_size,subtree_height".
void write_tree_csv(std::ostream& out, const AnnotatedTree& tree);

}  // namespace bgw
