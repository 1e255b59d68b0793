#include "bgw/tree.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "bgw/theory.hpp"

namespace bgw {

namespace {

// Below this many undecided draws the rest are drawn one by one from the tail.
constexpr std::int64_t kMinTailSwitch = 8;

}  // namespace

std::int64_t AnnotatedTree::internal_count() const {
  return std::count_if(degree.begin(), degree.end(), [](std::int32_t d) { return d > 0; });
}

void AnnotatedTree::validate() const {
  auto fail = [](const std::string& what) { throw std::logic_error("AnnotatedTree invariant violated: " + what); };
  const auto size = static_cast<std::size_t>(n);
  if (n < 1 || parent.size() != size || degree.size() != size || subtree_size.size() != size ||
      subtree_height.size() != size || depth.size() != size) {
    fail("array lengths");
  }
  if (parent[0] != kNoParent || depth[0] != 0) fail("root");
  std::int64_t degree_sum = 0;
  std::vector<std::int64_t> size_acc(size, 1);
  std::vector<std::int32_t> height_acc(size, 0);
  std::vector<std::int32_t> child_count(size, 0);
  std::int32_t max_depth = 0;
  for (std::size_t v = 0; v < size; ++v) degree_sum += degree[v];
  if (degree_sum != n - 1) fail("sum of degrees != n - 1");
  for (std::size_t v = size; v-- > 1;) {
    const std::int32_t p = parent[v];
    if (p < 0 || static_cast<std::size_t>(p) >= v) fail("parent must precede child in depth-first order");
    if (depth[v] != depth[p] + 1) fail("depth[child] != depth[parent] + 1");
    if (size_acc[v] != subtree_size[v]) fail("subtree_size mismatch at vertex " + std::to_string(v));
    if (height_acc[v] != subtree_height[v]) fail("subtree_height mismatch at vertex " + std::to_string(v));
    size_acc[p] += size_acc[v];
    height_acc[p] = std::max(height_acc[p], height_acc[v] + 1);
    ++child_count[p];
    max_depth = std::max(max_depth, depth[v]);
  }
  if (subtree_size[0] != n || size_acc[0] != n) fail("subtree_size[root] != n");
  if (height_acc[0] != subtree_height[0] || height != max_depth || height != subtree_height[0]) fail("height");
  for (std::size_t v = 0; v < size; ++v) {
    if (child_count[v] != degree[v]) fail("degree does not match child count");
    if ((degree[v] > 0) != (subtree_size[v] > 1)) fail("internal vertex characterization");
  }
}

double expected_attempts(const OffspringModel& model, std::int64_t n) {
  return model.normalizer(n) / (model.span() * theory::g0(model.gamma(), model.kappa()));
}

std::int64_t attempt_budget(const OffspringModel& model, std::int64_t n, const SamplerOptions& options) {
  if (options.max_attempts > 0) return options.max_attempts;
  const double budget = options.attempt_multiplier * std::ceil(expected_attempts(model, n));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(budget));
}

std::vector<std::int32_t> sample_degree_sequence(const OffspringModel& model, std::int64_t n, Rng& rng,
                                                 const SamplerOptions& options, SamplerStats* stats) {
  if (!model.support_contains(n)) {
    throw std::invalid_argument("sample_degree_sequence: n = " + std::to_string(n) +
                                " is outside the support of |tau|");
  }
  const std::int64_t target = n - 1;
  const std::int64_t budget = attempt_budget(model, n, options);
  const std::int64_t table = model.truncation_k();

  // Counts N_k of each offspring value are multinomial; they are drawn as a
  // chain of binomials and the configuration is accepted iff sum k N_k = n - 1.
  std::vector<std::pair<std::int64_t, std::int64_t>> counts;
  std::vector<std::int64_t> singles;
  for (std::int64_t attempt = 1; attempt <= budget; ++attempt) {
    counts.clear();
    singles.clear();
    std::int64_t remaining = n;
    std::int64_t sum = 0;
    bool rejected = false;
    for (std::int64_t k = 0; remaining > 0; ++k) {
      if (sum + remaining * k > target) {
        rejected = true;
        break;
      }
      if (k >= table || remaining <= std::max(kMinTailSwitch, k)) {
        const double above = model.tail(k - 1);
        for (std::int64_t i = 0; i < remaining && !rejected; ++i) {
          const std::int64_t value = model.tail_quantile(k, rng.uniform() * above);
          sum += value;
          singles.push_back(value);
          rejected = sum > target;
        }
        remaining = 0;
        break;
      }
      const double p = model.pmf(k) / model.tail(k - 1);
      std::int64_t drawn = remaining;
      if (p < 1.0) drawn = std::binomial_distribution<std::int64_t>(remaining, p)(rng);
      if (drawn > 0) {
        counts.emplace_back(k, drawn);
        sum += k * drawn;
        remaining -= drawn;
      }
    }
    if (rejected || sum != target) continue;

    if (stats) stats->attempts = attempt;
    std::vector<std::int32_t> degrees;
    degrees.reserve(static_cast<std::size_t>(n));
    for (const auto& [value, count] : counts) degrees.insert(degrees.end(), count, static_cast<std::int32_t>(value));
    for (std::int64_t value : singles) degrees.push_back(static_cast<std::int32_t>(value));
    std::shuffle(degrees.begin(), degrees.end(), rng);
    return degrees;
  }
  if (stats) stats->attempts = budget;
  throw SamplerBudgetExceeded("sample_degree_sequence: no accepted sequence for n = " + std::to_string(n) +
                              " after " + std::to_string(budget) + " attempts (expected acceptance rate " +
                              std::to_string(1.0 / expected_attempts(model, n)) + ")");
}

std::size_t cycle_rotate(std::span<const std::int32_t> degrees) {
  std::int64_t walk = 0;
  std::int64_t lowest = 1;
  std::size_t argmin = 0;
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    walk += degrees[i] - 1;
    if (walk < lowest) {
      lowest = walk;
      argmin = i;
    }
  }
  if (walk != -1) throw std::invalid_argument("cycle_rotate: degrees must sum to n - 1");
  return (argmin + 1) % degrees.size();
}

bool is_lukasiewicz(std::span<const std::int32_t> degrees) {
  if (degrees.empty()) return false;
  std::int64_t walk = 0;
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    if (degrees[i] < 0) return false;
    walk += degrees[i] - 1;
    if (walk < 0 && i + 1 < degrees.size()) return false;
  }
  return walk == -1;
}

AnnotatedTree build_and_annotate(std::span<const std::int32_t> degrees) {
  if (!is_lukasiewicz(degrees)) throw std::invalid_argument("build_and_annotate: not a Lukasiewicz sequence");
  AnnotatedTree t;
  t.n = static_cast<std::int64_t>(degrees.size());
  const auto n = degrees.size();
  t.degree.assign(degrees.begin(), degrees.end());
  t.parent.assign(n, AnnotatedTree::kNoParent);
  t.depth.assign(n, 0);
  t.subtree_size.assign(n, 1);
  t.subtree_height.assign(n, 0);

  std::vector<std::int32_t> open;  // vertices still waiting for children
  std::vector<std::int32_t> slots(degrees.begin(), degrees.end());
  if (degrees[0] > 0) open.push_back(0);
  for (std::size_t v = 1; v < n; ++v) {
    const std::int32_t p = open.back();
    t.parent[v] = p;
    t.depth[v] = t.depth[p] + 1;
    if (--slots[p] == 0) open.pop_back();
    if (degrees[v] > 0) open.push_back(static_cast<std::int32_t>(v));
  }
  for (std::size_t v = n; v-- > 1;) {
    const std::int32_t p = t.parent[v];
    t.subtree_size[p] += t.subtree_size[v];
    t.subtree_height[p] = std::max(t.subtree_height[p], t.subtree_height[v] + 1);
  }
  t.height = t.subtree_height[0];
  return t;
}

AnnotatedTree sample_conditioned(const OffspringModel& model, std::int64_t n, Rng& rng,
                                 const SamplerOptions& options, SamplerStats* stats) {
  std::vector<std::int32_t> degrees = sample_degree_sequence(model, n, rng, options, stats);
  std::rotate(degrees.begin(), degrees.begin() + static_cast<std::ptrdiff_t>(cycle_rotate(degrees)),
              degrees.end());
  AnnotatedTree tree = build_and_annotate(degrees);
#ifndef NDEBUG
  tree.validate();
#endif
  return tree;
}

void write_tree_csv(std::ostream& out, const AnnotatedTree& tree) {
  out << "index,parent,degree,depth,subtree_size,subtree_height\n";
  for (std::int64_t v = 0; v < tree.n; ++v) {
    out << v << ',' << tree.parent[v] << ',' << tree.degree[v] << ',' << tree.depth[v] << ','
        << tree.subtree_size[v] << ',' << tree.subtree_height[v] << '\n';
  }
}

}  // namespace bgw
