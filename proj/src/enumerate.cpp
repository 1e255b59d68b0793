#include "bgw/enumerate.hpp"

#include <stdexcept>

namespace bgw {

void enumerate_trees(const OffspringModel& model, std::int64_t n,
                     const std::function<void(std::span<const std::int32_t>, double)>& visit) {
  if (n < 1) throw std::invalid_argument("enumerate_trees: n must be >= 1");
  std::vector<std::int32_t> degrees(static_cast<std::size_t>(n));
  // open = number of vertices still to be placed for the walk to stay valid.
  std::function<void(std::int64_t, std::int64_t, double)> extend = [&](std::int64_t pos, std::int64_t open,
                                                                       double weight) {
    if (pos == n) {
      if (open == 0) visit(degrees, weight);
      return;
    }
    const std::int64_t left = n - pos;
    // Vertex pos fills one open slot and opens k more; the walk must close exactly at n.
    for (std::int64_t k = 0; open - 1 + k <= left - 1; ++k) {
      if (open - 1 + k == 0 && pos + 1 < n) continue;
      const double p = model.pmf(k);
      if (p <= 0.0) continue;
      degrees[static_cast<std::size_t>(pos)] = static_cast<std::int32_t>(k);
      extend(pos + 1, open - 1 + k, weight * p);
    }
  };
  extend(0, 1, 1.0);
}

double enumerated_size_probability(const OffspringModel& model, std::int64_t n) {
  double total = 0.0;
  enumerate_trees(model, n, [&total](std::span<const std::int32_t>, double w) { total += w; });
  return total;
}

namespace {

std::vector<double> truncated_product(const std::vector<double>& a, const std::vector<double>& b,
                                      std::size_t length) {
  std::vector<double> out(length, 0.0);
  for (std::size_t i = 0; i < length && i < a.size(); ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    const std::size_t limit = std::min(b.size(), length - i);
    double* dst = out.data() + i;
    const double* src = b.data();
    for (std::size_t j = 0; j < limit; ++j) dst[j] += ai * src[j];
  }
  return out;
}

}  // namespace

std::vector<double> walk_distribution(const OffspringModel& model, std::int64_t n, std::int64_t max_sum) {
  if (n < 0 || max_sum < 0) throw std::invalid_argument("walk_distribution: negative argument");
  const auto length = static_cast<std::size_t>(max_sum) + 1;
  std::vector<double> base(length);
  for (std::size_t k = 0; k < length; ++k) base[k] = model.pmf(static_cast<std::int64_t>(k));
  std::vector<double> result(length, 0.0);
  result[0] = 1.0;
  for (std::int64_t e = n; e > 0; e >>= 1) {
    if (e & 1) result = truncated_product(result, base, length);
    if (e > 1) base = truncated_product(base, base, length);
  }
  return result;
}

double prob_walk_hits(const OffspringModel& model, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("prob_walk_hits: n must be >= 1");
  if (!model.support_contains(n)) return 0.0;
  return walk_distribution(model, n, n - 1).back();
}

}  // namespace bgw
