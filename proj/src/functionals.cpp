#include "bgw/functionals.hpp"

#include <cmath>

namespace bgw {

TollFunction TollFunction::power_mass_height(double alpha, double beta) {
  return {Kind::PowerMassHeight, alpha, beta, "x^" + std::to_string(alpha) + " u^" + std::to_string(beta)};
}

TollFunction TollFunction::power_log_mass(double alpha) {
  return {Kind::PowerLogMass, alpha, 0.0, "|log x| x^" + std::to_string(alpha)};
}

TollFunction TollFunction::inverse_height() { return {Kind::InverseHeight, 0.0, -1.0, "1/u"}; }

TollFunction TollFunction::indicator_internal() { return {Kind::Indicator, 0.0, 0.0, "1{size>1}"}; }

TollFunction TollFunction::custom(Callable f, std::string name) {
  return {Kind::Custom, 0.0, 0.0, std::move(name), std::move(f)};
}

double TollFunction::operator()(double mass, double height) const {
  switch (kind_) {
    case Kind::PowerMassHeight: {
      // std::pow already gives 0^0 = 1.
      const double m = alpha_ == 0.0 ? 1.0 : std::pow(mass, alpha_);
      const double h = beta_ == 0.0 ? 1.0 : std::pow(height, beta_);
      return m * h;
    }
    case Kind::PowerLogMass:
      return std::fabs(std::log(mass)) * std::pow(mass, alpha_);
    case Kind::InverseHeight:
      return 1.0 / height;
    case Kind::Indicator:
      return height > 0.0 ? 1.0 : 0.0;
    case Kind::Custom:
      return custom_(mass, height);
  }
  return 0.0;
}

double additive_functional(const AnnotatedTree& tree, const std::function<double(const SubtreeStats&)>& toll) {
  CompensatedSum sum;
  for (std::int64_t v = 0; v < tree.n; ++v) {
    const double value =
        toll({v, tree.subtree_size[v], tree.subtree_height[v], tree.degree[v], tree.depth[v]});
    if (!std::isfinite(value)) {
      throw TollNotFinite("additive_functional: toll is not finite at vertex " + std::to_string(v), v);
    }
    sum.add(value);
  }
  return sum.value();
}

FunctionalValue a_measure(const AnnotatedTree& tree, const OffspringModel& model, const TollFunction& toll,
                          bool internal_only) {
  const double n = static_cast<double>(tree.n);
  const double bn = model.normalizer(tree.n);
  const double height_scale = bn / n;
  CompensatedSum sum;
  for (std::int64_t v = 0; v < tree.n; ++v) {
    if (internal_only && tree.degree[v] == 0) continue;
    const double size = tree.subtree_size[v];
    const double value = toll(size / n, height_scale * tree.subtree_height[v]);
    if (!std::isfinite(value)) {
      throw TollNotFinite("a_measure: toll '" + toll.name() + "' is not finite at vertex " + std::to_string(v) +
                              (tree.degree[v] == 0 ? " (a leaf; restrict to internal vertices)" : ""),
                          v);
    }
    sum.add(size * value);
  }
  return {bn / (n * n) * sum.value(), tree.n, 1.0, -2.0, internal_only};
}

FunctionalValue rescaled_theorem1_sum(const AnnotatedTree& tree, const OffspringModel& model, double alpha_prime,
                                      double beta) {
  const double n = static_cast<double>(tree.n);
  const double bn = model.normalizer(tree.n);
  CompensatedSum sum;
  for (std::int64_t v = 0; v < tree.n; ++v) {
    if (tree.degree[v] == 0) continue;
    const double mass = alpha_prime == 0.0 ? 1.0 : std::pow(static_cast<double>(tree.subtree_size[v]), alpha_prime);
    const double height = beta == 0.0 ? 1.0 : std::pow(static_cast<double>(tree.subtree_height[v]), beta);
    sum.add(mass * height);
  }
  const double scale = std::pow(bn, 1.0 + beta) / std::pow(n, 1.0 + alpha_prime + beta);
  return {scale * sum.value(), tree.n, 1.0 + beta, -(1.0 + alpha_prime + beta), true};
}

double b1_index(const AnnotatedTree& tree) {
  CompensatedSum sum;
  for (std::int64_t v = 1; v < tree.n; ++v) {
    if (tree.degree[v] > 0) sum.add(1.0 / tree.subtree_height[v]);
  }
  return sum.value();
}

TvGapCheck tv_gap_bound_check(const AnnotatedTree& tree, const OffspringModel& model) {
  const double n = static_cast<double>(tree.n);
  const double a = model.normalizer(tree.n) / n;
  const double gap = 0.5 * (a / n) * static_cast<double>(tree.leaf_count());
  const double bound = 0.5 * a;
  // #leaves <= n, compared in integers so the boundary case n = 1 is exact.
  return {gap, bound, tree.leaf_count() <= tree.n};
}

bool mass_bound_check(const AnnotatedTree& tree, const OffspringModel&) {
  // Both inequalities share the positive factor b_n / n^2; compare integer sums.
  std::int64_t internal = 0;
  std::int64_t all = 0;
  for (std::int64_t v = 0; v < tree.n; ++v) {
    all += tree.subtree_size[v];
    if (tree.degree[v] > 0) internal += tree.subtree_size[v];
  }
  return internal <= tree.n * tree.height && all <= tree.n * (tree.height + std::int64_t{1});
}

}  // namespace bgw
