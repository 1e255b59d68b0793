#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "bgw/enumerate.hpp"
#include "bgw/excursion.hpp"
#include "bgw/functionals.hpp"
#include "bgw/offspring.hpp"
#include "bgw/theory.hpp"
#include "bgw/tree.hpp"
#include "cli.hpp"

namespace bgw::cli {

namespace {

constexpr double kPi = std::numbers::pi;

class Suite {
 public:
  explicit Suite(std::ostream& out) : out_(out) {}

  void near(const std::string& name, double got, double want, double tol) {
    const bool ok = std::fabs(got - want) <= tol * std::max(1.0, std::fabs(want));
    char buf[160];
    std::snprintf(buf, sizeof buf, " (got %.10g, want %.10g)", got, want);
    report(name, ok, buf);
  }

  void truth(const std::string& name, bool ok) { report(name, ok, ""); }

  void throws(const std::string& name, const std::function<void()>& f) {
    bool thrown = false;
    try {
      f();
    } catch (const std::exception&) {
      thrown = true;
    }
    report(name, thrown, thrown ? " (raised)" : " (no error raised)");
  }

  int failures() const { return failures_; }
  int total() const { return total_; }

 private:
  void report(const std::string& name, bool ok, const std::string& detail) {
    ++total_;
    if (!ok) ++failures_;
    out_ << (ok ? "PASS " : "FAIL ") << name << detail << '\n';
  }

  std::ostream& out_;
  int failures_ = 0;
  int total_ = 0;
};

Excursion triangle(std::size_t m) {
  std::vector<double> v(m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(m);
    v[i] = std::min(t, 1.0 - t);
  }
  v.front() = 0.0;
  v.back() = 0.0;
  return Excursion(v);
}

}  // namespace

int run_selftest(std::ostream& out) {
  Suite s(out);
  const auto catalan = OffspringModel::catalan();
  const auto geometric = OffspringModel::geometric();
  const auto st2 = OffspringModel::stable(2.0, 0.5);
  const auto st15 = OffspringModel::stable(1.5, 0.5);

  // offspring
  s.near("stable(2,1/2) pmf(0)", st2.pmf(0), 0.5, 1e-15);
  s.near("stable(2,1/2) pmf(1)", st2.pmf(1), 0.0, 1e-15);
  s.near("stable(2,1/2) pmf(2)", st2.pmf(2), 0.5, 1e-15);
  s.near("stable(1.5,1/2) pmf(0)", st15.pmf(0), 0.5, 1e-15);
  s.near("stable(1.5,1/2) pmf(1)", st15.pmf(1), 0.25, 1e-15);
  s.near("stable(1.5,1/2) pmf(2)", st15.pmf(2), 0.1875, 1e-15);
  // Mean via sum of tails, closing the series with c (-1)^{K-1} binom(gamma-2, K-1).
  {
    const std::int64_t K = 4096;
    double mean = 0.0;
    for (std::int64_t k = 0; k < K; ++k) mean += st15.tail(k);
    double binom = 1.0;  // binom(gamma-2, j) for j = K-1, built by the product formula
    const double a = 1.5 - 2.0;
    for (std::int64_t j = 0; j < K - 1; ++j) binom *= (a - static_cast<double>(j)) / static_cast<double>(j + 1);
    mean += 0.5 * (((K - 1) % 2 == 0) ? binom : -binom);
    s.near("stable(1.5,1/2) mean", mean, 1.0, 1e-10);
  }
  s.near("geometric sigma^2", geometric.sigma2(), 2.0, 1e-12);
  s.near("geometric b_100", geometric.normalizer(100), std::sqrt(200.0), 1e-12);
  s.near("catalan sigma^2", catalan.sigma2(), 1.0, 1e-15);
  s.throws("pmf {1:1} rejected", [] { OffspringModel::finite_variance({0.0, 1.0}); });
  s.near("stable(1.5) b_32", st15.normalizer(32), std::pow(32.0, 2.0 / 3.0), 1e-12);
  s.near("catalan b_9", catalan.normalizer(9), 3.0, 1e-15);
  s.near("geometric b_2", geometric.normalizer(2), 2.0, 1e-15);
  s.truth("catalan n=4 outside support", !catalan.support_contains(4));
  s.truth("catalan n=3 in support", catalan.support_contains(3));
  s.truth("geometric n=2 in support", geometric.support_contains(2));

  // sampler
  {
    const std::vector<std::int32_t> a{0, 2, 0}, b{2, 0, 0}, c{0, 0, 2};
    s.truth("cycle_rotate (0,2,0) = 1", cycle_rotate(a) == 1);
    s.truth("cycle_rotate (2,0,0) = 0", cycle_rotate(b) == 0);
    s.truth("cycle_rotate (0,0,2) = 2", cycle_rotate(c) == 2);
    const auto cherry = build_and_annotate(b);
    s.truth("cherry annotation", cherry.subtree_size == std::vector<std::int32_t>{3, 1, 1} &&
                                     cherry.subtree_height == std::vector<std::int32_t>{1, 0, 0} &&
                                     cherry.depth == std::vector<std::int32_t>{0, 1, 1});
    const auto path = build_and_annotate(std::vector<std::int32_t>{1, 1, 0});
    s.truth("path annotation", path.subtree_size == std::vector<std::int32_t>{3, 2, 1} &&
                                   path.subtree_height == std::vector<std::int32_t>{2, 1, 0} &&
                                   path.depth == std::vector<std::int32_t>{0, 1, 2});
    const auto root = build_and_annotate(std::vector<std::int32_t>{0});
    s.truth("single root annotation", root.n == 1 && root.subtree_size[0] == 1 && root.subtree_height[0] == 0);
    s.near("catalan P(S_5 = 4) = 5/16", prob_walk_hits(catalan, 5), 5.0 / 16.0, 1e-15);
    Rng rng(1, 0);
    auto d = sample_degree_sequence(catalan, 3, rng);
    std::sort(d.begin(), d.end());
    s.truth("catalan n=3 degree multiset {0,0,2}", d == std::vector<std::int32_t>{0, 0, 2});

    // functionals
    s.near("cherry, toll 1", additive_functional(cherry, [](const SubtreeStats&) { return 1.0; }), 3.0, 0);
    s.near("cherry, toll |t_w|", additive_functional(cherry, [](const SubtreeStats& w) { return double(w.size); }), 5.0,
           0);
    s.near("path, toll |t_w|", additive_functional(path, [](const SubtreeStats& w) { return double(w.size); }), 6.0, 0);
    const auto one = TollFunction::power_mass_height(0.0, 0.0);
    s.near("a_measure cherry internal", a_measure(cherry, catalan, one, true).value, std::sqrt(3.0) / 3.0, 1e-14);
    s.near("a_measure cherry all", a_measure(cherry, catalan, one, false).value, 5.0 * std::sqrt(3.0) / 9.0, 1e-14);
    s.near("rescaled sum cherry (1,0)", rescaled_theorem1_sum(cherry, catalan, 1.0, 0.0).value, std::sqrt(3.0) / 3.0,
           1e-14);
    s.near("rescaled sum path (1,1)", rescaled_theorem1_sum(path, catalan, 1.0, 1.0).value, 8.0 / 9.0, 1e-14);
    s.near("b1 cherry", b1_index(cherry), 0.0, 0);
    s.near("b1 path of 4", b1_index(build_and_annotate(std::vector<std::int32_t>{1, 1, 1, 0})), 1.5, 1e-15);
    s.near("b1 path of 2", b1_index(build_and_annotate(std::vector<std::int32_t>{1, 0})), 0.0, 0);
    const auto tv = tv_gap_bound_check(cherry, catalan);
    s.near("tv gap cherry", tv.gap, std::sqrt(3.0) / 9.0, 1e-14);
    s.near("tv bound cherry", tv.bound, std::sqrt(3.0) / 6.0, 1e-14);
    s.truth("tv ok cherry", tv.ok);
    const auto tv1 = tv_gap_bound_check(root, catalan);
    s.truth("tv single vertex at the bound", tv1.ok && std::fabs(tv1.gap - tv1.bound) < 1e-15);
    const auto tvp = tv_gap_bound_check(path, catalan);
    s.near("tv gap path = a/6", tvp.gap, std::sqrt(3.0) / 3.0 / 6.0, 1e-14);
  }

  // theory
  using namespace theory;
  s.near("g0(2, 1/2)", g0(2.0, 0.5), 1.0 / std::sqrt(2.0 * kPi), 1e-12);
  s.near("g0(2, 1)", g0(2.0, 1.0), 1.0 / (2.0 * std::sqrt(kPi)), 1e-12);
  s.near("xi(2)", riemann_xi(2.0), kPi / 6.0, 1e-12);
  s.near("xi(1)", riemann_xi(1.0), 0.5, 1e-12);
  s.near("xi(0)", riemann_xi(0.0), 0.5, 1e-12);
  s.near("E[max B_ex^0]", max_excursion_moment(0.0), 1.0, 1e-12);
  s.near("E[max B_ex]", max_excursion_moment(1.0), std::sqrt(kPi / 2.0), 1e-12);
  s.near("E[max B_ex^2]", max_excursion_moment(2.0), kPi * kPi / 6.0, 1e-12);
  s.near("brownian_moment(1/2, 0, 0)", brownian_moment(0.5, 0.0, 0.0), std::sqrt(kPi / 2.0), 1e-12);
  s.near("brownian_moment(1/2, 1, 0)", brownian_moment(0.5, 1.0, 0.0), std::sqrt(kPi / 2.0) / 2.0, 1e-12);
  s.near("brownian_moment(1/2, 0, 2)", brownian_moment(0.5, 0.0, 2.0), 4.12322, 1e-5);
  s.near("stable_moment at gamma=2, beta=2", stable_moment({2.0, 0.5, 0.0, 2.0}, 4.0 * max_excursion_moment(2.0)),
         brownian_moment(0.5, 0.0, 2.0), 1e-10);
  s.near("stable_moment(1.5, 1/2, 0.3, 0)", stable_moment({1.5, 0.5, 0.3, 0.0}, 1.0),
         g0(1.5, 0.5) * std::beta(0.3 + 1.0 - 1.0 / 1.5, 1.0 - 1.0 / 1.5), 1e-12);
  s.near("stable_moment(2, 1/2, 0, 0)", stable_moment({2.0, 0.5, 0.0, 0.0}, 1.0), std::sqrt(kPi / 2.0), 1e-12);
  s.near("mass_only g=1", mass_only_moment(2.0, 0.5, MassToll::power(0.0)), std::sqrt(kPi / 2.0), 1e-9);
  s.near("mass_only g=x", mass_only_moment(2.0, 0.5, MassToll::power(1.0)), std::sqrt(kPi / 2.0) / 2.0, 1e-9);
  s.throws("mass_only g=x^{-1/2} diverges", [] { mass_only_moment(2.0, 0.5, MassToll::power(-0.5)); });
  {
    const auto v = phase_regime(2.0, 1.0, 0.0);
    s.truth("phase_regime(2,1,0) Global, margin 1", v.regime == Regime::Global && std::fabs(v.margin - 1.0) < 1e-15);
    const auto w = phase_regime(2.0, 0.5, 0.0);
    s.truth("phase_regime(2,1/2,0) NonGlobal, margin 0", w.regime == Regime::NonGlobal && std::fabs(w.margin) < 1e-15);
    bool b1 = true;
    for (double g : {1.1, 1.5, 2.0}) b1 = b1 && phase_regime(g, 0.0, -1.0).regime == Regime::NonGlobal;
    s.truth("B1 scaling NonGlobal for all gamma", b1);
  }
  s.truth("finiteness(2,0,0) finite", finiteness(2.0, 0.0, 0.0) == Finiteness::ASFinite);
  s.truth("finiteness(2,-1/2,0) infinite", finiteness(2.0, -0.5, 0.0) == Finiteness::ASInfinite);
  s.truth("finiteness(1.5,0,-1) infinite", finiteness(1.5, 0.0, -1.0) == Finiteness::ASInfinite);
  s.near("height_tail(2,1/2,1)", height_tail(2.0, 0.5, 1.0), 2.0, 1e-14);
  s.near("height_tail(2,1/2,2)", height_tail(2.0, 0.5, 2.0), 1.0, 1e-14);
  s.near("height_tail(1.5,1,3)", height_tail(1.5, 1.0, 3.0), std::pow(1.5, -2.0), 1e-14);
  s.near("duration_density(2,1/2,1)", duration_density(2.0, 0.5, 1.0), 1.0 / std::sqrt(2.0 * kPi), 1e-12);
  s.near("duration_density(2,1/2,4)", duration_density(2.0, 0.5, 4.0), 1.0 / std::sqrt(2.0 * kPi) / 8.0, 1e-12);

  // continuum
  {
    const auto tri = triangle(1000);
    const auto c1 = components_above(tri, 0.25);
    s.truth("triangle r=1/4: one component, duration 1/2, height 1/4",
            c1.size() == 1 && std::fabs(c1[0].duration - 0.5) < 1e-12 && std::fabs(c1[0].height - 0.25) < 1e-12);
    s.truth("triangle r=1/2: empty", components_above(tri, 0.5).empty());
    const auto c0 = components_above(tri, 0.0);
    s.truth("triangle r=0: whole excursion",
            c0.size() == 1 && std::fabs(c0[0].duration - 1.0) < 1e-12 && std::fabs(c0[0].height - 0.5) < 1e-12);
    s.near("sweep triangle toll 1", psi_level_sweep(tri, TollFunction::power_mass_height(0, 0), 1000), 0.25, 1e-3);
    s.near("sweep triangle toll x", psi_level_sweep(tri, TollFunction::power_mass_height(1, 0), 1000), 1.0 / 6.0,
           1e-3);
    s.near("sweep toll 0", psi_level_sweep(tri, TollFunction::custom([](double, double) { return 0.0; }), 100), 0.0,
           0);
  }

  // local limit
  {
    const double log_p = std::lgamma(102.0) - 2.0 * std::lgamma(51.0) - std::log(51.0) - 101.0 * std::log(2.0);
    s.near("catalan P(S_101 = 100) = C(101,50) 2^-101", prob_walk_hits(catalan, 101), std::exp(log_p), 1e-12);
    const double llt = catalan.normalizer(101) * prob_walk_hits(catalan, 101) / catalan.span();
    s.truth("catalan n=101 llt within 2% of g0", std::fabs(llt / g0(2.0, 0.5) - 1.0) < 0.02);
    s.near("catalan P(S_100 = 99) = 0", prob_walk_hits(catalan, 100), 0.0, 0);
  }

  out << s.total() - s.failures() << "/" << s.total() << " checks passed\n";
  return s.failures();
}

}  // namespace bgw::cli
