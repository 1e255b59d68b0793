// Acceptance run: one PASS/FAIL line per criterion, details indented above it.
// All sample sizes, seeds and tolerances are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "bgw/enumerate.hpp"
#include "bgw/functionals.hpp"
#include "bgw/harness.hpp"
#include "bgw/rng.hpp"
#include "bgw/theory.hpp"
#include "bgw/tree.hpp"
#include "cli.hpp"

using namespace bgw;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void detail(const char* fmt, auto... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

void verdict(int id, bool ok, double seconds, double limit, const std::string& what) {
  const bool in_time = seconds < limit;
  if (!(ok && in_time)) ++failures;
  std::printf("%s criterion %d: %s (%.1f s, limit %.0f s%s)\n", ok && in_time ? "PASS" : "FAIL", id, what.c_str(),
              seconds, limit, in_time ? "" : ", too slow");
  std::fflush(stdout);
}

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// 1. Brownian moments of the rescaled sum, Catalan n = 10^4 + 1.
void criterion1() {
  constexpr double kTolerance = 0.05;
  const auto start = Clock::now();
  ExperimentConfig c;
  c.mode = Mode::Moment;
  c.model = OffspringModel::catalan();
  c.sizes = {10001};
  c.replicates = 10000;
  c.seed = 101;
  c.tolls = {{1.0, 0.0}, {2.0, 0.0}, {1.0, 1.0}};
  c.tolerance = kTolerance;
  const auto r = run_moment(c);
  bool ok = r.valid;
  for (const auto& row : r.rows) {
    const double rel = std::fabs(row.estimate / row.theory - 1.0);
    detail("alpha'=%g beta=%g: %.5f +- %.5f vs theory %.6f, relative error %.4f", row.alpha_prime, row.beta,
           row.estimate, row.stderr_, row.theory, rel);
    ok = ok && rel <= kTolerance;
  }
  verdict(1, ok, since(start), 300, "Brownian moment match within 5% (n=10001, R=10^4)");
}

// 2. Continuum (m = 10^4 excursion) against discrete (n = 10^4 + 1) means.
void criterion2() {
  constexpr double kZ = 1.959964;  // two-sided 95%
  const auto start = Clock::now();
  const std::vector<TollSpec> tolls{{1.0, 0.0}, {2.0, 0.0}, {1.0, 1.0}};
  const char* names[] = {"1", "x", "u"};

  ExperimentConfig cont;
  cont.mode = Mode::Continuum;
  cont.excursion_steps = 10000;
  cont.levels = 1024;
  cont.replicates = 10000;
  cont.seed = 202;
  cont.tolls = tolls;
  const auto rc = run_continuum(cont);

  ExperimentConfig disc;
  disc.mode = Mode::Moment;
  disc.sizes = {10001};
  disc.replicates = 10000;
  disc.seed = 203;
  disc.tolls = tolls;
  const auto rd = run_moment(disc);

  bool ok = rc.valid && rd.valid;
  for (std::size_t i = 0; i < tolls.size(); ++i) {
    const auto& a = rc.rows[i];
    const auto& b = rd.rows[i];
    const double joint = kZ * std::hypot(a.stderr_, b.stderr_);
    const double diff = a.estimate - b.estimate;
    detail("toll %s: continuum %.5f +- %.5f, discrete %.5f +- %.5f, difference %.5f, joint 95%% half-width %.5f",
           names[i], a.estimate, a.stderr_, b.estimate, b.stderr_, diff, joint);
    ok = ok && std::fabs(diff) <= joint;
  }
  verdict(2, ok, since(start), 600, "continuum and discrete means agree within joint 95% CIs (tolls 1, x, u)");
}

// 3. Exact local limit.
void criterion3() {
  const auto start = Clock::now();
  const auto catalan = OffspringModel::catalan();
  const double pc = prob_walk_hits(catalan, 10001);
  const double vc = catalan.normalizer(10001) * pc / catalan.span();
  const double gc = theory::g0(2.0, 0.5);
  const auto stable = OffspringModel::stable(1.5, 0.5);
  const double ps = prob_walk_hits(stable, 10000);
  const double vs = stable.normalizer(10000) * ps / stable.span();
  const double gs = theory::g0(1.5, 0.5);
  detail("catalan n=10001: b_n P(S_n=n-1)/span = %.6f vs g(0) = %.6f (relative %.4f)", vc, gc,
         std::fabs(vc / gc - 1.0));
  detail("stable(1.5, 0.5) n=10000: %.6f vs g0 = %.6f (relative %.4f)", vs, gs, std::fabs(vs / gs - 1.0));
  const bool ok = std::fabs(vc / gc - 1.0) <= 0.02 && std::fabs(vs / gs - 1.0) <= 0.05;
  verdict(3, ok, since(start), 60, "exact local limit within 2% (catalan) and 5% (stable 1.5)");
}

// 4. Phase transition on both sides of gamma alpha' = 1.
void criterion4() {
  const auto start = Clock::now();
  bool ok = true;
  for (double gamma : {2.0, 1.5}) {
    ExperimentConfig c;
    c.mode = Mode::PhaseScan;
    c.model = gamma == 2.0 ? OffspringModel::catalan() : OffspringModel::stable(1.5, 0.5);
    c.sizes = gamma == 2.0 ? std::vector<std::int64_t>{101, 1001, 10001} : std::vector<std::int64_t>{100, 1000, 10000};
    c.replicates = 2000;
    c.seed = gamma == 2.0 ? 401 : 402;
    c.alpha_primes = {1.0 / gamma - 0.25, 1.0 / gamma + 0.25};
    c.beta = 0.0;
    const auto r = run_phase_scan(c);
    ok = ok && r.valid && r.all_passed();
    for (const auto& row : r.rows) {
      if (row.verdict.empty()) {
        detail("gamma=%g alpha'=%.4f n=%lld: %.4f +- %.4f", gamma, row.alpha_prime, static_cast<long long>(row.n),
               row.estimate, row.stderr_);
      } else {
        detail("gamma=%g alpha'=%.4f n=%lld: %.4f +- %.4f -> %s; %s", gamma, row.alpha_prime,
               static_cast<long long>(row.n), row.estimate, row.stderr_, row.verdict.c_str(), row.note.c_str());
      }
    }
  }
  verdict(4, ok, since(start), 600, "phase-scan verdicts match phase_regime for gamma in {2, 1.5}");
}

// 5. Exact law of the sampler on small trees.
void criterion5() {
  constexpr std::int64_t kR = 100000;
  constexpr double kMinP = 0.001;
  const auto start = Clock::now();
  bool ok = true;
  SamplerOptions options;
  options.attempt_multiplier = 1000;
  for (const auto& [name, model] :
       std::vector<std::pair<std::string, OffspringModel>>{{"catalan", OffspringModel::catalan()},
                                                           {"geometric", OffspringModel::geometric()}}) {
    for (std::int64_t n : {3, 5, 7}) {
      std::map<std::vector<std::int32_t>, double> prob;
      double total = 0.0;
      enumerate_trees(model, n, [&](std::span<const std::int32_t> d, double w) {
        prob[{d.begin(), d.end()}] += w;
        total += w;
      });
      std::map<std::vector<std::int32_t>, std::int64_t> counts;
      Rng rng(500 + static_cast<std::uint64_t>(n), name == "catalan" ? 0 : 1);
      std::int64_t outside = 0;
      for (std::int64_t j = 0; j < kR; ++j) {
        const auto t = sample_conditioned(model, n, rng, options);
        std::vector<std::int32_t> d(t.degree.begin(), t.degree.end());
        if (!prob.contains(d)) ++outside;
        ++counts[d];
      }
      double stat = 0.0, pooled_e = 0.0, pooled_o = 0.0;
      int cells = 0;
      for (const auto& [k, p] : prob) {
        const double e = p / total * kR;
        const auto it = counts.find(k);
        const double o = it == counts.end() ? 0.0 : static_cast<double>(it->second);
        if (e < 5.0) {
          pooled_e += e;
          pooled_o += o;
        } else {
          stat += (o - e) * (o - e) / e;
          ++cells;
        }
      }
      if (pooled_e > 0.0) {
        stat += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
        ++cells;
      }
      const double p = cells < 2 ? 1.0
                                 : boost::math::cdf(boost::math::complement(boost::math::chi_squared(cells - 1), stat));
      detail("%s n=%lld: %zu shapes, chi2 = %.2f on %d dof, p = %.4f, outside support %lld", name.c_str(),
             static_cast<long long>(n), prob.size(), stat, cells - 1, p, static_cast<long long>(outside));
      ok = ok && p > kMinP && outside == 0;
    }
  }
  verdict(5, ok, since(start), 60, "sampler chi-square p > 0.001 for n in {3,5,7}, catalan and geometric (R=10^5)");
}

// 6. Deterministic bounds on random trees and the rescaled-sum identity.
void criterion6() {
  const auto start = Clock::now();
  const std::vector<OffspringModel> models{OffspringModel::catalan(), OffspringModel::geometric(),
                                           OffspringModel::stable(1.5, 0.5)};
  Rng rng(606, 0);
  std::int64_t violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto& m = models[static_cast<std::size_t>(i) % models.size()];
    std::int64_t n = 2 + static_cast<std::int64_t>(rng.uniform() * 2000.0);
    if (!m.support_contains(n)) ++n;
    const auto t = sample_conditioned(m, n, rng);
    if (!mass_bound_check(t, m)) ++violations;
    if (!tv_gap_bound_check(t, m).ok) ++violations;
  }
  detail("10^4 trees (catalan, geometric, stable 1.5; n in [2, 2002]): %lld bound violations",
         static_cast<long long>(violations));

  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto& m = models[static_cast<std::size_t>(i) % models.size()];
    const auto t = sample_conditioned(m, 1001, rng);
    for (int j = 0; j < 20; ++j) {
      const double ap = -0.5 + 3.5 * rng.uniform();
      const double beta = -1.0 + 4.0 * rng.uniform();
      const double lhs = rescaled_theorem1_sum(t, m, ap, beta).value;
      const double rhs = a_measure(t, m, TollFunction::power_mass_height(ap - 1.0, beta), true).value;
      worst = std::max(worst, std::fabs(lhs - rhs) / std::fabs(rhs));
    }
  }
  detail("identity rescaled sum = A(x^{alpha'-1} u^beta) on 100 trees x 20 draws: worst relative gap %.3g", worst);
  verdict(6, violations == 0 && worst <= 1e-12, since(start), 600,
          "zero bound violations on 10^4 trees, identity to 1e-12");
}

// 7. Special functions.
void criterion7() {
  const auto start = Clock::now();
  Rng rng(707, 0);
  double xi_gap = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double s = -6.0 + 12.0 * rng.uniform();
    const double a = theory::riemann_xi(s), b = theory::riemann_xi(1.0 - s);
    xi_gap = std::max(xi_gap, std::fabs(a - b) / std::max(1.0, std::fabs(a)));
  }
  const double xi2 = theory::riemann_xi(2.0);
  detail("xi(s) = xi(1-s) on 200 points in [-6, 6]: worst gap %.3g; xi(2) - pi/6 = %.3g", xi_gap,
         xi2 - std::numbers::pi / 6.0);

  double moment_gap = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double kappa = 0.1 + 2.0 * rng.uniform();
    const double beta = -0.9 + 4.0 * rng.uniform();
    const double alpha = -0.45 + 2.0 * rng.uniform();
    if (2.0 * alpha + beta + 1.0 <= 0.05) continue;
    const double b = theory::brownian_moment(kappa, alpha, beta);
    const double s = theory::stable_moment({2.0, kappa, alpha, beta}, theory::brownian_height_moment(kappa, beta));
    moment_gap = std::max(moment_gap, std::fabs(s - b) / std::fabs(b));
  }
  detail("stable_moment vs brownian_moment at gamma=2: worst relative gap %.3g", moment_gap);

  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const double gamma = 1.0 + 1e-6 + (1.0 - 1e-6) * rng.uniform();
    const double ap = -1.0 + 4.0 * rng.uniform();
    const double beta = -2.0 + 5.0 * rng.uniform();
    const bool finite = theory::finiteness(gamma, ap - 1.0, beta) == theory::Finiteness::ASFinite;
    const bool global = theory::phase_regime(gamma, ap, beta).regime == theory::Regime::Global;
    if (finite != global) ++mismatches;
  }
  detail("finiteness <-> phase_regime on 10^3 random triples: %d mismatches", mismatches);

  std::ostringstream golden;
  const int golden_failures = cli::run_selftest(golden);
  std::istringstream lines(golden.str());
  std::string last;
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("FAIL", 0) == 0) detail("%s", line.c_str());
    last = line;
  }
  detail("golden examples: %s", last.c_str());

  const bool ok = xi_gap <= 1e-10 && std::fabs(xi2 - std::numbers::pi / 6.0) <= 1e-10 && moment_gap <= 1e-10 &&
                  mismatches == 0 && golden_failures == 0;
  verdict(7, ok, since(start), 600, "special functions, moment formulas and golden examples");
}

// 8. Height moments across a decade and the lower-tail exponent.
void criterion8() {
  const auto start = Clock::now();
  bool ok = true;
  for (double gamma : {2.0, 1.5}) {
    ExperimentConfig c;
    c.mode = Mode::HeightMoments;
    c.model = gamma == 2.0 ? OffspringModel::catalan() : OffspringModel::stable(1.5, 0.5);
    c.sizes = gamma == 2.0 ? std::vector<std::int64_t>{1001, 10001} : std::vector<std::int64_t>{1000, 10000};
    c.replicates = 10000;
    c.seed = gamma == 2.0 ? 801 : 802;
    c.moment_orders = {-2.0, -1.0, 1.0, 2.0, 4.0};
    c.stability_tolerance = 0.2;
    const auto r = run_height_moments(c);
    ok = ok && r.valid && r.all_passed();
    for (const auto& row : r.rows) {
      if (row.verdict.empty()) continue;
      detail("gamma=%g p=%g: E[((b_n/n)H)^p] at n=%lld is %.4f -> %s; %s", gamma, row.beta,
             static_cast<long long>(row.n), row.estimate, row.verdict.c_str(), row.note.c_str());
    }
  }
  for (double gamma : {2.0, 1.5}) {
    ExperimentConfig c;
    c.mode = Mode::TailProfile;
    c.model = gamma == 2.0 ? OffspringModel::catalan() : OffspringModel::stable(1.5, 0.5);
    c.sizes = {gamma == 2.0 ? 1001 : 1000};
    c.replicates = 100000;
    c.seed = gamma == 2.0 ? 803 : 804;
    c.tail_tolerance = 0.25;
    const auto r = run_tail_profile(c);
    ok = ok && r.valid;
    for (const auto& row : r.rows) {
      if (row.mode != "tail-lower") continue;
      detail("gamma=%g lower-tail exponent %.4f vs gamma/(gamma-1) = %.4f -> %s; %s", gamma, row.estimate, row.theory,
             row.verdict.c_str(), row.note.c_str());
      ok = ok && row.verdict == "pass";
    }
  }
  verdict(8, ok, since(start), 1800, "height moments stable within 20% over a decade, lower-tail exponent within 25%");
}

// 9. Divergence at alpha' = 0, beta = 0.
void criterion9() {
  constexpr double kFactor = 1.5;
  const auto start = Clock::now();
  ExperimentConfig c;
  c.mode = Mode::Moment;
  c.sizes = {101, 1001, 10001};
  c.replicates = 2000;
  c.seed = 909;
  c.tolls = {{0.0, 0.0}};
  const auto r = run_moment(c);
  bool ok = r.valid;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    if (i == 0) {
      detail("n=%lld: %.4f +- %.4f", static_cast<long long>(row.n), row.estimate, row.stderr_);
      continue;
    }
    const double growth = row.estimate / r.rows[i - 1].estimate;
    detail("n=%lld: %.4f +- %.4f, growth over the decade %.3f", static_cast<long long>(row.n), row.estimate,
           row.stderr_, growth);
    ok = ok && growth >= kFactor;
  }
  verdict(9, ok, since(start), 600, "rescaled sum at alpha'=0, beta=0 grows >= 1.5x per decade");
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const std::vector<void (*)()> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                         criterion6, criterion7, criterion8, criterion9};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      ++failures;
      std::printf("FAIL criterion %zu: exception: %s\n", i + 1, e.what());
    }
  }
  std::printf("%d of %zu criteria failed (%.0f s total)\n", failures, criteria.size(), since(start));
  return failures == 0 ? 0 : 1;
}
