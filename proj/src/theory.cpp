#include "bgw/theory.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace bgw::theory {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kEtaTerms = 32;

// Borwein's accelerated alternating series for the Dirichlet eta function,
// valid for s > 0. Truncation error is below 3 * (3 + sqrt 8)^-n.
double dirichlet_eta(double s) {
  static const std::array<double, kEtaTerms + 1> d = [] {
    std::array<double, kEtaTerms + 1> out{};
    const double n = kEtaTerms;
    double term = 1.0 / n;
    double acc = term;
    out[0] = n * acc;
    for (int i = 0; i < kEtaTerms; ++i) {
      term *= 4.0 * (n + i) * (n - i) / ((2.0 * i + 1.0) * (2.0 * i + 2.0));
      acc += term;
      out[i + 1] = n * acc;
    }
    return out;
  }();
  double sum = 0.0;
  for (int k = 0; k < kEtaTerms; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    sum += sign * (d[k] - d[kEtaTerms]) * std::pow(k + 1.0, -s);
  }
  return -sum / d[kEtaTerms];
}

// (s - 1) zeta(s) for s >= 1/2, continuous through s = 1.
double zeta_times_s_minus_one(double s) {
  if (s == 1.0) return 1.0;
  const double denom = -std::expm1((1.0 - s) * std::numbers::ln2);
  return dirichlet_eta(s) * (s - 1.0) / denom;
}

double xi_right_half(double s) {
  return 0.5 * s * std::pow(kPi, -0.5 * s) * std::tgamma(0.5 * s) * zeta_times_s_minus_one(s);
}

}  // namespace

double riemann_zeta(double s) {
  if (s == 1.0) return HUGE_VAL;
  if (s >= 0.5) return dirichlet_eta(s) / -std::expm1((1.0 - s) * std::numbers::ln2);
  if (s == 0.0) return -0.5;
  // Reflection; sin(pi s / 2) vanishes at the trivial zeros.
  if (s < 0.0 && std::fmod(s, 2.0) == 0.0) return 0.0;
  return std::pow(2.0, s) * std::pow(kPi, s - 1.0) * std::sin(0.5 * kPi * s) * std::tgamma(1.0 - s) *
         riemann_zeta(1.0 - s);
}

double riemann_xi(double s) {
  return s >= 0.5 ? xi_right_half(s) : xi_right_half(1.0 - s);
}

double beta_fn(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("beta_fn: arguments must be positive");
  if (a + b < 150.0) return std::tgamma(a) * std::tgamma(b) / std::tgamma(a + b);
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

double g0(double gamma, double kappa) {
  return 1.0 / (std::pow(kappa, 1.0 / gamma) * std::fabs(std::tgamma(-1.0 / gamma)));
}

double g0_brownian(double kappa) { return 1.0 / (2.0 * std::sqrt(kappa * kPi)); }

double max_excursion_moment(double beta) {
  return 2.0 * std::pow(0.5 * kPi, 0.5 * beta) * riemann_xi(beta);
}

double brownian_height_moment(double kappa, double beta) {
  return std::pow(2.0 / kappa, 0.5 * beta) * max_excursion_moment(beta);
}

double brownian_moment(double kappa, double alpha, double beta) {
  if (!(2.0 * alpha + beta + 1.0 > 0.0)) {
    throw InfiniteMoment("brownian_moment: 2*alpha + beta + 1 <= 0, the expectation is infinite");
  }
  return std::pow(kPi / kappa, 0.5 * beta) * riemann_xi(beta) * beta_fn(alpha + 0.5 * (beta + 1.0), 0.5) /
         std::sqrt(kPi * kappa);
}

double stable_moment(const MomentSpec& spec, double height_moment) {
  if (!spec.valid()) {
    throw InfiniteMoment("stable_moment: gamma*alpha + (gamma-1)(beta+1) <= 0, the expectation is infinite");
  }
  const double tail = 1.0 - 1.0 / spec.gamma;
  return g0(spec.gamma, spec.kappa) * beta_fn(spec.alpha + (spec.beta + 1.0) * tail, tail) * height_moment;
}

MassToll MassToll::power(double alpha) {
  return {[alpha](double x) { return std::pow(x, alpha); }, alpha, 0.0};
}

MassToll MassToll::power_log(double alpha) {
  return {[alpha](double x) { return std::fabs(std::log(x)) * std::pow(x, alpha); }, alpha, 1.0};
}

double mass_only_moment(double gamma, double kappa, const MassToll& toll) {
  const double s = 1.0 / gamma;
  if (toll.exponent_at_zero && !(*toll.exponent_at_zero - s > -1.0)) {
    throw InfiniteMoment("mass_only_moment: integrand not integrable at x = 0");
  }
  if (toll.exponent_at_one && !(*toll.exponent_at_one - s > -1.0)) {
    throw InfiniteMoment("mass_only_moment: integrand not integrable at x = 1");
  }
  boost::math::quadrature::tanh_sinh<double> integrator;
  // Both halves are written as integrals over (0, 1/2] in the distance to the
  // singular endpoint, so that 1 - x is never formed by cancellation.
  auto left = [&](double x) { return std::pow(x, -s) * std::pow(1.0 - x, -s) * toll.g(x); };
  auto right = [&](double y) { return std::pow(y, -s) * std::pow(1.0 - y, -s) * toll.g(1.0 - y); };
  double total = 0.0;
  for (int half = 0; half < 2; ++half) {
    double err = 0.0;
    double l1 = 0.0;
    double value = 0.0;
    try {
      value = half == 0 ? integrator.integrate(left, 0.0, 0.5, 1e-10, &err, &l1)
                        : integrator.integrate(right, 0.0, 0.5, 1e-10, &err, &l1);
    } catch (const std::exception&) {
      throw InfiniteMoment("mass_only_moment: quadrature failed, integral treated as divergent");
    }
    if (!std::isfinite(value) || !(err <= 1e-8 * std::max(1.0, l1))) {
      throw InfiniteMoment("mass_only_moment: quadrature does not converge, integral treated as divergent");
    }
    total += value;
  }
  return g0(gamma, kappa) * total;
}

PhaseVerdict phase_regime(double gamma, double alpha_prime, double beta) {
  const double margin = gamma * alpha_prime + (gamma - 1.0) * beta - 1.0;
  return {margin > 0.0 ? Regime::Global : Regime::NonGlobal, margin};
}

Finiteness finiteness(double gamma, double alpha, double beta) {
  return gamma * alpha + (gamma - 1.0) * (beta + 1.0) > 0.0 ? Finiteness::ASFinite : Finiteness::ASInfinite;
}

double height_tail(double gamma, double kappa, double x) {
  return std::pow(kappa * (gamma - 1.0) * x, -1.0 / (gamma - 1.0));
}

double duration_density(double gamma, double kappa, double x) {
  return g0(gamma, kappa) * std::pow(x, -1.0 - 1.0 / gamma);
}

std::string to_string(Regime r) { return r == Regime::Global ? "Global" : "NonGlobal"; }

std::string to_string(Finiteness f) { return f == Finiteness::ASFinite ? "ASFinite" : "ASInfinite"; }

}  // namespace bgw::theory
