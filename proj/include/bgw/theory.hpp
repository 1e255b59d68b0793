#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace bgw::theory {

/// Thrown when a requested expectation is +infinity.
class InfiniteMoment : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Special functions.

double riemann_zeta(double s);
/// Completed zeta xi(s) = s(s-1) pi^{-s/2} Gamma(s/2) zeta(s) / 2, entire.
double riemann_xi(double s);
/// Euler beta function for positive arguments.
double beta_fn(double a, double b);

// Stable constants.

/// Density at 0 of the stable law with Laplace exponent kappa * lambda^gamma.
double g0(double gamma, double kappa);
/// Brownian special case 1 / (2 sqrt(kappa pi)).
double g0_brownian(double kappa);

// Moments of the continuum functional Psi^mh(x^alpha u^beta).

struct MomentSpec {
  double gamma;
  double kappa;
  double alpha;
  double beta;

  /// gamma*alpha + (gamma-1)*(beta+1); the expectation is finite iff this is > 0.
  double margin() const { return gamma * alpha + (gamma - 1.0) * (beta + 1.0); }
  bool valid() const { return margin() > 0.0; }
};

/// E[(max of the normalized Brownian excursion)^beta], any real beta.
double max_excursion_moment(double beta);

/// E[H(T)^beta] for the Brownian tree with branching mechanism kappa*lambda^2.
double brownian_height_moment(double kappa, double beta);

/// Expected Psi^mh(x^alpha u^beta) for the Brownian tree (gamma = 2).
/// Throws InfiniteMoment unless 2 alpha + beta + 1 > 0.
double brownian_moment(double kappa, double alpha, double beta);

/// Expected Psi^mh(x^alpha u^beta) for the stable tree, given E[H(T)^beta].
double stable_moment(const MomentSpec& spec, double height_moment);

/// Mass-only toll g(x) on (0, 1]. The optional exponents describe the
/// behaviour g(x) ~ x^a near 0 and g(x) ~ (1-x)^b near 1; when present they
/// are used to decide integrability before any quadrature is attempted.
struct MassToll {
  std::function<double(double)> g;
  std::optional<double> exponent_at_zero;
  std::optional<double> exponent_at_one;

  static MassToll power(double alpha);
  /// |log x| x^alpha.
  static MassToll power_log(double alpha);
};

/// g(0) * int_0^1 x^{-1/gamma} (1-x)^{-1/gamma} g(x) dx.
double mass_only_moment(double gamma, double kappa, const MassToll& toll);

// Phase predicates.

enum class Regime { Global, NonGlobal };

struct PhaseVerdict {
  Regime regime;
  double margin;  // gamma*alpha' + (gamma-1)*beta - 1
};

PhaseVerdict phase_regime(double gamma, double alpha_prime, double beta);

enum class Finiteness { ASFinite, ASInfinite };

Finiteness finiteness(double gamma, double alpha, double beta);

// Excursion measure laws.

/// N[H > x] = (kappa (gamma-1) x)^{-1/(gamma-1)}.
double height_tail(double gamma, double kappa, double x);
/// Density of the duration under the excursion measure, g(0) x^{-1-1/gamma}.
double duration_density(double gamma, double kappa, double x);

std::string to_string(Regime r);
std::string to_string(Finiteness f);

}  // namespace bgw::theory
