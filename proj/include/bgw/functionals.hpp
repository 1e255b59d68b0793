#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>

#include "bgw/offspring.hpp"
#include "bgw/tree.hpp"

namespace bgw {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

/// Toll f(mass, height) evaluated on rescaled subtree statistics.
class TollFunction {
 public:
  enum class Kind { PowerMassHeight, PowerLogMass, InverseHeight, Indicator, Custom };
  using Callable = std::function<double(double mass, double height)>;

  /// x^alpha u^beta with 0^0 = 1.
  static TollFunction power_mass_height(double alpha, double beta);
  /// |log x| x^alpha.
  static TollFunction power_log_mass(double alpha);
  /// 1 / u.
  static TollFunction inverse_height();
  /// 1 on subtrees with more than one vertex, 0 on leaves.
  static TollFunction indicator_internal();
  static TollFunction custom(Callable f, std::string name = "custom");

  double operator()(double mass, double height) const;

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const std::string& name() const { return name_; }

 private:
  TollFunction(Kind kind, double alpha, double beta, std::string name, Callable f = {})
      : kind_(kind), alpha_(alpha), beta_(beta), name_(std::move(name)), custom_(std::move(f)) {}

  Kind kind_;
  double alpha_;
  double beta_;
  std::string name_;
  Callable custom_;
};

/// Raised when a toll is not finite at some vertex.
class TollNotFinite : public std::domain_error {
 public:
  TollNotFinite(const std::string& what, std::int64_t vertex) : std::domain_error(what), vertex_(vertex) {}
  std::int64_t vertex() const { return vertex_; }

 private:
  std::int64_t vertex_;
};

struct FunctionalValue {
  double value = 0.0;
  std::int64_t n = 0;
  /// value = b_n^bn_exponent * n^n_exponent * (raw sum)
  double bn_exponent = 0.0;
  double n_exponent = 0.0;
  bool internal_only = true;
};

/// Statistics of the fringe subtree t_w handed to a raw toll.
struct SubtreeStats {
  std::int64_t vertex;
  std::int32_t size;
  std::int32_t height;
  std::int32_t degree;
  std::int32_t depth;
};

/// F(t) = sum over all vertices w of toll(t_w).
double additive_functional(const AnnotatedTree& tree, const std::function<double(const SubtreeStats&)>& toll);

/// (b_n / n^2) sum_w |t_w| f(|t_w| / n, (b_n / n) H(t_w)); internal vertices only when requested.
FunctionalValue a_measure(const AnnotatedTree& tree, const OffspringModel& model, const TollFunction& toll,
                          bool internal_only);

/// b_n^{1+beta} / n^{1+alpha'+beta} * sum over internal w of |t_w|^alpha' H(t_w)^beta.
FunctionalValue rescaled_theorem1_sum(const AnnotatedTree& tree, const OffspringModel& model, double alpha_prime,
                                      double beta);

/// Shao-Sokal B_1: sum of 1 / H(t_w) over non-root internal vertices.
double b1_index(const AnnotatedTree& tree);

struct TvGapCheck {
  double gap;
  double bound;
  bool ok;
};

/// Total-variation distance between the all-vertex and internal-vertex mass
/// measures, which differ by one atom of weight a/n per leaf (a = b_n/n), against the bound a/2.
TvGapCheck tv_gap_bound_check(const AnnotatedTree& tree, const OffspringModel& model);

/// A_n°(1) <= (b_n/n) H(tau) and A_n(1) <= (b_n/n)(H(tau) + 1).
bool mass_bound_check(const AnnotatedTree& tree, const OffspringModel& model);

}  // namespace bgw
