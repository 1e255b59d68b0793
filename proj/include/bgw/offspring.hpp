#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace bgw {

enum class Family { StablePower, FiniteVariancePmf };

/// Critical offspring law xi together with its normalization (b_n, kappa).
///
/// StablePower(gamma, c) has generating function s + c (1 - s)^gamma, so that
/// b_n = n^{1/gamma} and kappa = c exactly. The pmf is tabulated up to
/// truncation_k(); beyond the table the tail P(xi > k) is evaluated in closed
/// form, so the law is never truncated.
///
/// FiniteVariancePmf is an explicit finite pmf with b_n = sigma sqrt(n) and
/// kappa = 1/2.
class OffspringModel {
 public:
  static OffspringModel stable(double gamma, double c);
  static OffspringModel finite_variance(std::vector<double> pmf, std::string name = "pmf");
  /// {0: 1/2, 2: 1/2}, uniform full binary trees.
  static OffspringModel catalan();
  /// P(xi = k) = 2^{-k-1}, uniform ordered trees. Tabulated to k = 60.
  static OffspringModel geometric();

  Family family() const { return family_; }
  const std::string& name() const { return name_; }
  double gamma() const { return gamma_; }
  double kappa() const { return kappa_; }
  /// Coefficient c of the stable family (equal to kappa); NaN for explicit pmfs.
  double stable_c() const { return family_ == Family::StablePower ? kappa_ : std::numeric_limits<double>::quiet_NaN(); }
  /// Variance; +infinity when gamma < 2.
  double sigma2() const { return sigma2_; }
  int span() const { return span_; }
  /// Size of the tabulated part of the pmf.
  std::int64_t truncation_k() const { return static_cast<std::int64_t>(pmf_.size()); }

  double pmf(std::int64_t k) const;
  /// P(xi > k); tail(-1) = 1.
  double tail(std::int64_t k) const;
  std::span<const double> pmf_table() const { return pmf_; }
  /// Largest k with pmf(k) > 0, or -1 when the support is unbounded.
  std::int64_t max_support() const { return max_support_; }

  /// Normalizing sequence b_n, times the optional user scale.
  double normalizer(std::int64_t n) const;
  /// True iff P(|tau| = n) > 0.
  bool support_contains(std::int64_t n) const;

  /// Overrides b_n by scale * (canonical b_n). kappa is left untouched; keeping
  /// the pair consistent is then the caller's responsibility.
  OffspringModel with_normalizer_scale(double scale) const;
  double normalizer_scale() const { return normalizer_scale_; }

  /// Smallest k >= from with tail(k) <= level, for level in (0, tail(from - 1)].
  std::int64_t tail_quantile(std::int64_t from, double level) const;

  nlohmann::json to_json() const;
  static OffspringModel from_json(const nlohmann::json& j);

 private:
  OffspringModel() = default;
  void finalize_table();

  Family family_ = Family::FiniteVariancePmf;
  std::string name_;
  double gamma_ = 2.0;
  double kappa_ = 0.5;
  double sigma2_ = 0.0;
  int span_ = 1;
  std::int64_t max_support_ = -1;
  double normalizer_scale_ = 1.0;
  std::vector<double> pmf_;
  std::vector<double> tail_;  // tail_[k] = P(xi > k) for k < table size
};

}  // namespace bgw
