#include "bgw/offspring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

namespace bgw {

namespace {

constexpr std::int64_t kStableTableSize = 1 << 16;
constexpr int kGeometricMaxDegree = 60;
constexpr std::int64_t kQuantileCap = std::int64_t{1} << 62;

}  // namespace

OffspringModel OffspringModel::stable(double gamma, double c) {
  if (!(gamma > 1.0 && gamma <= 2.0)) throw std::invalid_argument("stable family: gamma must lie in (1, 2]");
  if (!(c > 0.0 && c <= 1.0 / gamma)) throw std::invalid_argument("stable family: c must lie in (0, 1/gamma]");
  OffspringModel m;
  m.family_ = Family::StablePower;
  m.name_ = "stable";
  m.gamma_ = gamma;
  m.kappa_ = c;
  if (gamma == 2.0) {
    m.pmf_ = {c, 1.0 - 2.0 * c, c};
    m.sigma2_ = 2.0 * c;
    m.finalize_table();
    return m;
  }
  m.sigma2_ = std::numeric_limits<double>::infinity();
  m.pmf_.resize(kStableTableSize);
  m.tail_.resize(kStableTableSize);
  m.pmf_[0] = c;
  m.pmf_[1] = 1.0 - c * gamma;
  m.pmf_[2] = 0.5 * c * gamma * (gamma - 1.0);
  for (std::int64_t k = 2; k + 1 < kStableTableSize; ++k) {
    m.pmf_[k + 1] = m.pmf_[k] * (k - gamma) / (k + 1.0);
  }
  // Tail by its own recurrence; subtracting pmf values would cancel badly.
  m.tail_[0] = 1.0 - c;
  m.tail_[1] = c * (gamma - 1.0);
  for (std::int64_t k = 1; k + 1 < kStableTableSize; ++k) {
    m.tail_[k + 1] = m.tail_[k] * (k + 1.0 - gamma) / (k + 1.0);
  }
  m.span_ = 1;
  m.max_support_ = -1;
  return m;
}

OffspringModel OffspringModel::finite_variance(std::vector<double> pmf, std::string name) {
  while (!pmf.empty() && pmf.back() == 0.0) pmf.pop_back();
  if (pmf.size() < 2) throw std::invalid_argument("pmf: degenerate law (needs mass at 0 and above 1)");
  double total = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("pmf: entries must be finite and >= 0");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw std::invalid_argument("pmf: probabilities do not sum to 1");
  for (double& p : pmf) p /= total;
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    mean += k * pmf[k];
    second += static_cast<double>(k) * k * pmf[k];
  }
  if (std::fabs(mean - 1.0) > 1e-9) throw std::invalid_argument("pmf: offspring law is not critical (mean != 1)");
  if (!(pmf[0] > 0.0)) throw std::invalid_argument("pmf: P(xi = 0) must be positive");
  const double variance = second - mean * mean;
  if (!(variance > 1e-12)) throw std::invalid_argument("pmf: zero variance");

  OffspringModel m;
  m.family_ = Family::FiniteVariancePmf;
  m.name_ = std::move(name);
  m.gamma_ = 2.0;
  m.kappa_ = 0.5;
  m.sigma2_ = variance;
  m.pmf_ = std::move(pmf);
  m.finalize_table();
  return m;
}

void OffspringModel::finalize_table() {
  tail_.assign(pmf_.size(), 0.0);
  double acc = 0.0;
  for (std::size_t k = pmf_.size(); k-- > 0;) {
    tail_[k] = acc;
    acc += pmf_[k];
  }
  int g = 0;
  max_support_ = 0;
  for (std::size_t k = 1; k < pmf_.size(); ++k) {
    if (pmf_[k] > 0.0) {
      g = std::gcd(g, static_cast<int>(k));
      max_support_ = static_cast<std::int64_t>(k);
    }
  }
  span_ = g;
}

OffspringModel OffspringModel::catalan() { return finite_variance({0.5, 0.0, 0.5}, "catalan"); }

OffspringModel OffspringModel::geometric() {
  std::vector<double> pmf(kGeometricMaxDegree + 1);
  for (int k = 0; k <= kGeometricMaxDegree; ++k) pmf[k] = std::ldexp(1.0, -k - 1);
  return finite_variance(std::move(pmf), "geometric");
}

double OffspringModel::pmf(std::int64_t k) const {
  if (k < 0) return 0.0;
  if (k < truncation_k()) return pmf_[k];
  if (max_support_ >= 0) return 0.0;
  // c (-1)^k binom(gamma, k) = c Gamma(k - gamma) / (Gamma(-gamma) k!)
  const double kd = static_cast<double>(k);
  return kappa_ * boost::math::tgamma_delta_ratio(kd - gamma_, gamma_ + 1.0) / std::tgamma(-gamma_);
}

double OffspringModel::tail(std::int64_t k) const {
  if (k < 0) return 1.0;
  if (k < truncation_k()) return tail_[k];
  if (max_support_ >= 0) return 0.0;
  // c Gamma(k + 1 - gamma) / (|Gamma(1 - gamma)| k!)
  const double kd = static_cast<double>(k);
  return kappa_ * boost::math::tgamma_delta_ratio(kd + 1.0 - gamma_, gamma_) / std::fabs(std::tgamma(1.0 - gamma_));
}

std::int64_t OffspringModel::tail_quantile(std::int64_t from, double level) const {
  from = std::max<std::int64_t>(from, 0);
  const std::int64_t table = truncation_k();
  if (from < table && tail_[table - 1] <= level) {
    auto it = std::partition_point(tail_.begin() + from, tail_.end(), [level](double t) { return t > level; });
    return static_cast<std::int64_t>(it - tail_.begin());
  }
  if (max_support_ >= 0) return max_support_;
  std::int64_t lo = std::max(from, table) - 1;  // tail(lo) > level, or lo = from - 1
  std::int64_t hi = std::max(from, table);
  while (tail(hi) > level) {
    lo = hi;
    if (hi >= kQuantileCap / 2) return kQuantileCap;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (tail(mid) > level) lo = mid; else hi = mid;
  }
  return hi;
}

double OffspringModel::normalizer(std::int64_t n) const {
  const double nd = static_cast<double>(n);
  if (family_ == Family::StablePower) return normalizer_scale_ * std::pow(nd, 1.0 / gamma_);
  return normalizer_scale_ * std::sqrt(sigma2_ * nd);
}

bool OffspringModel::support_contains(std::int64_t n) const {
  if (n < 1) return false;
  const std::int64_t target = n - 1;
  if (target == 0) return true;
  if (target % span_ != 0) return false;
  if (max_support_ < 0) return target >= 2 || pmf_[1] > 0.0;
  // Sums of positive support points reach every large enough multiple of the
  // span; past max^2 the congruence alone decides.
  const std::int64_t frobenius_cap = max_support_ * max_support_;
  if (target > frobenius_cap) return true;
  std::vector<char> reachable(static_cast<std::size_t>(target) + 1, 0);
  reachable[0] = 1;
  for (std::int64_t s = 1; s <= target; ++s) {
    for (std::int64_t k = 1; k <= std::min(s, max_support_); ++k) {
      if (pmf_[k] > 0.0 && reachable[s - k]) {
        reachable[s] = 1;
        break;
      }
    }
  }
  return reachable[target] != 0;
}

OffspringModel OffspringModel::with_normalizer_scale(double scale) const {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("normalizer scale must be positive");
  OffspringModel m = *this;
  m.normalizer_scale_ = scale;
  return m;
}

nlohmann::json OffspringModel::to_json() const {
  nlohmann::json j;
  j["family"] = family_ == Family::StablePower ? "stable" : "pmf";
  j["name"] = name_;
  j["gamma"] = gamma_;
  j["kappa_or_c"] = kappa_;
  if (family_ == Family::FiniteVariancePmf) j["pmf"] = pmf_;
  j["truncation_K"] = truncation_k();
  if (normalizer_scale_ != 1.0) j["normalizer_scale"] = normalizer_scale_;
  return j;
}

OffspringModel OffspringModel::from_json(const nlohmann::json& j) {
  const std::string family = j.at("family").get<std::string>();
  OffspringModel m = [&] {
    if (family == "stable") return stable(j.at("gamma").get<double>(), j.at("kappa_or_c").get<double>());
    if (family == "pmf") return finite_variance(j.at("pmf").get<std::vector<double>>(), j.value("name", "pmf"));
    throw std::invalid_argument("unknown offspring family '" + family + "'");
  }();
  if (j.contains("name")) m.name_ = j["name"].get<std::string>();
  if (j.contains("normalizer_scale")) m = m.with_normalizer_scale(j["normalizer_scale"].get<double>());
  return m;
}

}  // namespace bgw
