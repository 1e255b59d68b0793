#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "bgw/functionals.hpp"
#include "bgw/rng.hpp"

namespace bgw {

/// Nonnegative path on a uniform grid of m steps over [0, duration], zero at
/// both ends; linear between grid points. Codes a continuum tree: the
/// duration is its mass and the maximum its height.
class Excursion {
 public:
  Excursion(std::vector<double> values, double duration = 1.0);

  std::size_t m() const { return values_.size() - 1; }
  double duration() const { return duration_; }
  double dt() const { return duration_ / static_cast<double>(m()); }
  double height() const { return height_; }
  const std::vector<double>& values() const { return values_; }

  /// Trapezoid integral of the path, int_0^duration e(t) dt.
  double area() const;

 private:
  std::vector<double> values_;
  double duration_;
  double height_;
};

struct LevelComponent {
  double level;
  std::size_t start;  // first grid index strictly above the level
  std::size_t end;    // last grid index strictly above the level
  double duration;
  double height;      // max over the component minus the level
};

/// Normalized Brownian excursion: Vervaat rotation of an m-step Gaussian
/// random-walk bridge at its minimum, scaled by 1/sqrt(m).
Excursion sample_excursion(std::size_t m, Rng& rng);

/// Maximal intervals where the interpolated path exceeds r, with crossing
/// times found by linear interpolation.
std::vector<LevelComponent> components_above(const Excursion& e, double r);

class LevelTollNotFinite : public std::domain_error {
 public:
  LevelTollNotFinite(const std::string& what, LevelComponent component)
      : std::domain_error(what), component_(component) {}
  const LevelComponent& component() const { return component_; }

 private:
  LevelComponent component_;
};

/// Midpoint rule over K levels in (0, max e) of
///   r -> sum over components c above r of duration(c) f(duration(c), height_scale * height(c)).
/// Sweeps levels downward with a union-find over grid points, so each level
/// costs O(#components) rather than O(m).
double psi_level_sweep(const Excursion& e, const TollFunction& toll, std::size_t levels = 1024,
                       double height_scale = 1.0);

/// CSV dump "t,value".
void write_excursion_csv(std::ostream& out, const Excursion& e);

}  // namespace bgw
