#include "bgw/excursion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

namespace bgw {

Excursion::Excursion(std::vector<double> values, double duration)
    : values_(std::move(values)), duration_(duration), height_(0.0) {
  if (values_.size() < 3) throw std::invalid_argument("Excursion: need at least 2 steps");
  if (!(duration_ > 0.0)) throw std::invalid_argument("Excursion: duration must be positive");
  if (values_.front() != 0.0 || values_.back() != 0.0) throw std::invalid_argument("Excursion: must start and end at 0");
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("Excursion: values must be finite and >= 0");
  }
  height_ = *std::max_element(values_.begin(), values_.end());
}

double Excursion::area() const {
  CompensatedSum sum;
  for (double v : values_) sum.add(v);  // end points are zero
  return sum.value() * dt();
}

Excursion sample_excursion(std::size_t m, Rng& rng) {
  if (m < 2) throw std::invalid_argument("sample_excursion: m must be >= 2");
  std::normal_distribution<double> normal;
  std::vector<double> walk(m + 1);
  std::vector<double> values(m + 1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (;;) {
    walk[0] = 0.0;
    for (std::size_t k = 1; k <= m; ++k) walk[k] = walk[k - 1] + normal(rng);
    const double drift = walk[m] / static_cast<double>(m);
    for (std::size_t k = 0; k <= m; ++k) walk[k] -= drift * static_cast<double>(k);
    const auto argmin = static_cast<std::size_t>(std::min_element(walk.begin(), walk.end() - 1) - walk.begin());
    const double low = walk[argmin];
    bool degenerate = false;
    for (std::size_t k = 0; k <= m; ++k) {
      values[k] = (walk[(argmin + k) % m] - low) * scale;
      if (k != 0 && k != m && !(values[k] > 0.0)) degenerate = true;
    }
    values[m] = 0.0;
    if (!degenerate) return Excursion(values, 1.0);
  }
}

std::vector<LevelComponent> components_above(const Excursion& e, double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("components_above: level must be >= 0");
  const auto& v = e.values();
  const double dt = e.dt();
  std::vector<LevelComponent> out;
  std::size_t i = 1;
  const std::size_t m = e.m();
  while (i < m) {
    if (!(v[i] > r)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    double top = v[i];
    while (j + 1 < m && v[j + 1] > r) top = std::max(top, v[++j]);
    const double start = static_cast<double>(i) - (v[i] - r) / (v[i] - v[i - 1]);
    const double end = static_cast<double>(j) + (v[j] - r) / (v[j] - v[j + 1]);
    out.push_back({r, i, j, (end - start) * dt, top - r});
    i = j + 1;
  }
  return out;
}

namespace {

class LevelForest {
 public:
  explicit LevelForest(const std::vector<double>& v)
      : v_(v), parent_(v.size(), -1), rank_(v.size(), 0), left_(v.size()), right_(v.size()), top_(v.size()),
        slot_(v.size(), -1) {}

  void activate(std::size_t i) {
    parent_[i] = static_cast<std::int64_t>(i);
    left_[i] = right_[i] = i;
    top_[i] = v_[i];
    slot_[i] = static_cast<std::int64_t>(roots_.size());
    roots_.push_back(i);
    if (i > 0 && parent_[i - 1] >= 0) unite(i - 1, i);
    if (i + 1 < v_.size() && parent_[i + 1] >= 0) unite(i, i + 1);
  }

  const std::vector<std::size_t>& roots() const { return roots_; }
  std::size_t left(std::size_t root) const { return left_[root]; }
  std::size_t right(std::size_t root) const { return right_[root]; }
  double top(std::size_t root) const { return top_[root]; }

 private:
  std::size_t find(std::size_t x) {
    auto root = static_cast<std::size_t>(parent_[x]);
    while (static_cast<std::size_t>(parent_[root]) != root) root = static_cast<std::size_t>(parent_[root]);
    while (x != root) {
      const auto next = static_cast<std::size_t>(parent_[x]);
      parent_[x] = static_cast<std::int64_t>(root);
      x = next;
    }
    return root;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    if (rank_[a] == rank_[b]) ++rank_[a];
    parent_[b] = static_cast<std::int64_t>(a);
    left_[a] = std::min(left_[a], left_[b]);
    right_[a] = std::max(right_[a], right_[b]);
    top_[a] = std::max(top_[a], top_[b]);
    const auto hole = static_cast<std::size_t>(slot_[b]);
    roots_[hole] = roots_.back();
    slot_[roots_[hole]] = static_cast<std::int64_t>(hole);
    roots_.pop_back();
    slot_[b] = -1;
  }

  const std::vector<double>& v_;
  std::vector<std::int64_t> parent_;
  std::vector<std::uint8_t> rank_;
  std::vector<std::size_t> left_;
  std::vector<std::size_t> right_;
  std::vector<double> top_;
  std::vector<std::int64_t> slot_;
  std::vector<std::size_t> roots_;
};

}  // namespace

double psi_level_sweep(const Excursion& e, const TollFunction& toll, std::size_t levels, double height_scale) {
  if (levels == 0) throw std::invalid_argument("psi_level_sweep: need at least one level");
  const auto& v = e.values();
  const std::size_t m = e.m();
  const double dt = e.dt();
  const double step = e.height() / static_cast<double>(levels);

  std::vector<std::size_t> order(m - 1);
  std::iota(order.begin(), order.end(), std::size_t{1});
  std::sort(order.begin(), order.end(), [&v](std::size_t a, std::size_t b) { return v[a] > v[b]; });

  LevelForest forest(v);
  std::size_t next = 0;
  CompensatedSum total;
  for (std::size_t k = levels; k-- > 0;) {
    const double r = (static_cast<double>(k) + 0.5) * step;
    while (next < order.size() && v[order[next]] > r) forest.activate(order[next++]);
    CompensatedSum level_sum;
    for (std::size_t root : forest.roots()) {
      const std::size_t i = forest.left(root);
      const std::size_t j = forest.right(root);
      const double start = static_cast<double>(i) - (v[i] - r) / (v[i] - v[i - 1]);
      const double end = static_cast<double>(j) + (v[j] - r) / (v[j] - v[j + 1]);
      const double duration = (end - start) * dt;
      const double height = forest.top(root) - r;
      const double value = toll(duration, height_scale * height);
      if (!std::isfinite(value)) {
        throw LevelTollNotFinite("psi_level_sweep: toll '" + toll.name() + "' is not finite at level " +
                                     std::to_string(r) + " on component [" + std::to_string(i) + ", " +
                                     std::to_string(j) + "]",
                                 {r, i, j, duration, height});
      }
      level_sum.add(duration * value);
    }
    total.add(level_sum.value());
  }
  return step * total.value();
}

void write_excursion_csv(std::ostream& out, const Excursion& e) {
  out << "t,value\n";
  const auto& v = e.values();
  for (std::size_t k = 0; k < v.size(); ++k) out << static_cast<double>(k) * e.dt() << ',' << v[k] << '\n';
}

}  // namespace bgw
