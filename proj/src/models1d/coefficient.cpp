#include <algorithm>
#include <cmath>

#include "bandgap/models1d.hpp"

namespace bandgap {

PiecewiseCoefficient::PiecewiseCoefficient(RVec breaks, RVec values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
  if (breaks_.empty() || breaks_.size() != values_.size())
    throw ModelError("piecewise coefficient needs one value per breakpoint");
  for (std::size_t i = 0; i < breaks_.size(); ++i) {
    if (breaks_[i] < 0.0 || breaks_[i] >= 1.0) throw ModelError("breakpoints must lie in [0, 1)");
    if (i > 0 && !(breaks_[i] > breaks_[i - 1])) throw ModelError("breakpoints must be strictly increasing");
    if (!std::isfinite(values_[i])) throw ModelError("coefficient values must be finite");
  }
}

double PiecewiseCoefficient::value(double y) const {
  y -= std::floor(y);
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), y);
  if (it == breaks_.begin()) return values_.back();
  return values_[std::size_t(it - breaks_.begin()) - 1];
}

namespace {

// ∫₀^x c for x in [0, 1].
double antiderivative(const RVec& b, const RVec& v, double x) {
  double s = 0;
  double pos = 0;
  // Segment [0, b[0]) belongs to the wrapping last piece.
  const std::size_t n = b.size();
  std::vector<std::pair<double, double>> segs;  // (end, value)
  segs.push_back({b[0], v[n - 1]});
  for (std::size_t i = 0; i < n; ++i) segs.push_back({i + 1 < n ? b[i + 1] : 1.0, v[i]});
  for (const auto& [end, val] : segs) {
    const double e = std::min(end, x);
    if (e > pos) s += (e - pos) * val;
    pos = std::max(pos, end);
    if (pos >= x) break;
  }
  return s;
}

}  // namespace

double PiecewiseCoefficient::integral(double x0, double x1) const {
  if (x1 < x0) throw ModelError("integral bounds reversed");
  const double total = antiderivative(breaks_, values_, 1.0);
  auto F = [&](double x) {
    const double k = std::floor(x);
    return k * total + antiderivative(breaks_, values_, x - k);
  };
  return F(x1) - F(x0);
}

double PiecewiseCoefficient::harmonic_mean() const {
  RVec inv(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0)) throw ModelError("harmonic mean needs positive values");
    inv[i] = 1.0 / values_[i];
  }
  return 1.0 / PiecewiseCoefficient(breaks_, inv).mean();
}

double PiecewiseCoefficient::min_value() const { return *std::min_element(values_.begin(), values_.end()); }

Grid1D::Grid1D(int m) : elements(m) {
  if (m < 4) throw ModelError("a 1D grid needs at least 4 elements");
}

void Grid1D::check_aligned(const PiecewiseCoefficient& c) const {
  for (double b : c.breaks()) {
    const double s = b * elements;
    if (std::fabs(s - std::round(s)) > 1e-9) throw ModelError("misaligned mesh: breakpoint is not a mesh node");
  }
}

}  // namespace bandgap
