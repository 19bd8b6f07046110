#include "bandgap/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bandgap {

IntervalSet::IntervalSet(std::vector<Interval> parts) : parts_(std::move(parts)) { normalize(); }

void IntervalSet::normalize() {
  for (const Interval& p : parts_)
    if (!(p.lo <= p.hi) || std::isnan(p.lo)) throw std::invalid_argument("interval with lo > hi");
  std::sort(parts_.begin(), parts_.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  for (const Interval& p : parts_) {
    if (!merged.empty() && p.lo <= merged.back().hi)
      merged.back().hi = std::max(merged.back().hi, p.hi);
    else
      merged.push_back(p);
  }
  parts_ = std::move(merged);
}

void IntervalSet::add(double lo, double hi) {
  parts_.push_back({lo, hi});
  normalize();
}

void IntervalSet::add(const IntervalSet& other) {
  parts_.insert(parts_.end(), other.parts_.begin(), other.parts_.end());
  normalize();
}

bool IntervalSet::contains(double x) const {
  for (const Interval& p : parts_)
    if (p.lo <= x && x <= p.hi) return true;
  return false;
}

IntervalSet IntervalSet::clip(double a, double b) const {
  std::vector<Interval> out;
  for (const Interval& p : parts_) {
    const double lo = std::max(a, p.lo), hi = std::min(b, p.hi);
    if (lo <= hi) out.push_back({lo, hi});
  }
  return IntervalSet(std::move(out));
}

std::vector<Interval> IntervalSet::gaps() const {
  std::vector<Interval> g;
  for (std::size_t i = 1; i < parts_.size(); ++i) g.push_back({parts_[i - 1].hi, parts_[i].lo});
  return g;
}

double IntervalSet::distance(double x) const {
  double d = kInf;
  for (const Interval& p : parts_) {
    if (x < p.lo)
      d = std::min(d, p.lo - x);
    else if (x > p.hi)
      d = std::min(d, x - p.hi);
    else
      return 0.0;
  }
  return d;
}

IntervalSet IntervalSet::shifted(double delta) const {
  std::vector<Interval> out = parts_;
  for (Interval& p : out) {
    p.lo += delta;
    p.hi += delta;
  }
  return IntervalSet(std::move(out));
}

std::string IntervalSet::to_string() const {
  std::ostringstream os;
  os.precision(10);
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) os << " U ";
    os << '[' << parts_[i].lo << ", ";
    if (std::isinf(parts_[i].hi))
      os << "inf)";
    else
      os << parts_[i].hi << ']';
  }
  return parts_.empty() ? "{}" : os.str();
}

namespace {

// sup over x in x_set of dist(x, y_set); both nonempty, x_set bounded.
double directed(const IntervalSet& x_set, const IntervalSet& y_set) {
  double worst = 0;
  std::vector<double> mids;
  for (const Interval& g : y_set.gaps()) mids.push_back(0.5 * (g.lo + g.hi));
  for (const Interval& p : x_set.parts()) {
    worst = std::max({worst, y_set.distance(p.lo), y_set.distance(p.hi)});
    for (double m : mids)
      if (p.lo < m && m < p.hi) worst = std::max(worst, y_set.distance(m));
  }
  return worst;
}

}  // namespace

double hausdorff_interval_dist(const IntervalSet& x, const IntervalSet& y, double a, double b) {
  if (a > b) throw std::invalid_argument("window with a > b");
  const IntervalSet xw = x.clip(a, b), yw = y.clip(a, b);
  const double d1 = (xw.empty() || y.empty()) ? 0.0 : directed(xw, y);
  const double d2 = (yw.empty() || x.empty()) ? 0.0 : directed(yw, x);
  return std::max(d1, d2);
}

}  // namespace bandgap
