#pragma once

#include <limits>
#include <string>
#include <vector>

namespace bandgap {

struct Interval {
  double lo = 0;
  double hi = 0;  // +infinity for a half-line
};

// Union of closed intervals, kept sorted and disjoint.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<Interval> parts);

  static IntervalSet single(double lo, double hi) { return IntervalSet({{lo, hi}}); }
  static IntervalSet half_line(double lo) { return IntervalSet({{lo, kInf}}); }

  void add(double lo, double hi);
  void add(const IntervalSet& other);
  const std::vector<Interval>& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }
  bool contains(double x) const;
  IntervalSet clip(double a, double b) const;
  // Open gaps between consecutive parts.
  std::vector<Interval> gaps() const;
  // Distance from x to the set; +infinity when empty.
  double distance(double x) const;
  IntervalSet shifted(double delta) const;
  std::string to_string() const;

  static constexpr double kInf = std::numeric_limits<double>::infinity();

 private:
  void normalize();
  std::vector<Interval> parts_;
};

// max(dist([a,b] ∩ X, Y), dist([a,b] ∩ Y, X)), with distances involving an
// empty set taken as 0. Exact: evaluated at interval endpoints and gap midpoints.
double hausdorff_interval_dist(const IntervalSet& x, const IntervalSet& y, double a, double b);

}  // namespace bandgap
