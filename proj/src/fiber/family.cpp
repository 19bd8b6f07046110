#include <algorithm>
#include <cmath>

#include "bandgap/fiber.hpp"

namespace bandgap {

namespace {

constexpr double kFdSecondStep = 1e-3;

}  // namespace

RVec FiberFamily::unit(int j, double h) const {
  RVec t(theta_dim(), 0.0);
  t[j] = h;
  return t;
}

Matrix fd_aprime(const FiberFamily& fam, int j) {
  const double h = FiberFamily::kFdStep;
  RVec tp(fam.theta_dim(), 0.0), tm(fam.theta_dim(), 0.0);
  tp[j] = h;
  tm[j] = -h;
  Matrix d = fam.assemble_a(tp) - fam.assemble_a(tm);
  d *= cplx(1.0 / (2 * h));
  symmetrize(d);
  return d;
}

Matrix fd_asecond(const FiberFamily& fam, int j, int k) {
  const double h = kFdSecondStep;
  const int n = fam.theta_dim();
  auto at = [&](double sj, double sk) {
    RVec t(n, 0.0);
    t[j] += sj * h;
    t[k] += sk * h;
    return fam.assemble_a(t);
  };
  Matrix d;
  if (j == k) {
    d = at(1, 0) + at(-1, 0) - 2.0 * fam.assemble_a(RVec(n, 0.0));
    d *= cplx(1.0 / (2 * h * h));
  } else {
    d = at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1);
    d *= cplx(1.0 / (8 * h * h));
  }
  symmetrize(d);
  return d;
}

Matrix FiberFamily::assemble_aprime(int j) const { return fd_aprime(*this, j); }
Matrix FiberFamily::assemble_asecond(int j, int k) const { return fd_asecond(*this, j, k); }
Matrix FiberFamily::assemble_a_derivative(const RVec& theta, int j) const {
  const double h = kFdStep * std::max(1.0, std::fabs(theta[j]));
  RVec tp = theta, tm = theta;
  tp[j] += h;
  tm[j] -= h;
  Matrix d = assemble_a(tp) - assemble_a(tm);
  d *= cplx(1.0 / (2 * h));
  symmetrize(d);
  return d;
}

Matrix FiberFamily::transfer(const RVec&) const { return Matrix::identity(basis_dim()); }

ThetaBox FiberFamily::theta_domain() const {
  return {RVec(theta_dim(), -M_PI), RVec(theta_dim(), M_PI)};
}

std::vector<RVec> theta_grid(int n, int points) {
  if (points < 1 || n < 1 || n > 2) throw FrameworkError("theta grid needs n in {1,2} and points >= 1");
  RVec axis(points);
  for (int i = 0; i < points; ++i) axis[i] = points == 1 ? 0.0 : -M_PI + 2 * M_PI * i / (points - 1);
  std::vector<RVec> g;
  if (n == 1) {
    for (double t : axis) g.push_back({t});
  } else {
    for (double a : axis)
      for (double b : axis) g.push_back({a, b});
  }
  return g;
}

std::vector<RVec> theta_wedge_grid(int points_per_dim) {
  if (points_per_dim < 3 || points_per_dim % 2 == 0)
    throw FrameworkError("wedge grid needs an odd point count >= 3");
  const int half = points_per_dim / 2;
  const double step = M_PI / half;
  std::vector<RVec> g;
  for (int i = 0; i <= half; ++i)
    for (int j = 0; j <= i; ++j) g.push_back({i * step, j * step});
  return g;
}

}  // namespace bandgap
