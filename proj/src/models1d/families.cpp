#include <cmath>
#include <sstream>

#include "bandgap/models1d.hpp"

namespace bandgap {

namespace {

using T = SparseMatrix::Triplet;

int wrap(int i, int m) { return (i % m + m) % m; }

template <class Elem>
SparseMatrix assemble(const Grid1D& g, Elem elem) {
  const int m = g.elements;
  std::vector<T> t;
  for (int e = 0; e < m; ++e) {
    const int nodes[2] = {e, wrap(e + 1, m)};
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        const cplx v = elem(e, r, c);
        if (v != cplx(0)) t.push_back({nodes[r], nodes[c], v});
      }
  }
  return SparseMatrix::from_triplets(m, std::move(t));
}

// i (G^T − G)
SparseMatrix first_order(const SparseMatrix& g) { return combine(cplx(0, 1), g.adjoint(), cplx(0, -1), g); }

SparseMatrix quadratic(const SparseMatrix& k, const SparseMatrix& a1, const SparseMatrix& m2, double t) {
  return combine(1.0, combine(1.0, k, t, a1), t * t, m2);
}

RVec indicator_outside(const Grid1D& g, double lo, double hi) {
  RVec w(g.elements);
  for (int e = 0; e < g.elements; ++e) {
    const double mid = (e + 0.5) * g.h();
    w[e] = (mid > lo && mid < hi) ? 0.0 : 1.0;
  }
  return w;
}

}  // namespace

SparseMatrix P1Forms::stiffness(const Grid1D& g, const RVec& w) {
  const double h = g.h();
  return assemble(g, [&](int e, int r, int c) { return cplx(w[e] / h * (r == c ? 1.0 : -1.0)); });
}

SparseMatrix P1Forms::gradient_mass(const Grid1D& g, const RVec& w) {
  return assemble(g, [&](int e, int, int c) { return cplx(0.5 * w[e] * (c == 0 ? -1.0 : 1.0)); });
}

SparseMatrix P1Forms::consistent_mass(const Grid1D& g, const RVec& w) {
  const double h = g.h();
  return assemble(g, [&](int e, int r, int c) { return cplx(w[e] * h / 6.0 * (r == c ? 2.0 : 1.0)); });
}

SparseMatrix P1Forms::lumped_mass(const Grid1D& g, const RVec& w) {
  const double h = g.h();
  return assemble(g, [&](int e, int r, int c) { return cplx(r == c ? w[e] * h / 2.0 : 0.0); });
}

RVec P1Forms::element_values(const Grid1D& g, const PiecewiseCoefficient& c) {
  g.check_aligned(c);
  RVec v(g.elements);
  for (int e = 0; e < g.elements; ++e) v[e] = c.value((e + 0.5) * g.h());
  return v;
}

Classical1D::Classical1D(PiecewiseCoefficient a, Grid1D grid) : a_(std::move(a)), grid_(grid) {
  const RVec w = P1Forms::element_values(grid_, a_);
  for (double x : w)
    if (!(x > 0)) throw ModelError("classical coefficient must be positive");
  k_ = P1Forms::stiffness(grid_, w);
  g_ = P1Forms::gradient_mass(grid_, w);
  m_ = P1Forms::consistent_mass(grid_, w);
  lumped_ = P1Forms::lumped_mass(grid_, RVec(grid_.elements, 1.0));
}

SparseMatrix Classical1D::assemble_a_sparse(const RVec& theta) const {
  return quadratic(k_, first_order(g_), m_, theta.at(0));
}
SparseMatrix Classical1D::assemble_b_sparse(const RVec&) const { return lumped_; }
SparseMatrix Classical1D::assemble_d_sparse(const RVec&) const { return lumped_; }
Matrix Classical1D::assemble_aprime(int) const { return first_order(g_).to_dense(); }
Matrix Classical1D::assemble_asecond(int, int) const { return m_.to_dense(); }

Difference1D::Difference1D(PiecewiseCoefficient d, Grid1D grid) : d_(std::move(d)), grid_(grid) {
  const RVec w = P1Forms::element_values(grid_, d_);
  RVec dm(grid_.elements), mm(grid_.elements, grid_.h());
  for (int e = 0; e < grid_.elements; ++e) {
    if (!(w[e] > 0)) throw ModelError("difference coefficient must be positive");
    dm[e] = w[e] * grid_.h();
  }
  dmass_ = SparseMatrix::diagonal(dm);
  mass_ = SparseMatrix::diagonal(mm);
}

SparseMatrix Difference1D::assemble_a_sparse(const RVec& theta) const {
  const double s = std::sin(0.5 * theta.at(0));
  return scale(4.0 * s * s, dmass_);
}
SparseMatrix Difference1D::assemble_b_sparse(const RVec&) const { return mass_; }
SparseMatrix Difference1D::assemble_d_sparse(const RVec&) const { return mass_; }
Matrix Difference1D::assemble_aprime(int) const { return Matrix(basis_dim(), basis_dim()); }
Matrix Difference1D::assemble_asecond(int, int) const { return dmass_.to_dense(); }

std::optional<DeclaredDefect> Difference1D::declared_defect() const {
  return DeclaredDefect{Matrix(basis_dim(), 0), Matrix::identity(basis_dim())};
}

DiffDiff1D::DiffDiff1D(PiecewiseCoefficient a, PiecewiseCoefficient d, Grid1D grid)
    : Classical1D(std::move(a), grid), d_(std::move(d)) {
  const RVec w = P1Forms::element_values(grid_, d_);
  for (double x : w)
    if (x < 0) throw ModelError("nonlocal coefficient must be nonnegative");
  dmass_ = P1Forms::consistent_mass(grid_, w);
}

SparseMatrix DiffDiff1D::assemble_a_sparse(const RVec& theta) const {
  // |1 − e^{iθ}|² = 2 − 2 cos θ
  return combine(1.0, Classical1D::assemble_a_sparse(theta), 2.0 - 2.0 * std::cos(theta.at(0)), dmass_);
}

Matrix DiffDiff1D::assemble_asecond(int j, int k) const {
  return Classical1D::assemble_asecond(j, k) + dmass_.to_dense();
}

Magnetic1D::Magnetic1D(PiecewiseCoefficient potential, PiecewiseCoefficient v, Grid1D grid)
    : a_(std::move(potential)), v_(std::move(v)), grid_(grid) {
  grid_.check_aligned(a_);
  const RVec vw = P1Forms::element_values(grid_, v_);
  for (double x : vw)
    if (!(x > 0)) throw ModelError("magnetic model needs a uniformly positive V");
  elem_flux_.resize(grid_.elements);
  for (int e = 0; e < grid_.elements; ++e) elem_flux_[e] = a_.integral(e * grid_.h(), (e + 1) * grid_.h());
  flux_ = a_.mean();
  const double k = std::round(flux_ / (2 * M_PI));
  if (std::fabs(flux_ - 2 * M_PI * k) <= 1e-8) {
    std::ostringstream os;
    os << "magnetic potential rejected: its mean " << flux_
       << " is an integer multiple of 2*pi, so the degeneracy sits at theta = 0";
    throw ModelError(os.str());
  }
  bmass_ = P1Forms::lumped_mass(grid_, vw);
  mass_ = P1Forms::lumped_mass(grid_, RVec(grid_.elements, 1.0));
}

double Magnetic1D::expected_theta0() const { return wrap_angle(flux_); }

SparseMatrix Magnetic1D::link_matrix(double theta, int derivative) const {
  const int m = grid_.elements;
  const double h = grid_.h();
  std::vector<T> t;
  for (int e = 0; e < m; ++e) {
    const int i = e, j = wrap(e + 1, m);
    const double phi = h * theta - elem_flux_[e];
    cplx up = -std::exp(cplx(0, phi)) / h;
    cplx lo = -std::exp(cplx(0, -phi)) / h;
    if (derivative == 1) {
      up *= cplx(0, h);
      lo *= cplx(0, -h);
    } else if (derivative == 2) {
      up *= -0.5 * h * h;
      lo *= -0.5 * h * h;
    }
    t.push_back({i, j, up});
    t.push_back({j, i, lo});
    if (derivative == 0) {
      t.push_back({i, i, 1.0 / h});
      t.push_back({j, j, 1.0 / h});
    }
  }
  return SparseMatrix::from_triplets(m, std::move(t));
}

SparseMatrix Magnetic1D::assemble_a_sparse(const RVec& theta) const { return link_matrix(theta.at(0), 0); }
SparseMatrix Magnetic1D::assemble_b_sparse(const RVec&) const { return bmass_; }
SparseMatrix Magnetic1D::assemble_d_sparse(const RVec&) const { return mass_; }
Matrix Magnetic1D::assemble_a_derivative(const RVec& theta, int) const {
  return link_matrix(theta.at(0), 1).to_dense();
}
Matrix Magnetic1D::assemble_aprime(int) const { return link_matrix(0.0, 1).to_dense(); }
Matrix Magnetic1D::assemble_asecond(int, int) const { return link_matrix(0.0, 2).to_dense(); }

HighContrast1D::HighContrast1D(double lo, double hi, Grid1D grid) : lo_(lo), hi_(hi), grid_(grid) {
  if (!(lo > 0 && hi < 1 && lo < hi)) throw ModelError("inclusion must lie strictly inside the cell");
  grid_.check_aligned(PiecewiseCoefficient({lo, hi}, {1.0, 0.0}));
  const int m = grid_.elements;
  const int first = int(std::lround(lo * m)), last = int(std::lround(hi * m));
  if (last - first < 2) throw ModelError("inclusion must contain an interior mesh node");
  for (int i = first + 1; i < last; ++i) interior_.push_back(i);
  const RVec out = indicator_outside(grid_, lo, hi);
  RVec in(m);
  for (int e = 0; e < m; ++e) in[e] = 1.0 - out[e];
  k_out_ = P1Forms::stiffness(grid_, out);
  g_out_ = P1Forms::gradient_mass(grid_, out);
  m_out_ = P1Forms::consistent_mass(grid_, out);
  k_in_ = P1Forms::stiffness(grid_, in);
  g_in_ = P1Forms::gradient_mass(grid_, in);
  m_in_ = P1Forms::consistent_mass(grid_, in);
  lumped_ = P1Forms::lumped_mass(grid_, RVec(m, 1.0));
}

SparseMatrix HighContrast1D::assemble_a_sparse(const RVec& theta) const {
  return quadratic(k_out_, first_order(g_out_), m_out_, theta.at(0));
}
SparseMatrix HighContrast1D::assemble_b_sparse(const RVec& theta) const {
  return combine(1.0, quadratic(k_in_, first_order(g_in_), m_in_, theta.at(0)), 1.0, lumped_);
}
SparseMatrix HighContrast1D::assemble_d_sparse(const RVec&) const { return lumped_; }
Matrix HighContrast1D::assemble_aprime(int) const { return first_order(g_out_).to_dense(); }
Matrix HighContrast1D::assemble_asecond(int, int) const { return m_out_.to_dense(); }

Matrix HighContrast1D::transfer(const RVec& theta) const {
  Matrix e = Matrix::identity(basis_dim());
  for (int i : interior_) e(i, i) = std::exp(cplx(0, -theta.at(0) * grid_.node(i)));
  return e;
}

std::optional<DeclaredDefect> HighContrast1D::declared_defect() const {
  const int n = basis_dim();
  DeclaredDefect d{Matrix(n, int(interior_.size())), Matrix(n, 1)};
  for (std::size_t k = 0; k < interior_.size(); ++k) d.v_star(interior_[k], int(k)) = 1.0;
  for (int i = 0; i < n; ++i) d.z(i, 0) = 1.0;
  return d;
}

Classical1D classical_1d(const PiecewiseCoefficient& a, const Grid1D& grid) { return Classical1D(a, grid); }
Difference1D difference_1d(const PiecewiseCoefficient& d, const Grid1D& grid) { return Difference1D(d, grid); }
DiffDiff1D diffdiff_1d(const PiecewiseCoefficient& a, const PiecewiseCoefficient& d, const Grid1D& grid) {
  return DiffDiff1D(a, d, grid);
}
Magnetic1D magnetic_1d(const PiecewiseCoefficient& potential, const PiecewiseCoefficient& v, const Grid1D& grid) {
  return Magnetic1D(potential, v, grid);
}
HighContrast1D highcontrast_1d(double lo, double hi, const Grid1D& grid) { return HighContrast1D(lo, hi, grid); }

double wrap_angle(double t) {
  double r = std::fmod(t, 2 * M_PI);
  if (r <= -M_PI) r += 2 * M_PI;
  if (r > M_PI) r -= 2 * M_PI;
  return r;
}

Theta0Result find_theta0(const FiberFamily& fam, int grid_points, double refine_tol) {
  if (fam.theta_dim() != 1) throw FrameworkError("find_theta0 expects a one-dimensional family");
  auto lowest = [&](double t) {
    const RVec th{t};
    const SparseMatrix d = fam.assemble_d_sparse(th);
    // a + d is definite even where a is singular.
    const SparseMatrix k = combine(1.0, fam.assemble_a_sparse(th), 1.0, d);
    return lowest_eigs(k, d, 1).values[0] - 1.0;
  };
  const double step = 2 * M_PI / grid_points;
  int best = 0;
  double best_val = 1e300;
  for (int i = 0; i < grid_points; ++i) {
    const double v = lowest(-M_PI + i * step);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = -M_PI + (best - 1) * step, b = -M_PI + (best + 1) * step;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = lowest(c), fd = lowest(d);
  while (b - a > std::max(refine_tol, 1e-4)) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = lowest(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = lowest(d);
    }
  }
  auto slope = [&](double t) {
    const RVec th{t};
    const SparseMatrix dm = fam.assemble_d_sparse(th);
    const LowestEigs le = lowest_eigs(combine(1.0, fam.assemble_a_sparse(th), 1.0, dm), dm, 1, true);
    const CVec u = le.vectors.col(0);
    return dot(u, fam.assemble_a_derivative(th, 0) * u).real();
  };
  const double sa = slope(a), sb = slope(b);
  if (sa < 0 && sb > 0) {
    while (b - a > refine_tol) {
      const double mid = 0.5 * (a + b);
      const double sm = slope(mid);
      if (sm == 0.0) {
        a = b = mid;
        break;
      }
      (sm < 0 ? a : b) = mid;
    }
  }
  const double t = 0.5 * (a + b);
  Theta0Result r{wrap_angle(t), lowest(t)};
  if (r.min_eig > 1e-9) throw FrameworkError("no degeneracy point: smallest eigenvalue of a_theta stays positive");
  return r;
}

}  // namespace bandgap
