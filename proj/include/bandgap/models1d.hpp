#pragma once

#include <string>
#include <vector>

#include "bandgap/fiber.hpp"

namespace bandgap {

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Piecewise-constant 1-periodic coefficient. Piece i covers
// [breaks[i], breaks[i+1]) and the last piece wraps around to 1 + breaks[0].
class PiecewiseCoefficient {
 public:
  PiecewiseCoefficient(RVec breaks, RVec values);
  static PiecewiseCoefficient constant(double v) { return PiecewiseCoefficient({0.0}, {v}); }
  // Value v0 on [0, split), v1 on [split, 1).
  static PiecewiseCoefficient two_phase(double v0, double v1, double split = 0.5) {
    return PiecewiseCoefficient({0.0, split}, {v0, v1});
  }

  double value(double y) const;
  double integral(double x0, double x1) const;  // exact, x0 <= x1
  double mean() const { return integral(0.0, 1.0); }
  double harmonic_mean() const;
  double min_value() const;
  const RVec& breaks() const { return breaks_; }
  const RVec& values() const { return values_; }

 private:
  RVec breaks_, values_;
};

// Uniform periodic mesh of [0, 1) with M elements.
struct Grid1D {
  int elements = 0;
  explicit Grid1D(int m);
  double h() const { return 1.0 / elements; }
  double node(int i) const { return i * h(); }
  // Throws ModelError("misaligned mesh") unless every breakpoint is a mesh node.
  void check_aligned(const PiecewiseCoefficient& c) const;
};

// Per-element P1 pieces on the periodic mesh.
struct P1Forms {
  static SparseMatrix stiffness(const Grid1D& g, const RVec& w);
  // G[r][c] = ∫ w φ_c' φ_r
  static SparseMatrix gradient_mass(const Grid1D& g, const RVec& w);
  static SparseMatrix consistent_mass(const Grid1D& g, const RVec& w);
  static SparseMatrix lumped_mass(const Grid1D& g, const RVec& w);
  static RVec element_values(const Grid1D& g, const PiecewiseCoefficient& c);
};

// a_θ(u, ũ) = ∫ A (u' + iθu)(ũ' + iθũ)^*, b = d = ∫ u ũ^*.
class Classical1D : public FiberFamily {
 public:
  Classical1D(PiecewiseCoefficient a, Grid1D grid);
  std::string name() const override { return "classical1d"; }
  int theta_dim() const override { return 1; }
  int basis_dim() const override { return grid_.elements; }
  SparseMatrix assemble_a_sparse(const RVec& theta) const override;
  SparseMatrix assemble_b_sparse(const RVec& theta) const override;
  SparseMatrix assemble_d_sparse(const RVec& theta) const override;
  Matrix assemble_aprime(int j) const override;
  Matrix assemble_asecond(int j, int k) const override;
  const PiecewiseCoefficient& coefficient() const { return a_; }

 protected:
  PiecewiseCoefficient a_;
  Grid1D grid_;
  SparseMatrix k_, g_, m_, lumped_;
};

// a_θ = 4 sin²(θ/2) ∫ D u ũ^* on piecewise constants; b = d = L².
class Difference1D : public FiberFamily {
 public:
  Difference1D(PiecewiseCoefficient d, Grid1D grid);
  std::string name() const override { return "difference1d"; }
  int theta_dim() const override { return 1; }
  int basis_dim() const override { return grid_.elements; }
  SparseMatrix assemble_a_sparse(const RVec& theta) const override;
  SparseMatrix assemble_b_sparse(const RVec& theta) const override;
  SparseMatrix assemble_d_sparse(const RVec& theta) const override;
  Matrix assemble_aprime(int j) const override;
  Matrix assemble_asecond(int j, int k) const override;
  std::optional<DeclaredDefect> declared_defect() const override;
  const PiecewiseCoefficient& coefficient() const { return d_; }

 private:
  PiecewiseCoefficient d_;
  Grid1D grid_;
  SparseMatrix dmass_, mass_;
};

// Classical form plus ∫ D |1 − e^{iθ}|² u ũ^*.
class DiffDiff1D : public Classical1D {
 public:
  DiffDiff1D(PiecewiseCoefficient a, PiecewiseCoefficient d, Grid1D grid);
  std::string name() const override { return "diffdiff1d"; }
  SparseMatrix assemble_a_sparse(const RVec& theta) const override;
  Matrix assemble_asecond(int j, int k) const override;

 private:
  PiecewiseCoefficient d_;
  SparseMatrix dmass_;
};

// a_θ[u] = ∫ |u' + iθu − i𝒜u|², b = ∫ V|u|², d = ∫ |u|², discretised with
// gauge-covariant P1 elements: on each element the hat functions carry the
// exact phase of the connection θ − 𝒜, so a_θ[u] = Σ_e h⁻¹|e^{iΦ_e} u_{e+1} − u_e|².
class Magnetic1D : public FiberFamily {
 public:
  Magnetic1D(PiecewiseCoefficient potential, PiecewiseCoefficient v, Grid1D grid);
  std::string name() const override { return "magnetic1d"; }
  int theta_dim() const override { return 1; }
  int basis_dim() const override { return grid_.elements; }
  SparseMatrix assemble_a_sparse(const RVec& theta) const override;
  SparseMatrix assemble_b_sparse(const RVec& theta) const override;
  SparseMatrix assemble_d_sparse(const RVec& theta) const override;
  Matrix assemble_aprime(int j) const override;
  Matrix assemble_asecond(int j, int k) const override;
  Matrix assemble_a_derivative(const RVec& theta, int j) const override;
  bool b_dominates_d() const override { return v_.min_value() >= 1.0; }
  // ∫₀¹ 𝒜 reduced to (−π, π].
  double expected_theta0() const;
  double flux() const { return flux_; }

 private:
  SparseMatrix link_matrix(double theta, int derivative) const;
  PiecewiseCoefficient a_, v_;
  Grid1D grid_;
  RVec elem_flux_;  // ∫_e 𝒜
  double flux_ = 0;
  SparseMatrix bmass_, mass_;
};

// Matrix a = ∫_{□∖B} |(∂+iθ)u|², b = ∫_B |(∂+iθ)u|² + ∫_□ |u|², d = ∫_□ |u|²,
// inclusion B = [lo, hi] strictly inside (0, 1).
class HighContrast1D : public FiberFamily {
 public:
  HighContrast1D(double lo, double hi, Grid1D grid);
  std::string name() const override { return "highcontrast1d"; }
  int theta_dim() const override { return 1; }
  int basis_dim() const override { return grid_.elements; }
  SparseMatrix assemble_a_sparse(const RVec& theta) const override;
  SparseMatrix assemble_b_sparse(const RVec& theta) const override;
  SparseMatrix assemble_d_sparse(const RVec& theta) const override;
  Matrix assemble_aprime(int j) const override;
  Matrix assemble_asecond(int j, int k) const override;
  Matrix transfer(const RVec& theta) const override;
  std::optional<DeclaredDefect> declared_defect() const override;
  const std::vector<int>& interior_nodes() const { return interior_; }
  double inclusion_length() const { return hi_ - lo_; }

 private:
  double lo_, hi_;
  Grid1D grid_;
  std::vector<int> interior_;
  SparseMatrix k_out_, g_out_, m_out_, k_in_, g_in_, m_in_, lumped_;
};

Classical1D classical_1d(const PiecewiseCoefficient& a, const Grid1D& grid);
Difference1D difference_1d(const PiecewiseCoefficient& d, const Grid1D& grid);
DiffDiff1D diffdiff_1d(const PiecewiseCoefficient& a, const PiecewiseCoefficient& d, const Grid1D& grid);
Magnetic1D magnetic_1d(const PiecewiseCoefficient& potential, const PiecewiseCoefficient& v, const Grid1D& grid);
HighContrast1D highcontrast_1d(double lo, double hi, const Grid1D& grid);

struct Theta0Result {
  double theta0 = 0;     // in (−π, π]
  double min_eig = 0;    // smallest eigenvalue of a_θ₀ against d
};
// Grid scan of the smallest eigenvalue of the pencil (a_θ, d_θ) over [−π, π),
// refined by golden-section search and then by bisection on the
// Hellmann-Feynman derivative, which stays accurate where the eigenvalue
// itself is flat.
Theta0Result find_theta0(const FiberFamily& fam, int grid_points = 64, double refine_tol = 1e-9);

// Reduces an angle to (−π, π].
double wrap_angle(double t);

}  // namespace bandgap
