#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bandgap/densela.hpp"
#include "bandgap/intervals.hpp"
#include "bandgap/sparse.hpp"

namespace bandgap {

class FrameworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ThetaBox {
  RVec lo, hi;
};

// Model-declared defect data: generators of V★ and Z in the Galerkin basis.
struct DeclaredDefect {
  Matrix v_star;  // columns span V★ (may have zero columns)
  Matrix z;       // columns span Z
};

// θ-parametrised forms a_θ, b_θ, d_θ on a fixed Galerkin basis.
// Convention: entry (r, c) of every form matrix is form(φ_c, φ_r), so
// form(u, ũ) = ũ^H M u.
// Derivatives: a_θ = A0 + Σ_j θ_j A′_j + Σ_jk θ_j θ_k A″_jk + O(|θ|³).
class FiberFamily {
 public:
  virtual ~FiberFamily() = default;

  virtual std::string name() const = 0;
  virtual int theta_dim() const = 0;
  virtual int basis_dim() const = 0;
  virtual SparseMatrix assemble_a_sparse(const RVec& theta) const = 0;
  virtual SparseMatrix assemble_b_sparse(const RVec& theta) const = 0;
  virtual SparseMatrix assemble_d_sparse(const RVec& theta) const = 0;

  Matrix assemble_a(const RVec& theta) const { return assemble_a_sparse(theta).to_dense(); }
  Matrix assemble_b(const RVec& theta) const { return assemble_b_sparse(theta).to_dense(); }
  Matrix assemble_d(const RVec& theta) const { return assemble_d_sparse(theta).to_dense(); }

  // First-order coefficient A′_j; central differences unless overridden.
  virtual Matrix assemble_aprime(int j) const;
  // Quadratic Taylor coefficient A″_jk (A″_jk + A″_kj is the mixed second
  // derivative); central differences unless overridden.
  virtual Matrix assemble_asecond(int j, int k) const;
  // ∂a_θ/∂θ_j at an arbitrary θ; central differences unless overridden.
  virtual Matrix assemble_a_derivative(const RVec& theta, int j) const;
  // ℰ_θ; identity unless overridden.
  virtual Matrix transfer(const RVec& theta) const;
  virtual ThetaBox theta_domain() const;
  virtual std::optional<DeclaredDefect> declared_defect() const { return std::nullopt; }
  // Whether b_θ − d_θ is PSD, so every fiber eigenvalue is ≥ 1.
  virtual bool b_dominates_d() const { return true; }

  static constexpr double kFdStep = 1e-5;

 protected:
  RVec unit(int j, double h) const;
};

// a_θ, b_θ, d_θ of `inner` evaluated at θ + shift, so a degeneracy point
// θ₀ ≠ 0 can be moved to the origin.
class ShiftedFamily : public FiberFamily {
 public:
  ShiftedFamily(const FiberFamily& inner, RVec shift) : inner_(inner), shift_(std::move(shift)) {}
  std::string name() const override { return inner_.name() + "_shifted"; }
  int theta_dim() const override { return inner_.theta_dim(); }
  int basis_dim() const override { return inner_.basis_dim(); }
  SparseMatrix assemble_a_sparse(const RVec& t) const override { return inner_.assemble_a_sparse(moved(t)); }
  SparseMatrix assemble_b_sparse(const RVec& t) const override { return inner_.assemble_b_sparse(moved(t)); }
  SparseMatrix assemble_d_sparse(const RVec& t) const override { return inner_.assemble_d_sparse(moved(t)); }
  bool b_dominates_d() const override { return inner_.b_dominates_d(); }

 private:
  RVec moved(RVec t) const {
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += shift_[i];
    return t;
  }
  const FiberFamily& inner_;
  RVec shift_;
};

// Central-difference coefficients of any family; exposed for tests.
Matrix fd_aprime(const FiberFamily& fam, int j);
Matrix fd_asecond(const FiberFamily& fam, int j, int k);

struct KernelGap {
  Basis kernel;  // orthonormal in (A_θ + B_θ)
  double gap = 0;
};

KernelGap kernel_and_gap(const FiberFamily& fam, const RVec& theta, double tol = kKernelTol);

struct GapConstant {
  double gamma = 0;
  RVec worst_theta;
  bool h3_holds = false;
};
GapConstant gap_quadratic_constant(const FiberFamily& fam, const std::vector<RVec>& theta_grid,
                                   double tol = kKernelTol);

struct DefectDecomposition {
  Basis v_star, z, v0;  // orthonormal in the θ = 0 norm a₀ + b₀
  double gap_at_zero = 0;
  double transversality = 0;
  // Internal factor on d₀ used by the T-construction (1 or 1/2).
  double mass_scale = 1.0;
  bool declared = false;
  Matrix a0, b0, d0;
};

struct DefectOptions {
  double tol = kKernelTol;
  // Probe |θ| used to identify V★ = ℰ_θ⁻¹ V_θ when the model declares nothing.
  double probe = 1e-2;
  // Apply the T-construction so that b₀(z, v★) = d₀(z, v★).
  bool normalise_z = true;
};

DefectDecomposition build_defect(const FiberFamily& fam, const DefectOptions& opt = {});
// Z := T-corrected b₀-orthogonal complement of V★ in V₀; returns the scale used on d₀.
Basis t_construction(const Basis& v_star, const Basis& v0, const Matrix& b0, const Matrix& d0,
                     double& mass_scale);
// Largest |b₀(v, z)| over unit v ∈ V★, z ∈ Z in the θ = 0 norm.
double transversality_constant(const Basis& v_star, const Basis& z, const Matrix& a0, const Matrix& b0);

// 𝒩_θ v₀ ∈ W₀.
CVec corrector_full(const FiberFamily& fam, const DefectDecomposition& def, const RVec& theta, const CVec& v0);
// N^j z ∈ W₀.
CVec linearised_corrector(const FiberFamily& fam, const DefectDecomposition& def, const CVec& z, int j);

struct HomogenisedForm {
  int n = 0;
  std::vector<Matrix> blocks;     // n*n blocks, index j*n+k, on Z coordinates
  std::vector<Matrix> correctors;  // per direction: columns N^j z_m
  double nu_star = 0;             // min over unit ξ of λ_min(a^h_ξ) in the ‖·‖₀-orthonormal Z basis

  const Matrix& block(int j, int k) const { return blocks[std::size_t(j) * n + k]; }
  Matrix at(const RVec& xi) const;
};

HomogenisedForm homogenised_form(const FiberFamily& fam, const DefectDecomposition& def);

RVec fiber_eigs(const FiberFamily& fam, double eps, const RVec& theta, int k_count);

// Eigenvalues of 𝕃_ξ: a^h_ξ + b₀ on V★ ∔ Z against d₀.
RVec limit_fiber_eigs(const HomogenisedForm& hom, const DefectDecomposition& def, const RVec& xi,
                      int k_count = -1);
SpectralDecomposition bstar_eigs(const DefectDecomposition& def);

struct LimitBands {
  IntervalSet bands;
  RVec lambda0, lambda_star;
  bool truncated = false;  // more than k_count bands exist; no half-line attached
};
LimitBands limit_bands(const DefectDecomposition& def, int k_count = 12);

class BetaEvaluator {
 public:
  explicit BetaEvaluator(const DefectDecomposition& def);

  int z_dim() const { return gb_z_.rows(); }
  const RVec& poles() const { return poles_; }
  // (d₀ overlaps of Z basis vectors with d₀-normalised B★ eigenvectors), poles × Z.
  const Matrix& overlaps() const { return overlap_; }
  // Series form of β_λ on Z coordinates; throws "pole proximity".
  Matrix matrix(double lambda, double pole_tol = -1) const;
  // Same matrix through a direct solve on V★.
  Matrix matrix_resolvent(double lambda, double pole_tol = -1) const;
  bool near_pole(double lambda, double pole_tol = -1) const;
  static double default_pole_tol(double lambda) { return 1e-6 * (1.0 + std::fabs(lambda)); }

 private:
  void check_pole(double lambda_int, double pole_tol) const;
  double scale_ = 1.0;
  Matrix gb_z_, gd_z_;
  RVec poles_;
  Matrix overlap_;
  Matrix bvv_, dvv_, dvz_;
};

bool spectrum_membership(const BetaEvaluator& beta, double lambda, double pole_tol = -1);
// |ξ| values t ≥ 0 along unit direction eta with lambda ∈ Sp 𝕃_{tη}.
RVec dispersion(const BetaEvaluator& beta, const HomogenisedForm& hom, double lambda, const RVec& eta);

// Fiber resolvent: (ε⁻²a_θ + b_θ)(u, ũ) = d_θ(f, ũ).
CVec solve_exact(const FiberFamily& fam, double eps, const RVec& theta, const CVec& f);

struct LimitApprox {
  CVec v_coords, z_coords;  // coordinates in the V★ and Z bases
  CVec reconstruction;      // ℰ_θ v + (I + N_θ) z
};
LimitApprox solve_limit_approx(const FiberFamily& fam, const DefectDecomposition& def, const HomogenisedForm& hom,
                               double eps, const RVec& theta, const CVec& f);

struct ErrorReport {
  double energy_err = 0;  // ε⁻²a_θ[diff] + b_θ[diff]
  double l2_err = 0;      // d_θ[diff]
  double f_star_sq = 0;   // ‖f‖²_{*θ}
  double energy_rel() const { return f_star_sq > 0 ? energy_err / f_star_sq : 0.0; }
  double l2_rel() const { return f_star_sq > 0 ? l2_err / f_star_sq : 0.0; }
};
ErrorReport error_report(const FiberFamily& fam, double eps, const RVec& theta, const CVec& f, const CVec& exact,
                         const CVec& approx);

// Union over the θ grid of the lowest k_count fiber eigenvalues, band by band,
// closed piecewise-linearly, then clipped to the window.
struct CollectiveSpectrum {
  IntervalSet set;
  std::vector<RVec> eigenvalues;  // per grid point
};
CollectiveSpectrum collective_spectrum(const FiberFamily& fam, double eps, const std::vector<RVec>& theta_grid,
                                       double window_lo, double window_hi, int k_count = 12, int workers = 1);

// Uniform grids on [-π, π]^n with `points` nodes per dimension.
std::vector<RVec> theta_grid(int n, int points);
// 2D grid restricted to the symmetry wedge 0 ≤ θ₂ ≤ θ₁ ≤ π.
std::vector<RVec> theta_wedge_grid(int points_per_dim);

}  // namespace bandgap
