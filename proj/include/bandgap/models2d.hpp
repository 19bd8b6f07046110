#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "bandgap/fiber.hpp"
#include "bandgap/models1d.hpp"

namespace bandgap {

// Fiber eigenvalues of the shipped models carry the unit L² mass inside b, so
// 𝓛-type spectra sit one above the 𝓛₀-type spectra of the reduced problems.
constexpr double kFiberShift = 1.0;
inline double reduced_from_fiber(double lambda) { return lambda - kFiberShift; }
inline double fiber_from_reduced(double mu) { return mu + kFiberShift; }
inline IntervalSet reduced_from_fiber(const IntervalSet& s) { return s.shifted(-kFiberShift); }
inline IntervalSet fiber_from_reduced(const IntervalSet& s) { return s.shifted(kFiberShift); }

enum class Region : unsigned char { Matrix = 0, Inclusion = 1 };
enum class NodeKind : unsigned char { Matrix, Interface, Interior };

// Axis edge from node a to node b = a + h e_dir (periodically wrapped).
// Weights are the per-region P1 stiffness weights: ½ per adjacent square.
struct MeshEdge {
  int a = 0, b = 0, dir = 0;
  double w_matrix = 0, w_inclusion = 0;
};

// Union-jack triangulation of □ = [−1/2, 1/2]² with N squares per side and
// the square inclusion B = [−s/2, s/2]² aligned to mesh lines.
class CellMesh {
 public:
  CellMesh(double s, int cells_per_side);

  int cells() const { return n_; }
  double h() const { return 1.0 / n_; }
  double side() const { return s_; }
  int node_count() const { return n_ * n_; }
  int node(int i, int j) const;
  std::array<double, 2> coord(int node) const;
  bool square_in_inclusion(int i, int j) const;
  NodeKind kind(int node) const { return kind_[node]; }

  const std::vector<std::array<int, 3>>& triangles() const { return tris_; }
  const std::vector<Region>& triangle_region() const { return tri_region_; }
  const std::vector<MeshEdge>& edges() const { return edges_; }
  // Edges on ∂B as node pairs.
  const std::vector<std::array<int, 2>>& interface_edges() const { return iface_edges_; }
  const std::vector<int>& interior_nodes() const { return interior_; }
  const std::vector<int>& interface_nodes() const { return iface_nodes_; }
  // Square-lumped masses: each square gives h²/4 to each corner in its region.
  const RVec& mass(Region r) const { return r == Region::Matrix ? mass_matrix_ : mass_inclusion_; }

  double inclusion_area() const;
  double interface_length() const { return double(iface_edges_.size()) * h(); }
  // Real P1 stiffness of one region assembled triangle by triangle.
  SparseMatrix p1_stiffness(Region r) const;
  std::string to_json() const;

 private:
  int n_;
  double s_;
  int b_lo_, b_hi_;  // squares with index in [b_lo_, b_hi_) per axis form B
  std::vector<std::array<int, 3>> tris_;
  std::vector<Region> tri_region_;
  std::vector<std::array<int, 2>> tri_square_;
  std::vector<MeshEdge> edges_;
  std::vector<std::array<int, 2>> iface_edges_;
  std::vector<NodeKind> kind_;
  std::vector<int> interior_, iface_nodes_;
  RVec mass_matrix_, mass_inclusion_;
};

CellMesh build_mesh(double s, int cells_per_side);

// Interface nodes get a second, inclusion-side degree of freedom.
class BrokenSpace {
 public:
  explicit BrokenSpace(const CellMesh& mesh);
  int dof_count() const { return ndof_; }
  int matrix_dof(int node) const { return node; }
  int inclusion_dof(int node) const { return inner_[node]; }
  bool inclusion_side(int dof) const { return side_[dof] == Region::Inclusion; }
  // ∫_{∂B} |[u]|² with [u] = T⁺u − T⁻u (inclusion trace minus matrix
  // trace), integrated exactly along each P1 edge.
  SparseMatrix jump_form() const;
  const std::vector<int>& interface_nodes() const { return iface_; }

 private:
  int ndof_ = 0;
  double h_ = 0;
  std::vector<int> inner_, iface_;
  std::vector<Region> side_;
  std::vector<std::array<int, 2>> iface_edges_;
};

// Σ_e w_e |e^{iθ·d_e} u_b − u_a|² on a set of weighted edges with
// displacement vectors d_e. At θ = 0 this is the 5-point (= union-jack P1)
// stiffness; e^{−iθ·y} is annihilated exactly on every connected patch.
class GaugeEdgeForm {
 public:
  explicit GaugeEdgeForm(int n) : n_(n) {}
  void add(int a, int b, std::array<double, 2> disp, double w);
  int size() const { return n_; }
  SparseMatrix at(const RVec& theta) const;
  SparseMatrix derivative(const RVec& theta, int j) const;
  SparseMatrix taylor2(int j, int k) const;

 private:
  struct Link {
    int a, b;
    std::array<double, 2> d;
    double w;
  };
  int n_;
  std::vector<Link> links_;
};

// a_θ = ∫_{□∖B} |(∇+iθ)u|², b_θ = ∫_B |(∇+iθ)u|² + ∫_□ |u|², d = ∫_□ |u|².
class HighContrast2D : public FiberFamily {
 public:
  explicit HighContrast2D(const CellMesh& mesh);
  std::string name() const override { return "highcontrast2d"; }
  int theta_dim() const override { return 2; }
  int basis_dim() const override { return mesh_.node_count(); }
  SparseMatrix assemble_a_sparse(const RVec& theta) const override { return outer_.at(theta); }
  SparseMatrix assemble_b_sparse(const RVec& theta) const override;
  SparseMatrix assemble_d_sparse(const RVec&) const override { return mass_; }
  Matrix assemble_aprime(int j) const override { return outer_.derivative({0.0, 0.0}, j).to_dense(); }
  Matrix assemble_asecond(int j, int k) const override { return outer_.taylor2(j, k).to_dense(); }
  Matrix assemble_a_derivative(const RVec& theta, int j) const override {
    return outer_.derivative(theta, j).to_dense();
  }
  Matrix transfer(const RVec& theta) const override;
  std::optional<DeclaredDefect> declared_defect() const override;
  const CellMesh& mesh() const { return mesh_; }

 private:
  CellMesh mesh_;
  GaugeEdgeForm outer_, inner_;
  SparseMatrix mass_;
};

// Broken space; a_θ is the quasi-periodic Dirichlet form on each phase,
// b_θ = ∫_{∂B} |[u]|² + ∫_□ |u|², d = ∫_□ |u|².
class Imperfect2D : public FiberFamily {
 public:
  explicit Imperfect2D(const CellMesh& mesh);
  std::string name() const override { return "imperfect2d"; }
  int theta_dim() const override { return 2; }
  int basis_dim() const override { return space_.dof_count(); }
  SparseMatrix assemble_a_sparse(const RVec& theta) const override { return form_.at(theta); }
  SparseMatrix assemble_b_sparse(const RVec&) const override { return b_; }
  SparseMatrix assemble_d_sparse(const RVec&) const override { return mass_; }
  Matrix assemble_aprime(int j) const override { return form_.derivative({0.0, 0.0}, j).to_dense(); }
  Matrix assemble_asecond(int j, int k) const override { return form_.taylor2(j, k).to_dense(); }
  Matrix assemble_a_derivative(const RVec& theta, int j) const override {
    return form_.derivative(theta, j).to_dense();
  }
  Matrix transfer(const RVec& theta) const override;
  std::optional<DeclaredDefect> declared_defect() const override;
  const CellMesh& mesh() const { return mesh_; }
  const BrokenSpace& space() const { return space_; }
  const SparseMatrix& jump_form() const { return jump_; }

 private:
  CellMesh mesh_;
  BrokenSpace space_;
  GaugeEdgeForm form_;
  SparseMatrix jump_, mass_, b_;
};

HighContrast2D highcontrast_2d(const CellMesh& mesh);
Imperfect2D imperfect_2d(const CellMesh& mesh);

struct InclusionSpectrum {
  RVec dirichlet;      // λ_m ascending
  RVec means;          // ⟨φ_m⟩ for L²(B)-normalised φ_m, ≥ 0
  RVec electrostatic;  // μ_m ascending, μ₁ = 0
};

// Discrete Dirichlet problem on the interior nodes of B.
struct DirichletProblem {
  SparseMatrix stiffness;
  RVec mass;  // lumped, diagonal
  double total_mass() const;
};
DirichletProblem dirichlet_problem(const CellMesh& mesh);

InclusionSpectrum dirichlet_inclusion_eigs(const CellMesh& mesh, int m_count);
RVec electrostatic_eigs(const CellMesh& mesh, int m_count);
InclusionSpectrum inclusion_spectrum(const CellMesh& mesh, int m_count);

// A^hom_pd from the edge-graph corrector problem on the matrix phase.
RMatrix perforated_homogenised(const CellMesh& mesh);

// β_B(λ) = λ + λ² ∫_B (−Δ_D − λ)⁻¹ 1.
class ZhikovBeta {
 public:
  explicit ZhikovBeta(const CellMesh& mesh, int modes = 100);
  double direct(double lambda, double pole_tol = -1) const;
  struct Series {
    double value = 0;
    double tail_bound = 0;  // λ² Σ_{m>M} |⟨φ_m⟩|² / (λ_m − λ), bounded via the remaining mass
  };
  Series series(double lambda, double pole_tol = -1) const;
  const RVec& poles() const { return spec_.dirichlet; }
  const RVec& means() const { return spec_.means; }
  bool near_pole(double lambda, double pole_tol = -1) const;
  static double default_pole_tol(double lambda) { return 1e-6 * (1.0 + std::fabs(lambda)); }

 private:
  void check_pole(double lambda, double pole_tol) const;
  DirichletProblem prob_;
  InclusionSpectrum spec_;
  double total_mass_ = 0;
};

double zhikov_beta(const CellMesh& mesh, double lambda);

// Ball of radius a in the unit cell of ℝ³.
double beta_ball_3d(double a, double lambda);
double beta_ball_3d_series(double a, double lambda, int modes);

// ⋃ [μ_m, λ_m] in the reduced normalisation.
IntervalSet limit_spectrum_dp(const InclusionSpectrum& spec, int band_count);

// Area of {θ ∈ [−π, π]² : f(θ) ≤ level} for f increasing along rays from 0,
// by bisection on `rays` rays spread over the full circle.
double sublevel_area(const std::function<double(const RVec&)>& f, double level, int rays, double tol = 1e-7);

struct IdsResult {
  double m_formula = 0;
  double m_counted = 0;
  double discrepancy() const { return std::fabs(m_counted - m_formula); }
};
// Integrated density of states of the 2D high-contrast model at contrast τ
// (ε = τ^{−1/2}) for reduced λ inside the k-th band.
IdsResult ids_asymptotic(const HighContrast2D& fam, const InclusionSpectrum& spec, const ZhikovBeta& beta,
                         const RMatrix& ahom, double tau, double lambda, int k, int rays = 32);

struct ImperfectLimit {
  double s = 0, area = 0;
  double mu0 = 0, mu1 = 0;
  double phi(double mu) const;
  Interval gap() const { return {mu0, mu0 + mu1}; }
  IntervalSet bands() const;  // reduced normalisation
};
ImperfectLimit imperfect_limit(double s);

}  // namespace bandgap
