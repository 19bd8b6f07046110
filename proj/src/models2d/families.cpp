#include <cmath>

#include "bandgap/models2d.hpp"

namespace bandgap {

namespace {

std::array<double, 2> displacement(const CellMesh& mesh, const MeshEdge& e) {
  std::array<double, 2> d{0.0, 0.0};
  d[e.dir] = mesh.h();
  return d;
}

Matrix phase_on(const CellMesh& mesh, const RVec& theta, int n, const std::vector<std::array<int, 2>>& node_dof) {
  Matrix e = Matrix::identity(n);
  for (const auto& [v, dof] : node_dof) {
    const auto y = mesh.coord(v);
    e(dof, dof) = std::exp(cplx(0, -(theta.at(0) * y[0] + theta.at(1) * y[1])));
  }
  return e;
}

}  // namespace

HighContrast2D::HighContrast2D(const CellMesh& mesh)
    : mesh_(mesh), outer_(mesh.node_count()), inner_(mesh.node_count()) {
  for (const MeshEdge& e : mesh_.edges()) {
    outer_.add(e.a, e.b, displacement(mesh_, e), e.w_matrix);
    inner_.add(e.a, e.b, displacement(mesh_, e), e.w_inclusion);
  }
  RVec m = mesh_.mass(Region::Matrix);
  for (int v = 0; v < mesh_.node_count(); ++v) m[v] += mesh_.mass(Region::Inclusion)[v];
  mass_ = SparseMatrix::diagonal(m);
}

SparseMatrix HighContrast2D::assemble_b_sparse(const RVec& theta) const {
  return combine(1.0, inner_.at(theta), 1.0, mass_);
}

Matrix HighContrast2D::transfer(const RVec& theta) const {
  std::vector<std::array<int, 2>> dofs;
  for (int v = 0; v < mesh_.node_count(); ++v)
    if (mesh_.mass(Region::Inclusion)[v] > 0) dofs.push_back({v, v});
  return phase_on(mesh_, theta, basis_dim(), dofs);
}

std::optional<DeclaredDefect> HighContrast2D::declared_defect() const {
  const int n = basis_dim();
  const auto& interior = mesh_.interior_nodes();
  DeclaredDefect d{Matrix(n, int(interior.size())), Matrix(n, 1)};
  for (std::size_t k = 0; k < interior.size(); ++k) d.v_star(interior[k], int(k)) = 1.0;
  for (int i = 0; i < n; ++i) d.z(i, 0) = 1.0;
  return d;
}

Imperfect2D::Imperfect2D(const CellMesh& mesh) : mesh_(mesh), space_(mesh_), form_(space_.dof_count()) {
  for (const MeshEdge& e : mesh_.edges()) {
    const auto d = displacement(mesh_, e);
    form_.add(space_.matrix_dof(e.a), space_.matrix_dof(e.b), d, e.w_matrix);
    form_.add(space_.inclusion_dof(e.a), space_.inclusion_dof(e.b), d, e.w_inclusion);
  }
  RVec m(space_.dof_count(), 0.0);
  for (int v = 0; v < mesh_.node_count(); ++v) {
    m[space_.matrix_dof(v)] += mesh_.mass(Region::Matrix)[v];
    m[space_.inclusion_dof(v)] += mesh_.mass(Region::Inclusion)[v];
  }
  mass_ = SparseMatrix::diagonal(m);
  jump_ = space_.jump_form();
  b_ = combine(1.0, jump_, 1.0, mass_);
}

Matrix Imperfect2D::transfer(const RVec& theta) const {
  std::vector<std::array<int, 2>> dofs;
  for (int v = 0; v < mesh_.node_count(); ++v)
    if (mesh_.mass(Region::Inclusion)[v] > 0) dofs.push_back({v, space_.inclusion_dof(v)});
  return phase_on(mesh_, theta, basis_dim(), dofs);
}

std::optional<DeclaredDefect> Imperfect2D::declared_defect() const {
  const int n = basis_dim();
  DeclaredDefect d{Matrix(n, 1), Matrix(n, 1)};
  for (int i = 0; i < n; ++i) {
    d.z(i, 0) = 1.0;
    if (space_.inclusion_side(i)) d.v_star(i, 0) = 1.0;
  }
  return d;
}

HighContrast2D highcontrast_2d(const CellMesh& mesh) { return HighContrast2D(mesh); }
Imperfect2D imperfect_2d(const CellMesh& mesh) { return Imperfect2D(mesh); }

}  // namespace bandgap
