#pragma once

#include <cstdint>
#include <vector>

#include "bandgap/densela.hpp"

namespace bandgap {

// Compressed sparse row matrix, complex entries, square.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  explicit SparseMatrix(int n) : n_(n), ptr_(n + 1, 0) {}

  struct Triplet {
    int i, j;
    cplx v;
  };
  // Duplicate (i, j) entries are summed.
  static SparseMatrix from_triplets(int n, std::vector<Triplet> t);
  static SparseMatrix from_dense(const Matrix& m, double drop = 0.0);
  static SparseMatrix identity(int n);
  static SparseMatrix diagonal(const RVec& d);

  int dim() const { return n_; }
  std::size_t nnz() const { return val_.size(); }
  const std::vector<int>& row_ptr() const { return ptr_; }
  const std::vector<int>& col_idx() const { return idx_; }
  const std::vector<cplx>& values() const { return val_; }

  Matrix to_dense() const;
  CVec operator*(const CVec& x) const;
  cplx at(int i, int j) const;
  bool is_diagonal() const;
  RVec diag() const;
  SparseMatrix adjoint() const;
  double max_abs() const;

 private:
  int n_ = 0;
  std::vector<int> ptr_;
  std::vector<int> idx_;
  std::vector<cplx> val_;
};

// alpha * a + beta * b
SparseMatrix combine(cplx alpha, const SparseMatrix& a, cplx beta, const SparseMatrix& b);
SparseMatrix scale(cplx alpha, const SparseMatrix& a);

// Reverse Cuthill-McKee ordering of the symmetric pattern; perm[new] = old.
std::vector<int> rcm_ordering(const SparseMatrix& a);

// Envelope (skyline) Cholesky of a Hermitian positive definite sparse matrix
// after RCM reordering.
class EnvelopeCholesky {
 public:
  explicit EnvelopeCholesky(const SparseMatrix& a);
  CVec solve(const CVec& b) const;
  int dim() const { return n_; }
  std::size_t envelope_size() const { return env_.size(); }

 private:
  int n_ = 0;
  std::vector<int> perm_, inv_;
  std::vector<int> first_;          // first column in the envelope of each row
  std::vector<std::size_t> start_;  // offset of row i in env_
  std::vector<cplx> env_;           // row i stores L(i, first_[i] .. i)
};

struct LowestEigs {
  RVec values;
  Matrix vectors;  // m-orthonormal; empty when not requested
  int iterations = 0;
};

// Lowest k eigenpairs of the pencil k_mat x = lambda m_mat x with k_mat HPD
// and m_mat HPD, by shift-invert block Krylov with Rayleigh-Ritz.
LowestEigs lowest_eigs(const SparseMatrix& k_mat, const SparseMatrix& m_mat, int k,
                       bool want_vectors = false, double tol = 1e-11,
                       std::uint64_t seed = 0x5eed5eedULL);

}  // namespace bandgap
