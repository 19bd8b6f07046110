#pragma once

#include "bandgap/fiber.hpp"
#include "test_util.hpp"

namespace testutil {

// Small family on coordinates (z, v_1..v_p, w_1..w_q):
//   a_θ = [[θ²α, iθβ^H], [−iθβ, Γ]] on (z, w), zero on the v block,
//   b   = HPD with a random z–v coupling, d = I.
// V★ = span(v), Z is found by the T-construction, and a^h = α − β^H Γ⁻¹ β.
// With unit_star the v block of b equals d, which forces the halved mass scale.
class SyntheticFamily : public FiberFamily {
 public:
  SyntheticFamily(int p, int q, std::uint64_t seed, bool unit_star = false) : p_(p), q_(q) {
    SplitMix64 rng(seed);
    const int n = 1 + p + q;
    gamma_ = random_hpd(q, rng, 1.0);
    beta_ = random_vec(q, rng);
    const CVec gb = solve_hpd(gamma_, beta_);
    alpha_ = dot(beta_, gb).real() + 0.5 + rng.uniform();
    b_ = Matrix::identity(n);
    if (unit_star) {
      for (int i = 0; i < p; ++i) {
        const cplx c(0.3 * rng.normal(), 0.3 * rng.normal());
        b_(1 + i, 0) = c;
        b_(0, 1 + i) = std::conj(c);
      }
      b_(0, 0) = 2.0 + p;
      const Matrix wb = random_hpd(q, rng, 1.0);
      for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) b_(1 + p + i, 1 + p + j) += wb(i, j);
    } else {
      b_ = random_hpd(n, rng, 1.5);
    }
    symmetrize(b_);
    unit_star_ = unit_star;
  }

  std::string name() const override { return "synthetic"; }
  int theta_dim() const override { return 1; }
  int basis_dim() const override { return 1 + p_ + q_; }
  SparseMatrix assemble_a_sparse(const RVec& t) const override { return SparseMatrix::from_dense(a_dense(t[0])); }
  SparseMatrix assemble_b_sparse(const RVec&) const override { return SparseMatrix::from_dense(b_); }
  SparseMatrix assemble_d_sparse(const RVec&) const override {
    return SparseMatrix::identity(basis_dim());
  }
  bool b_dominates_d() const override { return !unit_star_; }

  double ahom() const { return alpha_ - dot(beta_, solve_hpd(gamma_, beta_)).real(); }
  int p() const { return p_; }

 private:
  Matrix a_dense(double t) const {
    const int n = basis_dim();
    Matrix a(n, n);
    a(0, 0) = t * t * alpha_;
    for (int i = 0; i < q_; ++i) {
      const int wi = 1 + p_ + i;
      a(0, wi) = cplx(0, t) * std::conj(beta_[i]);
      a(wi, 0) = cplx(0, -t) * beta_[i];
      for (int j = 0; j < q_; ++j) a(wi, 1 + p_ + j) = gamma_(i, j);
    }
    return a;
  }

  int p_, q_;
  bool unit_star_ = false;
  double alpha_ = 0;
  CVec beta_;
  Matrix gamma_, b_;
};

}  // namespace testutil
