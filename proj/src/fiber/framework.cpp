#include <algorithm>
#include <cmath>
#include <sstream>

#include "bandgap/fiber.hpp"
#include "bandgap/parallel.hpp"

namespace bandgap {

namespace {

// Solves a(x, w̃) = rhs(w̃) for x in W₀, the (a₀+b₀)-orthogonal complement of
// span(v0), by the bordered operator P^H A P + G V V^H G.
class CellSolver {
 public:
  CellSolver(const Matrix& a, const Matrix& g, const Matrix& v) : v_(v), g_(g) {
    const int k = v.cols();
    Matrix op = a;
    if (k > 0) {
      const Matrix gv = g * v;  // n x k
      const Matrix av = a * v;
      // P = I - V V^H G, so A P = A - (A V)(G V)^H and P^H A P expands into
      // rank-k corrections.
      const Matrix vav = v.adjoint() * av;
      op -= av * gv.adjoint();
      op -= gv * av.adjoint();
      op += gv * vav * gv.adjoint();
      op += gv * gv.adjoint();
    }
    symmetrize(op);
    try {
      chol_ = cholesky(op);
    } catch (const LinalgError&) {
      throw FrameworkError("theta outside admissible ball: cell operator not coercive on W0");
    }
    double dmin = 1e300, dmax = 0;
    for (int i = 0; i < chol_.rows(); ++i) {
      const double d = chol_(i, i).real();
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    if (dmin * dmin < 1e-13 * dmax * dmax)
      throw FrameworkError("theta outside admissible ball: cell operator numerically singular on W0");
  }

  // Right-hand side given as the vector r with rhs(w̃) = w̃^H r; its V-part is removed.
  CVec solve(CVec r) const {
    const int n = int(r.size());
    if (v_.cols() > 0) {
      // r <- P^H r = r - G V (V^H r)
      const CVec c = v_.adjoint() * r;
      const CVec gvc = g_ * (v_ * c);
      for (int i = 0; i < n; ++i) r[i] -= gvc[i];
    }
    Matrix b(n, 1);
    b.set_col(0, r);
    // L L^H x = r
    for (int i = 0; i < n; ++i) {
      cplx s = b(i, 0);
      for (int k = 0; k < i; ++k) s -= chol_(i, k) * b(k, 0);
      b(i, 0) = s / chol_(i, i).real();
    }
    for (int i = n - 1; i >= 0; --i) {
      cplx s = b(i, 0);
      for (int k = i + 1; k < n; ++k) s -= std::conj(chol_(k, i)) * b(k, 0);
      b(i, 0) = s / chol_(i, i).real();
    }
    return b.col(0);
  }

 private:
  Matrix v_, g_, chol_;
};

Matrix restrict_form(const Matrix& x, const Matrix& m) {
  Matrix r = sandwich(x, m, x);
  symmetrize(r);
  return r;
}

RVec first_k(const RVec& v, int k) {
  if (k < 0 || k >= int(v.size())) return v;
  return RVec(v.begin(), v.begin() + k);
}

}  // namespace

KernelGap kernel_and_gap(const FiberFamily& fam, const RVec& theta, double tol) {
  const Matrix a = fam.assemble_a(theta);
  const Matrix g = a + fam.assemble_b(theta);
  const NullspaceResult r = nullspace(a, g, tol);
  return {r.basis, r.gap};
}

GapConstant gap_quadratic_constant(const FiberFamily& fam, const std::vector<RVec>& theta_grid, double tol) {
  GapConstant out;
  out.gamma = 1e300;
  int persistent = 0;
  if (const auto decl = fam.declared_defect()) persistent = decl->v_star.cols();
  for (const RVec& t : theta_grid) {
    double t2 = 0;
    for (double x : t) t2 += x * x;
    if (t2 == 0.0) continue;
    const KernelGap kg = kernel_and_gap(fam, t, tol);
    // Away from θ = 0 only ℰ_θ V★ may stay in the kernel; anything more means ν_θ = 0.
    const double nu = kg.kernel.dim() > persistent ? 0.0 : kg.gap;
    if (nu / t2 < out.gamma) {
      out.gamma = nu / t2;
      out.worst_theta = t;
    }
  }
  if (out.worst_theta.empty()) throw FrameworkError("gap constant needs a grid point with theta != 0");
  out.h3_holds = out.gamma > 0;
  return out;
}

double transversality_constant(const Basis& v_star, const Basis& z, const Matrix& a0, const Matrix& b0) {
  if (v_star.dim() == 0 || z.dim() == 0) return 0.0;
  const Matrix g = a0 + b0;
  const Basis vs = orthonormalize(v_star.columns, g);
  const Basis zs = orthonormalize(z.columns, g);
  const Matrix c = vs.columns.adjoint() * (b0 * zs.columns);
  Matrix ctc = c.adjoint() * c;
  symmetrize(ctc);
  const RVec ev = hermitian_eigvals(ctc);
  return std::sqrt(std::max(0.0, ev.back()));
}

Basis t_construction(const Basis& v_star, const Basis& v0, const Matrix& b0, const Matrix& d0,
                     double& mass_scale) {
  mass_scale = 1.0;
  const int n = v0.ambient_dim();
  if (v_star.dim() == 0) return v0;
  const Matrix& vs = v_star.columns;
  const Basis q = orthonormalize(v0.columns, Matrix::identity(n));
  const Matrix off = vs - q.columns * (q.columns.adjoint() * vs);
  if (off.max_abs() > 1e-6 * std::max(1.0, vs.max_abs())) throw FrameworkError("V* is not a subspace of V0");
  // b₀-orthogonal complement of V★ inside V₀: coordinates c with (V★^H b₀ V₀) c = 0.
  const Matrix cross = vs.adjoint() * (b0 * v0.columns);
  Matrix gram = cross.adjoint() * cross;
  symmetrize(gram);
  const SpectralDecomposition sd = hermitian_eig(gram);
  const int keep = v0.dim() - v_star.dim();
  Basis zc;
  zc.columns = v0.columns * sd.vectors.col_range(0, keep);

  Matrix shifted = restrict_form(vs, b0) - restrict_form(vs, d0);
  RVec ev = hermitian_eigvals(shifted);
  if (ev.front() <= 1e-10 * std::max(1.0, std::fabs(ev.back()))) {
    mass_scale = 0.5;
    shifted = restrict_form(vs, b0) - cplx(0.5) * restrict_form(vs, d0);
  }
  const Matrix rhs = cplx(mass_scale) * (vs.adjoint() * (d0 * zc.columns));
  Matrix tcoef(rhs.rows(), rhs.cols());
  const HermitianIndefiniteSolver<cplx> tsolve(shifted);
  for (int c = 0; c < rhs.cols(); ++c) tcoef.set_col(c, tsolve.solve(rhs.col(c)));
  Basis z;
  z.columns = zc.columns + vs * tcoef;
  return z;
}

DefectDecomposition build_defect(const FiberFamily& fam, const DefectOptions& opt) {
  const int n = fam.basis_dim();
  const RVec zero(fam.theta_dim(), 0.0);
  DefectDecomposition def;
  def.a0 = fam.assemble_a(zero);
  def.b0 = fam.assemble_b(zero);
  def.d0 = fam.assemble_d(zero);
  const Matrix g0 = def.a0 + def.b0;

  if (const auto decl = fam.declared_defect()) {
    def.declared = true;
    def.v_star = orthonormalize(decl->v_star, g0);
    Basis zraw;
    zraw.columns = decl->z;
    def.z = orthonormalize(zraw.columns, g0);
    def.v0 = orthonormalize(hstack(decl->v_star, decl->z), g0);
    if (def.v0.dim() != def.v_star.dim() + def.z.dim()) throw FrameworkError("declared V* and Z are not independent");
    // The declared V₀ must lie in the kernel of a₀.
    const Matrix av = restrict_form(def.v0.columns, def.a0);
    if (av.max_abs() > 1e-8 * std::max(1.0, def.a0.max_abs()))
      throw FrameworkError("declared V0 is not annihilated by a_0");
    if (n <= 1500) {
      const NullspaceResult r = nullspace(def.a0, g0, opt.tol);
      if (r.basis.dim() != def.v0.dim()) throw FrameworkError("declared V0 dimension differs from the kernel of a_0");
      def.gap_at_zero = r.gap;
    } else {
      def.gap_at_zero = std::nan("");
    }
  } else {
    const NullspaceResult r = nullspace(def.a0, g0, opt.tol);
    def.v0 = r.basis;
    def.gap_at_zero = r.gap;
    Basis vs;
    vs.columns = Matrix(n, 0);
    if (def.v0.dim() > 0) {
      RVec probe(fam.theta_dim(), 0.0);
      probe[0] = opt.probe;
      const KernelGap kg = kernel_and_gap(fam, probe, opt.tol);
      if (kg.kernel.dim() > 0) {
        // V★ = ℰ_θ⁻¹ V_θ with ℰ_θ⁻¹ = D⁻¹ ℰ_θ^H D, projected back onto V₀.
        const Matrix e = fam.transfer(probe);
        const Matrix de = e.adjoint() * (def.d0 * kg.kernel.columns);
        const Matrix back = solve_hpd(def.d0, de);
        const Matrix coords = def.v0.columns.adjoint() * (g0 * back);
        vs = orthonormalize(def.v0.columns * coords, g0, 1e-6);
      }
    }
    def.v_star = orthonormalize(vs.columns, g0);
    if (opt.normalise_z) {
      def.z = orthonormalize(t_construction(def.v_star, def.v0, def.b0, def.d0, def.mass_scale).columns, g0);
    } else {
      double unused = 1.0;
      Basis z = t_construction(def.v_star, def.v0, def.b0, cplx(0.0) * def.b0, unused);
      def.z = orthonormalize(z.columns, g0);
    }
  }
  def.transversality = transversality_constant(def.v_star, def.z, def.a0, def.b0);
  return def;
}

CVec corrector_full(const FiberFamily& fam, const DefectDecomposition& def, const RVec& theta, const CVec& v0) {
  const Matrix a = fam.assemble_a(theta);
  const CellSolver solver(a, def.a0 + def.b0, def.v0.columns);
  CVec r = a * v0;
  for (cplx& x : r) x = -x;
  return solver.solve(r);
}

CVec linearised_corrector(const FiberFamily& fam, const DefectDecomposition& def, const CVec& z, int j) {
  const CellSolver solver(def.a0, def.a0 + def.b0, def.v0.columns);
  CVec r = fam.assemble_aprime(j) * z;
  for (cplx& x : r) x = -x;
  return solver.solve(r);
}

Matrix HomogenisedForm::at(const RVec& xi) const {
  if (int(xi.size()) != n) throw FrameworkError("xi dimension mismatch");
  Matrix m(blocks[0].rows(), blocks[0].cols());
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) m += cplx(xi[j] * xi[k]) * block(j, k);
  symmetrize(m);
  return m;
}

HomogenisedForm homogenised_form(const FiberFamily& fam, const DefectDecomposition& def) {
  const int n = fam.theta_dim();
  const Matrix& z = def.z.columns;
  const int q = z.cols();
  if (q == 0) throw FrameworkError("homogenised form needs a nontrivial Z");
  const CellSolver solver(def.a0, def.a0 + def.b0, def.v0.columns);
  HomogenisedForm h;
  h.n = n;
  for (int j = 0; j < n; ++j) {
    const Matrix az = fam.assemble_aprime(j) * z;
    Matrix nj(z.rows(), q);
    for (int c = 0; c < q; ++c) {
      CVec r = az.col(c);
      for (cplx& x : r) x = -x;
      nj.set_col(c, solver.solve(r));
    }
    h.correctors.push_back(std::move(nj));
  }
  std::vector<Matrix> raw(std::size_t(n) * n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      raw[std::size_t(j) * n + k] = sandwich(z, fam.assemble_asecond(j, k), z) -
                                    sandwich(h.correctors[j], def.a0, h.correctors[k]);
  h.blocks.resize(raw.size());
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      Matrix s = raw[std::size_t(j) * n + k] + raw[std::size_t(k) * n + j];
      s *= cplx(0.5);
      symmetrize(s);
      h.blocks[std::size_t(j) * n + k] = std::move(s);
    }

  // Coercivity on the unit sphere of ξ.
  const int angles = n == 1 ? 1 : 360;
  h.nu_star = 1e300;
  RVec worst_xi;
  CVec worst_z;
  for (int a = 0; a < angles; ++a) {
    RVec xi(n, 0.0);
    if (n == 1)
      xi[0] = 1.0;
    else {
      const double phi = M_PI * a / angles;
      xi[0] = std::cos(phi);
      xi[1] = std::sin(phi);
    }
    const SpectralDecomposition s = hermitian_eig(h.at(xi));
    if (s.values[0] < h.nu_star) {
      h.nu_star = s.values[0];
      worst_xi = xi;
      worst_z = s.vectors.col(0);
    }
  }
  if (!(h.nu_star > 0)) {
    std::ostringstream os;
    os << "homogenised form not coercive: min a^h_xi[z] = " << h.nu_star << " at xi = (";
    for (std::size_t i = 0; i < worst_xi.size(); ++i) os << (i ? ", " : "") << worst_xi[i];
    os << "), z coordinate 0 = " << worst_z[0];
    throw FrameworkError(os.str());
  }
  return h;
}

RVec fiber_eigs(const FiberFamily& fam, double eps, const RVec& theta, int k_count) {
  if (!(eps > 0 && eps < 1)) throw FrameworkError("epsilon must lie in (0,1)");
  const int n = fam.basis_dim();
  k_count = std::min(k_count, n);
  const SparseMatrix k = combine(1.0 / (eps * eps), fam.assemble_a_sparse(theta), 1.0, fam.assemble_b_sparse(theta));
  const SparseMatrix d = fam.assemble_d_sparse(theta);
  RVec vals;
  try {
    vals = lowest_eigs(k, d, k_count).values;
  } catch (const LinalgError& e) {
    throw FrameworkError(std::string("fiber pencil failed: ") + e.what());
  }
  if (fam.b_dominates_d() && !vals.empty() && vals[0] < 1.0 - 1e-8)
    throw FrameworkError("fiber eigenvalue below 1 although b - d is declared PSD");
  return vals;
}

namespace {

Matrix limit_operator(const HomogenisedForm& hom, const DefectDecomposition& def, const RVec& xi, Matrix& mass) {
  const Matrix x = hstack(def.v_star.columns, def.z.columns);
  Matrix s = restrict_form(x, def.b0);
  mass = restrict_form(x, def.d0);
  const Matrix ah = hom.at(xi);
  const int off = def.v_star.dim();
  for (int i = 0; i < ah.rows(); ++i)
    for (int j = 0; j < ah.cols(); ++j) s(off + i, off + j) += ah(i, j);
  return s;
}

}  // namespace

RVec limit_fiber_eigs(const HomogenisedForm& hom, const DefectDecomposition& def, const RVec& xi, int k_count) {
  Matrix mass;
  const Matrix s = limit_operator(hom, def, xi, mass);
  return first_k(generalized_eigvals(s, mass), k_count);
}

SpectralDecomposition bstar_eigs(const DefectDecomposition& def) {
  if (def.v_star.dim() == 0) return {};
  return generalized_eig(restrict_form(def.v_star.columns, def.b0), restrict_form(def.v_star.columns, def.d0));
}

LimitBands limit_bands(const DefectDecomposition& def, int k_count) {
  LimitBands out;
  out.lambda0 = generalized_eigvals(restrict_form(def.v0.columns, def.b0), restrict_form(def.v0.columns, def.d0));
  out.lambda_star = bstar_eigs(def).values;
  const int nstar = def.v_star.dim();
  const int count = std::min(nstar, k_count);
  std::vector<Interval> parts;
  for (int k = 0; k < count; ++k) parts.push_back({out.lambda0[k], std::max(out.lambda0[k], out.lambda_star[k])});
  if (nstar < k_count && nstar < int(out.lambda0.size()))
    parts.push_back({out.lambda0[nstar], IntervalSet::kInf});
  else if (nstar >= k_count)
    out.truncated = true;
  out.bands = IntervalSet(std::move(parts));
  return out;
}

BetaEvaluator::BetaEvaluator(const DefectDecomposition& def) : scale_(def.mass_scale) {
  const Matrix& z = def.z.columns;
  const Matrix& vs = def.v_star.columns;
  gb_z_ = restrict_form(z, def.b0);
  gd_z_ = cplx(scale_) * restrict_form(z, def.d0);
  if (vs.cols() > 0) {
    bvv_ = restrict_form(vs, def.b0);
    dvv_ = cplx(scale_) * restrict_form(vs, def.d0);
    dvz_ = cplx(scale_) * (vs.adjoint() * (def.d0 * z));
    const SpectralDecomposition s = generalized_eig(bvv_, dvv_);
    poles_ = s.values;
    overlap_ = s.vectors.adjoint() * dvz_;
  }
}

bool BetaEvaluator::near_pole(double lambda, double pole_tol) const {
  if (pole_tol < 0) pole_tol = default_pole_tol(lambda);
  const double li = lambda / scale_;
  for (double p : poles_)
    if (std::fabs(li - p) <= pole_tol / scale_) return true;
  return false;
}

void BetaEvaluator::check_pole(double lambda, double pole_tol) const {
  if (near_pole(lambda, pole_tol)) {
    std::ostringstream os;
    os << "pole proximity: lambda = " << lambda << " is within tolerance of Sp B*";
    throw FrameworkError(os.str());
  }
}

Matrix BetaEvaluator::matrix(double lambda, double pole_tol) const {
  check_pole(lambda, pole_tol);
  const double li = lambda / scale_;
  Matrix b = cplx(li) * gd_z_ - gb_z_;
  const int q = b.rows();
  for (std::size_t m = 0; m < poles_.size(); ++m) {
    const double w = (li - 1) * (li - 1) / (poles_[m] - li);
    for (int a = 0; a < q; ++a)
      for (int c = 0; c < q; ++c) b(a, c) += w * std::conj(overlap_(int(m), a)) * overlap_(int(m), c);
  }
  symmetrize(b);
  return b;
}

Matrix BetaEvaluator::matrix_resolvent(double lambda, double pole_tol) const {
  check_pole(lambda, pole_tol);
  const double li = lambda / scale_;
  Matrix b = cplx(li) * gd_z_ - gb_z_;
  if (bvv_.rows() > 0) {
    const Matrix shifted = bvv_ - cplx(li) * dvv_;
    const HermitianIndefiniteSolver<cplx> solver(shifted);
    const int q = b.rows();
    for (int c = 0; c < q; ++c) {
      CVec rhs = dvz_.col(c);
      for (cplx& x : rhs) x *= (li - 1);
      const CVec y = solver.solve(rhs);
      for (int a = 0; a < q; ++a) {
        cplx s = 0;
        for (int i = 0; i < dvz_.rows(); ++i) s += std::conj(dvz_(i, a)) * y[i];
        b(a, c) += (li - 1) * s;
      }
    }
  }
  symmetrize(b);
  return b;
}

bool spectrum_membership(const BetaEvaluator& beta, double lambda, double pole_tol) {
  if (beta.near_pole(lambda, pole_tol)) return true;
  return hermitian_eigvals(beta.matrix(lambda, pole_tol)).back() >= 0.0;
}

RVec dispersion(const BetaEvaluator& beta, const HomogenisedForm& hom, double lambda, const RVec& eta) {
  const Matrix b = beta.matrix(lambda);
  const Matrix ah = hom.at(eta);
  const RVec t2 = generalized_eigvals(b, ah);
  const double floor = -1e-12 * std::max(1.0, b.max_abs());
  RVec out;
  for (double v : t2)
    if (v >= floor) out.push_back(std::sqrt(std::max(0.0, v)));
  return out;
}

CVec solve_exact(const FiberFamily& fam, double eps, const RVec& theta, const CVec& f) {
  if (!(eps > 0 && eps < 1)) throw FrameworkError("epsilon must lie in (0,1)");
  const SparseMatrix k = combine(1.0 / (eps * eps), fam.assemble_a_sparse(theta), 1.0, fam.assemble_b_sparse(theta));
  try {
    return EnvelopeCholesky(k).solve(fam.assemble_d_sparse(theta) * f);
  } catch (const LinalgError& e) {
    throw FrameworkError(std::string("fiber resolvent failed: ") + e.what());
  }
}

LimitApprox solve_limit_approx(const FiberFamily& fam, const DefectDecomposition& def, const HomogenisedForm& hom,
                               double eps, const RVec& theta, const CVec& f) {
  RVec xi = theta;
  for (double& x : xi) x /= eps;
  Matrix mass;
  const Matrix s = limit_operator(hom, def, xi, mass);
  const Matrix e = fam.transfer(theta);
  const CVec df = fam.assemble_d(theta) * f;
  const int nv = def.v_star.dim(), nz = def.z.dim();
  CVec rhs(nv + nz);
  if (nv > 0) {
    const CVec r = (e * def.v_star.columns).adjoint() * df;
    std::copy(r.begin(), r.end(), rhs.begin());
  }
  const CVec rz = def.z.columns.adjoint() * df;
  std::copy(rz.begin(), rz.end(), rhs.begin() + nv);
  const CVec c = solve_hpd(s, rhs);
  LimitApprox out;
  out.v_coords.assign(c.begin(), c.begin() + nv);
  out.z_coords.assign(c.begin() + nv, c.end());
  CVec u = def.z.columns * out.z_coords;
  for (int j = 0; j < hom.n; ++j) {
    const CVec nz_j = hom.correctors[j] * out.z_coords;
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += theta[j] * nz_j[i];
  }
  if (nv > 0) {
    const CVec v = e * (def.v_star.columns * out.v_coords);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += v[i];
  }
  out.reconstruction = std::move(u);
  return out;
}

ErrorReport error_report(const FiberFamily& fam, double eps, const RVec& theta, const CVec& f, const CVec& exact,
                         const CVec& approx) {
  const SparseMatrix a = fam.assemble_a_sparse(theta), b = fam.assemble_b_sparse(theta),
                     d = fam.assemble_d_sparse(theta);
  const CVec diff = exact - approx;
  ErrorReport r;
  r.energy_err = dot(diff, a * diff).real() / (eps * eps) + dot(diff, b * diff).real();
  r.l2_err = dot(diff, d * diff).real();
  const CVec df = d * f;
  r.f_star_sq = dot(df, EnvelopeCholesky(combine(1.0, a, 1.0, b)).solve(df)).real();
  return r;
}

CollectiveSpectrum collective_spectrum(const FiberFamily& fam, double eps, const std::vector<RVec>& grid,
                                       double window_lo, double window_hi, int k_count, int workers) {
  CollectiveSpectrum out;
  out.eigenvalues.resize(grid.size());
  parallel_for(int(grid.size()), workers, [&](int i) { out.eigenvalues[i] = fiber_eigs(fam, eps, grid[i], k_count); });
  std::vector<Interval> bands;
  const int kk = out.eigenvalues.empty() ? 0 : int(out.eigenvalues[0].size());
  for (int k = 0; k < kk; ++k) {
    double lo = 1e300, hi = -1e300;
    for (const RVec& ev : out.eigenvalues) {
      lo = std::min(lo, ev[k]);
      hi = std::max(hi, ev[k]);
    }
    bands.push_back({lo, hi});
  }
  out.set = IntervalSet(std::move(bands)).clip(window_lo, window_hi);
  return out;
}

}  // namespace bandgap
