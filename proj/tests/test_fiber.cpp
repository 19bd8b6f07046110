#include <cmath>

#include "bandgap/models1d.hpp"
#include "doctest.h"
#include "synthetic.hpp"
#include "test_util.hpp"

using namespace bandgap;
using namespace testutil;

namespace {

const PiecewiseCoefficient kA14 = PiecewiseCoefficient::two_phase(1.0, 4.0);

double g0_norm(const DefectDecomposition& def, const CVec& v) {
  return std::sqrt(dot(v, (def.a0 + def.b0) * v).real());
}

double loglog_slope(const RVec& x, const RVec& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Hides the declaration so build_defect has to find V★ from the kernel at a probe θ.
class Undeclared : public FiberFamily {
 public:
  explicit Undeclared(const FiberFamily& f) : f_(f) {}
  std::string name() const override { return "undeclared"; }
  int theta_dim() const override { return f_.theta_dim(); }
  int basis_dim() const override { return f_.basis_dim(); }
  SparseMatrix assemble_a_sparse(const RVec& t) const override { return f_.assemble_a_sparse(t); }
  SparseMatrix assemble_b_sparse(const RVec& t) const override { return f_.assemble_b_sparse(t); }
  SparseMatrix assemble_d_sparse(const RVec& t) const override { return f_.assemble_d_sparse(t); }
  Matrix transfer(const RVec& t) const override { return f_.transfer(t); }

 private:
  const FiberFamily& f_;
};

Basis basis_of(const Matrix& m) { return Basis{m}; }

}  // namespace

TEST_CASE("hausdorff distance examples") {
  const IntervalSet a = IntervalSet::single(0, 2), b = IntervalSet::single(0, 3);
  CHECK(hausdorff_interval_dist(a, a, 0, 10) == 0.0);
  CHECK(hausdorff_interval_dist(a, b, 0, 10) == doctest::Approx(1.0));
  CHECK(hausdorff_interval_dist(a, b, 20, 30) == 0.0);
  // Gap midpoints of the other set are the worst points.
  const IntervalSet gapped({{0, 1}, {5, 6}});
  CHECK(hausdorff_interval_dist(IntervalSet::single(0, 6), gapped, 0, 10) == doctest::Approx(2.0));
}

TEST_CASE("hausdorff distance agrees with dense sampling") {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    auto random_set = [&]() {
      std::vector<Interval> parts;
      const int k = 1 + int(rng.uniform() * 3);
      for (int i = 0; i < k; ++i) {
        const double lo = rng.uniform(0, 9);
        parts.push_back({lo, lo + rng.uniform(0, 2)});
      }
      return IntervalSet(parts);
    };
    const IntervalSet x = random_set(), y = random_set();
    const double a = rng.uniform(0, 4), b = a + rng.uniform(1, 6);
    double sampled = 0;
    for (int i = 0; i <= 20000; ++i) {
      const double t = a + (b - a) * i / 20000.0;
      if (x.contains(t)) sampled = std::max(sampled, y.empty() ? 0.0 : y.distance(t));
      if (y.contains(t)) sampled = std::max(sampled, x.empty() ? 0.0 : x.distance(t));
    }
    CHECK(hausdorff_interval_dist(x, y, a, b) == doctest::Approx(sampled).epsilon(1e-3).scale(1.0));
  }
}

TEST_CASE("beta: scalar closed form") {
  // b₀[z] = d₀[z] = 1, one pole at 3 with overlap² = 1/2: β(2) = −1 + 2 + 0.5 = 1.5.
  DefectDecomposition def;
  def.a0 = Matrix(2, 2);
  def.d0 = Matrix::identity(2);
  def.b0 = Matrix(2, 2);
  def.b0(0, 0) = 3;
  def.b0(0, 1) = def.b0(1, 0) = -1;
  def.b0(1, 1) = 1;
  Matrix vs(2, 1), z(2, 1);
  vs(0, 0) = 1;
  z(0, 0) = z(1, 0) = 1 / std::sqrt(2.0);
  def.v_star = basis_of(vs);
  def.z = basis_of(z);
  const BetaEvaluator beta(def);
  CHECK(beta.poles()[0] == doctest::Approx(3.0));
  CHECK(beta.matrix(2.0)(0, 0).real() == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(beta.matrix_resolvent(2.0)(0, 0).real() == doctest::Approx(1.5).epsilon(1e-14));
  CHECK_THROWS_WITH_AS(beta.matrix(3.0 + 1e-9), doctest::Contains("pole proximity"), FrameworkError);
  CHECK(spectrum_membership(beta, 3.0));
  // All overlaps zero: β = −b₀ + λd₀.
  Matrix zp(2, 1);
  zp(1, 0) = 1;
  def.z = basis_of(zp);
  const BetaEvaluator flat(def);
  CHECK(flat.matrix(2.5)(0, 0).real() == doctest::Approx(-1.0 + 2.5));
}

TEST_CASE("T-construction: b0(z, v) = s d0(z, v) for both scalings") {
  SplitMix64 rng(17);
  const int n = 7;
  const Matrix d0 = cplx(0.05) * random_hpd(n, rng);
  const Matrix v0 = random_matrix(n, 4, rng);
  Basis v0b = orthonormalize(v0, Matrix::identity(n));
  Basis vs = orthonormalize(v0.col_range(0, 2), Matrix::identity(n));
  for (bool degenerate : {false, true}) {
    Matrix b0 = random_hpd(n, rng, 5.0);
    if (degenerate) {
      // b₀ = d₀ + Q with Q vanishing on V★, so the unit scaling is singular.
      const Matrix p = vs.columns;
      const Matrix proj = Matrix::identity(n) - p * p.adjoint();
      b0 = d0 + proj * random_hpd(n, rng) * proj;
      symmetrize(b0);
      CHECK((sandwich(p, b0, p) - sandwich(p, d0, p)).max_abs() < 1e-10);
    }
    double s = 0;
    const Basis z = t_construction(vs, v0b, b0, d0, s);
    CHECK(s == (degenerate ? 0.5 : 1.0));
    CHECK(z.dim() == 2);
    const Matrix lhs = vs.columns.adjoint() * (b0 * z.columns);
    const Matrix rhs = vs.columns.adjoint() * (d0 * z.columns);
    CHECK((lhs - cplx(s) * rhs).max_abs() < 1e-9);
  }
}

TEST_CASE("generic defect detection on the classical model") {
  const auto cls = classical_1d(kA14, Grid1D(16));
  const DefectDecomposition def = build_defect(cls);
  CHECK_FALSE(def.declared);
  CHECK(def.v_star.dim() == 0);
  REQUIRE(def.z.dim() == 1);
  const CVec z = def.z.columns.col(0);
  for (const cplx& x : z) CHECK(std::abs(x - z[0]) < 1e-8 * std::abs(z[0]));
}

TEST_CASE("defect decomposition: direct sum and transversality bound") {
  const auto hc = highcontrast_1d(0.25, 0.75, Grid1D(32));
  const DefectDecomposition def = build_defect(hc);
  const Matrix g0 = def.a0 + def.b0;
  // span(v0) = span(v★) ⊕ span(z): projecting the union onto V₀ changes nothing.
  const Matrix both = hstack(def.v_star.columns, def.z.columns);
  const Matrix proj = def.v0.columns * (def.v0.columns.adjoint() * (g0 * both));
  CHECK((proj - both).max_abs() < 1e-9);
  CHECK(def.transversality < 1.0);
  CHECK(def.gap_at_zero > 0);
}

TEST_CASE("homogenised form: self-similarity and coercivity") {
  SplitMix64 rng(3);
  const auto fam = diffdiff_1d(kA14, PiecewiseCoefficient::two_phase(0.5, 1.0), Grid1D(16));
  const DefectDecomposition def = build_defect(fam);
  const HomogenisedForm hom = homogenised_form(fam, def);
  for (double eps : {0.5, 0.1, 0.01}) {
    const double th = 0.37;
    Matrix lhs = hom.at({th});
    lhs *= cplx(1 / (eps * eps));
    CHECK((lhs - hom.at({th / eps})).max_abs() < 1e-12 * lhs.max_abs());
  }
  CHECK(hom.nu_star > 0);
  double ratio_min = 1e300;
  for (int i = 0; i < 100; ++i) {
    const double xi = rng.uniform(-5, 5);
    const CVec zc = random_vec(def.z.dim(), rng);
    const double val = dot(zc, hom.at({xi}) * zc).real();
    const double zn = g0_norm(def, def.z.columns * zc);
    ratio_min = std::min(ratio_min, val / (xi * xi * zn * zn));
  }
  CHECK(ratio_min >= hom.nu_star * (1 - 1e-12));
}

TEST_CASE("synthetic family: generic defect, homogenised form and both mass scalings") {
  for (bool unit : {false, true}) {
    const SyntheticFamily fam(3, 2, 41, unit);
    const DefectDecomposition def = build_defect(fam);
    CHECK(def.v_star.dim() == 3);
    CHECK(def.z.dim() == 1);
    CHECK(def.mass_scale == (unit ? 0.5 : 1.0));
    const Matrix bz = def.v_star.columns.adjoint() * (def.b0 * def.z.columns);
    const Matrix dz = def.v_star.columns.adjoint() * (def.d0 * def.z.columns);
    CHECK((bz - cplx(def.mass_scale) * dz).max_abs() < 1e-9);
    const HomogenisedForm hom = homogenised_form(fam, def);
    CHECK(hom.at({1.0})(0, 0).real() == doctest::Approx(fam.ahom() * std::norm(def.z.columns(0, 0))).epsilon(1e-10));
  }
}

TEST_CASE("interlacing of limit fiber eigenvalues") {
  for (bool unit : {false, true}) {
    const SyntheticFamily fam(4, 2, 7, unit);
    const DefectDecomposition def = build_defect(fam);
    const HomogenisedForm hom = homogenised_form(fam, def);
    const LimitBands lb = limit_bands(def, 12);
    const int nstar = def.v_star.dim();
    for (double xi : {0.0, 0.3, 1.0, 2.7, 8.0, 40.0, 300.0}) {
      const RVec ev = limit_fiber_eigs(hom, def, {xi});
      for (int k = 0; k < nstar; ++k) {
        CHECK(ev[k] >= lb.lambda0[k] - 1e-9 * std::max(1.0, lb.lambda0[k]));
        CHECK(ev[k] <= lb.lambda_star[k] + 1e-9 * std::max(1.0, lb.lambda_star[k]));
      }
      CHECK(ev[nstar] >= lb.lambda0[nstar] - 1e-9 * std::max(1.0, lb.lambda0[nstar]));
    }
    // ξ = 0 gives the pencil b₀ vs d₀ on V₀.
    CHECK(max_diff(limit_fiber_eigs(hom, def, {0.0}), lb.lambda0) < 1e-9 * lb.lambda0.back());
    CHECK_FALSE(lb.truncated);
    CHECK(std::isinf(lb.bands.parts().back().hi));
  }
}

TEST_CASE("beta: series and resolvent paths agree away from poles") {
  SplitMix64 rng(8);
  for (bool unit : {false, true}) {
    const SyntheticFamily fam(5, 3, 99, unit);
    const BetaEvaluator beta(build_defect(fam));
    int tested = 0;
    while (tested < 60) {
      const double lam = rng.uniform(0.0, 20.0);
      if (beta.near_pole(lam, 1e-3 * (1 + lam))) continue;
      const Matrix s = beta.matrix(lam), r = beta.matrix_resolvent(lam);
      CHECK((s - r).max_abs() <= 1e-8 * std::max(1.0, s.max_abs()));
      ++tested;
    }
  }
}

TEST_CASE("beta sign matches the limit bands") {
  for (bool unit : {false, true}) {
    const SyntheticFamily fam(4, 2, 5, unit);
    const DefectDecomposition def = build_defect(fam);
    const BetaEvaluator beta(def);
    const LimitBands lb = limit_bands(def, 12);
    const double top = 1.5 * lb.lambda0.back() + 2.0;
    int inside = 0, outside = 0;
    for (int i = 0; i <= 3000; ++i) {
      const double lam = top * i / 3000.0;
      bool near_edge = false;
      for (const Interval& p : lb.bands.parts())
        near_edge |= std::fabs(lam - p.lo) < 1e-7 * (1 + lam) || std::fabs(lam - p.hi) < 1e-7 * (1 + lam);
      if (near_edge) continue;
      const bool in = lb.bands.contains(lam);
      CHECK(spectrum_membership(beta, lam) == in);
      (in ? inside : outside)++;
    }
    CHECK(inside > 100);
    CHECK(outside > 100);
  }
}

TEST_CASE("dispersion roots reproduce limit fiber eigenvalues") {
  for (bool unit : {false, true}) {
    const SyntheticFamily fam(4, 2, 13, unit);
    const DefectDecomposition def = build_defect(fam);
    const HomogenisedForm hom = homogenised_form(fam, def);
    const BetaEvaluator beta(def);
    const LimitBands lb = limit_bands(def, 12);
    int hits = 0;
    for (int i = 1; i < 400; ++i) {
      const double lam = 2.0 * lb.lambda0.back() * i / 400.0;
      if (beta.near_pole(lam, 1e-6 * (1 + lam))) continue;
      const RVec ts = dispersion(beta, hom, lam, {1.0});
      CHECK(ts.empty() != lb.bands.contains(lam));
      for (double t : ts) {
        const RVec ev = limit_fiber_eigs(hom, def, {t});
        double best = 1e300;
        for (double v : ev) best = std::min(best, std::fabs(v - lam));
        CHECK(best <= 1e-6 * std::max(1.0, lam));
        ++hits;
      }
    }
    CHECK(hits > 50);
    // At the bottom of the spectrum the root is ξ = 0.
    const RVec t0 = dispersion(beta, hom, lb.lambda0[0] * (1 + 1e-12), {1.0});
    REQUIRE_FALSE(t0.empty());
    CHECK(t0.front() < 1e-4);
  }
}

TEST_CASE("full corrector: cell problem residual and quadratic deviation from the linearisation") {
  SplitMix64 rng(21);
  const auto fam = classical_1d(kA14, Grid1D(32));
  const DefectDecomposition def = build_defect(fam);
  const Matrix g0 = def.a0 + def.b0;
  const CVec e(32, 1.0);
  const CVec n1 = linearised_corrector(fam, def, e, 0);
  RVec ths, errs;
  for (int k = 0; k < 6; ++k) {
    const double th = 0.4 / std::pow(2.0, k);
    const CVec nf = corrector_full(fam, def, {th}, e);
    // 𝒩_θ e ∈ W₀ and a_θ(e + 𝒩_θ e, w) = 0 on W₀.
    CHECK(norm2(def.v0.columns.adjoint() * (g0 * nf)) < 1e-9);
    const CVec r = fam.assemble_a({th}) * (e + nf);
    for (int t = 0; t < 3; ++t) {
      CVec w = random_vec(32, rng);
      w = w - def.v0.columns * (def.v0.columns.adjoint() * (g0 * w));
      CHECK(std::abs(dot(w, r)) < 1e-9 * std::max(1.0, norm2(r) * norm2(w)));
    }
    ths.push_back(th);
    errs.push_back(g0_norm(def, nf - cplx(th) * n1));
  }
  CHECK(loglog_slope(ths, errs) >= 1.9);
  // W₀ = {0} for the difference model.
  const auto diff = difference_1d(kA14, Grid1D(8));
  CHECK(norm2(corrector_full(diff, build_defect(diff), {0.3}, CVec(8, 1.0))) < 1e-14);
}

TEST_CASE("transfer operator is unitary in d0 and Lipschitz") {
  const auto hc = highcontrast_1d(0.25, 0.75, Grid1D(32));
  const Matrix d0 = hc.assemble_d({0.0});
  double ke = 0;
  for (int i = 1; i <= 16; ++i) {
    const double th = -M_PI + 2 * M_PI * i / 17.0;
    const Matrix e = hc.transfer({th});
    CHECK((e.adjoint() * (d0 * e) - d0).max_abs() < 1e-10);
    ke = std::max(ke, (e - Matrix::identity(32)).max_abs() / std::fabs(th));
  }
  CHECK(ke <= 1.0 + 1e-12);
  CHECK((hc.transfer({0.0}) - Matrix::identity(32)).max_abs() == 0.0);
}

TEST_CASE("fiber eigenvalues: closed forms and the theta = 0 restriction") {
  const auto cls = classical_1d(PiecewiseCoefficient::constant(1.0), Grid1D(128));
  const RVec ev = fiber_eigs(cls, 0.5, {0.5}, 1);
  CHECK(ev[0] == doctest::Approx(0.25 / 0.25 + 1).epsilon(1e-3));
  for (double eps : {0.5, 0.1, 0.01}) CHECK(std::fabs(fiber_eigs(cls, eps, {0.0}, 1)[0] - 1.0) < 1e-6);
  CHECK_THROWS_AS(fiber_eigs(cls, 1.5, {0.0}, 1), FrameworkError);
}

TEST_CASE("limit bands: classical half-line") {
  const auto cls = classical_1d(kA14, Grid1D(16));
  const LimitBands lb = limit_bands(build_defect(cls));
  REQUIRE(lb.bands.parts().size() == 1);
  CHECK(lb.bands.parts()[0].lo == doctest::Approx(1.0));
  CHECK(std::isinf(lb.bands.parts()[0].hi));
  CHECK_FALSE(lb.truncated);
  CHECK(bstar_eigs(build_defect(cls)).values.empty());
}

TEST_CASE("limit approximation: classical scalar solution and self-similarity") {
  const auto cls = classical_1d(kA14, Grid1D(32));
  const DefectDecomposition def = build_defect(cls);
  const HomogenisedForm hom = homogenised_form(cls, def);
  const CVec e(32, 1.0);
  const double eps = 0.1, th = 0.05;
  const LimitApprox la = solve_limit_approx(cls, def, hom, eps, {th}, e);
  const cplx zc = la.z_coords[0] * def.z.columns(0, 0);
  CHECK(std::abs(zc - 1.0 / (1.6 * th * th / (eps * eps) + 1)) < 1e-12);
  const LimitApprox la2 = solve_limit_approx(cls, def, hom, eps / 4, {th / 4}, e);
  CHECK(std::abs(la2.z_coords[0] - la.z_coords[0]) < 1e-12);
  const LimitApprox la0 = solve_limit_approx(cls, def, hom, eps, {th}, CVec(32, 0.0));
  CHECK(norm2(la0.reconstruction) == 0.0);
}

TEST_CASE("exact solution: reduced problem on V0 at theta = 0") {
  const auto cls = classical_1d(kA14, Grid1D(32));
  const CVec e(32, 1.0);
  const CVec u = solve_exact(cls, 0.2, {0.0}, e);
  CHECK(norm2(u - e) < 1e-10);
}

TEST_CASE("error report: difference model rate and the continuous regime bound") {
  const auto fam = difference_1d(PiecewiseCoefficient::two_phase(1.0, 2.0), Grid1D(8));
  const DefectDecomposition def = build_defect(fam);
  const HomogenisedForm hom = homogenised_form(fam, def);
  SplitMix64 rng(4);
  const CVec f = random_vec(8, rng);
  {
    const CVec u = solve_exact(fam, 0.3, {0.4}, f);
    const ErrorReport r = error_report(fam, 0.3, {0.4}, f, u, u);
    CHECK(r.energy_err == 0.0);
    CHECK(r.l2_err == 0.0);
  }
  RVec epss, errs;
  for (double eps : {0.2, 0.1, 0.05, 0.025}) {
    double worst = 0;
    for (int i = 0; i <= 64; ++i) {
      const double th = -M_PI + 2 * M_PI * i / 64;
      const CVec u = solve_exact(fam, eps, {th}, f);
      const LimitApprox la = solve_limit_approx(fam, def, hom, eps, {th}, f);
      const ErrorReport r = error_report(fam, eps, {th}, f, u, la.reconstruction);
      worst = std::max(worst, r.energy_rel());
    }
    epss.push_back(eps);
    errs.push_back(worst);
  }
  CHECK(loglog_slope(epss, errs) >= 1.8);

  // Away from θ = 0 the classical solution itself is O(ε²).
  const auto cls = classical_1d(kA14, Grid1D(32));
  const double th = 2.0;
  const double nu = kernel_and_gap(cls, {th}).gap;
  for (double eps : {0.2, 0.05}) {
    const CVec g = random_vec(32, rng);
    const CVec u = solve_exact(cls, eps, {th}, g);
    const ErrorReport r = error_report(cls, eps, {th}, g, u, CVec(32, 0.0));
    CHECK(r.l2_err <= std::pow(eps, 4) / (nu * nu) * r.f_star_sq);
  }
}

TEST_CASE("collective spectrum of the difference model") {
  const auto fam = difference_1d(PiecewiseCoefficient::constant(1.0), Grid1D(8));
  const double eps = 0.2;
  const CollectiveSpectrum cs = collective_spectrum(fam, eps, theta_grid(1, 33), 0.0, 1000.0, 4, 2);
  REQUIRE(cs.set.parts().size() == 1);
  CHECK(cs.set.parts()[0].lo == doctest::Approx(1.0));
  CHECK(cs.set.parts()[0].hi == doctest::Approx(4 / (eps * eps) + 1));
  const CollectiveSpectrum pt = collective_spectrum(fam, eps, {{0.0}}, 0.0, 1000.0, 4);
  REQUIRE(pt.set.parts().size() == 1);
  CHECK(pt.set.parts()[0].lo == doctest::Approx(1.0));
  CHECK(pt.set.parts()[0].hi == doctest::Approx(1.0));
}
