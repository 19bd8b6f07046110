// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "bandgap/models1d.hpp"
#include "bandgap/models2d.hpp"
#include "bandgap/parallel.hpp"
#include "bandgap/rng.hpp"
#include "bandgap/sweep.hpp"
#include "bandgap/twoscale.hpp"

using namespace bandgap;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4)));
};

void Outcome::require(bool ok, const char* fmt, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  if (!detail.empty()) detail += "; ";
  detail += buf;
  if (!ok) {
    pass = false;
    detail += " [x]";
  }
}

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

// ---- 1 ------------------------------------------------------------------

Outcome harmonic_mean() {
  Outcome o;
  const auto a = PiecewiseCoefficient::two_phase(1.0, 4.0);
  const double oracle = 1.0 / (0.5 / 1.0 + 0.5 / 4.0);
  for (int m : {8, 16, 32}) {
    const auto fam = classical_1d(a, Grid1D(m));
    const DefectDecomposition def = build_defect(fam);
    const double got = homogenised_form(fam, def).block(0, 0)(0, 0).real();
    o.require(std::fabs(got - oracle) < 1e-12, "M=%d err %.1e", m, std::fabs(got - oracle));
  }
  return o;
}

// ---- 2 ------------------------------------------------------------------

Outcome difference_model() {
  Outcome o;
  const auto fam = difference_1d(PiecewiseCoefficient::constant(1.0), Grid1D(16));
  double worst = 0;
  for (double eps : {0.25, 0.1, 0.0078125})
    for (double th : {-M_PI, -1.3, 0.0, 0.4, 2.0, M_PI}) {
      const double s = std::sin(th / 2);
      const double oracle = 4 * s * s / (eps * eps) + 1;
      for (double v : fiber_eigs(fam, eps, {th}, 4)) worst = std::max(worst, rel(v, oracle));
    }
  o.require(worst < 1e-12, "closed form rel err %.1e", worst);

  const DefectDecomposition def = build_defect(fam);
  const HomogenisedForm hom = homogenised_form(fam, def);
  SweepConfig cfg;
  cfg.model = "difference1d";
  cfg.workers = default_workers();
  const SweepResult r = eig_rate_sweep(fam, def, hom, cfg);
  o.require(r.fit.slope >= 1.8, "slope %.4f", r.fit.slope);
  o.require(r.fit.r_squared >= 0.99, "r2 %.6f", r.fit.r_squared);
  return o;
}

// ---- 3 ------------------------------------------------------------------

// Random piecewise coefficient with breaks on the nodes of a 32-element mesh.
PiecewiseCoefficient random_piecewise(SplitMix64& rng, double lo, double hi) {
  const int pieces = 2 + int(rng.uniform() * 3);
  std::vector<int> nodes;
  while (int(nodes.size()) < pieces) {
    const int n = int(rng.uniform() * 32);
    if (std::find(nodes.begin(), nodes.end(), n) == nodes.end()) nodes.push_back(n);
  }
  std::sort(nodes.begin(), nodes.end());
  RVec breaks, values;
  for (int n : nodes) {
    breaks.push_back(n / 32.0);
    values.push_back(lo + (hi - lo) * rng.uniform());
  }
  return PiecewiseCoefficient(breaks, values);
}

// Exact piece lengths, wrapping the last piece past 1.
double mean_of(const PiecewiseCoefficient& c, const std::function<double(double)>& g) {
  const RVec& br = c.breaks();
  double s = 0;
  for (std::size_t i = 0; i < br.size(); ++i) {
    const double end = i + 1 < br.size() ? br[i + 1] : 1.0 + br[0];
    s += (end - br[i]) * g(c.values()[i]);
  }
  return s;
}

Outcome diffdiff_model() {
  Outcome o;
  SplitMix64 rng(20260301);
  for (int t = 0; t < 3; ++t) {
    const PiecewiseCoefficient a = random_piecewise(rng, 0.5, 5.0), d = random_piecewise(rng, 0.0, 3.0);
    const double oracle = 1.0 / mean_of(a, [](double v) { return 1.0 / v; }) + mean_of(d, [](double v) { return v; });
    const auto fam = diffdiff_1d(a, d, Grid1D(32));
    const double got = homogenised_form(fam, build_defect(fam)).block(0, 0)(0, 0).real();
    o.require(std::fabs(got - oracle) < 1e-10, "pair %d: %.10f vs %.10f", t, got, oracle);
  }
  return o;
}

// ---- 4 ------------------------------------------------------------------

Outcome magnetic_model() {
  Outcome o;
  const auto v = PiecewiseCoefficient::two_phase(1.0, 3.0);
  for (double c : {0.3, M_PI, 2 * M_PI + 0.3}) {
    const auto fam = magnetic_1d(PiecewiseCoefficient::constant(c), v, Grid1D(32));
    const Theta0Result r = find_theta0(fam);
    const double err = std::fabs(wrap_angle(r.theta0 - std::fmod(c, 2 * M_PI)));
    o.require(err < 1e-6 && r.min_eig <= 1e-9, "c=%.4f err %.1e min_eig %.1e", c, err, r.min_eig);
  }
  return o;
}

// ---- 5 ------------------------------------------------------------------

double reduced_distance(const FiberFamily& fam, double eps, const std::vector<RVec>& grid, const IntervalSet& limit,
                        IntervalSet* set = nullptr) {
  const IntervalSet s = reduced_from_fiber(
      collective_spectrum(fam, eps, grid, fiber_from_reduced(0), fiber_from_reduced(12), 4, default_workers()).set);
  if (set) *set = s;
  return hausdorff_interval_dist(s, limit, 0, 12);
}

Outcome imperfect_interface() {
  Outcome o;
  const ImperfectLimit lim = imperfect_limit(0.5);
  o.require(std::fabs(lim.mu0 - 8) < 1e-12 && std::fabs(lim.mu1 - 8.0 / 3) < 1e-12, "mu0 %.12g mu1 %.12g", lim.mu0,
            lim.mu1);
  const IntervalSet limit = lim.bands();
  const auto grid = theta_wedge_grid(17);
  const RVec eps = {0.2, 0.1, 0.05};

  const auto fine = imperfect_2d(CellMesh(0.5, 32));
  RVec d;
  for (double e : eps) {
    IntervalSet s;
    d.push_back(reduced_distance(fine, e, grid, limit, &s));
    if (e <= 0.05) {
      const bool empty = s.clip(9.0, 10.3).empty();
      o.require(empty, "[9.0,10.3] free at eps %.2f", e);
    }
  }
  const double coarse = reduced_distance(imperfect_2d(CellMesh(0.5, 16)), eps.back(), grid, limit);
  const double floor = fem_floor(coarse, d.back());
  RVec ds;
  for (double x : d) ds.push_back(std::max(0.0, x - floor));
  o.require(true, "dist %.4g %.4g %.4g, floor %.3g", d[0], d[1], d[2], floor);
  for (std::size_t i = 1; i < ds.size(); ++i) {
    const double ratio = ds[i] / ds[i - 1];
    o.require(ratio <= 0.7, "ratio %.3f", ratio);
  }
  return o;
}

// ---- 6 ------------------------------------------------------------------

Outcome high_contrast() {
  Outcome o;
  const CellMesh m(0.5, 64);
  const InclusionSpectrum sp = inclusion_spectrum(m, 4);
  const double lam1 = sp.dirichlet[0];
  o.require(rel(lam1, 8 * M_PI * M_PI) < 0.02, "lambda1 %.4f", lam1);
  o.require(rel(sp.means[0], 4 / (M_PI * M_PI)) < 0.02, "<phi11> %.5f", sp.means[0]);

  const ZhikovBeta beta(m, 100);
  int checked = 0;
  double worst = 0;
  for (int i = 0; i < 60 && checked < 20; ++i) {
    const double lam = 3.0 + 14.5 * i;
    bool far = true;
    for (double p : beta.poles()) far = far && std::fabs(lam - p) >= 0.5;
    if (!far) continue;
    ++checked;
    const double dv = beta.direct(lam);
    worst = std::max(worst, std::fabs(dv - beta.series(lam).value) / std::fabs(dv));
  }
  o.require(checked == 20 && worst <= 0.01, "series vs direct worst %.2e at %d lambda", worst, checked);

  // β increases from −∞ just above λ₁; bisect for its first zero there.
  double lo = lam1 * (1 + 1e-4), hi = lam1;
  for (double p : beta.poles())
    if (p > lam1 * (1 + 1e-9)) {
      hi = p * (1 - 1e-4);
      break;
    }
  double root = 0;
  if (beta.direct(lo) < 0 && beta.direct(hi) > 0) {
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (beta.direct(mid) < 0 ? lo : hi) = mid;
    }
    root = 0.5 * (lo + hi);
  }
  const double mu2 = sp.electrostatic[1];
  o.require(root > 0 && rel(mu2, root) < 0.01, "mu2 %.4f beta root %.4f", mu2, root);
  o.require(mu2 > lam1, "gap (%.3f, %.3f)", lam1, mu2);
  return o;
}

// ---- 7 ------------------------------------------------------------------

Outcome ball() {
  Outcome o;
  double worst = 0;
  for (double lam : {5.0, 10.0, 20.0})
    worst = std::max(worst, std::fabs(beta_ball_3d(0.25, lam) - beta_ball_3d_series(0.25, lam, 1000)));
  o.require(worst < 1e-5, "closed form vs series %.1e", worst);
  const double slope = beta_ball_3d(0.25, 1e-4) / 1e-4;
  o.require(std::fabs(slope - 1) < 1e-3, "beta(1e-4)/1e-4 %.7f", slope);
  return o;
}

// ---- 8 ------------------------------------------------------------------

double diff(const CVec& a, const CVec& b) {
  double m = a.size() == b.size() ? 0 : 1e300;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Outcome two_scale() {
  Outcome o;
  constexpr int kM = 64, kP = 16;
  constexpr double kEps = 1.0 / 64;
  const CellMask mask = mask_interval(kP, -0.25, 0.25);
  SplitMix64 rng(88);
  auto signal = [&] {
    SampledSignal f(kEps, kM, kP);
    for (cplx& x : f.values) x = cplx(rng.normal(), rng.normal());
    return f;
  };
  auto field = [&] {
    TwoScaleField f(kEps, kM, kP);
    for (cplx& x : f.values) x = cplx(rng.normal(), rng.normal());
    return f;
  };
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    const SampledSignal f = signal();
    const TwoScaleField u = field();
    const TwoScaleField j = compose_J(f, mask);
    const double scale = f.norm() * u.norm();
    // Isometry, left inverse, adjoint pairing and range projection, for 𝓘 and J.
    worst = std::max(worst, rel(interpolate(f).norm(), f.norm()));
    worst = std::max(worst, rel(j.norm(), f.norm()));
    worst = std::max(worst, diff(interpolate_adjoint(interpolate(f)).values, f.values));
    worst = std::max(worst, diff(compose_J_adjoint(j, mask).values, f.values));
    worst = std::max(worst, std::abs(inner(interpolate(f), u) - inner(f, interpolate_adjoint(u))) / scale);
    worst = std::max(worst, std::abs(inner(j, u) - inner(f, compose_J_adjoint(u, mask))) / scale);
    worst = std::max(worst, diff(interpolate(interpolate_adjoint(u)).values, smooth_field(u).values));
    worst = std::max(worst, diff(compose_J(compose_J_adjoint(u, mask), mask).values, smooth_field(u).values));
    worst = std::max(worst, diff(translate_inverse(translate(interpolate(f), mask), mask).values,
                                 interpolate(f).values));
  }
  o.require(worst <= 1e-10, "identities worst %.1e over 20 signals", worst);

  // Φ(x, y) = Σ_q c_q(y) e^{iξ_q x} with |ξ_q| < π/ε, sampled along y = {x/ε}.
  auto xi = [&](int q) { return 2 * M_PI * q / (kEps * kM); };
  auto phi = [&](double x, double y) {
    cplx s = 0;
    for (int q : {-31, -7, 0, 3, 30}) s += cplx(std::cos(2 * y + q), y * y - 0.05 * q) * std::polar(1.0, xi(q) * x);
    return s;
  };
  SampledSignal f(kEps, kM, kP);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double x = f.x(int(i));
    f.values[i] = phi(x, x / kEps - std::floor(x / kEps + 0.5));
  }
  const TwoScaleField u = interpolate(f);
  double err = 0;
  for (int m = 0; m < u.x_count(); ++m)
    for (int k = 0; k < kP; ++k) err = std::max(err, std::abs(u.at(m, k) - phi(u.x(m), u.y(k))));
  o.require(err <= 1e-10, "sampling theorem err %.1e", err);
  return o;
}

// ---- 9 ------------------------------------------------------------------

Outcome density_of_states() {
  Outcome o;
  const CellMesh m(0.5, 16);
  const auto fam = highcontrast_2d(m);
  const InclusionSpectrum sp = inclusion_spectrum(m, 4);
  const ZhikovBeta beta(m, 49);
  const RMatrix a = perforated_homogenised(m);
  const RVec taus = {125, 250, 500, 1000, 2000};
  RVec disc(taus.size());
  parallel_for(int(taus.size()), default_workers(),
               [&](int i) { disc[i] = ids_asymptotic(fam, sp, beta, a, taus[i], 40.0, 1, 16).discrepancy(); });
  for (std::size_t i = 1; i < taus.size(); ++i) {
    const double f = disc[i - 1] / disc[i];
    o.require(f >= 1.2, "tau %g: %.2e (x%.2f)", taus[i], disc[i], f);
  }
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  Outcome (*run)();
};

}  // namespace

int main() {
  const std::vector<Criterion> all = {
      {1, "classical1d harmonic mean", 1, harmonic_mean},
      {2, "difference1d closed forms and eigenvalue rate", 10, difference_model},
      {3, "diffdiff1d homogenised coefficient", 60, diffdiff_model},
      {4, "magnetic1d degeneracy point", 60, magnetic_model},
      {5, "imperfect2d limit gap and spectral distance", 300, imperfect_interface},
      {6, "highcontrast2d inclusion spectrum and beta", 600, high_contrast},
      {7, "3D ball beta", 60, ball},
      {8, "two-scale identities and sampling", 60, two_scale},
      {9, "integrated density of states", 600, density_of_states},
  };
  int failed = 0;
  for (const Criterion& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) o.require(false, "runtime %.1fs over %.0fs", secs, c.budget_s);
    if (!o.pass) ++failed;
    std::printf("%s %d %s (%.2fs): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
