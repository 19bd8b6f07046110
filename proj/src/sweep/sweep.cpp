#include "bandgap/sweep.hpp"

#include <algorithm>
#include <cmath>

#include "bandgap/parallel.hpp"
#include "bandgap/rng.hpp"

namespace bandgap {

void SweepConfig::validate() const {
  if (eps.empty()) throw SweepError("epsilon list is empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0 && eps[i] < 1)) throw SweepError("epsilon values must lie in (0,1)");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw SweepError("epsilon list must be strictly decreasing");
  }
  if (!(window_lo <= window_hi)) throw SweepError("window must satisfy a <= b");
  if (theta_points < 1) throw SweepError("theta_points must be positive");
  if (k_count < 1) throw SweepError("k_count must be positive");
  if (workers < 1) throw SweepError("workers must be positive");
}

nlohmann::json SweepConfig::to_json() const {
  return {{"model", model},   {"model_params", model_params}, {"eps", eps},
          {"theta_points", theta_points}, {"k_count", k_count},  {"window", {window_lo, window_hi}},
          {"reduced", reduced}, {"seed", seed}};
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
  std::vector<double> x, y;
  for (const auto& [e, err] : points) {
    if (!(e > 0)) throw SweepError("fit_rate: epsilon must be positive");
    if (err > 1e-14) {
      x.push_back(std::log(e));
      y.push_back(std::log(err));
    }
  }
  if (x.size() < 3) throw SweepError("fit_rate needs at least 3 usable points");
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw SweepError("fit_rate needs distinct epsilon values");
  RateFit f;
  f.points = int(x.size());
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r_squared = syy > 1e-24 ? 1.0 - ss_res / syy : 1.0;
  if (f.slope < 0.1) f.flags.push_back("no convergence");
  if (f.r_squared < 0.98) f.flags.push_back("poor fit");
  return f;
}

double fem_floor(double coarse, double fine, int order) {
  return std::max(0.0, (coarse - fine) / (std::pow(2.0, order) - 1.0));
}

namespace {

void finish(SweepResult& r, double floor) {
  r.floor = floor;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    SweepPoint& p = r.points[i];
    p.error_floor_subtracted = std::max(0.0, p.error - floor);
    pts.push_back({p.eps, p.error_floor_subtracted});
    if (i > 0 && p.error > 1.05 * r.points[i - 1].error + 1e-14 &&
        std::find(r.flags.begin(), r.flags.end(), "non-monotone") == r.flags.end())
      r.flags.push_back("non-monotone");
  }
  try {
    r.fit = fit_rate(pts);
  } catch (const SweepError&) {
    // all points at noise level
    r.fit.flags = {"too few points"};
  }
  for (const std::string& f : r.fit.flags) r.flags.push_back(f);
}

std::vector<RVec> grid_for(const FiberFamily& fam, const SweepConfig& cfg) {
  return theta_grid(fam.theta_dim(), cfg.theta_points);
}

RVec scaled(const RVec& t, double s) {
  RVec out = t;
  for (double& x : out) x *= s;
  return out;
}

}  // namespace

SweepResult eig_rate_sweep(const FiberFamily& fam, const DefectDecomposition& def, const HomogenisedForm& hom,
                           const SweepConfig& cfg, std::vector<std::vector<EigRow>>* tables, double floor) {
  cfg.validate();
  const std::vector<RVec> grid = grid_for(fam, cfg);
  const int v0 = def.v_star.dim() + def.z.dim();
  const int kk = std::min(cfg.k_count, v0);
  const bool tail = v0 < fam.basis_dim();
  SweepResult out;
  if (tables) tables->assign(cfg.eps.size(), {});
  for (std::size_t e = 0; e < cfg.eps.size(); ++e) {
    const double eps = cfg.eps[e];
    std::vector<std::vector<EigRow>> rows(grid.size());
    RVec tail_inv(grid.size(), 0.0);
    parallel_for(int(grid.size()), cfg.workers, [&](int i) {
      const RVec fiber = fiber_eigs(fam, eps, grid[i], tail ? v0 + 1 : kk);
      const RVec limit = limit_fiber_eigs(hom, def, scaled(grid[i], 1.0 / eps), kk);
      for (int k = 0; k < kk; ++k)
        rows[i].push_back({grid[i], k + 1, fiber[k], limit[k], std::fabs(1.0 / fiber[k] - 1.0 / limit[k])});
      if (tail) tail_inv[i] = 1.0 / fiber[v0];
    });
    double worst = 0;
    for (const auto& r : rows)
      for (const EigRow& row : r) worst = std::max(worst, row.error);
    out.points.push_back({eps, worst, 0});
    if (tail) out.tail_constant.push_back(*std::max_element(tail_inv.begin(), tail_inv.end()) / eps);
    if (tables)
      for (auto& r : rows) (*tables)[e].insert((*tables)[e].end(), r.begin(), r.end());
  }
  finish(out, floor);
  for (double c : out.tail_constant)
    if (c > 2.0 * out.tail_constant.front()) {
      out.flags.push_back("tail bound growth");
      break;
    }
  return out;
}

ResolventSweep resolvent_rate_sweep(const FiberFamily& fam, const DefectDecomposition& def,
                                    const HomogenisedForm& hom, const SweepConfig& cfg, int count,
                                    const std::vector<RVec>* theta_subset) {
  cfg.validate();
  const std::vector<RVec> grid = theta_subset ? *theta_subset : grid_for(fam, cfg);
  const int n = fam.basis_dim();
  std::vector<CVec> rhs;
  SplitMix64 rng(cfg.seed);
  for (int r = 0; r < count; ++r) {
    CVec f(n);
    for (cplx& x : f) x = cplx(rng.normal(), rng.normal());
    rhs.push_back(std::move(f));
  }
  rhs.push_back(CVec(n, cplx(1.0, 0.0)));

  ResolventSweep out;
  const int jobs = int(grid.size() * rhs.size());
  for (double eps : cfg.eps) {
    RVec energy(jobs, 0.0), l2(jobs, 0.0);
    parallel_for(jobs, cfg.workers, [&](int job) {
      const RVec& theta = grid[job / rhs.size()];
      const CVec& f = rhs[job % rhs.size()];
      const CVec exact = solve_exact(fam, eps, theta, f);
      const CVec approx = solve_limit_approx(fam, def, hom, eps, theta, f).reconstruction;
      const ErrorReport rep = error_report(fam, eps, theta, f, exact, approx);
      const double fd = std::real(dot(f, fam.assemble_d_sparse(theta) * f));
      energy[job] = rep.energy_rel();
      l2[job] = fd > 0 ? std::sqrt(rep.l2_err / fd) : 0.0;
    });
    out.energy.points.push_back({eps, *std::max_element(energy.begin(), energy.end()), 0});
    out.l2.points.push_back({eps, *std::max_element(l2.begin(), l2.end()), 0});
  }
  finish(out.energy, 0);
  finish(out.l2, 0);
  return out;
}

namespace {

IntervalSet collective_in(const FiberFamily& fam, double eps, const std::vector<RVec>& grid, double lo, double hi,
                          int k_count, bool reduced, int workers) {
  const double shift = reduced ? kFiberShift : 0.0;
  const IntervalSet s = collective_spectrum(fam, eps, grid, lo + shift, hi + shift, k_count, workers).set;
  return reduced ? reduced_from_fiber(s) : s;
}

}  // namespace

SweepResult spectral_distance_sweep(const FiberFamily& fam, const IntervalSet& limit, const SweepConfig& cfg,
                                    const std::vector<RVec>& grid, double floor) {
  cfg.validate();
  SweepResult out;
  for (double eps : cfg.eps) {
    const IntervalSet coll =
        collective_in(fam, eps, grid, cfg.window_lo, cfg.window_hi, cfg.k_count, cfg.reduced, cfg.workers);
    out.points.push_back({eps, hausdorff_interval_dist(coll, limit, cfg.window_lo, cfg.window_hi), 0});
  }
  finish(out, floor);
  return out;
}

GapReport gap_report(const FiberFamily& fam, const IntervalSet& limit, double eps, double window_lo, double window_hi,
                     const std::vector<RVec>& grid, int k_count, bool reduced, int workers) {
  GapReport rep;
  rep.eps = eps;
  const std::vector<Interval> limit_gaps = limit.clip(window_lo, window_hi).gaps();
  if (limit_gaps.empty()) return rep;
  const IntervalSet coll = collective_in(fam, eps, grid, window_lo, window_hi, k_count, reduced, workers);
  std::vector<Interval> free;
  double cursor = window_lo;
  for (const Interval& p : coll.parts()) {
    if (p.lo > cursor) free.push_back({cursor, p.lo});
    cursor = std::max(cursor, p.hi);
  }
  if (cursor < window_hi) free.push_back({cursor, window_hi});
  for (const Interval& g : limit_gaps) {
    GapEntry entry;
    entry.limit = g;
    double best = 0;
    for (const Interval& f : free) {
      const double overlap = std::min(f.hi, g.hi) - std::max(f.lo, g.lo);
      if (overlap > best) {
        best = overlap;
        entry.observed = f;
        entry.found = true;
      }
    }
    if (entry.found) {
      entry.margin_lo = entry.observed.lo - g.lo;
      entry.margin_hi = g.hi - entry.observed.hi;
    }
    rep.gaps.push_back(entry);
  }
  return rep;
}

std::vector<IdsRow> ids_sweep(const HighContrast2D& fam, const InclusionSpectrum& spec, const ZhikovBeta& beta,
                              const RMatrix& ahom, const RVec& taus, double lambda, int k, int rays) {
  std::vector<IdsRow> out;
  for (double tau : taus) out.push_back({tau, ids_asymptotic(fam, spec, beta, ahom, tau, lambda, k, rays)});
  return out;
}

}  // namespace bandgap
