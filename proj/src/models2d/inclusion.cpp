#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bandgap/models2d.hpp"

namespace bandgap {

namespace {

// Within each cluster of (numerically) equal eigenvalues the eigenbasis is
// rotated so that the whole mean sits on the first member.
RVec canonical_means(const RVec& values, const Matrix& vecs, const RVec& mass) {
  const int m = int(values.size());
  RVec means(m, 0.0);
  int i = 0;
  while (i < m) {
    int j = i + 1;
    while (j < m && values[j] - values[i] <= 1e-8 * std::max(1.0, std::fabs(values[i]))) ++j;
    double sq = 0;
    for (int c = i; c < j; ++c) {
      cplx mean = 0;
      for (int r = 0; r < vecs.rows(); ++r) mean += mass[r] * vecs(r, c);
      sq += std::norm(mean);
    }
    means[i] = std::sqrt(sq);
    i = j;
  }
  return means;
}

RMatrix real_dense(const SparseMatrix& a) {
  const Matrix d = a.to_dense();
  RMatrix r(d.rows(), d.cols());
  for (int i = 0; i < d.rows(); ++i)
    for (int j = 0; j < d.cols(); ++j) r(i, j) = d(i, j).real();
  return r;
}

double beta_direct(const DirichletProblem& p, double lambda) {
  RMatrix a = real_dense(p.stiffness);
  for (std::size_t i = 0; i < p.mass.size(); ++i) a(int(i), int(i)) -= lambda * p.mass[i];
  const RVec y = solve_symmetric(a, p.mass);
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += p.mass[i] * y[i];
  return lambda + lambda * lambda * s;
}

}  // namespace

double DirichletProblem::total_mass() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

DirichletProblem dirichlet_problem(const CellMesh& mesh) {
  const auto& interior = mesh.interior_nodes();
  if (interior.empty()) throw ModelError("inclusion has no interior mesh node");
  std::vector<int> index(mesh.node_count(), -1);
  for (std::size_t k = 0; k < interior.size(); ++k) index[interior[k]] = int(k);
  std::vector<SparseMatrix::Triplet> t;
  for (const MeshEdge& e : mesh.edges()) {
    if (e.w_inclusion == 0) continue;
    const int a = index[e.a], b = index[e.b];
    if (a >= 0) t.push_back({a, a, e.w_inclusion});
    if (b >= 0) t.push_back({b, b, e.w_inclusion});
    if (a >= 0 && b >= 0) {
      t.push_back({a, b, -e.w_inclusion});
      t.push_back({b, a, -e.w_inclusion});
    }
  }
  DirichletProblem p;
  p.stiffness = SparseMatrix::from_triplets(int(interior.size()), std::move(t));
  for (int v : interior) p.mass.push_back(mesh.mass(Region::Inclusion)[v]);
  return p;
}

InclusionSpectrum dirichlet_inclusion_eigs(const CellMesh& mesh, int m_count) {
  const DirichletProblem p = dirichlet_problem(mesh);
  const int n = int(p.mass.size());
  if (m_count < 1 || m_count > n) throw ModelError("mode count outside [1, interior node count]");
  // Diagonal mass: the pencil is the real symmetric M^{-1/2} K M^{-1/2}.
  const RMatrix k = real_dense(p.stiffness);
  RMatrix sym(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sym(i, j) = k(i, j) / std::sqrt(p.mass[i] * p.mass[j]);
  RVec values;
  RMatrix x;
  symmetric_eig(sym, values, &x);
  // A few extra modes so a degenerate cluster is not cut at the end.
  const int extra = std::min(n, m_count + 4);
  Matrix vecs(n, extra);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < extra; ++c) vecs(i, c) = x(i, c) / std::sqrt(p.mass[i]);
  values.resize(extra);
  const RVec means = canonical_means(values, vecs, p.mass);
  InclusionSpectrum s;
  s.dirichlet.assign(values.begin(), values.begin() + m_count);
  s.means.assign(means.begin(), means.begin() + m_count);
  return s;
}

RVec electrostatic_eigs(const CellMesh& mesh, int m_count) {
  const DirichletProblem p = dirichlet_problem(mesh);
  const int n = int(p.mass.size()) + 1;
  if (m_count < 1 || m_count > n) throw ModelError("mode count outside [1, interior node count + 1]");
  // Coordinates (c, ψ) on ℂe ∔ H¹₀(B); the constant carries the mass of the cell.
  std::vector<SparseMatrix::Triplet> mt{{0, 0, 1.0}};
  for (std::size_t i = 0; i < p.mass.size(); ++i) {
    const int r = int(i) + 1;
    mt.push_back({r, r, p.mass[i]});
    mt.push_back({0, r, p.mass[i]});
    mt.push_back({r, 0, p.mass[i]});
  }
  const SparseMatrix m = SparseMatrix::from_triplets(n, mt);
  std::vector<SparseMatrix::Triplet> kt;
  const auto& rp = p.stiffness.row_ptr();
  for (int i = 0; i + 1 < n; ++i)
    for (int q = rp[i]; q < rp[i + 1]; ++q) kt.push_back({i + 1, p.stiffness.col_idx()[q] + 1, p.stiffness.values()[q]});
  const SparseMatrix k = combine(1.0, SparseMatrix::from_triplets(n, kt), 1.0, m);
  RVec mu = lowest_eigs(k, m, m_count).values;
  for (double& x : mu) x -= 1.0;
  // The constant mode is exact; remove the rounding residue.
  if (std::fabs(mu[0]) < 1e-9) mu[0] = 0.0;
  return mu;
}

InclusionSpectrum inclusion_spectrum(const CellMesh& mesh, int m_count) {
  InclusionSpectrum s = dirichlet_inclusion_eigs(mesh, m_count);
  s.electrostatic = electrostatic_eigs(mesh, m_count);
  return s;
}

RMatrix perforated_homogenised(const CellMesh& mesh) {
  std::vector<int> index(mesh.node_count(), -1);
  int n = 0;
  for (int v = 0; v < mesh.node_count(); ++v)
    if (mesh.mass(Region::Matrix)[v] > 0) index[v] = n++;
  // Graph Laplacian of the matrix phase with one node pinned to remove constants.
  const int pinned = 0;
  auto red = [&](int v) { return index[v] == pinned ? -1 : index[v] - (index[v] > pinned ? 1 : 0); };
  std::vector<SparseMatrix::Triplet> t;
  std::vector<CVec> g(2, CVec(n - 1, 0.0));
  RMatrix d(2, 2);
  for (const MeshEdge& e : mesh.edges()) {
    const double w = e.w_matrix;
    if (w == 0) continue;
    const int a = red(e.a), b = red(e.b);
    if (a >= 0) t.push_back({a, a, w});
    if (b >= 0) t.push_back({b, b, w});
    if (a >= 0 && b >= 0) {
      t.push_back({a, b, -w});
      t.push_back({b, a, -w});
    }
    const double len = mesh.h();
    if (b >= 0) g[e.dir][b] += w * len;
    if (a >= 0) g[e.dir][a] -= w * len;
    d(e.dir, e.dir) += w * len * len;
  }
  const EnvelopeCholesky chol(SparseMatrix::from_triplets(n - 1, std::move(t)));
  std::vector<CVec> x = {chol.solve(g[0]), chol.solve(g[1])};
  RMatrix a(2, 2);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) a(j, k) = d(j, k) - dot(g[j], x[k]).real();
  return a;
}

ZhikovBeta::ZhikovBeta(const CellMesh& mesh, int modes) : prob_(dirichlet_problem(mesh)) {
  modes = std::min<int>(modes, int(prob_.mass.size()));
  spec_ = dirichlet_inclusion_eigs(mesh, modes);
  total_mass_ = prob_.total_mass();
}

bool ZhikovBeta::near_pole(double lambda, double pole_tol) const {
  if (pole_tol < 0) pole_tol = default_pole_tol(lambda);
  for (double p : spec_.dirichlet)
    if (std::fabs(lambda - p) <= pole_tol) return true;
  return false;
}

void ZhikovBeta::check_pole(double lambda, double pole_tol) const {
  if (near_pole(lambda, pole_tol)) {
    std::ostringstream os;
    os << "pole proximity: lambda = " << lambda << " is within tolerance of a Dirichlet eigenvalue";
    throw FrameworkError(os.str());
  }
}

double ZhikovBeta::direct(double lambda, double pole_tol) const {
  check_pole(lambda, pole_tol);
  return beta_direct(prob_, lambda);
}

ZhikovBeta::Series ZhikovBeta::series(double lambda, double pole_tol) const {
  check_pole(lambda, pole_tol);
  Series s;
  double sum = 0, captured = 0;
  for (std::size_t m = 0; m < spec_.dirichlet.size(); ++m) {
    const double w = spec_.means[m] * spec_.means[m];
    sum += w / (spec_.dirichlet[m] - lambda);
    captured += w;
  }
  s.value = lambda + lambda * lambda * sum;
  const double rest = std::max(0.0, total_mass_ - captured);
  const double top = spec_.dirichlet.back();
  s.tail_bound = rest == 0 ? 0.0 : (lambda < top ? lambda * lambda * rest / (top - lambda) : IntervalSet::kInf);
  return s;
}

double zhikov_beta(const CellMesh& mesh, double lambda) { return beta_direct(dirichlet_problem(mesh), lambda); }

double beta_ball_3d(double a, double lambda) {
  if (!(a > 0 && a < 0.5)) throw ModelError("ball radius must lie in (0, 1/2)");
  const double vol = 4.0 * M_PI * a * a * a / 3.0;
  const double x = a * std::sqrt(lambda);
  // 1 − x cot x, with its Taylor series near 0.
  const double g = x < 1e-3 ? x * x / 3.0 + std::pow(x, 4) / 45.0 : 1.0 - x / std::tan(x);
  return lambda * (1.0 - vol) + 4.0 * M_PI * a * g;
}

double beta_ball_3d_series(double a, double lambda, int modes) {
  // Radial Dirichlet modes sin(mπr/a)/r: eigenvalue (mπ/a)², squared mean 8a³/(πm²).
  double sum = 0;
  for (int m = modes; m >= 1; --m) {
    const double lm = std::pow(m * M_PI / a, 2);
    sum += 8.0 * a * a * a / (M_PI * m * m) / (lm - lambda);
  }
  return lambda + lambda * lambda * sum;
}

IntervalSet limit_spectrum_dp(const InclusionSpectrum& spec, int band_count) {
  if (band_count > int(spec.dirichlet.size()) || band_count > int(spec.electrostatic.size()))
    throw ModelError("not enough inclusion modes for the requested band count");
  IntervalSet s;
  for (int m = 0; m < band_count; ++m) s.add(spec.electrostatic[m], std::max(spec.electrostatic[m], spec.dirichlet[m]));
  return s;
}

namespace {

// ∫ ½ r_max(φ)² dφ over [p0, p1] for the square [−π, π]², split at its corners.
double square_sector(double p0, double p1) {
  const double c = 0.5 * M_PI * M_PI;
  double area = 0, a = p0;
  while (a < p1) {
    const double corner = (std::floor((a - M_PI / 4) / (M_PI / 2)) + 1) * (M_PI / 2) + M_PI / 4;
    const double b = std::min(p1, corner), mid = 0.5 * (a + b);
    if (std::fabs(std::cos(mid)) >= std::fabs(std::sin(mid)))
      area += c * (std::tan(b) - std::tan(a));
    else
      area += c * (1.0 / std::tan(a) - 1.0 / std::tan(b));
    a = b;
  }
  return area;
}

}  // namespace

double sublevel_area(const std::function<double(const RVec&)>& f, double level, int rays, double tol) {
  if (rays < 4) throw ModelError("at least four rays are required");
  double area = 0;
  const double dphi = 2.0 * M_PI / rays;
  for (int r = 0; r < rays; ++r) {
    const double phi = (r + 0.5) * dphi;
    const double c = std::cos(phi), s = std::sin(phi);
    const double rmax = M_PI / std::max(std::fabs(c), std::fabs(s));
    auto at = [&](double t) { return f({t * c, t * s}); };
    double rad;
    if (at(0.0) > level) {
      rad = 0;
    } else if (at(rmax) <= level) {
      area += square_sector(phi - 0.5 * dphi, phi + 0.5 * dphi);
      continue;
    } else {
      double lo = 0, hi = rmax;
      while (hi - lo > tol * rmax) {
        const double mid = 0.5 * (lo + hi);
        (at(mid) <= level ? lo : hi) = mid;
      }
      rad = 0.5 * (lo + hi);
    }
    area += 0.5 * rad * rad * dphi;
  }
  return area;
}

IdsResult ids_asymptotic(const HighContrast2D& fam, const InclusionSpectrum& spec, const ZhikovBeta& beta,
                         const RMatrix& ahom, double tau, double lambda, int k, int rays) {
  if (!(tau > 1)) throw ModelError("contrast must exceed 1");
  if (k < 1 || k > int(spec.electrostatic.size()) || k > int(spec.dirichlet.size()))
    throw ModelError("band index outside the computed inclusion spectrum");
  if (!(lambda > spec.electrostatic[k - 1] && lambda < spec.dirichlet[k - 1]))
    throw FrameworkError("lambda lies outside the requested limit band");
  const double eps = 1.0 / std::sqrt(tau);
  const double det = ahom(0, 0) * ahom(1, 1) - ahom(0, 1) * ahom(1, 0);
  IdsResult r;
  r.m_formula = (k - 1) + beta.direct(lambda) / (4.0 * M_PI * tau * std::sqrt(det));
  auto band = [&](const RVec& theta) { return reduced_from_fiber(fiber_eigs(fam, eps, theta, k)[k - 1]); };
  r.m_counted = (k - 1) + sublevel_area(band, lambda, rays, 1e-6) / (4.0 * M_PI * M_PI);
  return r;
}

double ImperfectLimit::phi(double mu) const { return mu / (mu0 - mu) * (mu0 - mu * (1.0 - area)); }

IntervalSet ImperfectLimit::bands() const {
  IntervalSet s = IntervalSet::single(0.0, mu0);
  s.add(IntervalSet::half_line(mu0 + mu1));
  return s;
}

ImperfectLimit imperfect_limit(double s) {
  if (!(s > 0 && s < 1)) throw ModelError("inclusion side must lie in (0, 1)");
  ImperfectLimit l;
  l.s = s;
  l.area = s * s;
  l.mu0 = 4.0 / s;
  l.mu1 = 4.0 * s / (1.0 - s * s);
  return l;
}

}  // namespace bandgap
