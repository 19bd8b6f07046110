#include <cmath>

#include "bandgap/models2d.hpp"
#include "json.hpp"

namespace bandgap {

namespace {

int wrap(int i, int n) { return ((i % n) + n) % n; }

// Corner offsets (in units of h) of triangle t ∈ {0, 1} in a square whose
// diagonal runs from (0,0) to (1,1) when `rising`, else from (1,0) to (0,1).
std::array<std::array<int, 2>, 3> corners(bool rising, int t) {
  if (rising) {
    if (t == 0) return {{{0, 0}, {1, 0}, {1, 1}}};
    return {{{0, 0}, {1, 1}, {0, 1}}};
  }
  if (t == 0) return {{{0, 0}, {1, 0}, {0, 1}}};
  return {{{1, 0}, {1, 1}, {0, 1}}};
}

}  // namespace

CellMesh::CellMesh(double s, int cells_per_side) : n_(cells_per_side), s_(s) {
  if (n_ < 4 || n_ % 2 != 0) throw ModelError("cells_per_side must be even and at least 4");
  if (!(s > 0 && s < 1)) throw ModelError("inclusion side must lie in (0, 1)");
  const double k_real = s * n_;
  const int k = int(std::lround(k_real));
  if (std::fabs(k_real - k) > 1e-9 || k % 2 != 0) throw ModelError("misaligned mesh: s * cells_per_side must be an even integer");
  b_lo_ = (n_ - k) / 2;
  b_hi_ = b_lo_ + k;

  const double h2q = 0.25 * h() * h();
  mass_matrix_.assign(node_count(), 0.0);
  mass_inclusion_.assign(node_count(), 0.0);
  for (int j = 0; j < n_; ++j) {
    for (int i = 0; i < n_; ++i) {
      const bool in = square_in_inclusion(i, j);
      const Region r = in ? Region::Inclusion : Region::Matrix;
      const bool rising = (i + j) % 2 == 0;
      for (int t = 0; t < 2; ++t) {
        const auto c = corners(rising, t);
        tris_.push_back({node(i + c[0][0], j + c[0][1]), node(i + c[1][0], j + c[1][1]), node(i + c[2][0], j + c[2][1])});
        tri_region_.push_back(r);
        tri_square_.push_back({i, j});
      }
      RVec& m = in ? mass_inclusion_ : mass_matrix_;
      for (int di = 0; di < 2; ++di)
        for (int dj = 0; dj < 2; ++dj) m[node(i + di, j + dj)] += h2q;
    }
  }

  for (int j = 0; j < n_; ++j) {
    for (int i = 0; i < n_; ++i) {
      for (int dir = 0; dir < 2; ++dir) {
        MeshEdge e;
        e.a = node(i, j);
        e.dir = dir;
        // Squares on either side of the edge.
        int s1i, s1j, s2i = i, s2j = j;
        if (dir == 0) {
          e.b = node(i + 1, j);
          s1i = i, s1j = j - 1;
        } else {
          e.b = node(i, j + 1);
          s1i = i - 1, s1j = j;
        }
        for (const auto& sq : {std::array<int, 2>{s1i, s1j}, std::array<int, 2>{s2i, s2j}})
          (square_in_inclusion(sq[0], sq[1]) ? e.w_inclusion : e.w_matrix) += 0.5;
        if (e.w_matrix > 0 && e.w_inclusion > 0) iface_edges_.push_back({e.a, e.b});
        edges_.push_back(e);
      }
    }
  }

  kind_.resize(node_count());
  for (int v = 0; v < node_count(); ++v) {
    const bool in = mass_inclusion_[v] > 0, out = mass_matrix_[v] > 0;
    kind_[v] = in && out ? NodeKind::Interface : (in ? NodeKind::Interior : NodeKind::Matrix);
    if (kind_[v] == NodeKind::Interior) interior_.push_back(v);
    if (kind_[v] == NodeKind::Interface) iface_nodes_.push_back(v);
  }
}

int CellMesh::node(int i, int j) const { return wrap(j, n_) * n_ + wrap(i, n_); }

std::array<double, 2> CellMesh::coord(int v) const {
  return {-0.5 + (v % n_) * h(), -0.5 + (v / n_) * h()};
}

bool CellMesh::square_in_inclusion(int i, int j) const {
  i = wrap(i, n_);
  j = wrap(j, n_);
  return i >= b_lo_ && i < b_hi_ && j >= b_lo_ && j < b_hi_;
}

double CellMesh::inclusion_area() const {
  const double side = (b_hi_ - b_lo_) * h();
  return side * side;
}

SparseMatrix CellMesh::p1_stiffness(Region r) const {
  std::vector<SparseMatrix::Triplet> t;
  for (std::size_t e = 0; e < tris_.size(); ++e) {
    if (tri_region_[e] != r) continue;
    const auto [i, j] = tri_square_[e];
    const auto c = corners((i + j) % 2 == 0, int(e % 2));
    double x[3], y[3];
    for (int k = 0; k < 3; ++k) x[k] = c[k][0] * h(), y[k] = c[k][1] * h();
    const double det = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]);
    const double area = 0.5 * std::fabs(det);
    double gx[3], gy[3];
    for (int k = 0; k < 3; ++k) {
      const int k1 = (k + 1) % 3, k2 = (k + 2) % 3;
      gx[k] = (y[k1] - y[k2]) / det;
      gy[k] = (x[k2] - x[k1]) / det;
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) t.push_back({tris_[e][a], tris_[e][b], area * (gx[a] * gx[b] + gy[a] * gy[b])});
  }
  return SparseMatrix::from_triplets(node_count(), std::move(t));
}

std::string CellMesh::to_json() const {
  nlohmann::json j;
  j["cells_per_side"] = n_;
  j["inclusion_side"] = s_;
  j["h"] = h();
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (int v = 0; v < node_count(); ++v) {
    const auto p = coord(v);
    nodes.push_back({p[0], p[1]});
  }
  auto& tris = j["triangles"] = nlohmann::json::array();
  auto& regions = j["regions"] = nlohmann::json::array();
  for (std::size_t e = 0; e < tris_.size(); ++e) {
    tris.push_back({tris_[e][0], tris_[e][1], tris_[e][2]});
    regions.push_back(tri_region_[e] == Region::Inclusion ? "inclusion" : "matrix");
  }
  auto& iface = j["interface_edges"] = nlohmann::json::array();
  for (const auto& e : iface_edges_) iface.push_back({e[0], e[1]});
  return j.dump();
}

CellMesh build_mesh(double s, int cells_per_side) { return CellMesh(s, cells_per_side); }

BrokenSpace::BrokenSpace(const CellMesh& mesh) : h_(mesh.h()), iface_edges_(mesh.interface_edges()) {
  const int n = mesh.node_count();
  inner_.resize(n);
  side_.resize(n);
  ndof_ = n;
  for (int v = 0; v < n; ++v) {
    inner_[v] = v;
    side_[v] = mesh.kind(v) == NodeKind::Interior ? Region::Inclusion : Region::Matrix;
  }
  for (int v : mesh.interface_nodes()) {
    inner_[v] = ndof_++;
    side_.push_back(Region::Inclusion);
    iface_.push_back(v);
  }
}

SparseMatrix BrokenSpace::jump_form() const {
  std::vector<SparseMatrix::Triplet> t;
  for (const auto& e : iface_edges_) {
    for (int p : e) {
      for (int q : e) {
        const double c = (p == q ? 2.0 : 1.0) * h_ / 6.0;
        const int dp[2] = {inner_[p], p}, dq[2] = {inner_[q], q};
        const double sg[2] = {1.0, -1.0};
        for (int x = 0; x < 2; ++x)
          for (int y = 0; y < 2; ++y) t.push_back({dp[x], dq[y], c * sg[x] * sg[y]});
      }
    }
  }
  return SparseMatrix::from_triplets(ndof_, std::move(t));
}

void GaugeEdgeForm::add(int a, int b, std::array<double, 2> disp, double w) {
  if (w != 0) links_.push_back({a, b, disp, w});
}

SparseMatrix GaugeEdgeForm::at(const RVec& theta) const {
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(links_.size() * 4);
  for (const Link& l : links_) {
    const cplx ph = std::exp(cplx(0, theta.at(0) * l.d[0] + theta.at(1) * l.d[1]));
    t.push_back({l.a, l.a, l.w});
    t.push_back({l.b, l.b, l.w});
    t.push_back({l.a, l.b, -l.w * ph});
    t.push_back({l.b, l.a, -l.w * std::conj(ph)});
  }
  return SparseMatrix::from_triplets(n_, std::move(t));
}

SparseMatrix GaugeEdgeForm::derivative(const RVec& theta, int j) const {
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(links_.size() * 2);
  for (const Link& l : links_) {
    if (l.d[j] == 0) continue;
    const cplx ph = std::exp(cplx(0, theta.at(0) * l.d[0] + theta.at(1) * l.d[1]));
    t.push_back({l.a, l.b, cplx(0, -l.w * l.d[j]) * ph});
    t.push_back({l.b, l.a, cplx(0, l.w * l.d[j]) * std::conj(ph)});
  }
  return SparseMatrix::from_triplets(n_, std::move(t));
}

SparseMatrix GaugeEdgeForm::taylor2(int j, int k) const {
  std::vector<SparseMatrix::Triplet> t;
  for (const Link& l : links_) {
    const double c = 0.5 * l.w * l.d[j] * l.d[k];
    if (c == 0) continue;
    t.push_back({l.a, l.b, c});
    t.push_back({l.b, l.a, c});
  }
  return SparseMatrix::from_triplets(n_, std::move(t));
}

}  // namespace bandgap
