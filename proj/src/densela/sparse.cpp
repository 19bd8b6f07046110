#include "bandgap/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "bandgap/rng.hpp"

namespace bandgap {

SparseMatrix SparseMatrix::from_triplets(int n, std::vector<Triplet> t) {
  std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  SparseMatrix s(n);
  for (std::size_t k = 0; k < t.size();) {
    const int i = t[k].i, j = t[k].j;
    if (i < 0 || i >= n || j < 0 || j >= n) throw LinalgError("triplet index out of range");
    cplx v = 0;
    while (k < t.size() && t[k].i == i && t[k].j == j) v += t[k++].v;
    s.idx_.push_back(j);
    s.val_.push_back(v);
    s.ptr_[i + 1]++;
  }
  for (int i = 0; i < n; ++i) s.ptr_[i + 1] += s.ptr_[i];
  return s;
}

SparseMatrix SparseMatrix::from_dense(const Matrix& m, double drop) {
  std::vector<Triplet> t;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (std::abs(m(i, j)) > drop) t.push_back({i, j, m(i, j)});
  return from_triplets(m.rows(), std::move(t));
}

SparseMatrix SparseMatrix::identity(int n) { return diagonal(RVec(n, 1.0)); }

SparseMatrix SparseMatrix::diagonal(const RVec& d) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < d.size(); ++i) t.push_back({int(i), int(i), d[i]});
  return from_triplets(int(d.size()), std::move(t));
}

Matrix SparseMatrix::to_dense() const {
  Matrix m(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int p = ptr_[i]; p < ptr_[i + 1]; ++p) m(i, idx_[p]) += val_[p];
  return m;
}

CVec SparseMatrix::operator*(const CVec& x) const {
  if (int(x.size()) != n_) throw LinalgError("sparse product dimension mismatch");
  CVec y(n_);
  for (int i = 0; i < n_; ++i) {
    cplx s = 0;
    for (int p = ptr_[i]; p < ptr_[i + 1]; ++p) s += val_[p] * x[idx_[p]];
    y[i] = s;
  }
  return y;
}

cplx SparseMatrix::at(int i, int j) const {
  const auto b = idx_.begin() + ptr_[i], e = idx_.begin() + ptr_[i + 1];
  const auto it = std::lower_bound(b, e, j);
  return (it != e && *it == j) ? val_[it - idx_.begin()] : cplx(0);
}

bool SparseMatrix::is_diagonal() const {
  for (int i = 0; i < n_; ++i)
    for (int p = ptr_[i]; p < ptr_[i + 1]; ++p)
      if (idx_[p] != i && val_[p] != cplx(0)) return false;
  return true;
}

RVec SparseMatrix::diag() const {
  RVec d(n_);
  for (int i = 0; i < n_; ++i) d[i] = at(i, i).real();
  return d;
}

SparseMatrix SparseMatrix::adjoint() const {
  std::vector<Triplet> t;
  t.reserve(val_.size());
  for (int i = 0; i < n_; ++i)
    for (int p = ptr_[i]; p < ptr_[i + 1]; ++p) t.push_back({idx_[p], i, std::conj(val_[p])});
  return from_triplets(n_, std::move(t));
}

double SparseMatrix::max_abs() const {
  double m = 0;
  for (const cplx& v : val_) m = std::max(m, std::abs(v));
  return m;
}

SparseMatrix combine(cplx alpha, const SparseMatrix& a, cplx beta, const SparseMatrix& b) {
  if (a.dim() != b.dim()) throw LinalgError("sparse combine dimension mismatch");
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(a.nnz() + b.nnz());
  for (int i = 0; i < a.dim(); ++i) {
    for (int p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p)
      t.push_back({i, a.col_idx()[p], alpha * a.values()[p]});
    for (int p = b.row_ptr()[i]; p < b.row_ptr()[i + 1]; ++p)
      t.push_back({i, b.col_idx()[p], beta * b.values()[p]});
  }
  return SparseMatrix::from_triplets(a.dim(), std::move(t));
}

SparseMatrix scale(cplx alpha, const SparseMatrix& a) {
  return combine(alpha, a, 0.0, SparseMatrix(a.dim()));
}

std::vector<int> rcm_ordering(const SparseMatrix& a) {
  const int n = a.dim();
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (int p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) {
      const int j = a.col_idx()[p];
      if (j == i) continue;
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
  for (auto& v : adj) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  std::vector<int> deg(n);
  for (int i = 0; i < n; ++i) deg[i] = int(adj[i].size());
  for (auto& v : adj)
    std::sort(v.begin(), v.end(), [&](int x, int y) { return deg[x] != deg[y] ? deg[x] < deg[y] : x < y; });

  std::vector<int> level(n, -1);
  auto bfs_last = [&](int s, const std::vector<char>& done) {
    std::fill(level.begin(), level.end(), -1);
    std::deque<int> q{s};
    level[s] = 0;
    int last = s;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      if (level[u] > level[last] || (level[u] == level[last] && deg[u] < deg[last])) last = u;
      for (int v : adj[u])
        if (!done[v] && level[v] < 0) {
          level[v] = level[u] + 1;
          q.push_back(v);
        }
    }
    return last;
  };

  std::vector<char> done(n, 0);
  std::vector<int> order;
  order.reserve(n);
  for (;;) {
    int start = -1;
    for (int i = 0; i < n; ++i)
      if (!done[i] && (start < 0 || deg[i] < deg[start])) start = i;
    if (start < 0) break;
    start = bfs_last(bfs_last(start, done), done);
    std::deque<int> q{start};
    done[start] = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      order.push_back(u);
      for (int v : adj[u])
        if (!done[v]) {
          done[v] = 1;
          q.push_back(v);
        }
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

EnvelopeCholesky::EnvelopeCholesky(const SparseMatrix& a) : n_(a.dim()) {
  perm_ = rcm_ordering(a);
  inv_.assign(n_, 0);
  for (int i = 0; i < n_; ++i) inv_[perm_[i]] = i;
  first_.assign(n_, 0);
  for (int i = 0; i < n_; ++i) first_[i] = i;
  for (int r = 0; r < n_; ++r)
    for (int p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p) {
      const int i = inv_[r], j = inv_[a.col_idx()[p]];
      const int hi = std::max(i, j), lo = std::min(i, j);
      first_[hi] = std::min(first_[hi], lo);
    }
  start_.assign(n_ + 1, 0);
  for (int i = 0; i < n_; ++i) start_[i + 1] = start_[i] + std::size_t(i - first_[i] + 1);
  env_.assign(start_[n_], cplx(0));
  auto L = [&](int i, int j) -> cplx& { return env_[start_[i] + (j - first_[i])]; };
  // Lower-triangle entries of the permuted matrix.
  for (int r = 0; r < n_; ++r)
    for (int p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p) {
      const int i = inv_[r], j = inv_[a.col_idx()[p]];
      if (j <= i) L(i, j) += a.values()[p];
    }
  for (int i = 0; i < n_; ++i) {
    const int fi = first_[i];
    cplx* li = &env_[start_[i]];
    for (int j = fi; j < i; ++j) {
      const int fj = first_[j];
      const cplx* lj = &env_[start_[j]];
      const int k0 = std::max(fi, fj);
      cplx acc = li[j - fi];
      for (int k = k0; k < j; ++k) acc -= li[k - fi] * std::conj(lj[k - fj]);
      li[j - fi] = acc / lj[j - fj].real();
    }
    double d = li[i - fi].real();
    for (int k = fi; k < i; ++k) d -= std::norm(li[k - fi]);
    if (!(d > 0.0)) throw LinalgError("matrix not positive definite in envelope Cholesky");
    li[i - fi] = std::sqrt(d);
  }
}

CVec EnvelopeCholesky::solve(const CVec& b) const {
  if (int(b.size()) != n_) throw LinalgError("solve dimension mismatch");
  CVec y(n_);
  for (int i = 0; i < n_; ++i) y[i] = b[perm_[i]];
  for (int i = 0; i < n_; ++i) {
    const int fi = first_[i];
    const cplx* li = &env_[start_[i]];
    cplx acc = y[i];
    for (int k = fi; k < i; ++k) acc -= li[k - fi] * y[k];
    y[i] = acc / li[i - fi].real();
  }
  for (int i = n_ - 1; i >= 0; --i) {
    const int fi = first_[i];
    const cplx* li = &env_[start_[i]];
    y[i] /= li[i - fi].real();
    const cplx yi = y[i];
    for (int k = fi; k < i; ++k) y[k] -= std::conj(li[k - fi]) * yi;
  }
  CVec x(n_);
  for (int i = 0; i < n_; ++i) x[perm_[i]] = y[i];
  return x;
}

namespace {

LowestEigs dense_lowest(const SparseMatrix& k_mat, const SparseMatrix& m_mat, int k, bool want_vectors) {
  LowestEigs out;
  const SpectralDecomposition s = generalized_eig(k_mat.to_dense(), m_mat.to_dense());
  out.values.assign(s.values.begin(), s.values.begin() + k);
  if (want_vectors) out.vectors = s.vectors.col_range(0, k);
  return out;
}

}  // namespace

LowestEigs lowest_eigs(const SparseMatrix& k_mat, const SparseMatrix& m_mat, int k, bool want_vectors,
                       double tol, std::uint64_t seed) {
  const int n = k_mat.dim();
  if (m_mat.dim() != n) throw LinalgError("pencil dimension mismatch");
  if (k <= 0) return {};
  if (k > n) throw LinalgError("requested more eigenvalues than the dimension");
  if (n <= 160 || 4 * k >= n) return dense_lowest(k_mat, m_mat, k, want_vectors);

  const EnvelopeCholesky chol(k_mat);
  const int bs = std::min(n, k + 3);
  const int max_dim = std::min(n, std::max(12 * bs, 120));
  SplitMix64 rng(seed);

  std::vector<CVec> q, mq, y;  // basis, M*basis, K^{-1} M basis
  auto append_block = [&](std::vector<CVec> block) {
    int added = 0;
    for (CVec& v : block) {
      const double orig = std::sqrt(std::max(0.0, dot(v, m_mat * v).real()));
      if (orig == 0.0) continue;
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t j = 0; j < q.size(); ++j) {
          const cplx c = dot(mq[j], v);
          for (int i = 0; i < n; ++i) v[i] -= c * q[j][i];
        }
      CVec mv = m_mat * v;
      const double nv = std::sqrt(std::max(0.0, dot(v, mv).real()));
      if (nv <= 1e-10 * orig) continue;
      for (int i = 0; i < n; ++i) {
        v[i] /= nv;
        mv[i] /= nv;
      }
      y.push_back(chol.solve(mv));
      q.push_back(std::move(v));
      mq.push_back(std::move(mv));
      ++added;
    }
    return added;
  };

  std::vector<CVec> block(bs, CVec(n));
  for (auto& v : block)
    for (auto& x : v) x = cplx(rng.normal(), rng.normal());
  append_block(block);
  std::size_t last_begin = 0;

  LowestEigs out;
  for (int iter = 0; iter < 10000; ++iter) {
    out.iterations = iter + 1;
    const int m = int(q.size());
    Matrix h(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b <= a; ++b) {
        const cplx v = dot(mq[a], y[b]);
        h(a, b) = v;
        h(b, a) = std::conj(v);
      }
    symmetrize(h);
    const SpectralDecomposition rr = hermitian_eig(h);
    // Ritz values of K^{-1} M in descending order are the lowest pencil eigenvalues.
    std::vector<int> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    std::reverse(idx.begin(), idx.end());
    bool converged = m >= k;
    std::vector<CVec> ritz_q, ritz_y;
    const int keep = std::min(m, std::max(k, std::min(m, k + bs)));
    for (int r = 0; r < keep; ++r) {
      const int c = idx[r];
      const double theta = rr.values[c];
      CVec xq(n, 0.0), xy(n, 0.0);
      for (int j = 0; j < m; ++j) {
        const cplx s = rr.vectors(j, c);
        for (int i = 0; i < n; ++i) {
          xq[i] += s * q[j][i];
          xy[i] += s * y[j][i];
        }
      }
      if (r < k) {
        CVec res = xy;
        for (int i = 0; i < n; ++i) res[i] -= theta * xq[i];
        const double rn = std::sqrt(std::max(0.0, dot(res, m_mat * res).real()));
        if (!(theta > 0) || rn > tol * std::fabs(theta)) converged = false;
      }
      ritz_q.push_back(std::move(xq));
      ritz_y.push_back(std::move(xy));
    }
    if (converged || m >= n) {
      out.values.resize(k);
      for (int r = 0; r < k; ++r) out.values[r] = 1.0 / rr.values[idx[r]];
      if (want_vectors) {
        out.vectors = Matrix(n, k);
        for (int r = 0; r < k; ++r) {
          const double s = std::sqrt(std::fabs(rr.values[idx[r]]));
          CVec v = ritz_q[r];
          (void)s;
          out.vectors.set_col(r, v);
        }
      }
      return out;
    }
    std::vector<CVec> next;
    if (m + bs > max_dim) {
      // Thick restart from the leading Ritz vectors.
      q.clear();
      mq.clear();
      y.clear();
      std::vector<CVec> seeds = ritz_q;
      for (const CVec& r : ritz_y) next.push_back(r);
      append_block(seeds);
      last_begin = 0;
    } else {
      for (std::size_t j = last_begin; j < y.size(); ++j) next.push_back(y[j]);
      last_begin = y.size();
    }
    if (append_block(next) == 0) {
      block.assign(bs, CVec(n));
      for (auto& v : block)
        for (auto& x : v) x = cplx(rng.normal(), rng.normal());
      last_begin = q.size();
      if (append_block(block) == 0) return dense_lowest(k_mat, m_mat, k, want_vectors);
    }
  }
  return dense_lowest(k_mat, m_mat, k, want_vectors);
}

}  // namespace bandgap
