#include <algorithm>
#include <cmath>
#include <numeric>

#include "bandgap/densela.hpp"

namespace bandgap {

namespace {

constexpr double kBkAlpha = 0.6403882032022076;  // (1 + sqrt(17)) / 8

}  // namespace

template <class T>
HermitianIndefiniteSolver<T>::HermitianIndefiniteSolver(const DenseMatrix<T>& a)
    : n_(a.rows()), f_(a), perm_(a.rows()), block_(a.rows(), 1) {
  if (a.cols() != n_) throw LinalgError("matrix not square");
  std::iota(perm_.begin(), perm_.end(), 0);
  DenseMatrix<T>& A = f_;
  const int n = n_;
  // Only the lower triangle is referenced from here on.
  auto swap_sym = [&](int p, int q) {
    if (p == q) return;
    if (p > q) std::swap(p, q);
    for (int j = 0; j < p; ++j) std::swap(A(p, j), A(q, j));
    for (int j = p + 1; j < q; ++j) {
      const T t = conj_of(A(j, p));
      A(j, p) = conj_of(A(q, j));
      A(q, j) = t;
    }
    A(q, p) = conj_of(A(q, p));
    std::swap(A(p, p), A(q, q));
    for (int i = q + 1; i < n; ++i) std::swap(A(i, p), A(i, q));
    std::swap(perm_[p], perm_[q]);
  };

  int k = 0;
  std::vector<T> l1(n), l2(n);
  while (k < n) {
    int kstep = 1;
    const double absakk = std::fabs(real_of(A(k, k)));
    int imax = k;
    double colmax = 0.0;
    for (int i = k + 1; i < n; ++i) {
      const double v = std::abs(A(i, k));
      if (v > colmax) {
        colmax = v;
        imax = i;
      }
    }
    int kp = k;
    if (std::max(absakk, colmax) == 0.0) throw LinalgError("singular matrix in indefinite solve");
    if (absakk >= kBkAlpha * colmax) {
      kp = k;
    } else {
      double rowmax = 0.0;
      for (int j = k; j < imax; ++j) rowmax = std::max(rowmax, std::abs(A(imax, j)));
      for (int j = imax + 1; j < n; ++j) rowmax = std::max(rowmax, std::abs(A(j, imax)));
      if (absakk >= kBkAlpha * colmax * (colmax / rowmax)) {
        kp = k;
      } else if (std::fabs(real_of(A(imax, imax))) >= kBkAlpha * rowmax) {
        kp = imax;
      } else {
        kp = imax;
        kstep = 2;
      }
    }
    const int kk = k + kstep - 1;
    swap_sym(kk, kp);

    if (kstep == 1) {
      const double d = real_of(A(k, k));
      A(k, k) = T(d);
      for (int i = k + 1; i < n; ++i) l1[i] = A(i, k) / d;
      for (int j = k + 1; j < n; ++j) {
        const T cj = conj_of(A(j, k));
        if (cj == T(0)) continue;
        for (int i = j; i < n; ++i) A(i, j) -= l1[i] * cj;
        A(j, j) = T(real_of(A(j, j)));
      }
      for (int i = k + 1; i < n; ++i) A(i, k) = l1[i];
      block_[k] = 1;
    } else {
      const double d11 = real_of(A(k, k));
      const double d22 = real_of(A(k + 1, k + 1));
      const T d21 = A(k + 1, k);
      const double det = d11 * d22 - std::norm(d21);
      for (int i = k + 2; i < n; ++i) {
        const T a1 = A(i, k), a2 = A(i, k + 1);
        l1[i] = (a1 * d22 - a2 * d21) / det;
        l2[i] = (-a1 * conj_of(d21) + a2 * d11) / det;
      }
      for (int j = k + 2; j < n; ++j) {
        const T c1 = conj_of(A(j, k)), c2 = conj_of(A(j, k + 1));
        for (int i = j; i < n; ++i) A(i, j) -= l1[i] * c1 + l2[i] * c2;
        A(j, j) = T(real_of(A(j, j)));
      }
      for (int i = k + 2; i < n; ++i) {
        A(i, k) = l1[i];
        A(i, k + 1) = l2[i];
      }
      block_[k] = 2;
      block_[k + 1] = 0;
    }
    k += kstep;
  }
}

template <class T>
std::vector<T> HermitianIndefiniteSolver<T>::solve(const std::vector<T>& b) const {
  const int n = n_;
  if (int(b.size()) != n) throw LinalgError("solve dimension mismatch");
  const DenseMatrix<T>& A = f_;
  std::vector<T> z(n);
  for (int i = 0; i < n; ++i) z[i] = b[perm_[i]];
  // L z = y, unit lower; the (k+1, k) slot of a 2x2 block is not part of L.
  for (int i = 0; i < n; ++i) {
    T acc = z[i];
    const int skip = (block_[i] == 0) ? i - 1 : -1;
    for (int j = 0; j < i; ++j)
      if (j != skip) acc -= A(i, j) * z[j];
    z[i] = acc;
  }
  for (int k = 0; k < n;) {
    if (block_[k] == 1) {
      z[k] /= real_of(A(k, k));
      ++k;
    } else {
      const double d11 = real_of(A(k, k)), d22 = real_of(A(k + 1, k + 1));
      const T d21 = A(k + 1, k);
      const double det = d11 * d22 - std::norm(d21);
      const T y1 = z[k], y2 = z[k + 1];
      z[k] = (d22 * y1 - conj_of(d21) * y2) / det;
      z[k + 1] = (-d21 * y1 + d11 * y2) / det;
      k += 2;
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    T acc = z[i];
    for (int j = i + 1; j < n; ++j) {
      if (block_[j] == 0 && j - 1 == i) continue;
      acc -= conj_of(A(j, i)) * z[j];
    }
    z[i] = acc;
  }
  std::vector<T> x(n);
  for (int i = 0; i < n; ++i) x[perm_[i]] = z[i];
  return x;
}

template <class T>
int HermitianIndefiniteSolver<T>::negative_count() const {
  int neg = 0;
  for (int k = 0; k < n_;) {
    if (block_[k] == 1) {
      if (real_of(f_(k, k)) < 0) ++neg;
      ++k;
    } else {
      const double d11 = real_of(f_(k, k)), d22 = real_of(f_(k + 1, k + 1));
      const double det = d11 * d22 - std::norm(f_(k + 1, k));
      if (det < 0)
        neg += 1;
      else if (d11 + d22 < 0)
        neg += 2;
      k += 2;
    }
  }
  return neg;
}

template class HermitianIndefiniteSolver<double>;
template class HermitianIndefiniteSolver<cplx>;

CVec solve_hermitian(const Matrix& a, const CVec& b) {
  return HermitianIndefiniteSolver<cplx>(a).solve(b);
}

RVec solve_symmetric(const RMatrix& a, const RVec& b) {
  return HermitianIndefiniteSolver<double>(a).solve(b);
}

NullspaceResult nullspace(const Matrix& m, double tol) {
  const int n = m.rows();
  return nullspace(m, Matrix::identity(n), tol);
}

NullspaceResult nullspace(const Matrix& m, const Matrix& metric, double tol) {
  const SpectralDecomposition s = generalized_eig(m, metric);
  const int n = int(s.values.size());
  double vmax = 0;
  for (double v : s.values) vmax = std::max(vmax, v);
  const double thresh = tol * std::max(1.0, vmax);
  int nk = 0;
  while (nk < n && s.values[nk] <= thresh) ++nk;
  NullspaceResult out;
  out.basis.columns = s.vectors.col_range(0, nk);
  out.complement.columns = s.vectors.col_range(nk, n - nk);
  out.complement_values.assign(s.values.begin() + nk, s.values.end());
  out.gap = nk < n ? s.values[nk] : 0.0;
  return out;
}

CVec project(const Basis& b, const CVec& v, const Matrix& metric) {
  if (b.ambient_dim() != int(v.size()) || metric.rows() != int(v.size()))
    throw LinalgError("projection dimension mismatch");
  const CVec gv = metric * v;
  CVec out(v.size(), cplx(0));
  for (int k = 0; k < b.dim(); ++k) {
    cplx c = 0;
    for (int i = 0; i < b.ambient_dim(); ++i) c += std::conj(b.columns(i, k)) * gv[i];
    for (int i = 0; i < b.ambient_dim(); ++i) out[i] += c * b.columns(i, k);
  }
  return out;
}

Basis orthonormalize(const Matrix& cols, const Matrix& metric, double drop_tol) {
  const int n = cols.rows();
  std::vector<CVec> kept;
  std::vector<CVec> kept_g;
  for (int j = 0; j < cols.cols(); ++j) {
    CVec v = cols.col(j);
    const double orig = std::sqrt(std::max(0.0, form(metric, v, v).real()));
    if (orig == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t q = 0; q < kept.size(); ++q) {
        const cplx c = dot(kept_g[q], v);
        for (int i = 0; i < n; ++i) v[i] -= c * kept[q][i];
      }
    CVec gv = metric * v;
    const double nv = std::sqrt(std::max(0.0, dot(v, gv).real()));
    if (nv <= drop_tol * orig) continue;
    for (int i = 0; i < n; ++i) {
      v[i] /= nv;
      gv[i] /= nv;
    }
    kept.push_back(std::move(v));
    kept_g.push_back(std::move(gv));
  }
  Basis b;
  b.columns = Matrix(n, int(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) b.columns.set_col(int(k), kept[k]);
  return b;
}

}  // namespace bandgap
