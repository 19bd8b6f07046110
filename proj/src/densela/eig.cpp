#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>

#include "bandgap/densela.hpp"

namespace bandgap {

namespace {

template <class T>
T make_tau(double beta, double alphr, double alphi);

template <>
double make_tau<double>(double beta, double alphr, double) {
  return (beta - alphr) / beta;
}

template <>
cplx make_tau<cplx>(double beta, double alphr, double alphi) {
  return cplx((beta - alphr) / beta, -alphi / beta);
}

inline double imag_of(double) { return 0.0; }
inline double imag_of(const cplx& x) { return x.imag(); }

// Elementary reflector H = I - tau v v^H with H^H (alpha; x) = (beta; 0), beta real.
// On exit x holds the tail of v (v[0] = 1) and alpha holds beta.
template <class T>
T householder(T& alpha, T* x, int len, int stride) {
  double xnorm2 = 0;
  for (int i = 0; i < len; ++i) xnorm2 += std::norm(x[std::size_t(i) * stride]);
  const double alphr = real_of(alpha), alphi = imag_of(alpha);
  if (xnorm2 == 0.0 && alphi == 0.0) return T(0);
  double beta = std::sqrt(alphr * alphr + alphi * alphi + xnorm2);
  if (alphr >= 0) beta = -beta;
  const T tau = make_tau<T>(beta, alphr, alphi);
  const T scal = T(1) / (alpha - T(beta));
  for (int i = 0; i < len; ++i) x[std::size_t(i) * stride] *= scal;
  alpha = T(beta);
  return tau;
}

// Reduces the Hermitian matrix a (lower triangle referenced, overwritten) to
// real symmetric tridiagonal form Q^H a Q. Reflector tails stay below the
// subdiagonal of a.
template <class T>
void tridiagonalize(DenseMatrix<T>& a, RVec& d, RVec& e, std::vector<T>& tau) {
  const int n = a.rows();
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  tau.assign(std::max(0, n - 1), T(0));
  std::vector<T> w(n), v(n);
  for (int i = 0; i + 1 < n; ++i) {
    const int len = n - i - 1;
    T alpha = a(i + 1, i);
    T taui = len > 1 ? householder(alpha, &a(i + 2, i), len - 1, a.cols()) : householder(alpha, static_cast<T*>(nullptr), 0, 1);
    e[i] = real_of(alpha);
    if (taui != T(0)) {
      v[0] = T(1);
      for (int r = 1; r < len; ++r) v[r] = a(i + 1 + r, i);
      std::fill(w.begin(), w.begin() + len, T(0));
      const int o = i + 1;
      for (int r = 0; r < len; ++r) {
        const T* ar = a.row(o + r) + o;
        T acc = T(real_of(ar[r])) * v[r];
        const T vr = v[r];
        for (int c = 0; c < r; ++c) {
          acc += ar[c] * v[c];
          w[c] += conj_of(ar[c]) * vr;
        }
        w[r] += acc;
      }
      for (int r = 0; r < len; ++r) w[r] *= taui;
      T wv(0);
      for (int r = 0; r < len; ++r) wv += conj_of(w[r]) * v[r];
      const T alpha2 = T(-0.5) * taui * wv;
      for (int r = 0; r < len; ++r) w[r] += alpha2 * v[r];
      for (int r = 0; r < len; ++r) {
        T* ar = a.row(o + r) + o;
        const T vr = v[r], wr = w[r];
        for (int c = 0; c <= r; ++c) ar[c] -= vr * conj_of(w[c]) + wr * conj_of(v[c]);
        ar[r] = T(real_of(ar[r]));
      }
    } else {
      a(i + 1, i + 1) = T(real_of(a(i + 1, i + 1)));
    }
    a(i + 1, i) = T(e[i]);
    d[i] = real_of(a(i, i));
    tau[i] = taui;
  }
  if (n > 0) d[n - 1] = real_of(a(n - 1, n - 1));
}

// Implicit-shift QL on a symmetric tridiagonal matrix; e[i] couples i and i+1.
// zt (optional) has eigenvector k stored as row k.
void tridiagonal_ql(RVec& d, RVec& e, RMatrix* zt) {
  const int n = int(d.size());
  if (n == 0) return;
  e.resize(n);
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= DBL_EPSILON * dd) break;
      }
      if (m != l) {
        if (iter++ == 200) throw LinalgError("tridiagonal QL failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        bool underflow = false;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (zt) {
            double* zi = zt->row(i);
            double* zi1 = zt->row(i + 1);
            const int cols = zt->cols();
            for (int k = 0; k < cols; ++k) {
              f = zi1[k];
              zi1[k] = s * zi[k] + c * f;
              zi[k] = c * zi[k] - s * f;
            }
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

template <class T>
void eig_impl(const DenseMatrix<T>& m, RVec& values, DenseMatrix<T>* vectors) {
  const int n = m.rows();
  if (m.cols() != n) throw LinalgError("matrix not square");
  const double asy = hermitian_asymmetry(m);
  if (asy > kHermitianTol * m.max_abs())
    throw LinalgError("matrix not Hermitian: max asymmetry " + std::to_string(asy));
  DenseMatrix<T> a = m;
  RVec d, e;
  std::vector<T> tau;
  tridiagonalize(a, d, e, tau);
  RMatrix zt;
  if (vectors) zt = RMatrix::identity(n);
  tridiagonal_ql(d, e, vectors ? &zt : nullptr);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return d[x] < d[y]; });
  values.resize(n);
  for (int k = 0; k < n; ++k) values[k] = d[order[k]];
  if (!vectors) return;
  // X(r, k) = z_{order[k]}(r), then X <- Q X.
  DenseMatrix<T> x(n, n);
  for (int k = 0; k < n; ++k) {
    const double* zk = zt.row(order[k]);
    for (int r = 0; r < n; ++r) x(r, k) = T(zk[r]);
  }
  std::vector<T> s(n);
  for (int i = n - 2; i >= 0; --i) {
    const T taui = tau[i];
    if (taui == T(0)) continue;
    const int o = i + 1;
    std::fill(s.begin(), s.end(), T(0));
    for (int r = o; r < n; ++r) {
      const T vr = conj_of(r == o ? T(1) : a(r, i));
      const T* xr = x.row(r);
      for (int c = 0; c < n; ++c) s[c] += vr * xr[c];
    }
    for (int r = o; r < n; ++r) {
      const T vr = taui * (r == o ? T(1) : a(r, i));
      T* xr = x.row(r);
      for (int c = 0; c < n; ++c) xr[c] -= vr * s[c];
    }
  }
  *vectors = std::move(x);
}

bool is_real(const Matrix& m) {
  const double tol = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (std::fabs(m(i, j).imag()) > tol) return false;
  return true;
}

RMatrix real_part(const Matrix& m) {
  RMatrix r(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r(i, j) = m(i, j).real();
  return r;
}

template <class T>
bool is_diagonal(const DenseMatrix<T>& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) != T(0)) return false;
  return true;
}

// Solves L X = B in place (L lower, row-major).
template <class T>
void forward_solve(const DenseMatrix<T>& l, DenseMatrix<T>& b) {
  const int n = l.rows(), p = b.cols();
  for (int i = 0; i < n; ++i) {
    T* bi = b.row(i);
    const T* li = l.row(i);
    for (int k = 0; k < i; ++k) {
      const T lik = li[k];
      if (lik == T(0)) continue;
      const T* bk = b.row(k);
      for (int j = 0; j < p; ++j) bi[j] -= lik * bk[j];
    }
    const T inv = T(1) / li[i];
    for (int j = 0; j < p; ++j) bi[j] *= inv;
  }
}

// Solves L^H X = B in place.
template <class T>
void backward_solve_adjoint(const DenseMatrix<T>& l, DenseMatrix<T>& b) {
  const int n = l.rows(), p = b.cols();
  for (int i = n - 1; i >= 0; --i) {
    T* bi = b.row(i);
    const T inv = T(1) / conj_of(l(i, i));
    for (int j = 0; j < p; ++j) bi[j] *= inv;
    for (int k = 0; k < i; ++k) {
      const T lik = conj_of(l(i, k));
      if (lik == T(0)) continue;
      T* bk = b.row(k);
      for (int j = 0; j < p; ++j) bk[j] -= lik * bi[j];
    }
  }
}

template <class T>
DenseMatrix<T> cholesky_impl(const DenseMatrix<T>& m) {
  const int n = m.rows();
  if (m.cols() != n) throw LinalgError("matrix not square");
  DenseMatrix<T> l(n, n);
  for (int j = 0; j < n; ++j) {
    const T* lj = l.row(j);
    double s = real_of(m(j, j));
    for (int k = 0; k < j; ++k) s -= std::norm(lj[k]);
    if (!(s > 0.0)) throw LinalgError("mass matrix not definite");
    const double ljj = std::sqrt(s);
    l(j, j) = T(ljj);
    for (int i = j + 1; i < n; ++i) {
      const T* li = l.row(i);
      T acc = m(i, j);
      for (int k = 0; k < j; ++k) acc -= li[k] * conj_of(lj[k]);
      l(i, j) = acc / ljj;
    }
  }
  return l;
}

template <class T>
void generalized_impl(const DenseMatrix<T>& a, const DenseMatrix<T>& m, RVec& values,
                      DenseMatrix<T>* vectors) {
  const int n = a.rows();
  if (a.cols() != n || m.rows() != n || m.cols() != n)
    throw LinalgError("pencil dimension mismatch");
  if (is_diagonal(m)) {
    RVec s(n);
    for (int i = 0; i < n; ++i) {
      const double mi = real_of(m(i, i));
      if (!(mi > 0.0)) throw LinalgError("mass matrix not definite");
      s[i] = 1.0 / std::sqrt(mi);
    }
    DenseMatrix<T> c(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c(i, j) = a(i, j) * (s[i] * s[j]);
    eig_impl(c, values, vectors);
    if (vectors)
      for (int i = 0; i < n; ++i) {
        T* vi = vectors->row(i);
        for (int j = 0; j < n; ++j) vi[j] *= s[i];
      }
    return;
  }
  const DenseMatrix<T> l = cholesky_impl(m);
  DenseMatrix<T> x = a;
  forward_solve(l, x);
  DenseMatrix<T> c = x.adjoint();
  forward_solve(l, c);
  for (int i = 0; i < n; ++i) {
    c(i, i) = T(real_of(c(i, i)));
    for (int j = 0; j < i; ++j) {
      const T v = T(0.5) * (c(i, j) + conj_of(c(j, i)));
      c(i, j) = v;
      c(j, i) = conj_of(v);
    }
  }
  eig_impl(c, values, vectors);
  if (vectors) backward_solve_adjoint(l, *vectors);
}

}  // namespace

SpectralDecomposition hermitian_eig(const Matrix& m) {
  SpectralDecomposition out;
  if (is_real(m)) {
    RMatrix v;
    eig_impl(real_part(m), out.values, &v);
    out.vectors = to_complex(v);
  } else {
    eig_impl(m, out.values, &out.vectors);
  }
  return out;
}

RVec hermitian_eigvals(const Matrix& m) {
  RVec v;
  if (is_real(m))
    eig_impl<double>(real_part(m), v, nullptr);
  else
    eig_impl<cplx>(m, v, nullptr);
  return v;
}

void symmetric_eig(const RMatrix& m, RVec& values, RMatrix* vectors) {
  eig_impl(m, values, vectors);
}

SpectralDecomposition generalized_eig(const Matrix& a, const Matrix& m) {
  SpectralDecomposition out;
  if (is_real(a) && is_real(m)) {
    RMatrix v;
    generalized_impl(real_part(a), real_part(m), out.values, &v);
    out.vectors = to_complex(v);
  } else {
    generalized_impl(a, m, out.values, &out.vectors);
  }
  return out;
}

RVec generalized_eigvals(const Matrix& a, const Matrix& m) {
  RVec v;
  if (is_real(a) && is_real(m))
    generalized_impl<double>(real_part(a), real_part(m), v, nullptr);
  else
    generalized_impl<cplx>(a, m, v, nullptr);
  return v;
}

void generalized_symmetric_eig(const RMatrix& a, const RMatrix& m, RVec& values, RMatrix* vectors) {
  generalized_impl(a, m, values, vectors);
}

Matrix cholesky(const Matrix& m) { return cholesky_impl(m); }
RMatrix cholesky(const RMatrix& m) { return cholesky_impl(m); }

Matrix solve_hpd(const Matrix& m, const Matrix& b) {
  if (b.rows() != m.rows()) throw LinalgError("solve dimension mismatch");
  const Matrix l = cholesky_impl(m);
  Matrix x = b;
  forward_solve(l, x);
  backward_solve_adjoint(l, x);
  return x;
}

CVec solve_hpd(const Matrix& m, const CVec& b) {
  Matrix bm(int(b.size()), 1);
  bm.set_col(0, b);
  return solve_hpd(m, bm).col(0);
}

RVec solve_hpd(const RMatrix& m, const RVec& b) {
  if (int(b.size()) != m.rows()) throw LinalgError("solve dimension mismatch");
  const RMatrix l = cholesky_impl(m);
  RMatrix x(int(b.size()), 1);
  x.set_col(0, b);
  forward_solve(l, x);
  backward_solve_adjoint(l, x);
  return x.col(0);
}

}  // namespace bandgap
