#include <algorithm>
#include <cmath>

#include "bandgap/densela.hpp"

namespace bandgap {

namespace {

template <class T>
DenseMatrix<T> matmul(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
  if (a.cols() != b.rows()) throw LinalgError("matrix product dimension mismatch");
  DenseMatrix<T> c(a.rows(), b.cols());
  const int n = a.cols(), p = b.cols();
  for (int i = 0; i < a.rows(); ++i) {
    T* ci = c.row(i);
    const T* ai = a.row(i);
    for (int k = 0; k < n; ++k) {
      const T aik = ai[k];
      if (aik == T(0)) continue;
      const T* bk = b.row(k);
      for (int j = 0; j < p; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

template <class T>
std::vector<T> matvec(const DenseMatrix<T>& a, const std::vector<T>& x) {
  if (a.cols() != int(x.size())) throw LinalgError("matrix-vector dimension mismatch");
  std::vector<T> y(a.rows(), T(0));
  for (int i = 0; i < a.rows(); ++i) {
    const T* ai = a.row(i);
    T s(0);
    for (int j = 0; j < a.cols(); ++j) s += ai[j] * x[j];
    y[i] = s;
  }
  return y;
}

template <class T>
double asym(const DenseMatrix<T>& m) {
  if (m.rows() != m.cols()) throw LinalgError("matrix not square");
  double worst = 0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j <= i; ++j) worst = std::max(worst, std::abs(m(i, j) - conj_of(m(j, i))));
  return worst;
}

}  // namespace

Matrix operator*(const Matrix& a, const Matrix& b) { return matmul(a, b); }
RMatrix operator*(const RMatrix& a, const RMatrix& b) { return matmul(a, b); }
CVec operator*(const Matrix& a, const CVec& x) { return matvec(a, x); }
RVec operator*(const RMatrix& a, const RVec& x) { return matvec(a, x); }

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(cplx s, Matrix a) { return a *= s; }

Matrix to_complex(const RMatrix& a) {
  Matrix c(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
  return c;
}

Matrix hstack(const Matrix& a, const Matrix& b) {
  if (a.cols() == 0) return b;
  if (b.cols() == 0) return a;
  if (a.rows() != b.rows()) throw LinalgError("hstack row mismatch");
  Matrix c(a.rows(), a.cols() + b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
    for (int j = 0; j < b.cols(); ++j) c(i, a.cols() + j) = b(i, j);
  }
  return c;
}

Matrix sandwich(const Matrix& a, const Matrix& m, const Matrix& b) {
  return a.adjoint() * (m * b);
}

cplx dot(const CVec& x, const CVec& y) {
  if (x.size() != y.size()) throw LinalgError("dot dimension mismatch");
  cplx s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
  return s;
}

double norm2(const CVec& x) {
  double s = 0;
  for (const cplx& v : x) s += std::norm(v);
  return std::sqrt(s);
}

CVec operator+(CVec a, const CVec& b) {
  if (a.size() != b.size()) throw LinalgError("vector dimension mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

CVec operator-(CVec a, const CVec& b) {
  if (a.size() != b.size()) throw LinalgError("vector dimension mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

CVec operator*(cplx s, CVec a) {
  for (cplx& v : a) v *= s;
  return a;
}

cplx form(const Matrix& m, const CVec& x, const CVec& y) { return dot(y, m * x); }

double hermitian_asymmetry(const Matrix& m) { return asym(m); }
double hermitian_asymmetry(const RMatrix& m) { return asym(m); }

void symmetrize(Matrix& m) {
  for (int i = 0; i < m.rows(); ++i) {
    m(i, i) = m(i, i).real();
    for (int j = 0; j < i; ++j) {
      const cplx v = 0.5 * (m(i, j) + std::conj(m(j, i)));
      m(i, j) = v;
      m(j, i) = std::conj(v);
    }
  }
}

}  // namespace bandgap
