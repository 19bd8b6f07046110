#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bandgap {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double conj_of(double x) { return x; }
inline cplx conj_of(const cplx& x) { return std::conj(x); }
inline double real_of(double x) { return x; }
inline double real_of(const cplx& x) { return x.real(); }

// Dense row-major matrix over double or complex<double>.
template <class T>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols) : r_(rows), c_(cols), a_(std::size_t(rows) * cols, T(0)) {}

  static DenseMatrix identity(int n) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }
  static DenseMatrix diagonal(const RVec& d) {
    DenseMatrix m(int(d.size()), int(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) m(int(i), int(i)) = T(d[i]);
    return m;
  }

  int rows() const { return r_; }
  int cols() const { return c_; }
  bool empty() const { return r_ == 0 || c_ == 0; }
  T& operator()(int i, int j) { return a_[std::size_t(i) * c_ + j]; }
  const T& operator()(int i, int j) const { return a_[std::size_t(i) * c_ + j]; }
  T* row(int i) { return a_.data() + std::size_t(i) * c_; }
  const T* row(int i) const { return a_.data() + std::size_t(i) * c_; }
  T* data() { return a_.data(); }
  const T* data() const { return a_.data(); }

  DenseMatrix adjoint() const {
    DenseMatrix t(c_, r_);
    for (int i = 0; i < r_; ++i)
      for (int j = 0; j < c_; ++j) t(j, i) = conj_of((*this)(i, j));
    return t;
  }
  std::vector<T> col(int j) const {
    std::vector<T> v(r_);
    for (int i = 0; i < r_; ++i) v[i] = (*this)(i, j);
    return v;
  }
  void set_col(int j, const std::vector<T>& v) {
    for (int i = 0; i < r_; ++i) (*this)(i, j) = v[i];
  }
  DenseMatrix col_range(int j0, int count) const {
    DenseMatrix s(r_, count);
    for (int i = 0; i < r_; ++i)
      for (int j = 0; j < count; ++j) s(i, j) = (*this)(i, j0 + j);
    return s;
  }
  double max_abs() const {
    double m = 0;
    for (const T& x : a_) m = std::max(m, std::abs(x));
    return m;
  }
  double norm_fro() const {
    double s = 0;
    for (const T& x : a_) s += std::norm(x);
    return std::sqrt(s);
  }

  DenseMatrix& operator+=(const DenseMatrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  DenseMatrix& operator-=(const DenseMatrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  DenseMatrix& operator*=(T s) {
    for (T& x : a_) x *= s;
    return *this;
  }

 private:
  void check_same(const DenseMatrix& o) const {
    if (o.r_ != r_ || o.c_ != c_) throw LinalgError("matrix dimension mismatch");
  }
  int r_ = 0;
  int c_ = 0;
  std::vector<T> a_;
};

using Matrix = DenseMatrix<cplx>;
using RMatrix = DenseMatrix<double>;

Matrix operator*(const Matrix& a, const Matrix& b);
RMatrix operator*(const RMatrix& a, const RMatrix& b);
CVec operator*(const Matrix& a, const CVec& x);
RVec operator*(const RMatrix& a, const RVec& x);
Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(cplx s, Matrix a);
Matrix to_complex(const RMatrix& a);
// Columns of a followed by columns of b.
Matrix hstack(const Matrix& a, const Matrix& b);
// a^H * m * b.
Matrix sandwich(const Matrix& a, const Matrix& m, const Matrix& b);

// x^H y
cplx dot(const CVec& x, const CVec& y);
double norm2(const CVec& x);
CVec operator+(CVec a, const CVec& b);
CVec operator-(CVec a, const CVec& b);
CVec operator*(cplx s, CVec a);
// y^H M x
cplx form(const Matrix& m, const CVec& x, const CVec& y);

// max_ij |m_ij - conj(m_ji)|
double hermitian_asymmetry(const Matrix& m);
double hermitian_asymmetry(const RMatrix& m);
void symmetrize(Matrix& m);

struct SpectralDecomposition {
  RVec values;     // ascending
  Matrix vectors;  // column k belongs to values[k]
};

struct Basis {
  Matrix columns;
  int dim() const { return columns.cols(); }
  int ambient_dim() const { return columns.rows(); }
};

struct NullspaceResult {
  Basis basis;        // kernel
  Basis complement;   // retained eigenvectors with nonzero eigenvalue
  RVec complement_values;
  double gap = 0;     // smallest retained nonzero eigenvalue (0 if none)
};

constexpr double kHermitianTol = 1e-13;
constexpr double kKernelTol = 1e-10;

SpectralDecomposition hermitian_eig(const Matrix& m);
RVec hermitian_eigvals(const Matrix& m);
// Real symmetric case.
void symmetric_eig(const RMatrix& m, RVec& values, RMatrix* vectors);

// Pencil A x = lambda M x with M HPD; vectors are M-orthonormal.
SpectralDecomposition generalized_eig(const Matrix& a, const Matrix& m);
RVec generalized_eigvals(const Matrix& a, const Matrix& m);
void generalized_symmetric_eig(const RMatrix& a, const RMatrix& m, RVec& values, RMatrix* vectors);

// Lower Cholesky factor; throws "mass matrix not definite".
Matrix cholesky(const Matrix& m);
RMatrix cholesky(const RMatrix& m);
CVec solve_hpd(const Matrix& m, const CVec& b);
Matrix solve_hpd(const Matrix& m, const Matrix& b);
RVec solve_hpd(const RMatrix& m, const RVec& b);

// Bunch-Kaufman LDL^H for Hermitian indefinite systems.
template <class T>
class HermitianIndefiniteSolver {
 public:
  explicit HermitianIndefiniteSolver(const DenseMatrix<T>& a);
  std::vector<T> solve(const std::vector<T>& b) const;
  // Inertia counts of the factored matrix.
  int negative_count() const;

 private:
  int n_ = 0;
  DenseMatrix<T> f_;
  std::vector<int> perm_;
  std::vector<int> block_;  // 1 or 2 per leading index, 0 for second row of a 2x2 block
};

CVec solve_hermitian(const Matrix& a, const CVec& b);
RVec solve_symmetric(const RMatrix& a, const RVec& b);

// Kernel of a Hermitian PSD matrix in the Euclidean metric.
NullspaceResult nullspace(const Matrix& m, double tol = kKernelTol);
// Kernel of m measured against a metric: pencil m x = mu metric x, mu <= tol * max(1, mu_max).
NullspaceResult nullspace(const Matrix& m, const Matrix& metric, double tol = kKernelTol);

// metric-orthogonal projection onto span(b); b must be metric-orthonormal.
CVec project(const Basis& b, const CVec& v, const Matrix& metric);

// Gram-Schmidt (twice) in the given metric; drops columns whose residual norm
// falls below drop_tol times their original norm.
Basis orthonormalize(const Matrix& cols, const Matrix& metric, double drop_tol = 1e-10);

}  // namespace bandgap
