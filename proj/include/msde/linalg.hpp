#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

// Small dense linear algebra for chart-sized objects (d is 1..4 in practice).
// Row-major storage, dynamic extents, allocation-free once sized.

namespace msde {

using Vec = std::vector<double>;

struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  void resize(int r, int c) {
    rows = r;
    cols = c;
    a.assign(static_cast<size_t>(r) * c, 0.0);
  }
  void set_zero() { std::fill(a.begin(), a.end(), 0.0); }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

// Rank-3 tensor t(i,j,k), extents n0 x n1 x n2.
struct Ten3 {
  int n0 = 0, n1 = 0, n2 = 0;
  std::vector<double> a;

  Ten3() = default;
  Ten3(int a0, int a1, int a2) : n0(a0), n1(a1), n2(a2), a(static_cast<size_t>(a0) * a1 * a2, 0.0) {}

  double& operator()(int i, int j, int k) { return a[(static_cast<size_t>(i) * n1 + j) * n2 + k]; }
  double operator()(int i, int j, int k) const { return a[(static_cast<size_t>(i) * n1 + j) * n2 + k]; }

  void resize(int a0, int a1, int a2) {
    n0 = a0;
    n1 = a1;
    n2 = a2;
    a.assign(static_cast<size_t>(a0) * a1 * a2, 0.0);
  }
  void set_zero() { std::fill(a.begin(), a.end(), 0.0); }
};

struct Ten4 {
  int n0 = 0, n1 = 0, n2 = 0, n3 = 0;
  std::vector<double> a;

  Ten4() = default;
  Ten4(int a0, int a1, int a2, int a3)
      : n0(a0), n1(a1), n2(a2), n3(a3), a(static_cast<size_t>(a0) * a1 * a2 * a3, 0.0) {}

  double& operator()(int i, int j, int k, int l) {
    return a[((static_cast<size_t>(i) * n1 + j) * n2 + k) * n3 + l];
  }
  double operator()(int i, int j, int k, int l) const {
    return a[((static_cast<size_t>(i) * n1 + j) * n2 + k) * n3 + l];
  }

  void resize(int a0, int a1, int a2, int a3) {
    n0 = a0;
    n1 = a1;
    n2 = a2;
    n3 = a3;
    a.assign(static_cast<size_t>(a0) * a1 * a2 * a3, 0.0);
  }
  void set_zero() { std::fill(a.begin(), a.end(), 0.0); }
};

inline double dot(const Vec& x, const Vec& y) {
  assert(x.size() == y.size());
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

inline double norm_inf(const Vec& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

inline double norm_inf(const Mat& m) {
  double r = 0.0;
  for (double v : m.a) r = std::max(r, std::fabs(v));
  return r;
}

// y = M x
inline void matvec(const Mat& m, const Vec& x, Vec& y) {
  assert(m.cols == static_cast<int>(x.size()));
  y.assign(m.rows, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.cols; ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
}

inline Vec matvec(const Mat& m, const Vec& x) {
  Vec y;
  matvec(m, x, y);
  return y;
}

// C = A B
inline void matmul(const Mat& A, const Mat& B, Mat& C) {
  assert(A.cols == B.rows);
  C.resize(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      const double aik = A(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
    }
}

inline Mat matmul(const Mat& A, const Mat& B) {
  Mat C;
  matmul(A, B, C);
  return C;
}

inline Mat transpose(const Mat& m) {
  Mat t(m.cols, m.rows);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
  return t;
}

// Gauss-Jordan inverse with partial pivoting; throws on (near-)singular input.
inline Mat inverse(const Mat& m) {
  assert(m.rows == m.cols);
  const int n = m.rows;
  Mat a = m;
  Mat inv = Mat::identity(n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
    if (std::fabs(a(piv, col)) < 1e-300) throw std::runtime_error("linalg: singular matrix");
    if (piv != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(a(piv, j), a(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    }
    const double d = 1.0 / a(col, col);
    for (int j = 0; j < n; ++j) {
      a(col, j) *= d;
      inv(col, j) *= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
inline Vec symmetric_eigenvalues(const Mat& m, int max_sweeps = 64) {
  assert(m.rows == m.cols);
  const int n = m.rows;
  Mat a = m;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::fabs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  Vec ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace msde
