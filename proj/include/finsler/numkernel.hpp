#pragma once

// Small dense linear algebra for the symmetric systems that appear in
// hypersurface curvature: Cholesky, Householder frame completion, cyclic
// Jacobi eigenvalues, quadratic forms and the hyperplane trace reduction.
// Orders are tiny (n <= 16), so everything is O(n^3) and allocation-light.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "finsler/error.hpp"

namespace finsler {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "dot of lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

/// Square symmetric matrix. Writes go through set(), which mirrors the
/// entry, so symmetry holds bit-for-bit at all times.
class SymMatrix {
 public:
  explicit SymMatrix(std::size_t order) : n_(order), a_(order * order, 0.0) {
    if (order == 0) throw Error(ErrorKind::InvalidParams, "matrix order must be >= 1");
  }

  static SymMatrix identity(std::size_t order) {
    SymMatrix m(order);
    for (std::size_t i = 0; i < order; ++i) m.set(i, i, 1.0);
    return m;
  }

  static SymMatrix diagonal(std::span<const double> d) {
    SymMatrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m.set(i, i, d[i]);
    return m;
  }
  static SymMatrix diagonal(std::initializer_list<double> d) {
    return diagonal(std::span<const double>(d.begin(), d.size()));
  }

  /// Builds from row-major entries. Off-diagonal pairs must agree within
  /// `rel_tol * max|entry|`; the stored value is their average.
  static SymMatrix from_row_major(std::size_t order, std::span<const double> entries,
                                  double rel_tol = 1e-12) {
    if (entries.size() != order * order) {
      throw Error(ErrorKind::DimensionMismatch,
                  "expected " + std::to_string(order * order) + " entries, got " +
                      std::to_string(entries.size()));
    }
    SymMatrix m(order);
    const double scale = finsler::max_abs(entries);
    for (std::size_t i = 0; i < order; ++i) {
      for (std::size_t j = i; j < order; ++j) {
        const double aij = entries[i * order + j];
        const double aji = entries[j * order + i];
        if (std::abs(aij - aji) > rel_tol * scale) {
          throw Error(ErrorKind::InvalidParams, "matrix is not symmetric at (" + std::to_string(i) +
                                                    "," + std::to_string(j) + ")");
        }
        m.set(i, j, 0.5 * (aij + aji));
      }
    }
    return m;
  }

  std::size_t order() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    a_[i * n_ + j] = v;
    a_[j * n_ + i] = v;
  }
  std::span<const double> row_major() const noexcept { return a_; }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
  }
  double max_abs() const { return finsler::max_abs(a_); }

  Vector apply(std::span<const double> v) const {
    check_len(v.size());
    Vector out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) out[i] += (*this)(i, j) * v[j];
    }
    return out;
  }

  void check_len(std::size_t len) const {
    if (len != n_) {
      throw Error(ErrorKind::DimensionMismatch, "vector of length " + std::to_string(len) +
                                                    " against matrix of order " + std::to_string(n_));
    }
  }

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<double> a_;
};

/// Max-entry absolute difference of two same-order matrices.
inline double max_abs_diff(const SymMatrix& a, const SymMatrix& b) {
  if (a.order() != b.order()) throw Error(ErrorKind::DimensionMismatch, "matrix orders differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.row_major().size(); ++i) {
    m = std::max(m, std::abs(a.row_major()[i] - b.row_major()[i]));
  }
  return m;
}

/// Cholesky factor: lower triangular with strictly positive diagonal.
class LowerTriangular {
 public:
  std::size_t order() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return j > i ? 0.0 : l_[i * n_ + j]; }

  /// L * L^T, the matrix this factor came from (up to rounding).
  SymMatrix reconstruct() const {
    SymMatrix m(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k <= j; ++k) s += (*this)(i, k) * (*this)(j, k);
        m.set(i, j, s);
      }
    }
    return m;
  }

  /// L^T * y.
  Vector transpose_apply(std::span<const double> y) const {
    check_len(y.size());
    Vector out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t k = i; k < n_; ++k) out[i] += (*this)(k, i) * y[k];
    }
    return out;
  }

  /// Solves L^T x = rhs by back substitution. Generic in the scalar so
  /// derivative-carrying values pass through the linear change of variables.
  template <class T>
  std::vector<T> transpose_solve(std::span<const T> rhs) const {
    check_len(rhs.size());
    std::vector<T> x(rhs.begin(), rhs.end());
    for (std::size_t ii = n_; ii-- > 0;) {
      for (std::size_t k = ii + 1; k < n_; ++k) x[ii] = x[ii] - (*this)(k, ii) * x[k];
      x[ii] = x[ii] / (*this)(ii, ii);
    }
    return x;
  }

  /// Solves L x = rhs by forward substitution.
  Vector solve(std::span<const double> rhs) const {
    check_len(rhs.size());
    Vector x(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t k = 0; k < i; ++k) x[i] -= (*this)(i, k) * x[k];
      x[i] /= (*this)(i, i);
    }
    return x;
  }

 private:
  friend LowerTriangular cholesky(const SymMatrix& g);
  explicit LowerTriangular(std::size_t n) : n_(n), l_(n * n, 0.0) {}

  void check_len(std::size_t len) const {
    if (len != n_) throw Error(ErrorKind::DimensionMismatch, "factor order mismatch");
  }

  std::size_t n_;
  std::vector<double> l_;
};

/// Throws NotPositiveDefinite when a pivot falls below 1e-13 times the
/// largest diagonal entry.
inline LowerTriangular cholesky(const SymMatrix& g) {
  const std::size_t n = g.order();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, g(i, i));
  const double floor = 1e-13 * max_diag;

  LowerTriangular out(n);
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = g(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= out.l_[j * n + k] * out.l_[j * n + k];
    if (!(pivot > floor) || max_diag <= 0.0) {
      throw Error(ErrorKind::NotPositiveDefinite,
                  "pivot " + std::to_string(j) + " is " + std::to_string(pivot));
    }
    const double ljj = std::sqrt(pivot);
    out.l_[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = g(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= out.l_[i * n + k] * out.l_[j * n + k];
      out.l_[i * n + j] = s / ljj;
    }
  }
  return out;
}

/// Orthonormal basis of the hyperplane orthogonal to a unit normal.
struct TangentFrame {
  Vector normal;
  std::vector<Vector> basis;

  std::size_t ambient_dim() const noexcept { return normal.size(); }

  /// Coordinates of v along the basis vectors.
  Vector project(std::span<const double> v) const {
    Vector c(basis.size());
    for (std::size_t a = 0; a < basis.size(); ++a) c[a] = dot(basis[a], v);
    return c;
  }
};

/// Completes a unit normal to an orthonormal frame with a Householder
/// reflection P = I - 2 w w^T / (w^T w). When normal[0] <= 0.5 the
/// reflection sends e1 to the normal (w = normal - e1); otherwise it sends
/// -e1 to the normal (w = normal + e1), keeping |w|^2 >= 1 in both cases.
/// The basis is {P e2, ..., P en}; for normal = +-e1 it is exactly {e2, ..., en}.
inline TangentFrame complete_frame(std::span<const double> normal) {
  const std::size_t n = normal.size();
  if (n < 2) throw Error(ErrorKind::DimensionMismatch, "frame needs ambient dimension >= 2");
  const double len = norm(normal);
  if (std::abs(len - 1.0) > 1e-10) {
    throw Error(ErrorKind::NotUnit, "normal has length " + std::to_string(len));
  }

  Vector w(normal.begin(), normal.end());
  w[0] += normal[0] > 0.5 ? 1.0 : -1.0;
  const double ww = dot(w, w);

  TangentFrame frame{Vector(normal.begin(), normal.end()), {}};
  frame.basis.reserve(n - 1);
  for (std::size_t k = 1; k < n; ++k) {
    Vector x(n, 0.0);
    x[k] = 1.0;
    const double c = 2.0 * w[k] / ww;
    for (std::size_t i = 0; i < n; ++i) x[i] -= c * w[i];
    frame.basis.push_back(std::move(x));
  }
  return frame;
}

struct SymEigen {
  Vector values;                // ascending
  std::vector<Vector> vectors;  // vectors[k] pairs with values[k]
};

/// Cyclic Jacobi. Sweeps until the largest off-diagonal magnitude is at most
/// 1e-12 * max|A|; throws NoConvergence after 50 sweeps.
inline SymEigen sym_eigen(const SymMatrix& input) {
  constexpr int kMaxSweeps = 50;
  const std::size_t n = input.order();
  std::vector<double> a(input.row_major().begin(), input.row_major().end());
  std::vector<double> q(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) q[i * n + i] = 1.0;
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

  const double threshold = 1e-12 * input.max_abs();
  auto off_max = [&] {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) m = std::max(m, std::abs(at(i, j)));
    return m;
  };

  int sweep = 0;
  while (off_max() > threshold) {
    if (sweep++ == kMaxSweeps) {
      throw Error(ErrorKind::NoConvergence, "Jacobi did not converge in 50 sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t r = p + 1; r < n; ++r) {
        const double apr = at(p, r);
        if (apr == 0.0) continue;
        const double theta = (at(r, r) - at(p, p)) / (2.0 * apr);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(k, p);
          const double akr = at(k, r);
          at(k, p) = c * akp - s * akr;
          at(k, r) = s * akp + c * akr;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(p, k);
          const double ark = at(r, k);
          at(p, k) = c * apk - s * ark;
          at(r, k) = s * apk + c * ark;
        }
        at(p, r) = 0.0;
        at(r, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double qkp = q[k * n + p];
          const double qkr = q[k * n + r];
          q[k * n + p] = c * qkp - s * qkr;
          q[k * n + r] = s * qkp + c * qkr;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return at(x, x) < at(y, y); });

  SymEigen out;
  out.values.reserve(n);
  out.vectors.reserve(n);
  for (std::size_t idx : order) {
    out.values.push_back(at(idx, idx));
    Vector v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = q[k * n + idx];
    out.vectors.push_back(std::move(v));
  }
  return out;
}

inline Vector sym_eigenvalues(const SymMatrix& a) { return sym_eigen(a).values; }

/// sum_ij a_ij u^i v^j
inline double quadratic_form(const SymMatrix& a, std::span<const double> u, std::span<const double> v) {
  a.check_len(u.size());
  a.check_len(v.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.order(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < a.order(); ++j) row += a(i, j) * v[j];
    s += u[i] * row;
  }
  return s;
}

/// Trace of the operator v -> (A v) restricted and projected to the
/// hyperplane orthogonal to the unit vector n: tr(A) - n A n.
inline double trace_reduction(const SymMatrix& a, std::span<const double> n) {
  const double len = norm(n);
  if (std::abs(len - 1.0) > 1e-10) {
    throw Error(ErrorKind::NotUnit, "normal has length " + std::to_string(len));
  }
  return a.trace() - quadratic_form(a, n, n);
}

}  // namespace finsler
