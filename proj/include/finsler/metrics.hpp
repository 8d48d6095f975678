#pragma once

// Catalog of Minkowski norms (fundamental functions at a fixed base point)
// and the metric tensor g_ij = 1/2 d^2 F^2 / dy^i dy^j they generate.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "finsler/autodiff.hpp"
#include "finsler/error.hpp"
#include "finsler/numkernel.hpp"

namespace finsler {

enum class Family { euclidean, quadratic, randers, pnorm, mroot };

constexpr std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::euclidean: return "euclidean";
    case Family::quadratic: return "quadratic";
    case Family::randers: return "randers";
    case Family::pnorm: return "pnorm";
    case Family::mroot: return "mroot";
  }
  return "unknown";
}

/// Default guard margin for the even-power families: points with some
/// |y_i| < delta * |y| are excluded. Near the coordinate hyperplanes the
/// metric degenerates like |y_i|^(p-2), and the indicatrix in adapted
/// coordinates bends on length scales too short for a 1e-5 difference
/// stencil to resolve; 0.15 keeps p = 4 and p = 6 well clear of that.
inline constexpr double kPowerGuardMargin = 0.15;

/// Largest admissible b^T a^-1 b for a Randers norm.
inline constexpr double kRandersBound = 1.0 - 1e-6;

/// A positively 1-homogeneous norm F(y) on one tangent space. Immutable;
/// satisfies ScalarField, so it can be differentiated directly.
class FundamentalFunction {
 public:
  static FundamentalFunction euclidean(std::size_t dim) {
    check_dim(dim);
    FundamentalFunction f(Family::euclidean, dim);
    f.matrix_ = SymMatrix::identity(dim);
    return f;
  }

  static FundamentalFunction quadratic(SymMatrix a) {
    check_dim(a.order());
    require_spd(a, "quadratic A");
    FundamentalFunction f(Family::quadratic, a.order());
    f.matrix_ = std::move(a);
    return f;
  }

  static FundamentalFunction randers(SymMatrix a, Vector b) {
    check_dim(a.order());
    if (b.size() != a.order()) {
      throw Error(ErrorKind::InvalidParams, "randers b has length " + std::to_string(b.size()) +
                                                ", expected " + std::to_string(a.order()));
    }
    const double bab = dual_norm_sq(a, b);
    if (!(bab < kRandersBound)) {
      throw Error(ErrorKind::InvalidParams,
                  "randers requires b^T a^-1 b < 1 - 1e-6, got " + std::to_string(bab));
    }
    FundamentalFunction f(Family::randers, a.order());
    f.matrix_ = std::move(a);
    f.covector_ = std::move(b);
    return f;
  }

  static FundamentalFunction pnorm(std::size_t dim, unsigned p, double guard_margin = kPowerGuardMargin) {
    return power(Family::pnorm, dim, p, guard_margin);
  }

  static FundamentalFunction mroot(std::size_t dim, unsigned m, double guard_margin = kPowerGuardMargin) {
    return power(Family::mroot, dim, m, guard_margin);
  }

  Family family() const noexcept { return family_; }
  std::size_t dim() const noexcept { return dim_; }
  /// Quadratic A or Randers a; identity for euclidean.
  const SymMatrix& matrix() const noexcept { return matrix_; }
  const Vector& covector() const noexcept { return covector_; }
  unsigned exponent() const noexcept { return exponent_; }
  double guard_margin() const noexcept { return guard_margin_; }

  /// b^T a^-1 b for Randers, 0 otherwise.
  double randers_strength() const { return family_ == Family::randers ? dual_norm_sq(matrix_, covector_) : 0.0; }

  /// Nonzero, finite, and (power families) away from the coordinate
  /// hyperplanes by the guard margin.
  bool in_domain(std::span<const double> y) const {
    if (y.size() != dim_) return false;
    const double len = norm(y);
    if (!(len > 0.0) || !std::isfinite(len)) return false;
    if (family_ == Family::pnorm || family_ == Family::mroot) {
      for (double yi : y) {
        if (std::abs(yi) < guard_margin_ * len) return false;
      }
    }
    return true;
  }

  /// F(y).
  template <class T>
  T operator()(std::span<const T> y) const {
    using std::pow;
    using std::sqrt;
    switch (family_) {
      case Family::euclidean: return sqrt(sum_squares(y));
      case Family::quadratic: return sqrt(matrix_form(y));
      case Family::randers: return sqrt(matrix_form(y)) + linear(y);
      case Family::pnorm:
      case Family::mroot: return pow(power_sum(y), 1.0 / exponent_);
    }
    return T(std::numeric_limits<double>::quiet_NaN());
  }

  /// F(y)^2 / 2, written per family so polynomial cases stay polynomial.
  template <class T>
  T half_squared(std::span<const T> y) const {
    using std::pow;
    using std::sqrt;
    switch (family_) {
      case Family::euclidean: return 0.5 * sum_squares(y);
      case Family::quadratic: return 0.5 * matrix_form(y);
      case Family::randers: {
        const T f = sqrt(matrix_form(y)) + linear(y);
        return 0.5 * f * f;
      }
      case Family::pnorm:
      case Family::mroot: return 0.5 * pow(power_sum(y), 2.0 / exponent_);
    }
    return T(std::numeric_limits<double>::quiet_NaN());
  }

 private:
  FundamentalFunction(Family family, std::size_t dim) : family_(family), dim_(dim), matrix_(dim) {}

  static void check_dim(std::size_t dim) {
    if (dim < 2) throw Error(ErrorKind::InvalidParams, "dimension must be >= 2");
  }

  static void require_spd(const SymMatrix& a, const char* what) {
    try {
      (void)cholesky(a);
    } catch (const Error&) {
      throw Error(ErrorKind::InvalidParams, std::string(what) + " is not positive definite");
    }
  }

  static double dual_norm_sq(const SymMatrix& a, std::span<const double> b) {
    LowerTriangular l = [&] {
      try {
        return cholesky(a);
      } catch (const Error&) {
        throw Error(ErrorKind::InvalidParams, "randers a is not positive definite");
      }
    }();
    const Vector z = l.solve(b);
    return dot(z, z);
  }

  static FundamentalFunction power(Family family, std::size_t dim, unsigned p, double margin) {
    check_dim(dim);
    if (p < 2 || p % 2 != 0) {
      throw Error(ErrorKind::InvalidParams,
                  std::string(to_string(family)) + " exponent must be even and >= 2, got " + std::to_string(p));
    }
    if (!(margin >= 0.0) || !(margin * std::sqrt(static_cast<double>(dim)) < 1.0)) {
      throw Error(ErrorKind::InvalidParams, "guard margin must lie in [0, 1/sqrt(dim))");
    }
    FundamentalFunction f(family, dim);
    f.exponent_ = p;
    f.guard_margin_ = margin;
    return f;
  }

  template <class T>
  static T sum_squares(std::span<const T> y) {
    T s(0.0);
    for (const T& yi : y) s += yi * yi;
    return s;
  }

  template <class T>
  T matrix_form(std::span<const T> y) const {
    T s(0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
      T row(0.0);
      for (std::size_t j = 0; j < dim_; ++j) row += matrix_(i, j) * y[j];
      s += y[i] * row;
    }
    return s;
  }

  template <class T>
  T linear(std::span<const T> y) const {
    T s(0.0);
    for (std::size_t i = 0; i < dim_; ++i) s += covector_[i] * y[i];
    return s;
  }

  template <class T>
  T power_sum(std::span<const T> y) const {
    T s(0.0);
    for (const T& yi : y) s += ipow(yi, exponent_);
    return s;
  }

  Family family_;
  std::size_t dim_;
  SymMatrix matrix_;
  Vector covector_;
  unsigned exponent_ = 0;
  double guard_margin_ = 0.0;
};

static_assert(ScalarField<FundamentalFunction>);

/// The field y -> F(y)^2 / 2 whose Hessian is the metric tensor.
inline auto half_squared_field(const FundamentalFunction& f) {
  return make_field(
      f.dim(), [f](auto y) { return f.half_squared(y); },
      [f](std::span<const double> y) { return f.in_domain(y); });
}

inline double eval_F(const FundamentalFunction& f, std::span<const double> y) {
  if (!f.in_domain(y)) throw Error(ErrorKind::DomainViolation, "point outside the norm's domain");
  return f(y);
}

struct MetricTensor {
  Vector at;
  SymMatrix entries;
};

/// g_ij(y); throws NotPositiveDefinite if Cholesky of g fails.
inline MetricTensor metric_tensor(const FundamentalFunction& f, std::span<const double> y) {
  if (!f.in_domain(y)) throw Error(ErrorKind::DomainViolation, "point outside the norm's domain");
  Derivatives d = grad_hess(half_squared_field(f), y);
  (void)cholesky(d.hessian);
  return {Vector(y.begin(), y.end()), std::move(d.hessian)};
}

struct HomogeneityResidual {
  double value;   // |F(ly) - l F(y)| / (l F(y))
  double metric;  // max_ij |g_ij(ly) - g_ij(y)| / max_ij |g_ij(y)|
};

inline HomogeneityResidual check_homogeneity(const FundamentalFunction& f, std::span<const double> y,
                                             double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidParams, "scale factor must be positive");
  Vector scaled(y.begin(), y.end());
  for (double& s : scaled) s *= lambda;
  const double fy = eval_F(f, y);
  const double fs = eval_F(f, scaled);
  const MetricTensor gy = metric_tensor(f, y);
  const MetricTensor gs = metric_tensor(f, scaled);
  return {std::abs(fs - lambda * fy) / (lambda * fy), max_abs_diff(gs.entries, gy.entries) / gy.entries.max_abs()};
}

}  // namespace finsler
