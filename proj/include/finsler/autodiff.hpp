#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "finsler/error.hpp"
#include "finsler/numkernel.hpp"

namespace finsler {

/// Hyper-dual number a + b e1 + c e2 + d e1e2 with e1^2 = e2^2 = 0.
/// Seeding x_i with e1 and x_j with e2 makes the e1e2 part of f(x) equal to
/// d^2 f / dx_i dx_j, with no truncation error.
struct HyperDual {
  double real = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d12 = 0.0;

  constexpr HyperDual() = default;
  constexpr HyperDual(double r) : real(r) {}  // NOLINT: implicit lift of constants
  constexpr HyperDual(double r, double a, double b, double ab) : real(r), d1(a), d2(b), d12(ab) {}

  constexpr HyperDual& operator+=(const HyperDual& o) { return *this = *this + o; }
  constexpr HyperDual& operator-=(const HyperDual& o) { return *this = *this - o; }
  constexpr HyperDual& operator*=(const HyperDual& o) { return *this = *this * o; }
  constexpr HyperDual& operator/=(const HyperDual& o) { return *this = *this / o; }

  friend constexpr HyperDual operator-(const HyperDual& a) { return {-a.real, -a.d1, -a.d2, -a.d12}; }
  friend constexpr HyperDual operator+(const HyperDual& a, const HyperDual& b) {
    return {a.real + b.real, a.d1 + b.d1, a.d2 + b.d2, a.d12 + b.d12};
  }
  friend constexpr HyperDual operator-(const HyperDual& a, const HyperDual& b) {
    return {a.real - b.real, a.d1 - b.d1, a.d2 - b.d2, a.d12 - b.d12};
  }
  friend constexpr HyperDual operator*(const HyperDual& a, const HyperDual& b) {
    return {a.real * b.real, a.real * b.d1 + a.d1 * b.real, a.real * b.d2 + a.d2 * b.real,
            a.real * b.d12 + a.d1 * b.d2 + a.d2 * b.d1 + a.d12 * b.real};
  }
  friend constexpr HyperDual operator/(const HyperDual& a, const HyperDual& b) {
    const double inv = 1.0 / b.real;
    return a * apply(b, inv, -inv * inv, 2.0 * inv * inv * inv);
  }

  friend constexpr bool operator<(const HyperDual& a, const HyperDual& b) { return a.real < b.real; }
  friend constexpr bool operator>(const HyperDual& a, const HyperDual& b) { return a.real > b.real; }

  /// Chain rule for a scalar function with value f0, derivative f1 and second
  /// derivative f2 at x.real.
  static constexpr HyperDual apply(const HyperDual& x, double f0, double f1, double f2) {
    return {f0, f1 * x.d1, f1 * x.d2, f1 * x.d12 + f2 * x.d1 * x.d2};
  }
};

inline HyperDual sqrt(const HyperDual& x) {
  const double s = std::sqrt(x.real);
  return HyperDual::apply(x, s, 0.5 / s, -0.25 / (s * x.real));
}

inline HyperDual exp(const HyperDual& x) {
  const double e = std::exp(x.real);
  return HyperDual::apply(x, e, e, e);
}

inline HyperDual log(const HyperDual& x) {
  return HyperDual::apply(x, std::log(x.real), 1.0 / x.real, -1.0 / (x.real * x.real));
}

/// x^p for real p; requires x.real > 0 unless p is a non-negative integer.
inline HyperDual pow(const HyperDual& x, double p) {
  const double f0 = std::pow(x.real, p);
  const double f1 = p * std::pow(x.real, p - 1.0);
  const double f2 = p * (p - 1.0) * std::pow(x.real, p - 2.0);
  return HyperDual::apply(x, f0, f1, f2);
}

/// Exact integer power by repeated multiplication; works for any scalar type.
template <class T>
T ipow(const T& x, unsigned k) {
  T result(1.0);
  T base = x;
  while (k > 0) {
    if (k & 1U) result = result * base;
    base = base * base;
    k >>= 1U;
  }
  return result;
}

/// A scalar field on R^n: evaluable on doubles and on hyper-duals, with a
/// domain guard that must hold wherever the field is evaluated.
template <class F>
concept ScalarField = requires(const F& f, std::span<const double> y, std::span<const HyperDual> yh) {
  { f.dim() } -> std::convertible_to<std::size_t>;
  { f.in_domain(y) } -> std::convertible_to<bool>;
  { f(y) } -> std::convertible_to<double>;
  { f(yh) } -> std::convertible_to<HyperDual>;
};

/// Adapts a generic lambda `eval(std::span<const T>) -> T` and a guard
/// `guard(std::span<const double>) -> bool` into a ScalarField.
template <class Eval, class Guard>
class LambdaField {
 public:
  LambdaField(std::size_t dim, Eval eval, Guard guard)
      : dim_(dim), eval_(std::move(eval)), guard_(std::move(guard)) {}

  std::size_t dim() const noexcept { return dim_; }
  bool in_domain(std::span<const double> y) const { return guard_(y); }

  template <class T>
  T operator()(std::span<const T> y) const {
    return eval_(y);
  }

 private:
  std::size_t dim_;
  Eval eval_;
  Guard guard_;
};

inline constexpr auto kWholeSpace = [](std::span<const double>) { return true; };

template <class Eval, class Guard = decltype(kWholeSpace)>
auto make_field(std::size_t dim, Eval eval, Guard guard = kWholeSpace) {
  return LambdaField<Eval, Guard>(dim, std::move(eval), std::move(guard));
}

/// Scalar type of a span handed to a field's eval.
template <class Span>
using scalar_of = std::remove_cv_t<typename Span::element_type>;

struct Derivatives {
  double value = 0.0;
  Vector gradient;
  SymMatrix hessian{1};
};

namespace detail {

template <ScalarField Field>
void require_in_domain(const Field& field, std::span<const double> y) {
  if (y.size() != field.dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "point of length " + std::to_string(y.size()) + " for field of dim " +
                    std::to_string(field.dim()));
  }
  if (!field.in_domain(y)) throw Error(ErrorKind::DomainViolation, "point outside the field's domain");
}

}  // namespace detail

/// Value, gradient and Hessian from n(n+1)/2 hyper-dual evaluations (one per
/// upper-triangle pair); the Hessian is mirrored, so it is exactly symmetric.
template <ScalarField Field>
Derivatives grad_hess(const Field& field, std::span<const double> y) {
  detail::require_in_domain(field, y);
  const std::size_t n = y.size();
  Derivatives out{0.0, Vector(n, 0.0), SymMatrix(n)};
  std::vector<HyperDual> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) x[k] = HyperDual(y[k]);
      x[i].d1 = 1.0;
      x[j].d2 = 1.0;
      const HyperDual r = field(std::span<const HyperDual>(x));
      if (i == j) {
        out.gradient[i] = r.d1;
        out.value = r.real;
      }
      out.hessian.set(i, j, r.d12);
    }
  }
  return out;
}

/// Gradient only, n evaluations with a single perturbation.
template <ScalarField Field>
Vector gradient(const Field& field, std::span<const double> y) {
  detail::require_in_domain(field, y);
  const std::size_t n = y.size();
  Vector g(n);
  std::vector<HyperDual> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) x[k] = HyperDual(y[k]);
    x[i].d1 = 1.0;
    g[i] = field(std::span<const HyperDual>(x)).d1;
  }
  return g;
}

/// Central differences with absolute step h * max(1, |y|). Gradient and
/// Hessian are both second order in h. Every stencil point must lie in the
/// field's domain.
template <ScalarField Field>
Derivatives fd_grad_hess(const Field& field, std::span<const double> y, double h = 1e-5) {
  detail::require_in_domain(field, y);
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidParams, "finite-difference step must be positive");
  const std::size_t n = y.size();
  const double step = h * std::max(1.0, norm(y));

  Vector p(y.begin(), y.end());
  auto eval_at = [&](std::size_t i, double si, std::size_t j, double sj) {
    p.assign(y.begin(), y.end());
    p[i] += si * step;
    p[j] += sj * step;
    if (!field.in_domain(p)) {
      throw Error(ErrorKind::DomainViolation, "finite-difference stencil leaves the domain");
    }
    return static_cast<double>(field(std::span<const double>(p)));
  };

  Derivatives out{static_cast<double>(field(y)), Vector(n, 0.0), SymMatrix(n)};
  const double f0 = out.value;
  for (std::size_t i = 0; i < n; ++i) {
    const double fp = eval_at(i, 0.5, i, 0.5);
    const double fm = eval_at(i, -0.5, i, -0.5);
    out.gradient[i] = (fp - fm) / (2.0 * step);
    out.hessian.set(i, i, (fp - 2.0 * f0 + fm) / (step * step));
    for (std::size_t j = i + 1; j < n; ++j) {
      const double fpp = eval_at(i, 1.0, j, 1.0);
      const double fpm = eval_at(i, 1.0, j, -1.0);
      const double fmp = eval_at(i, -1.0, j, 1.0);
      const double fmm = eval_at(i, -1.0, j, -1.0);
      out.hessian.set(i, j, (fpp - fpm - fmp + fmm) / (4.0 * step * step));
    }
  }
  return out;
}

}  // namespace finsler
