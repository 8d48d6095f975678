#pragma once

// Curvature of an oriented implicit hypersurface {y : f(y) = 0} in
// Euclidean coordinates, computed from the gradient and Hessian of f.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "finsler/autodiff.hpp"
#include "finsler/error.hpp"
#include "finsler/numkernel.hpp"

namespace finsler {

/// Sign convention for the shape operator. The textbook operator is
/// S(v) = -D_v N; we report kShapeSign * (-D_v N) = D_v N so that a round
/// sphere with outward normal has all principal curvatures equal to +1/r.
/// Every routine below shares this constant.
inline constexpr double kShapeSign = -1.0;

inline constexpr double kMinGradNorm = 1e-10;
inline constexpr double kOnSurfaceTol = 1e-8;

/// How derivatives of a defining function are obtained.
enum class Method { hyperdual, fd };

constexpr std::string_view to_string(Method m) noexcept { return m == Method::hyperdual ? "hyperdual" : "fd"; }

struct DerivativeOptions {
  Method method = Method::hyperdual;
  double fd_step = 1e-5;
};

/// epsilon = +1 (along grad f) or -1.
enum class Orientation : int { along_gradient = 1, against_gradient = -1 };

constexpr double sign_of(Orientation o) noexcept { return static_cast<double>(static_cast<int>(o)); }

enum class SurfaceCheck { none, on_surface };

struct DefiningEvaluation {
  Vector at;
  double value = 0.0;
  Vector gradient;
  SymMatrix hessian{1};
  double grad_norm = 0.0;
};

struct OrientedNormal {
  Vector direction;
  Orientation orientation = Orientation::along_gradient;
  double grad_norm = 0.0;

  double epsilon() const noexcept { return sign_of(orientation); }
};

struct ShapeOperatorMatrix {
  TangentFrame frame;
  SymMatrix entries{1};
  Vector principal_curvatures;  // ascending
  double mean = 0.0;
};

template <ScalarField Field>
DefiningEvaluation evaluate_defining(const Field& field, std::span<const double> y,
                                     SurfaceCheck check = SurfaceCheck::none,
                                     DerivativeOptions opts = {}) {
  Derivatives d = opts.method == Method::hyperdual ? grad_hess(field, y) : fd_grad_hess(field, y, opts.fd_step);
  if (check == SurfaceCheck::on_surface && std::abs(d.value) > kOnSurfaceTol) {
    throw Error(ErrorKind::OffSurface, "|f(y)| = " + std::to_string(std::abs(d.value)));
  }
  const double gn = norm(d.gradient);
  if (!(gn > kMinGradNorm)) throw Error(ErrorKind::VanishingGradient, "|grad f| = " + std::to_string(gn));
  return {Vector(y.begin(), y.end()), d.value, std::move(d.gradient), std::move(d.hessian), gn};
}

inline OrientedNormal unit_normal(const DefiningEvaluation& ev, Orientation orientation) {
  if (!(ev.grad_norm > kMinGradNorm)) {
    throw Error(ErrorKind::VanishingGradient, "|grad f| = " + std::to_string(ev.grad_norm));
  }
  OrientedNormal n{ev.gradient, orientation, ev.grad_norm};
  const double scale = sign_of(orientation) / ev.grad_norm;
  for (double& c : n.direction) c *= scale;
  return n;
}

namespace detail {

inline void require_consistent(const DefiningEvaluation& ev, const OrientedNormal& n) {
  if (n.direction.size() != ev.gradient.size()) throw Error(ErrorKind::DimensionMismatch, "normal length");
  for (std::size_t i = 0; i < n.direction.size(); ++i) {
    if (std::abs(n.direction[i] - n.epsilon() * ev.gradient[i] / ev.grad_norm) > 1e-12) {
      throw Error(ErrorKind::InvalidParams, "normal does not match the evaluated gradient");
    }
  }
}

}  // namespace detail

/// Matrix of the shape operator in the Householder frame of the normal:
/// h_ab = epsilon * X_a . (D^2 f) X_b / |grad f|, which is X_a . D_{X_b} N.
inline ShapeOperatorMatrix shape_operator(const DefiningEvaluation& ev, const OrientedNormal& n) {
  detail::require_consistent(ev, n);
  ShapeOperatorMatrix s;
  s.frame = complete_frame(n.direction);
  const std::size_t m = s.frame.basis.size();
  const double scale = kShapeSign * -n.epsilon() / ev.grad_norm;
  s.entries = SymMatrix(m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      s.entries.set(a, b, scale * quadratic_form(ev.hessian, s.frame.basis[a], s.frame.basis[b]));
    }
  }
  s.principal_curvatures = sym_eigenvalues(s.entries);
  double sum = 0.0;
  for (double k : s.principal_curvatures) sum += k;
  s.mean = sum / static_cast<double>(m);
  return s;
}

/// H = epsilon (tr D^2 f - N (D^2 f) N) / ((n - 1) |grad f|).
inline double mean_curvature_trace(const DefiningEvaluation& ev, const OrientedNormal& n) {
  detail::require_consistent(ev, n);
  const double m = static_cast<double>(ev.hessian.order() - 1);
  return kShapeSign * -n.epsilon() * trace_reduction(ev.hessian, n.direction) / (m * ev.grad_norm);
}

/// Shape operator from central differences of the unit normal field along
/// each frame direction, absolute step h * max(1, |y|). Uses only gradients
/// of f, never its Hessian. The result is symmetrized by averaging with its
/// transpose.
template <ScalarField Field>
ShapeOperatorMatrix weingarten_oracle(const Field& field, std::span<const double> y, Orientation orientation,
                                      double h = 1e-5) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidParams, "oracle step must be positive");
  const DefiningEvaluation center = evaluate_defining(field, y);
  const OrientedNormal n0 = unit_normal(center, orientation);

  auto normal_at = [&](std::span<const double> p) {
    detail::require_in_domain(field, p);
    Vector g = gradient(field, p);
    const double gn = norm(g);
    if (!(gn > kMinGradNorm)) throw Error(ErrorKind::VanishingGradient, "on oracle stencil");
    const double scale = sign_of(orientation) / gn;
    for (double& c : g) c *= scale;
    return g;
  };

  ShapeOperatorMatrix s;
  s.frame = complete_frame(n0.direction);
  const std::size_t dim = y.size();
  const std::size_t m = s.frame.basis.size();
  const double step = h * std::max(1.0, norm(y));

  std::vector<double> raw(m * m);
  Vector plus(dim), minus(dim), dn(dim);
  for (std::size_t b = 0; b < m; ++b) {
    for (std::size_t i = 0; i < dim; ++i) {
      plus[i] = y[i] + step * s.frame.basis[b][i];
      minus[i] = y[i] - step * s.frame.basis[b][i];
    }
    const Vector np = normal_at(plus);
    const Vector nm = normal_at(minus);
    for (std::size_t i = 0; i < dim; ++i) dn[i] = (np[i] - nm[i]) / (2.0 * step);
    for (std::size_t a = 0; a < m; ++a) raw[a * m + b] = kShapeSign * -dot(s.frame.basis[a], dn);
  }

  s.entries = SymMatrix(m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) s.entries.set(a, b, 0.5 * (raw[a * m + b] + raw[b * m + a]));
  }
  s.principal_curvatures = sym_eigenvalues(s.entries);
  double sum = 0.0;
  for (double k : s.principal_curvatures) sum += k;
  s.mean = sum / static_cast<double>(m);
  return s;
}

}  // namespace finsler
