#pragma once

// The indicatrix {y : F(y) = 1} of a Minkowski norm as an implicit
// hypersurface, examined pointwise in coordinates where the metric tensor
// at that point is the identity.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "finsler/autodiff.hpp"
#include "finsler/error.hpp"
#include "finsler/hypersurface.hpp"
#include "finsler/metrics.hpp"
#include "finsler/numkernel.hpp"

namespace finsler {

/// f(y) = (F(y)^2 - 1) / 2. Its Hessian is exactly g_ij(y).
inline auto defining_field(const FundamentalFunction& f) {
  return make_field(
      f.dim(), [f](auto y) { return f.half_squared(y) - 0.5; },
      [f](std::span<const double> y) { return f.in_domain(y); });
}

/// field o L^-T: the same field seen in the coordinates y_adapted = L^T y.
template <ScalarField Field>
class AdaptedField {
 public:
  AdaptedField(Field field, LowerTriangular factor) : field_(std::move(field)), factor_(std::move(factor)) {}

  std::size_t dim() const noexcept { return field_.dim(); }

  bool in_domain(std::span<const double> adapted) const {
    if (adapted.size() != dim()) return false;
    const Vector y = factor_.transpose_solve(adapted);
    return field_.in_domain(y);
  }

  template <class T>
  T operator()(std::span<const T> adapted) const {
    const std::vector<T> y = factor_.transpose_solve(adapted);
    return field_(std::span<const T>(y));
  }

 private:
  Field field_;
  LowerTriangular factor_;
};

struct IndicatrixPoint {
  Vector y;
  MetricTensor g;
  LowerTriangular factor;  // factor * factor^T = g.entries
  Vector y_adapted;        // factor^T * y
};

/// Attaches g, its Cholesky factor and the adapted coordinates to a point
/// with F(y) = 1.
inline IndicatrixPoint make_indicatrix_point(const FundamentalFunction& f, Vector y) {
  MetricTensor g = metric_tensor(f, y);
  LowerTriangular l = cholesky(g.entries);
  Vector adapted = l.transpose_apply(y);
  return {std::move(y), std::move(g), std::move(l), std::move(adapted)};
}

/// d / F(d), the point of the indicatrix on the ray through d.
inline Vector scale_onto_indicatrix(const FundamentalFunction& f, std::span<const double> direction) {
  const double scale = 1.0 / eval_F(f, direction);
  Vector y(direction.begin(), direction.end());
  for (double& c : y) c *= scale;
  return y;
}

namespace detail {

/// Per-index generator keyed by (seed, index), so every sample is
/// independent of evaluation order.
inline std::mt19937_64 keyed_engine(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32U),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32U)};
  return std::mt19937_64(seq);
}

struct Draw {
  Vector y;
  std::size_t rejections = 0;
};

inline Draw draw_on_indicatrix(const FundamentalFunction& f, std::uint64_t seed, std::uint64_t index,
                               std::size_t max_rejections) {
  std::mt19937_64 engine = keyed_engine(seed, index);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Draw out;
  Vector d(f.dim());
  for (;;) {
    for (double& c : d) c = gauss(engine);
    if (f.in_domain(d)) break;
    if (++out.rejections > max_rejections) {
      throw Error(ErrorKind::RejectionOverflow, "guard rejected more than " + std::to_string(max_rejections) +
                                                    " directions at index " + std::to_string(index));
    }
  }
  out.y = scale_onto_indicatrix(f, d);
  return out;
}

/// Runs body(i) for i in [0, count) on up to `threads` workers.
template <class Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
}

}  // namespace detail

/// `count` points of the indicatrix from Gaussian directions rescaled by F.
/// Directions outside the guard domain are redrawn; more than 1000 * count
/// rejections in total raises RejectionOverflow.
inline std::vector<IndicatrixPoint> sample_indicatrix(const FundamentalFunction& f, std::size_t count,
                                                      std::uint64_t seed) {
  if (count == 0) throw Error(ErrorKind::InvalidParams, "sample count must be >= 1");
  const std::size_t budget = 1000 * count;
  std::size_t rejected = 0;
  std::vector<IndicatrixPoint> points;
  points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    detail::Draw d = detail::draw_on_indicatrix(f, seed, i, budget - rejected);
    rejected += d.rejections;
    points.push_back(make_indicatrix_point(f, std::move(d.y)));
  }
  return points;
}

struct CurvatureReport {
  IndicatrixPoint point;
  Method method = Method::hyperdual;
  double H = 0.0;                 // trace-reduction path
  Vector principal;               // shape-operator eigenvalues, ascending
  double residual_H = 0.0;        // |H - 1|
  double residual_trace = 0.0;    // |tr D^2 f~ - n|
  double residual_umbilic = 0.0;  // max_k |kappa_k - 1|
  double residual_normal = 0.0;   // max_i |N_i - y_adapted_i|
  double residual_grad = 0.0;     // ||grad f~| - 1|
  double path_gap = 0.0;          // |H - mean of principal|
  double oracle_gap = 0.0;        // max entry |formula - Weingarten oracle|; inf if unavailable
};

struct ReportOptions {
  double fd_step = 1e-5;
  double oracle_step = 1e-5;
};

/// Curvature of the indicatrix at p in the coordinates adapted to g(p).
inline CurvatureReport adapted_report(const FundamentalFunction& f, const IndicatrixPoint& p, Method method,
                                      ReportOptions opts = {}) {
  const AdaptedField adapted(defining_field(f), p.factor);
  const std::span<const double> at(p.y_adapted);

  const DefiningEvaluation ev = evaluate_defining(adapted, at, SurfaceCheck::on_surface, {method, opts.fd_step});
  const OrientedNormal n = unit_normal(ev, Orientation::along_gradient);
  const ShapeOperatorMatrix s = shape_operator(ev, n);

  const double H = mean_curvature_trace(ev, n);
  double umbilic = 0.0;
  for (double k : s.principal_curvatures) umbilic = std::max(umbilic, std::abs(k - 1.0));
  double normal_gap = 0.0;
  for (std::size_t i = 0; i < at.size(); ++i) normal_gap = std::max(normal_gap, std::abs(n.direction[i] - at[i]));

  CurvatureReport r{.point = p,
                    .method = method,
                    .H = H,
                    .principal = s.principal_curvatures,
                    .residual_H = std::abs(H - 1.0),
                    .residual_trace = std::abs(ev.hessian.trace() - static_cast<double>(f.dim())),
                    .residual_umbilic = umbilic,
                    .residual_normal = normal_gap,
                    .residual_grad = std::abs(ev.grad_norm - 1.0),
                    .path_gap = std::abs(H - s.mean),
                    .oracle_gap = std::numeric_limits<double>::infinity()};
  try {
    const ShapeOperatorMatrix oracle = weingarten_oracle(adapted, at, Orientation::along_gradient, opts.oracle_step);
    r.oracle_gap = max_abs_diff(s.entries, oracle.entries);
  } catch (const Error& e) {
    // Stencil left the domain or hit a vanishing gradient: the oracle is
    // unavailable at this point, which is not a failure of the claims.
    if (e.kind() != ErrorKind::DomainViolation && e.kind() != ErrorKind::VanishingGradient) throw;
  }
  return r;
}

struct SampledReport {
  std::size_t index = 0;
  CurvatureReport report;
};

struct VerifyOptions {
  Method method = Method::hyperdual;
  ReportOptions report;
  std::size_t threads = 1;
  bool keep_reports = false;
};

struct PointFailure {
  std::size_t index = 0;
  Vector y;  // empty when sampling itself failed
  double residual_H = 0.0;
  double residual_trace = 0.0;
  double residual_umbilic = 0.0;
  std::string error;  // set when the point threw instead of producing residuals
};

struct ResidualStats {
  double max = 0.0;
  double mean = 0.0;
};

struct VerifySummary {
  std::size_t dim = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  Method method = Method::hyperdual;
  double tol = 0.0;
  std::size_t evaluated = 0;
  std::size_t rejections = 0;
  ResidualStats residual_H;
  ResidualStats residual_trace;
  ResidualStats residual_umbilic;
  ResidualStats oracle_gap;         // over points where the oracle ran
  std::size_t oracle_unavailable = 0;
  double max_path_gap = 0.0;
  bool pass = false;
  std::vector<PointFailure> failures;   // index order
  std::vector<SampledReport> reports;  // index order, only with keep_reports
  double seconds = 0.0;
};

/// Samples `count` indicatrix points and checks H = 1, tr g~ = n and
/// umbilicity at each against `tol`. A point fails when any of those three
/// residuals exceeds tol or when it throws; failures are collected, never
/// propagated. Output depends only on (f, count, seed, tol, options), not
/// on the number of threads.
inline VerifySummary verify_claims(const FundamentalFunction& f, std::size_t count, std::uint64_t seed, double tol,
                                   VerifyOptions opts = {}) {
  if (count == 0) throw Error(ErrorKind::InvalidParams, "sample count must be >= 1");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidParams, "tolerance must be positive");
  const auto start = std::chrono::steady_clock::now();

  struct Slot {
    std::optional<CurvatureReport> report;
    Vector y;
    std::size_t rejections = 0;
    std::string error;
  };
  std::vector<Slot> slots(count);
  const std::size_t budget = 1000 * count;

  detail::parallel_for(count, opts.threads, [&](std::size_t i) {
    Slot& slot = slots[i];
    try {
      detail::Draw d = detail::draw_on_indicatrix(f, seed, i, budget);
      slot.rejections = d.rejections;
      slot.y = d.y;
      slot.report = adapted_report(f, make_indicatrix_point(f, std::move(d.y)), opts.method, opts.report);
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
  });

  VerifySummary out;
  out.dim = f.dim();
  out.samples = count;
  out.seed = seed;
  out.method = opts.method;
  out.tol = tol;

  auto accumulate = [](ResidualStats& s, double v) {
    s.max = std::max(s.max, v);
    s.mean += v;
  };
  for (std::size_t i = 0; i < count; ++i) {
    Slot& slot = slots[i];
    out.rejections += slot.rejections;
    if (!slot.report) {
      out.failures.push_back({i, std::move(slot.y), 0.0, 0.0, 0.0, std::move(slot.error)});
      continue;
    }
    const CurvatureReport& r = *slot.report;
    ++out.evaluated;
    accumulate(out.residual_H, r.residual_H);
    accumulate(out.residual_trace, r.residual_trace);
    accumulate(out.residual_umbilic, r.residual_umbilic);
    if (std::isfinite(r.oracle_gap)) {
      accumulate(out.oracle_gap, r.oracle_gap);
    } else {
      ++out.oracle_unavailable;
    }
    out.max_path_gap = std::max(out.max_path_gap, r.path_gap);
    if (r.residual_H > tol || r.residual_trace > tol || r.residual_umbilic > tol) {
      out.failures.push_back({i, r.point.y, r.residual_H, r.residual_trace, r.residual_umbilic, {}});
    }
    if (opts.keep_reports) out.reports.push_back({i, std::move(*slot.report)});
  }
  if (out.rejections > budget) {
    out.failures.push_back({count, {}, 0.0, 0.0, 0.0,
                            std::string(to_string(ErrorKind::RejectionOverflow)) + ": " +
                                std::to_string(out.rejections) + " rejections"});
  }
  if (out.evaluated > 0) {
    const double k = static_cast<double>(out.evaluated);
    out.residual_H.mean /= k;
    out.residual_trace.mean /= k;
    out.residual_umbilic.mean /= k;
    if (out.evaluated > out.oracle_unavailable) {
      out.oracle_gap.mean /= static_cast<double>(out.evaluated - out.oracle_unavailable);
    }
  }
  out.pass = out.failures.empty();
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace finsler
