#pragma once

// Hyperplane trace check: trace of the operator v -> P(A v) on the
// hyperplane orthogonal to N, computed by projecting A onto an explicit
// orthonormal basis of that hyperplane and summing the diagonal. This is
// the brute-force counterpart of finsler::trace_reduction.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

#include "finsler/numkernel.hpp"

namespace finsler::tools {

inline double projected_trace(const SymMatrix& a, std::span<const double> unit_normal) {
  const TangentFrame frame = complete_frame(unit_normal);
  double t = 0.0;
  for (const Vector& x : frame.basis) {
    const Vector ax = a.apply(x);
    t += dot(x, ax);
  }
  return t;
}

struct LemmaTrial {
  SymMatrix a;
  Vector normal;
};

/// Trial `index` of a seeded stream: A with entries uniform in [-1, 1] and a
/// Gaussian direction normalized to unit length.
inline LemmaTrial lemma_trial(std::size_t dim, std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32U),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32U), 0x1e44aU};
  std::mt19937_64 engine(seq);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  LemmaTrial t{SymMatrix(dim), Vector(dim)};
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i; j < dim; ++j) t.a.set(i, j, unif(engine));
  double len = 0.0;
  do {
    for (double& c : t.normal) c = gauss(engine);
    len = norm(t.normal);
  } while (len < 1e-3);
  for (double& c : t.normal) c /= len;
  return t;
}

}  // namespace finsler::tools
