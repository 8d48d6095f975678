#pragma once

// Seeded generators and independent oracles shared by the test suites.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "finsler/autodiff.hpp"
#include "finsler/metrics.hpp"
#include "finsler/numkernel.hpp"

namespace finsler::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo = -1.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vector gaussian_vector(Rng& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(n);
  for (double& c : v) c = g(rng);
  return v;
}

inline Vector random_unit(Rng& rng, std::size_t n) {
  Vector v = gaussian_vector(rng, n);
  const double len = norm(v);
  for (double& c : v) c /= len;
  return v;
}

inline SymMatrix random_symmetric(Rng& rng, std::size_t n) {
  SymMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) a.set(i, j, uniform(rng));
  return a;
}

/// M M^T + 0.5 I with M uniform in [-1, 1].
inline SymMatrix random_spd(Rng& rng, std::size_t n) {
  std::vector<double> m(n * n);
  for (double& c : m) c = uniform(rng);
  SymMatrix a(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = i == j ? 0.5 : 0.0;
      for (std::size_t k = 0; k < n; ++k) s += m[i * n + k] * m[j * n + k];
      a.set(i, j, s);
    }
  }
  return a;
}

/// Gaussian elimination with partial pivoting; independent of the Cholesky path.
inline Vector solve_dense(const SymMatrix& a, Vector b) {
  const std::size_t n = a.order();
  std::vector<double> m(a.row_major().begin(), a.row_major().end());
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r * n + c]) > std::abs(m[p * n + c])) p = r;
    for (std::size_t k = 0; k < n; ++k) std::swap(m[c * n + k], m[p * n + k]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m[r * n + c] / m[c * n + c];
      for (std::size_t k = c; k < n; ++k) m[r * n + k] -= f * m[c * n + k];
      b[r] -= f * b[c];
    }
  }
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= m[i * n + k] * x[k];
    x[i] = s / m[i * n + i];
  }
  return x;
}

/// Randers norm with random SPD a and b scaled so that b^T a^-1 b = strength.
inline FundamentalFunction seeded_randers(Rng& rng, std::size_t n, double strength) {
  SymMatrix a = random_spd(rng, n);
  Vector b = gaussian_vector(rng, n);
  const double current = dot(b, solve_dense(a, b));
  const double s = std::sqrt(strength / current);
  for (double& c : b) c *= s;
  return FundamentalFunction::randers(std::move(a), std::move(b));
}

struct CatalogEntry {
  std::string name;
  FundamentalFunction f;
};

/// The five catalog families in dimension n, seeded.
inline std::vector<CatalogEntry> catalog(std::size_t n, std::uint64_t seed, double randers_strength = 0.81) {
  Rng rng(seed);
  std::vector<CatalogEntry> out;
  out.push_back({"euclidean", FundamentalFunction::euclidean(n)});
  out.push_back({"quadratic", FundamentalFunction::quadratic(random_spd(rng, n))});
  out.push_back({"randers", seeded_randers(rng, n, randers_strength)});
  out.push_back({"pnorm4", FundamentalFunction::pnorm(n, 4)});
  out.push_back({"mroot6", FundamentalFunction::mroot(n, 6)});
  return out;
}

/// Random direction inside the norm's guard domain.
inline Vector interior_direction(Rng& rng, const FundamentalFunction& f) {
  for (;;) {
    Vector d = gaussian_vector(rng, f.dim());
    if (f.in_domain(d)) return d;
  }
}

/// Polynomial sum_k c_k prod_i y_i^e_ki with analytic derivatives, used as
/// an oracle that shares nothing with the hyper-dual or difference paths.
struct Polynomial {
  std::size_t dim = 0;
  std::vector<double> coeff;
  std::vector<std::vector<unsigned>> powers;

  template <class T>
  T operator()(std::span<const T> y) const {
    T s(0.0);
    for (std::size_t k = 0; k < coeff.size(); ++k) {
      T term(coeff[k]);
      for (std::size_t i = 0; i < dim; ++i) term = term * ipow(y[i], powers[k][i]);
      s = s + term;
    }
    return s;
  }

  /// d/dy_i then d/dy_j of every monomial, by the power rule.
  double partial(std::span<const double> y, int i, int j = -1) const {
    double s = 0.0;
    for (std::size_t k = 0; k < coeff.size(); ++k) {
      std::vector<int> e(powers[k].begin(), powers[k].end());
      double c = coeff[k];
      for (int idx : {i, j}) {
        if (idx < 0) continue;
        c *= e[idx];
        e[idx] = e[idx] > 0 ? e[idx] - 1 : 0;
      }
      if (c == 0.0) continue;
      for (std::size_t m = 0; m < dim; ++m) c *= std::pow(y[m], e[m]);
      s += c;
    }
    return s;
  }
};

/// Random polynomial of exact total degree `degree` monomials (homogeneous)
/// or all degrees up to `degree` when `homogeneous` is false.
inline Polynomial random_polynomial(Rng& rng, std::size_t dim, unsigned degree, bool homogeneous, std::size_t terms) {
  Polynomial p;
  p.dim = dim;
  std::uniform_int_distribution<std::size_t> pick(0, dim - 1);
  std::uniform_int_distribution<unsigned> deg(homogeneous ? degree : 0, degree);
  for (std::size_t t = 0; t < terms; ++t) {
    std::vector<unsigned> e(dim, 0);
    const unsigned d = deg(rng);
    for (unsigned k = 0; k < d; ++k) ++e[pick(rng)];
    p.coeff.push_back(uniform(rng));
    p.powers.push_back(std::move(e));
  }
  return p;
}

inline auto as_field(const Polynomial& p) {
  return make_field(p.dim, [p](auto y) { return p(y); });
}

}  // namespace finsler::testing
