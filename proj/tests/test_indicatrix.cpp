#include <gtest/gtest.h>

#include <cmath>

#include "finsler/indicatrix.hpp"
#include "support.hpp"

namespace finsler {
namespace {

using testing::Rng;

TEST(DefiningField, HessianIsMetricTensor) {
  const auto e = defining_field(FundamentalFunction::euclidean(3));
  EXPECT_EQ(e(std::span<const double>(Vector{1.0, 2.0, 2.0})), 4.0);
  EXPECT_EQ(grad_hess(e, Vector{0.3, -0.2, 0.9}).hessian, SymMatrix::identity(3));

  Rng rng(81);
  const SymMatrix a = testing::random_spd(rng, 3);
  const auto q = FundamentalFunction::quadratic(a);
  EXPECT_LE(max_abs_diff(grad_hess(defining_field(q), Vector{0.3, -0.2, 0.9}).hessian, a), 1e-12);

  const auto r = testing::seeded_randers(rng, 4, 0.81);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector y = testing::gaussian_vector(rng, 4);
    EXPECT_LE(max_abs_diff(grad_hess(defining_field(r), y).hessian, metric_tensor(r, y).entries), 1e-12);
  }
}

TEST(ScaleOntoIndicatrix, ClosedForms) {
  const Vector e = scale_onto_indicatrix(FundamentalFunction::euclidean(2), Vector{3.0, 4.0});
  EXPECT_NEAR(e[0], 0.6, 2e-16);
  EXPECT_NEAR(e[1], 0.8, 2e-16);
  const Vector r = scale_onto_indicatrix(FundamentalFunction::randers(SymMatrix::identity(2), {0.5, 0.0}),
                                         Vector{1.0, 0.0});
  EXPECT_NEAR(r[0], 2.0 / 3.0, 1e-16);
  EXPECT_EQ(r[1], 0.0);
}

TEST(SampleIndicatrix, PointInvariantsAcrossCatalog) {
  for (std::size_t n : {2U, 3U, 4U, 6U}) {
    for (const auto& entry : testing::catalog(n, 3 * n)) {
      for (const IndicatrixPoint& p : sample_indicatrix(entry.f, 50, 9)) {
        EXPECT_LE(std::abs(eval_F(entry.f, p.y) - 1.0), 1e-10) << entry.name;
        EXPECT_NEAR(norm(p.y_adapted), 1.0, 1e-8) << entry.name;
        EXPECT_LE(max_abs_diff(p.factor.reconstruct(), p.g.entries), 1e-12 * p.g.entries.max_abs());
        EXPECT_EQ(p.y_adapted, p.factor.transpose_apply(p.y));
      }
    }
  }
}

TEST(SampleIndicatrix, TenThousandSamplesStayOnTheLevelSet) {
  const auto entries = testing::catalog(3, 77);
  double worst = 0.0;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    for (std::uint64_t i = 0; i < 2000; ++i) {
      const detail::Draw d = detail::draw_on_indicatrix(entries[k].f, 5, i, 1000);
      worst = std::max(worst, std::abs(eval_F(entries[k].f, d.y) - 1.0));
    }
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(SampleIndicatrix, DeterministicAndPrefixStable) {
  const auto f = FundamentalFunction::mroot(4, 6);
  const auto a = sample_indicatrix(f, 30, 1234);
  const auto b = sample_indicatrix(f, 30, 1234);
  const auto prefix = sample_indicatrix(f, 10, 1234);
  const auto other = sample_indicatrix(f, 10, 1235);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(a[i].y, b[i].y);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a[i].y, prefix[i].y);
  EXPECT_NE(a[0].y, other[0].y);
  EXPECT_THROW((void)sample_indicatrix(f, 0, 1), Error);
}

TEST(SampleIndicatrix, GuardTooAggressiveOverflows) {
  // In the plane a margin just below 1/sqrt(2) leaves only thin wedges around the diagonals.
  const auto f = FundamentalFunction::pnorm(2, 4, 0.70710678);
  try {
    (void)sample_indicatrix(f, 5, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RejectionOverflow);
  }
  const VerifySummary s = verify_claims(f, 5, 3, 1e-8);
  EXPECT_FALSE(s.pass);
  EXPECT_FALSE(s.failures.empty());
}

TEST(AdaptedReport, EuclideanIsTheUnitSphere) {
  const auto f = FundamentalFunction::euclidean(4);
  for (const IndicatrixPoint& p : sample_indicatrix(f, 20, 2)) {
    const CurvatureReport r = adapted_report(f, p, Method::hyperdual);
    EXPECT_LE(r.residual_H, 1e-12);
    EXPECT_LE(r.residual_trace, 1e-12);
    for (double k : r.principal) EXPECT_NEAR(k, 1.0, 1e-10);
    EXPECT_EQ(r.method, Method::hyperdual);
  }
}

TEST(AdaptedReport, DiagonalQuadratic) {
  const auto f = FundamentalFunction::quadratic(SymMatrix::diagonal({4.0, 1.0}));
  for (const IndicatrixPoint& p : sample_indicatrix(f, 50, 3)) {
    EXPECT_LE(adapted_report(f, p, Method::hyperdual).residual_H, 1e-10);
  }
}

TEST(AdaptedReport, RandersInR3) {
  const auto f = FundamentalFunction::randers(SymMatrix::identity(3), {0.3, 0.0, 0.0});
  double worst_h = 0.0, worst_umbilic = 0.0;
  for (const IndicatrixPoint& p : sample_indicatrix(f, 100, 4)) {
    const CurvatureReport r = adapted_report(f, p, Method::hyperdual);
    worst_h = std::max(worst_h, r.residual_H);
    worst_umbilic = std::max(worst_umbilic, r.residual_umbilic);
    EXPECT_LE(r.residual_normal, 1e-8);
    EXPECT_LE(r.residual_grad, 1e-8);
    EXPECT_LE(r.oracle_gap, 1e-5);
  }
  EXPECT_LE(worst_h, 1e-8);
  EXPECT_LE(worst_umbilic, 1e-6);
}

TEST(AdaptedReport, FiniteDifferencePathWithinItsTolerance) {
  for (std::size_t n : {2U, 3U, 4U, 6U}) {
    for (const auto& entry : testing::catalog(n, 1000 + n)) {
      // The Randers cancellation sqrt(y^T a y) + b.y amplifies rounding in the
      // second differences; at the default 1e-5 step that alone reaches
      // ~4e-5 in H, so this family is differenced with the balanced 1e-4 step.
      const double step = entry.name == "randers" ? 1e-4 : 1e-5;
      double worst = 0.0;
      std::size_t outside = 0;
      for (const IndicatrixPoint& p : sample_indicatrix(entry.f, 50, 5)) {
        try {
          const CurvatureReport r = adapted_report(entry.f, p, Method::fd, {step, 1e-5});
          EXPECT_EQ(r.method, Method::fd);
          worst = std::max(worst, r.residual_H);
        } catch (const Error& e) {
          // Points within a step of the guard boundary have no full stencil.
          EXPECT_EQ(e.kind(), ErrorKind::DomainViolation);
          ++outside;
        }
      }
      EXPECT_LE(worst, 1e-5) << entry.name << " n=" << n;
      EXPECT_LE(outside, 2U) << entry.name << " n=" << n;
    }
  }
}

TEST(AdaptedReport, OracleDecaysAtSecondOrder) {
  Rng rng(83);
  for (const auto& entry : testing::catalog(3, 55)) {
    if (entry.name == "euclidean" || entry.name == "quadratic") continue;  // oracle exact to rounding
    for (const IndicatrixPoint& p : sample_indicatrix(entry.f, 5, 6)) {
      const double coarse = adapted_report(entry.f, p, Method::hyperdual, {1e-5, 1e-3}).oracle_gap;
      const double fine = adapted_report(entry.f, p, Method::hyperdual, {1e-5, 5e-4}).oracle_gap;
      EXPECT_GE(coarse / fine, 3.5) << entry.name << " " << coarse << " " << fine;
      EXPECT_LE(coarse / fine, 4.5) << entry.name << " " << coarse << " " << fine;
    }
  }
}

TEST(VerifyClaims, Examples) {
  const VerifySummary e = verify_claims(FundamentalFunction::euclidean(4), 100, 1, 1e-10);
  EXPECT_TRUE(e.pass);
  EXPECT_LE(e.residual_H.max, 1e-12);
  EXPECT_EQ(e.evaluated, 100U);

  const VerifySummary p = verify_claims(FundamentalFunction::pnorm(3, 4), 200, 2, 1e-8);
  EXPECT_TRUE(p.pass);

  Rng rng(84);
  const auto near = testing::seeded_randers(rng, 3, 0.99);
  const VerifySummary r = verify_claims(near, 100, 3, 1e-6);
  EXPECT_TRUE(r.pass);

  EXPECT_THROW((void)verify_claims(near, 0, 3, 1e-6), Error);
  EXPECT_THROW((void)verify_claims(near, 10, 3, 0.0), Error);
}

TEST(VerifyClaims, TightToleranceReportsFailuresInIndexOrder) {
  const auto f = FundamentalFunction::randers(SymMatrix::identity(3), {0.3, 0.0, 0.0});
  const VerifySummary s = verify_claims(f, 100, 42, 1e-17);
  EXPECT_FALSE(s.pass);
  ASSERT_FALSE(s.failures.empty());
  for (std::size_t i = 1; i < s.failures.size(); ++i) EXPECT_LT(s.failures[i - 1].index, s.failures[i].index);
  EXPECT_EQ(s.evaluated, 100U);
}

TEST(VerifyClaims, ThreadCountDoesNotChangeResults) {
  Rng rng(85);
  const auto f = testing::seeded_randers(rng, 4, 0.81);
  VerifyOptions one{.method = Method::hyperdual, .report = {}, .threads = 1, .keep_reports = true};
  VerifyOptions many = one;
  many.threads = 8;
  const VerifySummary a = verify_claims(f, 64, 17, 1e-8, one);
  const VerifySummary b = verify_claims(f, 64, 17, 1e-8, many);
  EXPECT_EQ(a.residual_H.max, b.residual_H.max);
  EXPECT_EQ(a.residual_H.mean, b.residual_H.mean);
  EXPECT_EQ(a.oracle_gap.max, b.oracle_gap.max);
  ASSERT_EQ(a.reports.size(), b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    EXPECT_EQ(a.reports[i].index, b.reports[i].index);
    EXPECT_EQ(a.reports[i].report.point.y, b.reports[i].report.point.y);
    EXPECT_EQ(a.reports[i].report.H, b.reports[i].report.H);
  }
}

// The claims hold with the hyper-dual path even with a guard margin far
// smaller than the default, where the difference oracle can no longer
// resolve the bending.
TEST(VerifyClaims, SmallGuardMarginStillSatisfiesClaims) {
  for (std::size_t n : {2U, 3U, 4U}) {
    for (const auto& f : {FundamentalFunction::pnorm(n, 4, 1e-2), FundamentalFunction::mroot(n, 6, 1e-2)}) {
      const VerifySummary s = verify_claims(f, 200, 8, 1e-8);
      EXPECT_TRUE(s.pass) << to_string(f.family()) << " n=" << n;
      EXPECT_LE(s.residual_umbilic.max, 1e-6);
    }
  }
}

}  // namespace
}  // namespace finsler
