#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

namespace lutzlab {
namespace {

using test::reference_params;
using test::reference_raw;
using test::reference_smoothed;

TEST(Continuity, DeltaZeroMatchesClosedForm) {
  const ContinuityParams c = solve_continuity_params(0.05, 0.05, 0.0, -1.0);
  // Closed forms: 1/cos(2 pi eps0) - 1 and 2 pi eps0^2 / (u sin(2 pi eps0)) - 1.
  EXPECT_NEAR(c.delta1, 0.0514622242382672, 1e-14);
  EXPECT_NEAR(c.delta2, 0.016640738463052, 1e-14);
  EXPECT_LT(std::abs(c.residual1), 1e-12);
  EXPECT_LT(std::abs(c.residual2), 1e-12);
  EXPECT_FALSE(c.delta2_warning);
}

TEST(Continuity, PerturbationEntersDelta2Only) {
  const ContinuityParams c = solve_continuity_params(0.05, 0.05, 0.01, -1.0);
  EXPECT_NEAR(c.delta1, 0.0514622242382672, 1e-14);
  EXPECT_NEAR(c.delta2, 0.00647433107842166, 1e-14);
}

TEST(Continuity, SmallRadiusLimit) {
  for (double e0 : {1e-2, 1e-3, 1e-4}) {
    const ContinuityParams c = solve_continuity_params(e0, e0, 0.0, -1.0);
    EXPECT_LT(c.delta1, 3.0 * e0 * e0 * 4.0 * M_PI * M_PI);
  }
}

TEST(Continuity, LargeAmplitudeWarnsInsteadOfFailing) {
  const ContinuityParams c = solve_continuity_params(0.05, 5.0, 0.0, -1.0);
  EXPECT_TRUE(c.delta2_warning);
  EXPECT_GT(1.0 + c.delta2, 0.0);
  EXPECT_NEAR(c.delta2, -0.98983359261537, 1e-12);
}

TEST(Continuity, RejectsNonpositiveMultiplier) {
  EXPECT_THROW(solve_continuity_params(0.05, 0.05, 0.5, -2.0), InvalidGeometry);
  EXPECT_THROW(solve_continuity_params(0.3, 0.05, 0.0, -1.0), InvalidGeometry);
}

TEST(TwistPath, BoundaryValues) {
  const ProfilePair& p = reference_raw();
  EXPECT_DOUBLE_EQ(p.h1.value(0.0), 1.0);
  EXPECT_DOUBLE_EQ(p.h2.value(0.0), 0.0);
  for (double r : {0.97, 0.99, 1.0}) {
    EXPECT_NEAR(p.h1.value(r), 1.0, 1e-12);
    EXPECT_NEAR(p.h2.value(r), r * r, 1e-12);
  }
}

TEST(TwistPath, QuarterRadiusIsBothZeroOfH1AndCriticalForH2) {
  const ProfilePair& p = reference_raw();
  const double r = bisect_root([&](double x) { return p.h1.value(x); }, 0.2, 0.3, 1e-15);
  EXPECT_NEAR(r, 0.25, 1e-12);
  EXPECT_NEAR(p.h2.d1(0.25), 0.0, 1e-12);
}

TEST(TwistPath, ContinuousAcrossBreakpoints) {
  EXPECT_LT(reference_raw().h1.max_jump(), 1e-10);
  EXPECT_LT(reference_raw().h2.max_jump(), 1e-10);
  EXPECT_LT(reference_smoothed().h1.max_jump(), 1e-10);
  EXPECT_LT(reference_smoothed().h2.max_jump(), 1e-10);
}

TEST(TwistPath, SecondInterceptDominatesAndIgnoresAmplitude) {
  TwistParams p = reference_params();
  const double s = second_intercept(p);
  EXPECT_GT(s, arc_amplitude(p, p.u));
  p.u = 0.03;
  p = with_solved_continuity(p);
  EXPECT_DOUBLE_EQ(second_intercept(p), s);
}

TEST(TwistPath, DerivativesMatchFiniteDifferences) {
  const ProfilePair& p = reference_raw();
  const double h = 1e-5;
  for (const PiecewiseProfile* f : {&p.h1, &p.h2}) {
    const auto& bp = f->breakpoints();
    for (int i = 1; i < 2000; ++i) {
      const double r = i / 2000.0;
      bool near_break = false;
      for (double b : bp) near_break = near_break || std::abs(r - b) < 3 * h;
      if (near_break) continue;
      const Jet j = f->jet(r);
      const double d1 = (f->value(r + h) - f->value(r - h)) / (2 * h);
      const double d2 = (f->d1(r + h) - f->d1(r - h)) / (2 * h);
      EXPECT_LE(std::abs(d1 - j.d1), 1e-6 * std::max(1.0, std::abs(j.d1))) << "r = " << r;
      EXPECT_LE(std::abs(d2 - j.d2), 1e-4 * std::max(1.0, std::abs(j.d2))) << "r = " << r;
    }
  }
}

TEST(TwistPath, WindingNumbers) {
  EXPECT_EQ(winding_number(reference_raw()), 1);
  EXPECT_EQ(winding_number(reference_smoothed()), 1);
  EXPECT_EQ(winding_number(standard_cap()), 0);
}

TEST(Wronskian, StandardCap) {
  EXPECT_NEAR(wronskian(standard_cap(), 0.1), 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(wronskian(standard_cap(), 0.0), 0.0);
  EXPECT_DOUBLE_EQ(wronskian(reference_raw(), 0.0), 0.0);
}

TEST(Wronskian, ConstantOnEllipseArc) {
  const TwistParams p = reference_params();
  const double expect = p.u * (1 + p.delta1) * (1 + p.delta2) / (1 + p.delta * p.mu_minus);
  for (double r : {0.1, 0.2, 0.25, 0.3, 0.45}) EXPECT_NEAR(wronskian(reference_raw(), r), expect, 1e-14);
}

TEST(Contact, StandardCapHasMinimumTwo) {
  const ContactReport c = check_contact_condition(standard_cap(), 1000);
  EXPECT_TRUE(c.pass);
  EXPECT_NEAR(c.min_abs_d_over_r, 2.0, 1e-12);
  EXPECT_EQ(c.sign, 1);
}

TEST(Contact, TwistPathPasses) {
  const ContactReport c = check_contact_condition(reference_smoothed(), 10000);
  EXPECT_TRUE(c.pass);
  EXPECT_GT(c.min_abs_d_over_r, 1e-6);
}

TEST(Contact, ParallelPairFails) {
  ProfilePair p;
  p.h1 = PiecewiseProfile({0.0, 1.0}, {PolySegment{{1.0, 1.0}}});
  p.h2 = PiecewiseProfile({0.0, 1.0}, {PolySegment{{0.5, 0.5}}});
  EXPECT_FALSE(check_contact_condition(p, 1000).pass);
}

TEST(Mollify, AgreesWithRawOutsideWindow) {
  const ProfilePair& raw = reference_raw();
  const ProfilePair& sm = reference_smoothed();
  const SmoothingWindow& w = *sm.window;
  for (int i = 0; i <= 4000; ++i) {
    const double r = i / 4000.0;
    if (r > w.lo() && r < w.hi()) continue;
    EXPECT_NEAR(sm.h1.value(r), raw.h1.value(r), 1e-10);
    EXPECT_NEAR(sm.h2.value(r), raw.h2.value(r), 1e-10);
  }
  for (double r : {w.lo(), w.hi()}) {
    EXPECT_NEAR(sm.h1.value(r), raw.h1.value(r), 1e-8);
    EXPECT_NEAR(sm.h2.value(r), raw.h2.value(r), 1e-8);
  }
}

TEST(Mollify, PreservesConstants) {
  const PiecewiseProfile f({0.0, 1.0}, {PolySegment{{0.7}}});
  const TableSegment t = mollify_table(f, SmoothingWindow::standard(0.05, 5e-4));
  for (std::size_t i = 0; i < t.f.size(); ++i) {
    EXPECT_NEAR(t.f[i] * t.scale, 0.7, 1e-12);
    EXPECT_NEAR(t.df[i] * t.scale, 0.0, 1e-9);
  }
}

TEST(Mollify, ErfLimits) {
  EXPECT_EQ(std::erf(0.0), 0.0);
  EXPECT_NEAR(std::erf(6.0), 1.0, 1e-15);
  EXPECT_NEAR(std::erf(-6.0), -1.0, 1e-15);
}

TEST(Mollify, SmoothOnTheWindow) {
  const ProfilePair& sm = reference_smoothed();
  const SmoothingWindow& w = *sm.window;
  // Centered differences carry an h^2 f''' error and f''' scales like 1/sigma^2.
  const double h = w.sigma * 1e-3;
  for (const PiecewiseProfile* f : {&sm.h1, &sm.h2}) {
    auto worst_second = [&](double step) {
      double worst = 0.0;
      for (int i = 1; i < 400; ++i) {
        const double r = w.lo() + (w.hi() - w.lo()) * i / 400.0;
        const double sd = (f->value(r + step) - 2 * f->value(r) + f->value(r - step)) / (step * step);
        worst = std::max(worst, std::abs(sd));
      }
      return worst;
    };
    for (int i = 1; i < 400; ++i) {
      const double r = w.lo() + (w.hi() - w.lo()) * i / 400.0;
      const double fd = (f->value(r + h) - f->value(r - h)) / (2 * h);
      EXPECT_LE(std::abs(fd - f->d1(r)), 1e-4 * std::max(std::abs(f->d1(r)), 1e-3)) << r;
    }
    // A jump in the first derivative would make the second difference grow like 1/step.
    const double coarse = worst_second(1e-4), fine = worst_second(w.sigma / 100.0);
    EXPECT_LT(fine, 1.5 * coarse);
    EXPECT_LT(coarse, 1e5);
  }
}

TEST(Mollify, IdempotentOnSmoothInput) {
  ProfilePair cap = standard_cap();
  const ProfilePair once = mollify(cap, SmoothingWindow::standard(0.05, 5e-4));
  const ProfilePair twice = mollify(once, SmoothingWindow::standard(0.05, 5e-4));
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double r = 0.0495 + 0.001 * i / 1000.0;
    worst = std::max(worst, std::abs(twice.h2.value(r) - once.h2.value(r)));
    worst = std::max(worst, std::abs(twice.h1.value(r) - once.h1.value(r)));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(SmoothingBound, CapRegionRatioIsZero) {
  const ProfilePair cap = mollify(standard_cap(), SmoothingWindow::standard(0.05, 5e-4));
  const SmoothingBound b = verify_smoothing_bound(cap, 0.05);
  EXPECT_EQ(b.max_ratio, 0.0);
  EXPECT_TRUE(b.pass);
}

TEST(SmoothingBound, ArcRatioMatchesClosedForm) {
  // Off the window, |h1'/D| = 2 pi (1 + delta1) |sin 2 pi r| / D_arc.
  const TwistParams p = reference_params();
  const double d_arc = p.u * (1 + p.delta1) * (1 + p.delta2) / (1 + p.delta * p.mu_minus);
  for (double r : {0.1, 0.2, 0.3}) {
    const double closed = kTwoPi * (1 + p.delta1) * std::abs(std::sin(kTwoPi * r)) / d_arc;
    EXPECT_NEAR(std::abs(reference_raw().h1.d1(r) / wronskian(reference_raw(), r)), closed, 1e-9 * closed);
  }
}

TEST(SmoothingBound, DecreasesOverDelta0Decades) {
  TwistParams p = reference_params();
  double prev = std::numeric_limits<double>::infinity();
  for (double f : {1e-2, 1e-3, 1e-4}) {
    p.delta0 = f * p.epsilon0;
    const ProfilePair s = mollify(build_paper_path(p), SmoothingWindow::standard(p.epsilon0, p.delta0));
    const double ratio = verify_smoothing_bound(s, p.u).max_ratio;
    EXPECT_LT(ratio, prev);
    prev = ratio;
  }
}

TEST(SmoothingBound, NeedsWindow) {
  EXPECT_THROW(verify_smoothing_bound(reference_raw(), 0.05), PreconditionFailed);
}

TEST(Validate, NamesTheField) {
  TwistParams p = reference_params();
  p.delta = 1.5;
  try {
    validate(p);
    FAIL() << "expected InvalidGeometry";
  } catch (const InvalidGeometry& e) {
    EXPECT_NE(std::string(e.what()).find("delta"), std::string::npos);
  }
}

}  // namespace
}  // namespace lutzlab
