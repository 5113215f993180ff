#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lutzlab/family.hpp"

namespace lutzlab {

struct BoundCertificate {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  std::string lower_method;  // volume | l_invariant | max
  std::string upper_method;  // conformal | gray_path | triangle | inclusion | folding
  std::vector<std::pair<std::string, double>> witnesses;
};

// Uses the volumes and certified l-invariants of both specs.
BoundCertificate lower_bound(const FormSpec& s1, const FormSpec& s2);

struct ConformalSample {
  std::vector<double> samples;
  std::string grid;
};

// max(ln max f, -ln min f)
double ub_conformal(const ConformalSample& f);
// max |ln f| under the identity contactomorphism; an upper bound for the
// infimum over contactomorphisms isotopic to the identity.
double d_cf(const ConformalSample& f);

// f = 1 / (2 pi (rho1/a + rho2/b)) on rho1 + rho2 = 1/2, sampled on a rho1 grid.
ConformalSample ellipsoid_conformal_factor(double a, double b, int grid = 1001);
// Pointwise ratio f_E(a1, a2) / f_B(ball) on the shared rho1 grid.
ConformalSample ellipsoid_ratio_sample(double a1, double a2, double ball, int grid = 1001);

struct FoldingBounds {
  double inclusion = 0.0;
  double folding = 0.0;
};
// Inclusion: ub_conformal of the E(a1, a2) / B(ball) ratio sample. Folding:
// E(a1, a2) fits in B(a2 - delta'), reported as ln(a2/ball - delta).
FoldingBounds folding_bounds(double a1, double a2, double ball, double delta);

struct GrayPathSpec {
  std::shared_ptr<const TwistFamily> family;
  double u_start = 0.0;
  double u_end = 0.0;
  int r_grid = 2048;
  int window_points = 256;
  double tol = 1e-11;
  // Central difference step for d h2 / du, relative to u.
  double fd_rel_step = 1e-3;
};

struct GraySample {
  double u = 0.0;
  double r_argmax = 0.0;
  double sup = 0.0;
};

struct GrayResult {
  double value = 0.0;
  std::vector<GraySample> samples;  // sorted by u
};

// sup over r of |d h2/du * (-h1') / D_u| at amplitude u.
GraySample gray_sup(const GrayPathSpec& path, double u);
GrayResult gray_integral(const GrayPathSpec& path);

struct TriangleOptions {
  int r_grid = 2048;
  double tol = 1e-11;
};
BoundCertificate triangle_ub(const FamilyModel& model, const FormSpec& s1, const FormSpec& s2,
                             const TriangleOptions& opt = {});

// Lower and upper bound together.
BoundCertificate certificate(const FamilyModel& model, const FormSpec& s1, const FormSpec& s2,
                             const TriangleOptions& opt = {});

// max(|a1 - a2|, |b1 - b2|)
double d_inf(const FormSpec& s1, const FormSpec& s2);

struct SweepRow {
  std::size_t i = 0;
  std::size_t j = 0;
  double a1 = 0.0, b1 = 0.0, a2 = 0.0, b2 = 0.0;
  double dinf = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  // Slack of the weakest of the three comparisons; negative on failure.
  double slack = 0.0;
  bool pass = false;
  std::string failure;
};

struct SweepReport {
  std::vector<SweepRow> rows;  // ordered by (i, j)
  bool all_pass = true;
  double worst_slack = std::numeric_limits<double>::infinity();
  std::size_t failures = 0;
};

struct SweepTolerances {
  double lower_tol = 1e-9;  // on d_inf <= lower and lower <= upper
  double upper_tol = 1e-6;  // on upper <= 2 d_inf
};

SweepReport bilipschitz_sweep(const FamilyModel& model,
                              const std::vector<std::pair<double, double>>& points,
                              const SweepTolerances& tol = {}, std::size_t threads = 0,
                              const TriangleOptions& opt = {});

}  // namespace lutzlab
