#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lutzlab/numerics.hpp"

namespace lutzlab {

// Segment kinds. Every segment is a function of the global radius r, so a
// segment can be cut at any radius without reparametrisation.

// sum_i c[i] * r^i
struct PolySegment {
  std::vector<double> c;
};

// amplitude * sin(2 pi r) or amplitude * cos(2 pi r)
struct TrigSegment {
  double amplitude = 0.0;
  bool sine = false;
};

// Uniform samples of f and f' on [r0, r1], cubic Hermite in between.
struct TableSegment {
  double r0 = 0.0;
  double r1 = 0.0;
  std::vector<double> f;
  std::vector<double> df;
  double scale = 1.0;
};

// Closed-form jet; used for the blends that are neither polynomial nor trig.
struct AnalyticSegment {
  std::function<Jet(double)> fn;
  std::string tag;
};

using Segment = std::variant<PolySegment, TrigSegment, TableSegment, AnalyticSegment>;

Jet eval_segment(const Segment& s, double r);
const char* segment_kind(const Segment& s);

class PiecewiseProfile {
 public:
  PiecewiseProfile() = default;
  PiecewiseProfile(std::vector<double> breakpoints, std::vector<Segment> segments);

  Jet jet(double r) const;
  double value(double r) const { return jet(r).v; }
  double d1(double r) const { return jet(r).d1; }
  double d2(double r) const { return jet(r).d2; }

  // Same profile multiplied by c.
  PiecewiseProfile scaled(double c) const;
  // Replaces the profile on [a, b] by seg, cutting the neighbours.
  PiecewiseProfile spliced(double a, double b, Segment seg) const;
  // Largest |left limit - right limit| over interior breakpoints.
  double max_jump() const;

  const std::vector<double>& breakpoints() const { return bp_; }
  const std::vector<Segment>& segments() const { return seg_; }
  double scale() const { return scale_; }
  std::size_t segment_index(double r) const;

 private:
  std::vector<double> bp_;
  std::vector<Segment> seg_;
  double scale_ = 1.0;
};

// Parameters of the main and auxiliary truncated Gaussians. The main kernel
// is centred at 0 with std half_width/5 and support [-half_width, half_width];
// the auxiliary kernels have std half_width/10 and support half-width
// half_width/7, and smooth the indicator of the inner interval
// [center - 6/7 half_width, center + 6/7 half_width].
struct SmoothingWindow {
  double center = 0.05;
  double half_width = 5e-4;
  double sigma = 1e-4;
  double aux_sigma = 5e-5;
  double aux_half_support = 5e-4 / 7.0;
  double inner_half = 6.0 * 5e-4 / 7.0;
  int samples = 4096;
  double quad_tol = 1e-11;

  static SmoothingWindow standard(double center, double half_width);
  double lo() const { return center - half_width; }
  double hi() const { return center + half_width; }
};

struct ProfilePair {
  PiecewiseProfile h1;
  PiecewiseProfile h2;
  double epsilon = 1.0;
  std::optional<SmoothingWindow> window;

  ProfilePair scaled(double c) const;
};

struct ExtensionSpec {
  // Largest twist amplitude the second ellipse must dominate; values below
  // the working amplitude are raised to it.
  double u_max = 0.0;
  // |h2(r+')| = intercept_factor * max over amplitudes of |h2(r+)|.
  double intercept_factor = 2.0;
  double blend_end = 0.6;
  double ellipse_end = 0.8;
  double polar_end = 0.95;
};

struct TwistParams {
  double epsilon = 1.0;
  double epsilon0 = 0.05;
  double delta0 = 5e-4;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta = 0.01;
  double mu_minus = -1.0;
  double mu_plus = 1.0;
  double u = 0.05;
  ExtensionSpec extension;
};

// Throws InvalidGeometry naming the first violated field.
void validate(const TwistParams& p);

struct ContinuityParams {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double residual1 = 0.0;
  double residual2 = 0.0;
  bool delta2_warning = false;
};

ContinuityParams solve_continuity_params(double epsilon0, double u, double delta, double mu_minus);
// Copy of p with delta1, delta2 solved at p.u.
TwistParams with_solved_continuity(TwistParams p);

// Amplitude of h2 on the first arc: (1+delta2) u / (2 pi (1 + delta mu_-)).
double arc_amplitude(const TwistParams& p, double u);
// |h2(r+')|, fixed by the extension and independent of the working amplitude.
double second_intercept(const TwistParams& p);

ProfilePair build_paper_path(const TwistParams& p);
// Family member with amplitude u; delta1, delta2 stay at their solved values
// for p.u and the cap is rescaled by rho = u / p.u so the path stays continuous.
ProfilePair build_family_path(const TwistParams& p, double u);
ProfilePair standard_cap(double epsilon = 1.0);

double wronskian(const ProfilePair& pair, double r);

struct ContactReport {
  double min_abs_d_over_r = 0.0;
  double r_at_min = 0.0;
  int sign = 0;
  bool pass = false;
  int grid = 0;
};
ContactReport check_contact_condition(const ProfilePair& pair, int grid_size);

ProfilePair mollify(const ProfilePair& pair, const SmoothingWindow& window);
// Mollified table of a single profile on the window.
TableSegment mollify_table(const PiecewiseProfile& f, const SmoothingWindow& window);

struct SmoothingBound {
  double max_ratio = 0.0;
  double r_at_max = 0.0;
  double bound = 0.0;
  bool pass = false;
};
SmoothingBound verify_smoothing_bound(const ProfilePair& pair_smoothed, double u, int grid = 4001);

// Net number of turns of r -> (h1, h2) around the origin on [0, epsilon].
int winding_number(const ProfilePair& pair, int grid = 20000);
double unwrapped_angle(const ProfilePair& pair, int grid = 20000);

// Rows r, h1, h2, h1', h2', D on a uniform grid.
std::vector<std::array<double, 6>> sample_pair(const ProfilePair& pair, int n);

// Family u -> profile pair with h1 fixed. Holds the mollified reference
// window tables; since mollification is linear and every member agrees with
// rho * (reference h2) near the window, members reuse them scaled by rho.
class TwistFamily {
 public:
  explicit TwistFamily(TwistParams reference, bool smoothed = true);
  ProfilePair member(double u) const;
  const TwistParams& reference() const { return ref_; }
  bool smoothed() const { return smoothed_; }
  // Amplitude whose unperturbed-tube l-invariant is l_tube.
  double amplitude_for(double l_tube) const;
  double max_amplitude() const;

 private:
  TwistParams ref_;
  bool smoothed_;
  TableSegment h1_table_;
  TableSegment h2_table_;
};

}  // namespace lutzlab
