#pragma once

#include <array>
#include <functional>
#include <limits>
#include <vector>

#include "lutzlab/profile.hpp"

namespace lutzlab {

// Angular conventions: theta is 1-periodic and phi is 2 pi-periodic. With
// these, the closed-orbit condition reads h1'/(2 pi h2') = p/q and the core
// circle has period |h1(0)|.

struct ReebRates {
  double theta_rate = 0.0;
  double phi_rate = 0.0;
};
ReebRates reeb_field(const ProfilePair& pair, double r);

struct TorusOrbitFamily {
  double r0 = 0.0;
  int p = 0;
  int q = 0;
  double period = 0.0;
  double action = 0.0;
  bool morse_bott = false;
  // Set when the resonance holds on a whole interval [r0, r_end].
  bool continuum = false;
  double r_end = 0.0;
  // 'q' when T = q D / h2' was used, 'p' when T = 2 pi p D / h1' was.
  char formula = 'q';
  // Relative disagreement of the two period formulas, NaN when one is undefined.
  double crosscheck = std::numeric_limits<double>::quiet_NaN();
};
std::vector<TorusOrbitFamily> resonance_scan(const ProfilePair& pair, int pq_max, int grid = 20000);

struct ActionMinima {
  double r_plus = 0.0;
  double r_plus_prime = 0.0;
  double action_plus = 0.0;
  double action_plus_prime = 0.0;
};
ActionMinima action_minima(const ProfilePair& pair, int grid = 20000);

bool morse_bott_check(const ProfilePair& pair, double r0);

struct CoreCz {
  bool degenerate = false;
  int index = 0;
  double argument = 0.0;
  // Distance of the floor argument to the nearest integer.
  double nearness = 0.0;
};
CoreCz core_orbit_cz(const ProfilePair& pair, int k);

// Row-major 2x2 matrix {a, b, c, d}.
using Mat2 = std::array<double, 4>;

// Robbin-Salamon index of a sampled path in Sp(2) starting at the identity,
// returned as a multiple of 1/2. Samples are taken as equally spaced in time.
double cz_sp2_path(const std::vector<Mat2>& path);
// Same for a path given as a function on [0, 1]; the sampling doubles until the
// index is unchanged for two consecutive refinements.
double cz_sp2_path(const std::function<Mat2(double)>& path, int initial_samples = 64);

// Morse function on the 1-periodic theta circle with maximum mu_plus at
// theta = 0 and minimum mu_minus at theta = 1/2.
struct MorseCircle {
  double mu_minus = -1.0;
  double mu_plus = 1.0;
  double value(double theta) const;
  double derivative(double theta) const;
  static constexpr double theta_minus = 0.5;
  static constexpr double theta_plus = 0.0;
};

// Reeb field of (1 + delta b(r) mu(theta)) (h1 dtheta + h2 dphi).
class PerturbedReebField {
 public:
  PerturbedReebField(ProfilePair pair, TwistParams params, double r_plus);
  // (theta', r', phi').
  std::array<double, 3> operator()(double theta, double r, double phi) const;
  // Components (alpha_theta, alpha_r, alpha_phi) of the perturbed form.
  std::array<double, 3> form(double theta, double r) const;
  double bump(double r) const;
  double bump_derivative(double r) const;
  double r_plus() const { return r_plus_; }
  double bump_half_width() const { return half_width_; }

 private:
  ProfilePair pair_;
  TwistParams params_;
  MorseCircle mu_;
  double r_plus_;
  double half_width_;
};

struct PerturbedOrbits {
  double action_hyperbolic = 0.0;
  double action_elliptic = 0.0;
  double r_plus = 0.0;
  int degree_hyperbolic = 0;
  double shear_rate = 0.0;
  double shear_index = 0.0;
  int cz_hyperbolic = 0;
  // Reported, not certified.
  int cz_elliptic = 0;
};
PerturbedOrbits perturb(const ProfilePair& pair, const TwistParams& params);
PerturbedReebField perturbed_field(const ProfilePair& pair, const TwistParams& params);

struct ClactionReport {
  double action_unperturbed = 0.0;  // 2 pi h2(r+)
  double floor_a = 0.0;
  bool below_floor = false;
  double perturbed_intercept = 0.0;  // |h2(r+) (1 + delta mu_-)|
  double second_intercept = 0.0;     // |h2(r+')|
  bool below_second = false;
  bool pass = false;
};
ClactionReport claction_check(const ProfilePair& pair, const TwistParams& params, double floor_a);

double l_invariant(const ProfilePair& pair, const TwistParams& params,
                   double floor_a = std::numeric_limits<double>::infinity());

struct OpenBookProfiles {
  double p0 = 0.0;
  double eps_tilde = 0.0;
  double g_tilde(double p) const;
  double g_tilde_prime(double p) const;
  double g(double p) const;
  double g_prime(double p) const;
  // h(|p|) = 1 + int_0^|p| s g'(s) ds and h~(|p|) = 1 - int_0^|p| g(s) ds.
  double h(double p) const;
  double h_tilde(double p) const;
};
OpenBookProfiles openbook_profiles(double p0, double eps_tilde);

}  // namespace lutzlab
