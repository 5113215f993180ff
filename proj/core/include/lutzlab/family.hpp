#pragma once

#include <array>
#include <memory>
#include <vector>

#include "lutzlab/profile.hpp"
#include "lutzlab/reeb.hpp"

namespace lutzlab {

// Least action of ambient orbits outside the twist (A) and of the orbit
// family in the compensator tube (B).
struct AmbientFloors {
  double A = 1.0;
  double B = 1.0;
};

double epsilon_bound(double A, double B);

// Compensator tube K1: the standard form dtheta + r^2 dphi on
// S^1 x D^2 x S^1 with theta, phi of period 2 pi and unit radius, rescaled so
// its volume is tube_volume. The compensator nu = amp * b1(theta) b2(r) is
// supported in [0, theta_extent] x [0, radial_support].
struct CompensatorGeometry {
  int n = 2;
  double tube_volume = 0.2;
  double radial_support = 1.0;
  double theta_extent = kTwoPi;
  // Lower limit on min(1 + nu).
  double floor = 0.5;
};

struct CompensatorSpec {
  CompensatorGeometry geometry;
  double amplitude = 0.0;
  double target_delta_volume = 0.0;    // V0: the compensator must remove this much
  double achieved_delta_volume = 0.0;  // volume change of the K1 tube, ~ -V0
  double residual = 0.0;               // |achieved + V0| / max(|V0|, tiny)
  double min_one_plus_nu = 1.0;
  double action_floor = 0.0;           // min(1 + nu) * B
};

// Volume change of the K1 tube under (1 + nu) scaling with amplitude amp,
// multiplied by scale^n for a form scaled by `scale`.
double compensator_delta_volume(const CompensatorGeometry& g, double amp, double scale = 1.0);
// Volume of the K1 tube with the compensator applied.
double compensator_volume(const CompensatorGeometry& g, double amp, double scale = 1.0);
// Direct quadrature of the K1 volume, independent of the binomial expansion.
double compensator_volume_quadrature(const CompensatorGeometry& g, double amp, double scale = 1.0);

CompensatorSpec compensator_solve(double V0, const CompensatorGeometry& g, double floor_B);

struct TubeVolume {
  double value = 0.0;  // absolute value
  int orientation = 1;
};
// (n-1) 4 pi^2 int_0^eps h1^(n-2) D dr; for n = 2 this is the integral of
// alpha ^ d alpha over the tube.
TubeVolume tube_volume(const ProfilePair& pair, int n = 2, double tol = 1e-11);

struct FamilyConfig {
  TwistParams reference;  // delta1, delta2 solved here
  int n = 2;
  AmbientFloors floors;
  CompensatorGeometry compensator;
  // The twist tube is a small part of Y: its profile volume is multiplied by
  // this factor before entering the total.
  double tube_volume_scale = 1e-3;
  bool smoothed = true;
};

// The default configuration: reference amplitude 0.05 with room for
// amplitudes up to 0.12.
FamilyConfig default_family_config();

struct FormSpec {
  int n = 2;
  double a = 0.0;  // ln k^(1/n)
  double b = 0.0;  // ln l
  double k = 1.0;
  double l = 1.0;
  double scale = 1.0;  // C = k^(1/n)
  double u = 0.0;      // twist amplitude of the unscaled tube
  TwistParams twist;
  AmbientFloors floors;
  double base_volume = 1.0;
  CompensatorSpec compensator;
  ProfilePair pair;  // unscaled tube; the form is scale * pair
  double tube_volume_unscaled = 0.0;
  double reservoir_volume = 0.0;
  double total_volume = 0.0;
  ClactionReport claction;
  bool certified = false;
  double l_certified = 0.0;  // reeb l-invariant of scale * pair
};

class FamilyModel {
 public:
  explicit FamilyModel(FamilyConfig config = default_family_config());

  const FamilyConfig& config() const { return cfg_; }
  const TwistFamily& family() const { return *family_; }
  std::shared_ptr<const TwistFamily> family_ptr() const { return family_; }
  double epsilon() const { return epsilon_bound(cfg_.floors.A, cfg_.floors.B); }
  // l-invariant of the base form at (0, ln L0).
  double base_l() const { return base_l_; }
  double base_tube_volume() const { return base_tube_volume_; }
  double reservoir_volume() const { return reservoir_; }

  FormSpec embed_point(double a, double b) const;
  // Total volume recomputed from the parts of spec, with the form scaled by C.
  double total_volume(const FormSpec& spec, double C = 1.0) const;

 private:
  FamilyConfig cfg_;
  std::shared_ptr<TwistFamily> family_;
  double base_l_ = 0.0;
  double base_tube_volume_ = 0.0;
  double reservoir_ = 0.0;
};

struct ScalingReport {
  double factor = 1.0;
  int n = 2;
  double volume_ratio = 0.0;
  double volume_expected = 0.0;
  double volume_rel_error = 0.0;
  double tube_ratio = 0.0;
  double l_ratio = 0.0;
  double l_rel_error = 0.0;
  bool pass = false;
};
ScalingReport scaling_check(const FamilyModel& model, const FormSpec& spec, double C,
                            double tol = 1e-10);

// T_min^n / Vol = l^n / k; for n = 2 this is l^2 / k.
double systolic_ratio(const FormSpec& spec);

}  // namespace lutzlab
