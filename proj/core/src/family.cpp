#include "lutzlab/family.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace lutzlab {

double epsilon_bound(double A, double B) {
  if (!(A > 0.0) || !(B > 0.0)) throw PreconditionFailed("epsilon_bound needs A, B > 0");
  return std::min(std::log(A), std::log(B));
}

namespace {

double binomial(int n, int j) {
  double c = 1.0;
  for (int i = 1; i <= j; ++i) c = c * (n - j + i) / i;
  return c;
}

void check_geometry(const CompensatorGeometry& g) {
  if (g.n < 2) throw PreconditionFailed("compensator: n must be at least 2");
  if (!(g.tube_volume > 0.0)) throw PreconditionFailed("compensator: tube_volume must be positive");
  if (!(g.radial_support > 0.0 && g.radial_support <= 1.0))
    throw PreconditionFailed("compensator: radial_support must lie in (0, 1]");
  if (!(g.theta_extent > 0.0 && g.theta_extent <= kTwoPi))
    throw PreconditionFailed("compensator: theta_extent must lie in (0, 2 pi]");
  if (!(g.floor > 0.0 && g.floor < 1.0))
    throw PreconditionFailed("compensator: floor must lie in (0, 1)");
}

// Unnormalised K1 volume: int 2 pi x int_0^1 (n-1) 2r dr x 2 pi.
double k1_raw_volume(int n) { return (n - 1) * 4.0 * kPi * kPi; }

// int_0^extent (1 - t^2)^(3j) dtheta with t = 2 theta / extent - 1.
double theta_moment(double extent, int j) {
  return 0.5 * extent *
         adaptive_simpson([j](double t) { return std::pow(1.0 - t * t, 3 * j); }, -1.0, 1.0, 1e-14);
}

// int_0^s (n-1) 2r (1 - (r/s)^2)^(3j) dr.
double radial_moment(int n, double s, int j) { return (n - 1) * s * s / (3.0 * j + 1.0); }

template <class F>
double gauss_legendre_4(F& f, double a, double b) {
  static constexpr double x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                  0.8611363115940526};
  static constexpr double w[4] = {0.3478548451374538, 0.6521451548625462, 0.6521451548625462,
                                  0.3478548451374538};
  const double m = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += w[i] * f(m + h * x[i]);
  return h * s;
}

// Integral over [a, b] split at the cell boundaries of a uniform grid on [r0, r1].
template <class F>
double gauss_legendre_cells(F& f, double a, double b, double r0, double r1, std::size_t cells) {
  const double h = (r1 - r0) / static_cast<double>(cells);
  double total = 0.0;
  double lo = a;
  while (lo < b) {
    const double k = std::floor((lo - r0) / h + 1e-9) + 1.0;
    double hi = std::min(b, r0 + k * h);
    if (hi - lo < 1e-15 * h) hi = std::min(b, r0 + (k + 1.0) * h);
    total += gauss_legendre_4(f, lo, hi);
    lo = hi;
  }
  return total;
}

}  // namespace

double compensator_delta_volume(const CompensatorGeometry& g, double amp, double scale) {
  check_geometry(g);
  const double kappa = g.tube_volume / k1_raw_volume(g.n);
  double sum = 0.0;
  for (int j = 1; j <= g.n; ++j) {
    sum += binomial(g.n, j) * std::pow(amp, j) * theta_moment(g.theta_extent, j) *
           radial_moment(g.n, g.radial_support, j) * kTwoPi;
  }
  return std::pow(scale, g.n) * kappa * sum;
}

double compensator_volume(const CompensatorGeometry& g, double amp, double scale) {
  return std::pow(scale, g.n) * g.tube_volume + compensator_delta_volume(g, amp, scale);
}

double compensator_volume_quadrature(const CompensatorGeometry& g, double amp, double scale) {
  check_geometry(g);
  const double kappa = g.tube_volume / k1_raw_volume(g.n);
  const double s = g.radial_support;
  const double ext = g.theta_extent;
  auto b1 = [ext](double th) {
    const double t = 2.0 * th / ext - 1.0;
    const double w = 1.0 - t * t;
    return w * w * w;
  };
  auto b2 = [s](double r) {
    if (r >= s) return 0.0;
    const double w = 1.0 - (r / s) * (r / s);
    return w * w * w;
  };
  auto radial = [&](double th) {
    auto inner = [&](double r) {
      return (g.n - 1) * 2.0 * r * std::pow(scale * (1.0 + amp * b1(th) * b2(r)), g.n);
    };
    return adaptive_simpson(inner, 0.0, s, 1e-12) + adaptive_simpson(inner, s, 1.0, 1e-12);
  };
  const double inside = adaptive_simpson(radial, 0.0, ext, 1e-11);
  const double outside = (kTwoPi - ext) * (g.n - 1) * std::pow(scale, g.n);
  return kappa * kTwoPi * (inside + outside);
}

CompensatorSpec compensator_solve(double V0, const CompensatorGeometry& g, double floor_B) {
  check_geometry(g);
  if (!(V0 < g.tube_volume)) {
    throw InfeasibleCompensation("V0 must be smaller than the K1 tube volume");
  }
  CompensatorSpec out;
  out.geometry = g;
  out.target_delta_volume = V0;
  auto excess = [&](double amp) { return compensator_delta_volume(g, amp, 1.0) + V0; };
  double amp = 0.0;
  if (V0 != 0.0) {
    const double lo_amp = g.floor - 1.0;
    double lo = lo_amp, hi = 0.0;
    if (V0 > 0.0) {
      if (excess(lo_amp) > 0.0) {
        throw InfeasibleCompensation("removing V0 needs min(1 + nu) below the floor " +
                                     std::to_string(g.floor));
      }
    } else {
      lo = 0.0;
      hi = 1.0;
      for (int i = 0; i < 60 && excess(hi) < 0.0; ++i) hi *= 2.0;
      if (excess(hi) < 0.0) throw InfeasibleCompensation("cannot add the requested volume");
    }
    amp = bisect_root(excess, lo, hi, 1e-16);
  }
  out.amplitude = amp;
  out.achieved_delta_volume = compensator_delta_volume(g, amp, 1.0);
  out.residual = std::abs(out.achieved_delta_volume + V0) / std::max(std::abs(V0), 1e-300);
  if (V0 == 0.0) out.residual = 0.0;
  out.min_one_plus_nu = 1.0 + std::min(amp, 0.0);
  out.action_floor = out.min_one_plus_nu * floor_B;
  return out;
}

TubeVolume tube_volume(const ProfilePair& pair, int n, double tol) {
  if (n < 2) throw PreconditionFailed("tube_volume: n must be at least 2");
  std::set<double> cuts(pair.h1.breakpoints().begin(), pair.h1.breakpoints().end());
  cuts.insert(pair.h2.breakpoints().begin(), pair.h2.breakpoints().end());
  cuts.insert(0.0);
  cuts.insert(pair.epsilon);
  std::vector<double> pts(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i] > pair.epsilon) break;
    // Each piece lies inside one segment of each profile; evaluating that
    // segment up to both ends keeps one-sided derivative jumps out of the rule.
    const double mid = 0.5 * (pts[i - 1] + pts[i]);
    const Segment& s1 = pair.h1.segments()[pair.h1.segment_index(mid)];
    const Segment& s2 = pair.h2.segments()[pair.h2.segment_index(mid)];
    const double c1 = pair.h1.scale(), c2 = pair.h2.scale();
    auto integrand = [&](double r) {
      const Jet h1 = c1 * eval_segment(s1, r);
      const Jet h2 = c2 * eval_segment(s2, r);
      const double d = h1.v * h2.d1 - h1.d1 * h2.v;
      return std::pow(h1.v, n - 2) * d;
    };
    const TableSegment* table = std::get_if<TableSegment>(&s1);
    if (!table) table = std::get_if<TableSegment>(&s2);
    if (table) {
      // Hermite tables are cubic per cell, so the integrand is a degree-6
      // polynomial there and 4-point Gauss-Legendre per cell is exact.
      const std::size_t cells = table->f.size() - 1;
      total += gauss_legendre_cells(integrand, pts[i - 1], pts[i], table->r0, table->r1, cells);
    } else {
      // The tolerance follows the scale of the pair so C * pair refines the
      // same way as pair.
      const double rel = std::pow(std::abs(c1), n - 1) * std::abs(c2);
      total += adaptive_simpson(integrand, pts[i - 1], pts[i], tol * rel * (pts[i] - pts[i - 1]), 50);
    }
  }
  TubeVolume out;
  const double v = (n - 1) * 4.0 * kPi * kPi * total;
  out.value = std::abs(v);
  out.orientation = v < 0.0 ? -1 : 1;
  return out;
}

FamilyConfig default_family_config() {
  FamilyConfig cfg;
  cfg.reference.extension.u_max = 0.12;
  cfg.reference = with_solved_continuity(cfg.reference);
  return cfg;
}

FamilyModel::FamilyModel(FamilyConfig config) : cfg_(std::move(config)) {
  if (cfg_.n < 2) throw PreconditionFailed("n: must be at least 2");
  if (!(cfg_.tube_volume_scale > 0.0)) throw PreconditionFailed("tube_volume_scale: must be positive");
  cfg_.compensator.n = cfg_.n;
  family_ = std::make_shared<TwistFamily>(cfg_.reference, cfg_.smoothed);
  const ProfilePair base = family_->member(cfg_.reference.u);
  base_l_ = (1.0 + cfg_.reference.delta2) * cfg_.reference.u;
  base_tube_volume_ = tube_volume(base, cfg_.n).value;
  reservoir_ = 1.0 - cfg_.tube_volume_scale * base_tube_volume_ - cfg_.compensator.tube_volume;
  if (!(reservoir_ > 0.0)) {
    throw InvalidGeometry("tube_volume_scale: the tubes already exceed the normalised volume");
  }
}

FormSpec FamilyModel::embed_point(double a, double b) const {
  const double eps = epsilon();
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainViolation("point must be finite");
  if (!(b < eps)) {
    throw DomainViolation("b = " + std::to_string(b) + " is not below epsilon = " +
                          std::to_string(eps));
  }
  FormSpec s;
  s.n = cfg_.n;
  s.a = a;
  s.b = b;
  s.scale = std::exp(a);
  s.k = std::pow(s.scale, cfg_.n);
  s.l = std::exp(b);
  s.twist = cfg_.reference;
  s.floors = cfg_.floors;
  s.base_volume = 1.0;
  s.u = family_->amplitude_for(s.l / s.scale);
  s.pair = family_->member(s.u);

  // The ambient floors scale with the form, so the unscaled tube is compared
  // against the unscaled floor.
  s.claction = claction_check(s.pair, s.twist, cfg_.floors.A);
  s.certified = s.claction.pass;
  if (s.certified) s.l_certified = l_invariant(s.pair.scaled(s.scale), s.twist);

  s.tube_volume_unscaled = tube_volume(s.pair, cfg_.n).value;
  const double V0 = cfg_.tube_volume_scale * (s.tube_volume_unscaled - base_tube_volume_);
  s.compensator = compensator_solve(V0, cfg_.compensator, cfg_.floors.B);
  s.reservoir_volume = reservoir_;
  s.total_volume = total_volume(s);
  return s;
}

double FamilyModel::total_volume(const FormSpec& spec, double C) const {
  const double c = spec.scale * C;
  const double tube = cfg_.tube_volume_scale * tube_volume(spec.pair.scaled(c), cfg_.n).value;
  const double k1 = compensator_volume(spec.compensator.geometry, spec.compensator.amplitude, c);
  return tube + k1 + std::pow(c, cfg_.n) * spec.reservoir_volume;
}

ScalingReport scaling_check(const FamilyModel& model, const FormSpec& spec, double C, double tol) {
  if (!(C > 0.0)) throw PreconditionFailed("scaling factor C must be positive");
  ScalingReport r;
  r.factor = C;
  r.n = spec.n;
  r.volume_ratio = model.total_volume(spec, C) / model.total_volume(spec, 1.0);
  r.volume_expected = std::pow(C, spec.n);
  r.volume_rel_error = std::abs(r.volume_ratio - r.volume_expected) / r.volume_expected;
  const ProfilePair base = spec.pair.scaled(spec.scale);
  r.tube_ratio = tube_volume(base.scaled(C), spec.n).value / tube_volume(base, spec.n).value;
  const double l0 = l_invariant(base, spec.twist);
  const double l1 = l_invariant(base.scaled(C), spec.twist);
  r.l_ratio = l1 / l0;
  r.l_rel_error = std::abs(r.l_ratio - C) / C;
  r.pass = r.volume_rel_error <= tol && r.l_rel_error <= tol &&
           std::abs(r.tube_ratio - r.volume_expected) / r.volume_expected <= tol;
  return r;
}

double systolic_ratio(const FormSpec& spec) {
  if (!spec.certified) {
    throw PreconditionFailed("systolic_ratio: the l-invariant of this spec is not certified");
  }
  return std::pow(spec.l, spec.n) / spec.k;
}

}  // namespace lutzlab
