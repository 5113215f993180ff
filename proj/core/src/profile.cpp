#include "lutzlab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace lutzlab {

namespace {

Jet eval_poly(const PolySegment& p, double r) {
  double v = 0.0, d1 = 0.0, d2 = 0.0;
  for (std::size_t i = p.c.size(); i-- > 0;) {
    d2 = d2 * r + 2.0 * d1;
    d1 = d1 * r + v;
    v = v * r + p.c[i];
  }
  return {v, d1, d2};
}

Jet eval_trig(const TrigSegment& t, double r) {
  const double w = kTwoPi;
  const double s = std::sin(w * r), c = std::cos(w * r);
  const double a = t.amplitude;
  if (t.sine) return {a * s, a * w * c, -a * w * w * s};
  return {a * c, -a * w * s, -a * w * w * c};
}

Jet eval_table(const TableSegment& t, double r) {
  const std::size_t n = t.f.size();
  const double h = (t.r1 - t.r0) / static_cast<double>(n - 1);
  double x = (r - t.r0) / h;
  std::size_t j = x <= 0.0 ? 0 : static_cast<std::size_t>(x);
  if (j > n - 2) j = n - 2;
  const double u = x - static_cast<double>(j);
  const double f0 = t.f[j], f1 = t.f[j + 1];
  const double m0 = t.df[j] * h, m1 = t.df[j + 1] * h;
  const double u2 = u * u, u3 = u2 * u;
  const double v = (2 * u3 - 3 * u2 + 1) * f0 + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * f1 +
                   (u3 - u2) * m1;
  const double dv = (6 * u2 - 6 * u) * f0 + (3 * u2 - 4 * u + 1) * m0 + (-6 * u2 + 6 * u) * f1 +
                    (3 * u2 - 2 * u) * m1;
  const double ddv =
      (12 * u - 6) * f0 + (6 * u - 4) * m0 + (-12 * u + 6) * f1 + (6 * u - 2) * m1;
  return {t.scale * v, t.scale * dv / h, t.scale * ddv / (h * h)};
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

Jet eval_segment(const Segment& s, double r) {
  return std::visit(
      [r](const auto& seg) -> Jet {
        using T = std::decay_t<decltype(seg)>;
        if constexpr (std::is_same_v<T, PolySegment>) return eval_poly(seg, r);
        if constexpr (std::is_same_v<T, TrigSegment>) return eval_trig(seg, r);
        if constexpr (std::is_same_v<T, TableSegment>) return eval_table(seg, r);
        if constexpr (std::is_same_v<T, AnalyticSegment>) return seg.fn(r);
      },
      s);
}

const char* segment_kind(const Segment& s) {
  switch (s.index()) {
    case 0: return "polynomial";
    case 1: return "trigonometric";
    case 2: return "mollified-table";
    default: return "analytic";
  }
}

PiecewiseProfile::PiecewiseProfile(std::vector<double> breakpoints, std::vector<Segment> segments)
    : bp_(std::move(breakpoints)), seg_(std::move(segments)) {
  if (bp_.size() != seg_.size() + 1 || seg_.empty()) {
    throw InvalidGeometry("profile: need one more breakpoint than segments");
  }
  for (std::size_t i = 1; i < bp_.size(); ++i) {
    if (!(bp_[i] > bp_[i - 1])) throw InvalidGeometry("profile: breakpoints must increase strictly");
  }
  for (const auto& s : seg_) {
    if (const auto* t = std::get_if<TableSegment>(&s); t && t->f.size() < 2) {
      throw InvalidGeometry("profile: table segment needs at least two samples");
    }
  }
}

std::size_t PiecewiseProfile::segment_index(double r) const {
  auto it = std::upper_bound(bp_.begin(), bp_.end(), r);
  std::size_t i = it == bp_.begin() ? 0 : static_cast<std::size_t>(it - bp_.begin()) - 1;
  return std::min(i, seg_.size() - 1);
}

Jet PiecewiseProfile::jet(double r) const {
  return scale_ * eval_segment(seg_[segment_index(r)], r);
}

PiecewiseProfile PiecewiseProfile::scaled(double c) const {
  PiecewiseProfile out = *this;
  out.scale_ *= c;
  return out;
}

PiecewiseProfile PiecewiseProfile::spliced(double a, double b, Segment seg) const {
  if (!(b > a) || a < bp_.front() || b > bp_.back()) {
    throw InvalidGeometry("profile: splice interval outside the profile domain");
  }
  // Bring the new segment into this profile's unscaled units.
  if (scale_ != 1.0) {
    const double inv = 1.0 / scale_;
    std::visit(
        [inv](auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, PolySegment>) {
            for (double& c : s.c) c *= inv;
          } else if constexpr (std::is_same_v<T, TrigSegment>) {
            s.amplitude *= inv;
          } else if constexpr (std::is_same_v<T, TableSegment>) {
            s.scale *= inv;
          } else {
            auto fn = s.fn;
            s.fn = [fn, inv](double r) { return inv * fn(r); };
          }
        },
        seg);
  }
  std::vector<double> nbp;
  std::vector<Segment> nseg;
  for (std::size_t i = 0; i < seg_.size(); ++i) {
    const double lo = bp_[i], hi = bp_[i + 1];
    if (lo < a) {
      if (nbp.empty()) nbp.push_back(lo);
      nbp.push_back(std::min(hi, a));
      nseg.push_back(seg_[i]);
    }
  }
  if (nbp.empty()) nbp.push_back(a);
  nseg.push_back(seg);
  nbp.push_back(b);
  for (std::size_t i = 0; i < seg_.size(); ++i) {
    if (bp_[i + 1] > b) {
      nbp.push_back(bp_[i + 1]);
      nseg.push_back(seg_[i]);
    }
  }
  PiecewiseProfile out(std::move(nbp), std::move(nseg));
  out.scale_ = scale_;
  return out;
}

double PiecewiseProfile::max_jump() const {
  double worst = 0.0;
  for (std::size_t i = 1; i < seg_.size(); ++i) {
    const double left = eval_segment(seg_[i - 1], bp_[i]).v;
    const double right = eval_segment(seg_[i], bp_[i]).v;
    worst = std::max(worst, std::abs(scale_ * (left - right)));
  }
  return worst;
}

SmoothingWindow SmoothingWindow::standard(double center, double half_width) {
  SmoothingWindow w;
  w.center = center;
  w.half_width = half_width;
  w.sigma = half_width / 5.0;
  w.aux_sigma = half_width / 10.0;
  w.aux_half_support = half_width / 7.0;
  w.inner_half = 6.0 * half_width / 7.0;
  return w;
}

ProfilePair ProfilePair::scaled(double c) const {
  ProfilePair out = *this;
  out.h1 = h1.scaled(c);
  out.h2 = h2.scaled(c);
  return out;
}

void validate(const TwistParams& p) {
  if (!close(p.epsilon, 1.0, 1e-12)) {
    throw InvalidGeometry("epsilon: the radial coordinate is normalised so that epsilon = 1");
  }
  if (!(p.epsilon0 > 0.0 && p.epsilon0 < 0.25)) {
    throw InvalidGeometry("epsilon0: must lie in (0, 1/4)");
  }
  if (!(p.delta0 > 0.0 && p.delta0 < 0.25 * p.epsilon0)) {
    throw InvalidGeometry("delta0: must lie in (0, epsilon0/4)");
  }
  if (!(p.delta >= 0.0 && p.delta < 1.0)) throw InvalidGeometry("delta: must lie in [0, 1)");
  if (!(p.mu_minus < p.mu_plus)) throw InvalidGeometry("mu_minus: must be below mu_plus");
  if (!(1.0 + p.delta * p.mu_minus > 0.0)) {
    throw InvalidGeometry("mu_minus: 1 + delta*mu_minus must be positive");
  }
  if (!(p.u > 0.0)) throw InvalidGeometry("u: amplitude must be positive");
  if (!(1.0 + p.delta2 > 0.0)) throw InvalidGeometry("delta2: 1 + delta2 must be positive");
  const auto& e = p.extension;
  if (!(e.intercept_factor > 1.0)) {
    throw InvalidGeometry("extension.intercept_factor: must exceed 1");
  }
  if (!(0.5 < e.blend_end && e.blend_end < 0.75 && 0.75 < e.ellipse_end &&
        e.ellipse_end < e.polar_end && e.polar_end < 1.0)) {
    throw InvalidGeometry(
        "extension: need 1/2 < blend_end < 3/4 < ellipse_end < polar_end < 1");
  }
  if (e.u_max < 0.0) throw InvalidGeometry("extension.u_max: must be non-negative");
}

ContinuityParams solve_continuity_params(double epsilon0, double u, double delta, double mu_minus) {
  if (!(epsilon0 > 0.0 && epsilon0 < 0.25)) {
    throw InvalidGeometry("epsilon0: must lie in (0, 1/4)");
  }
  if (!(u > 0.0)) throw InvalidGeometry("u: amplitude must be positive");
  const double m = 1.0 + delta * mu_minus;
  if (!(m > 0.0)) throw InvalidGeometry("mu_minus: 1 + delta*mu_minus must be positive");
  const double c = std::cos(kTwoPi * epsilon0);
  const double s = std::sin(kTwoPi * epsilon0);
  ContinuityParams out;
  out.delta1 = 1.0 / c - 1.0;
  const double one_plus = kTwoPi * m * epsilon0 * epsilon0 / (u * s);
  if (!(one_plus > 0.0)) throw InvalidGeometry("delta2: continuity forces 1 + delta2 <= 0");
  out.delta2 = one_plus - 1.0;
  out.residual1 = (1.0 + out.delta1) * c - 1.0;
  out.residual2 = epsilon0 * epsilon0 - (1.0 + out.delta2) * u * s / (kTwoPi * m);
  out.delta2_warning = !(out.delta2 > -0.5 && out.delta2 < 0.5);
  return out;
}

TwistParams with_solved_continuity(TwistParams p) {
  const auto c = solve_continuity_params(p.epsilon0, p.u, p.delta, p.mu_minus);
  p.delta1 = c.delta1;
  p.delta2 = c.delta2;
  return p;
}

double arc_amplitude(const TwistParams& p, double u) {
  return (1.0 + p.delta2) * u / (kTwoPi * (1.0 + p.delta * p.mu_minus));
}

double second_intercept(const TwistParams& p) {
  return p.extension.intercept_factor * arc_amplitude(p, std::max(p.extension.u_max, p.u));
}

namespace {

void require_solved(const TwistParams& p) {
  const double c = std::cos(kTwoPi * p.epsilon0);
  const double s = std::sin(kTwoPi * p.epsilon0);
  const double r1 = (1.0 + p.delta1) * c - 1.0;
  const double r2 = p.epsilon0 * p.epsilon0 -
                    (1.0 + p.delta2) * p.u * s / (kTwoPi * (1.0 + p.delta * p.mu_minus));
  if (std::abs(r1) > 1e-10) throw InvalidGeometry("delta1: continuity at epsilon0 is not solved");
  if (std::abs(r2) > 1e-10) throw InvalidGeometry("delta2: continuity at epsilon0 is not solved");
}

// The second ellipse (a cos 2 pi r, Y sin 2 pi r) turned into (1, r^2) in polar
// coordinates. The target angle is unwrapped by one full turn, so the blended
// angle keeps increasing and D = R^2 Theta' stays positive.
std::pair<Jet, Jet> polar_blend(double a, double Y, double r0, double r1, double r) {
  const Jet x = Jet::variable(r);
  const Jet ex = a * cos(kTwoPi * x);
  const Jet ey = Y * sin(kTwoPi * x);
  const Jet theta_e = atan2(ey, ex) + kTwoPi;
  const Jet theta_t = atan(x * x) + kTwoPi;
  const Jet rad_e = sqrt(ex * ex + ey * ey);
  const Jet rad_t = sqrt(1.0 + x * x * x * x);
  const Jet s = smoothstep5((x - r0) / (r1 - r0));
  const Jet theta = theta_e + s * (theta_t - theta_e);
  const Jet rad = rad_e + s * (rad_t - rad_e);
  return {rad * cos(theta), rad * sin(theta)};
}

}  // namespace

ProfilePair build_family_path(const TwistParams& p, double u) {
  validate(p);
  require_solved(p);
  if (!(u > 0.0)) throw InvalidGeometry("u: amplitude must be positive");
  const auto& e = p.extension;
  const double eps0 = p.epsilon0;
  const double a = 1.0 + p.delta1;
  const double c = arc_amplitude(p, u);
  const double Y = second_intercept(p);
  if (!(Y > c)) {
    throw InvalidGeometry("extension: |h2(r+')| must exceed |h2(r+)|; raise extension.u_max");
  }

  ProfilePair pair;
  pair.epsilon = 1.0;

  const double r0 = e.ellipse_end, r1 = e.polar_end;
  AnalyticSegment polar_h1{[a, Y, r0, r1](double r) { return polar_blend(a, Y, r0, r1, r).first; },
                           "polar-blend-h1"};
  AnalyticSegment polar_h2{[a, Y, r0, r1](double r) { return polar_blend(a, Y, r0, r1, r).second; },
                           "polar-blend-h2"};

  pair.h1 = PiecewiseProfile({0.0, eps0, r0, r1, 1.0},
                             {PolySegment{{1.0}}, TrigSegment{a, false}, polar_h1,
                              PolySegment{{1.0}}});

  const double bend = e.blend_end;
  AnalyticSegment amp_blend{[c, Y, bend](double r) {
                              const Jet x = Jet::variable(r);
                              const Jet s = smoothstep5((x - 0.5) / (bend - 0.5));
                              return (c + (Y - c) * s) * sin(kTwoPi * x);
                            },
                            "amplitude-blend"};

  std::vector<double> bp;
  std::vector<Segment> segs;
  const double rho = u / p.u;
  if (rho == 1.0) {
    bp = {0.0, eps0};
    segs = {PolySegment{{0.0, 0.0, 1.0}}};
  } else {
    // h2 = r^2 w(r) with log w blended in log r from 0 to log rho. Contact
    // needs d log w / d log r > -2, which the width of the blend guarantees.
    const double ra = eps0 * 1e-3, rb = 0.5 * eps0;
    const double lr = std::log(rho);
    const double span = std::log(rb / ra);
    if (std::abs(lr) * 1.875 / span >= 1.5) {
      throw InvalidGeometry("u: amplitude too far from the reference for the cap rescaling");
    }
    AnalyticSegment cap_blend{[ra, span, lr](double r) {
                                const Jet x = Jet::variable(r);
                                const Jet s = smoothstep5((log(x) - std::log(ra)) / span);
                                return x * x * exp(lr * s);
                              },
                              "cap-rescale"};
    bp = {0.0, ra, rb, eps0};
    segs = {PolySegment{{0.0, 0.0, 1.0}}, cap_blend, PolySegment{{0.0, 0.0, rho}}};
  }
  bp.insert(bp.end(), {0.5, bend, r0, r1, 1.0});
  segs.insert(segs.end(), {TrigSegment{c, true}, amp_blend, TrigSegment{Y, true}, polar_h2,
                           PolySegment{{0.0, 0.0, 1.0}}});
  pair.h2 = PiecewiseProfile(std::move(bp), std::move(segs));
  return pair;
}

ProfilePair build_paper_path(const TwistParams& p) { return build_family_path(p, p.u); }

ProfilePair standard_cap(double epsilon) {
  ProfilePair pair;
  pair.epsilon = epsilon;
  pair.h1 = PiecewiseProfile({0.0, epsilon}, {PolySegment{{1.0}}});
  pair.h2 = PiecewiseProfile({0.0, epsilon}, {PolySegment{{0.0, 0.0, 1.0}}});
  return pair;
}

double wronskian(const ProfilePair& pair, double r) {
  const Jet a = pair.h1.jet(r);
  const Jet b = pair.h2.jet(r);
  return a.v * b.d1 - a.d1 * b.v;
}

ContactReport check_contact_condition(const ProfilePair& pair, int grid_size) {
  if (grid_size < 1000) throw PreconditionFailed("grid_size: must be at least 1000");
  ContactReport rep;
  rep.grid = grid_size;
  rep.min_abs_d_over_r = std::numeric_limits<double>::infinity();
  bool pos = false, neg = false;
  for (int i = 1; i <= grid_size; ++i) {
    const double r = pair.epsilon * static_cast<double>(i) / grid_size;
    const double q = wronskian(pair, r) / r;
    if (q > 0) pos = true;
    if (q < 0) neg = true;
    if (std::abs(q) < rep.min_abs_d_over_r) {
      rep.min_abs_d_over_r = std::abs(q);
      rep.r_at_min = r;
    }
  }
  rep.sign = (pos && !neg) ? 1 : ((neg && !pos) ? -1 : 0);
  rep.pass = rep.sign != 0 && rep.min_abs_d_over_r > 1e-8;
  return rep;
}

TableSegment mollify_table(const PiecewiseProfile& f, const SmoothingWindow& w) {
  const TruncatedGaussian kernel(0.0, w.sigma, -w.half_width, w.half_width);
  const TruncatedGaussian aux(0.0, w.aux_sigma, -w.aux_half_support, w.aux_half_support);
  const int n = w.samples;
  TableSegment t;
  t.r0 = w.lo();
  t.r1 = w.hi();
  t.f.resize(n);
  t.df.resize(n);
  const auto& bp = f.breakpoints();
  const double scale = f.scale();

  for (int i = 0; i < n; ++i) {
    const double r = (i == n - 1) ? t.r1 : t.r0 + (t.r1 - t.r0) * i / (n - 1);
    // Cut the kernel support where r - s crosses a breakpoint of f.
    std::vector<double> cuts{-w.half_width};
    for (double b : bp) {
      const double s = r - b;
      if (s > -w.half_width && s < w.half_width) cuts.push_back(s);
    }
    cuts.push_back(w.half_width);
    std::sort(cuts.begin(), cuts.end());
    // The kernel has unit mass, so Gf(r) - f(r) is the integral of
    // k(s) (f(r - s) - f(r)). That difference is O(half_width) and keeps its
    // relative accuracy on narrow windows, where the table spacing is tiny.
    const Jet fr = f.jet(r);
    const double f0 = fr.v / scale, d0 = fr.d1 / scale;
    double diff = 0.0, ddiff = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double sa = cuts[k], sb = cuts[k + 1];
      if (!(sb > sa)) continue;
      const Segment& seg = f.segments()[f.segment_index(r - 0.5 * (sa + sb))];
      // Value differences get a tolerance per unit length, derivatives the
      // window's share of quad_tol; the derivative integrand is O(1/sigma).
      const double tol = w.quad_tol * (sb - sa);
      const double dtol = w.quad_tol * (sb - sa) / (2.0 * w.half_width);
      try {
        diff += adaptive_simpson(
            [&](double s) { return kernel.pdf(s) * (eval_segment(seg, r - s).v - f0); }, sa, sb,
            tol);
        ddiff += adaptive_simpson(
            [&](double s) { return kernel.pdf(s) * (eval_segment(seg, r - s).d1 - d0); }, sa, sb,
            dtol);
      } catch (const QuadratureFailure& e) {
        throw QuadratureFailure("mollifier convolution at r = " + std::to_string(r) + ": " +
                                e.what());
      }
    }
    diff *= scale;
    ddiff *= scale;
    const double hi = r - (w.center - w.inner_half);
    const double lo = r - (w.center + w.inner_half);
    const double m = aux.cdf(hi) - aux.cdf(lo);
    const double dm = aux.pdf(hi) - aux.pdf(lo);
    t.f[i] = fr.v + m * diff;
    t.df[i] = fr.d1 + m * ddiff + dm * diff;
  }
  return t;
}

ProfilePair mollify(const ProfilePair& pair, const SmoothingWindow& w) {
  if (!(w.lo() > 0.0 && w.hi() < 0.5 * pair.epsilon)) {
    throw PreconditionFailed("window: must lie inside (0, epsilon/2)");
  }
  for (const auto* prof : {&pair.h1, &pair.h2}) {
    const double l = prof->jet(w.center - 1e-13).v;
    const double r = prof->jet(w.center + 1e-13).v;
    if (std::abs(l - r) > 1e-10) {
      throw PreconditionFailed("pair: profiles must be continuous at the window centre");
    }
  }
  ProfilePair out = pair;
  out.h1 = pair.h1.spliced(w.lo(), w.hi(), mollify_table(pair.h1, w));
  out.h2 = pair.h2.spliced(w.lo(), w.hi(), mollify_table(pair.h2, w));
  out.window = w;
  return out;
}

SmoothingBound verify_smoothing_bound(const ProfilePair& pair, double u, int grid) {
  if (!pair.window) throw PreconditionFailed("pair_smoothed: pair carries no smoothing window");
  if (!(u > 0.0)) throw PreconditionFailed("u: amplitude must be positive");
  const auto& w = *pair.window;
  SmoothingBound out;
  out.bound = 1.0 / u;
  for (int i = 0; i < grid; ++i) {
    const double r = w.lo() + (w.hi() - w.lo()) * i / (grid - 1);
    const double ratio = std::abs(pair.h1.d1(r) / wronskian(pair, r));
    if (ratio > out.max_ratio) {
      out.max_ratio = ratio;
      out.r_at_max = r;
    }
  }
  out.pass = out.max_ratio <= out.bound;
  return out;
}

double unwrapped_angle(const ProfilePair& pair, int grid) {
  double total = 0.0;
  double px = pair.h1.value(0.0), py = pair.h2.value(0.0);
  for (int i = 1; i <= grid; ++i) {
    const double r = pair.epsilon * static_cast<double>(i) / grid;
    const double x = pair.h1.value(r), y = pair.h2.value(r);
    total += std::atan2(px * y - py * x, px * x + py * y);
    px = x;
    py = y;
  }
  return total;
}

int winding_number(const ProfilePair& pair, int grid) {
  return static_cast<int>(std::lround(unwrapped_angle(pair, grid) / kTwoPi));
}

std::vector<std::array<double, 6>> sample_pair(const ProfilePair& pair, int n) {
  std::vector<std::array<double, 6>> rows;
  rows.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double r = pair.epsilon * static_cast<double>(i) / (n - 1);
    const Jet a = pair.h1.jet(r), b = pair.h2.jet(r);
    rows.push_back({r, a.v, b.v, a.d1, b.d1, a.v * b.d1 - a.d1 * b.v});
  }
  return rows;
}

TwistFamily::TwistFamily(TwistParams reference, bool smoothed)
    : ref_(std::move(reference)), smoothed_(smoothed) {
  validate(ref_);
  require_solved(ref_);
  if (smoothed_) {
    const ProfilePair base = build_paper_path(ref_);
    const auto w = SmoothingWindow::standard(ref_.epsilon0, ref_.delta0);
    h1_table_ = mollify_table(base.h1, w);
    h2_table_ = mollify_table(base.h2, w);
  }
}

ProfilePair TwistFamily::member(double u) const {
  ProfilePair pair = build_family_path(ref_, u);
  if (!smoothed_) return pair;
  const auto w = SmoothingWindow::standard(ref_.epsilon0, ref_.delta0);
  TableSegment t2 = h2_table_;
  t2.scale *= u / ref_.u;
  pair.h1 = pair.h1.spliced(w.lo(), w.hi(), h1_table_);
  pair.h2 = pair.h2.spliced(w.lo(), w.hi(), std::move(t2));
  pair.window = w;
  return pair;
}

double TwistFamily::amplitude_for(double l_tube) const {
  // l = 2 pi h2(1/4) (1 + delta mu_-) and h2(1/4) is the arc amplitude.
  return l_tube / (kTwoPi * arc_amplitude(ref_, 1.0) * (1.0 + ref_.delta * ref_.mu_minus));
}

double TwistFamily::max_amplitude() const { return std::max(ref_.extension.u_max, ref_.u); }

}  // namespace lutzlab
