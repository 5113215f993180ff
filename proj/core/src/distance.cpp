#include "lutzlab/distance.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "lutzlab/parallel.hpp"

namespace lutzlab {

BoundCertificate lower_bound(const FormSpec& s1, const FormSpec& s2) {
  if (!s1.certified || !s2.certified) {
    throw PreconditionFailed("lower_bound: both specs need a certified l-invariant");
  }
  if (s1.n != s2.n) throw PreconditionFailed("lower_bound: specs have different dimensions");
  const double vol = std::abs(std::log(s1.total_volume / s2.total_volume)) / s1.n;
  const double lch = std::abs(std::log(s1.l_certified / s2.l_certified));
  BoundCertificate c;
  c.lower = std::max(vol, lch);
  if (std::abs(vol - lch) <= 1e-12 * std::max(1.0, c.lower)) {
    c.lower_method = "max";
  } else {
    c.lower_method = vol > lch ? "volume" : "l_invariant";
  }
  c.witnesses = {{"volume_ratio", s1.total_volume / s2.total_volume},
                 {"l_ratio", s1.l_certified / s2.l_certified},
                 {"volume_channel", vol},
                 {"l_channel", lch}};
  return c;
}

namespace {

void check_sample(const ConformalSample& f) {
  if (f.samples.empty()) throw PreconditionFailed("conformal sample is empty");
  for (double v : f.samples) {
    if (!(v > 0.0)) throw PreconditionFailed("conformal factor samples must be positive");
  }
}

}  // namespace

double ub_conformal(const ConformalSample& f) {
  check_sample(f);
  const auto [lo, hi] = std::minmax_element(f.samples.begin(), f.samples.end());
  return std::max(std::log(*hi), -std::log(*lo));
}

double d_cf(const ConformalSample& f) {
  check_sample(f);
  double m = 0.0;
  for (double v : f.samples) m = std::max(m, std::abs(std::log(v)));
  return m;
}

ConformalSample ellipsoid_conformal_factor(double a, double b, int grid) {
  if (!(a > 0.0) || !(b > 0.0)) throw PreconditionFailed("ellipsoid areas must be positive");
  if (grid < 2) throw PreconditionFailed("ellipsoid grid needs at least 2 points");
  ConformalSample s;
  s.samples.resize(grid);
  for (int i = 0; i < grid; ++i) {
    const double rho1 = 0.5 * i / (grid - 1);
    const double rho2 = 0.5 - rho1;
    s.samples[i] = 1.0 / (kTwoPi * (rho1 / a + rho2 / b));
  }
  s.grid = "rho1 uniform on [0, 0.5], " + std::to_string(grid) + " points";
  return s;
}

ConformalSample ellipsoid_ratio_sample(double a1, double a2, double ball, int grid) {
  ConformalSample e = ellipsoid_conformal_factor(a1, a2, grid);
  const ConformalSample b = ellipsoid_conformal_factor(ball, ball, grid);
  for (int i = 0; i < grid; ++i) e.samples[i] /= b.samples[i];
  return e;
}

FoldingBounds folding_bounds(double a1, double a2, double ball, double delta) {
  if (!(a1 > 0.0) || !(ball > 0.0)) throw PreconditionFailed("areas must be positive");
  if (!(a2 > 2.0 * a1)) throw PreconditionFailed("folding needs a2 > 2 a1");
  if (!(delta > 0.0 && delta < 0.5 * a2 - a1)) {
    throw PreconditionFailed("folding needs delta in (0, a2/2 - a1)");
  }
  FoldingBounds f;
  f.inclusion = ub_conformal(ellipsoid_ratio_sample(a1, a2, ball));
  f.folding = std::log(a2 / ball - delta);
  return f;
}

GraySample gray_sup(const GrayPathSpec& path, double u) {
  if (!path.family) throw PreconditionFailed("gray path has no family");
  const TwistFamily& fam = *path.family;
  const double eta = path.fd_rel_step * u;
  const ProfilePair p = fam.member(u);
  const ProfilePair pp = fam.member(u + eta);
  const ProfilePair pm = fam.member(u - eta);
  auto integrand = [&](double r) {
    const Jet h1 = p.h1.jet(r);
    const Jet h2 = p.h2.jet(r);
    const double d = h1.v * h2.d1 - h1.d1 * h2.v;
    if (std::abs(d) < 1e-12) {
      throw SingularLocus("D_u vanishes at r = " + std::to_string(r) + ", u = " + std::to_string(u));
    }
    const double dh2 = (pp.h2.value(r) - pm.h2.value(r)) / (2.0 * eta);
    return std::abs(dh2 * h1.d1 / d);
  };

  std::vector<double> rs;
  rs.reserve(path.r_grid + path.window_points);
  for (int i = 1; i < path.r_grid; ++i) rs.push_back(p.epsilon * i / path.r_grid);
  if (p.window) {
    for (int i = 0; i < path.window_points; ++i)
      rs.push_back(p.window->lo() + (p.window->hi() - p.window->lo()) * i / (path.window_points - 1));
  }
  std::sort(rs.begin(), rs.end());
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());

  std::size_t best = 0;
  double best_v = -1.0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const double v = integrand(rs[i]);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  const double lo = rs[best == 0 ? 0 : best - 1];
  const double hi = rs[best + 1 < rs.size() ? best + 1 : best];
  GraySample s{u, rs[best], best_v};
  if (hi > lo) {
    const Extremum e = golden_section_max(integrand, lo, hi, 1e-12);
    if (e.value > s.sup) {
      s.sup = e.value;
      s.r_argmax = e.x;
    }
  }
  return s;
}

GrayResult gray_integral(const GrayPathSpec& path) {
  GrayResult out;
  double a = path.u_start, b = path.u_end;
  if (a == b) return out;
  if (a > b) std::swap(a, b);
  if (!(a > 0.0)) throw PreconditionFailed("gray path amplitudes must be positive");
  std::vector<GraySample> samples;
  auto f = [&](double u) {
    GraySample s = gray_sup(path, u);
    samples.push_back(s);
    return s.sup;
  };
  out.value = adaptive_simpson(f, a, b, path.tol);
  std::sort(samples.begin(), samples.end(),
            [](const GraySample& x, const GraySample& y) { return x.u < y.u; });
  out.samples = std::move(samples);
  return out;
}

double d_inf(const FormSpec& s1, const FormSpec& s2) {
  return std::max(std::abs(s1.a - s2.a), std::abs(s1.b - s2.b));
}

BoundCertificate triangle_ub(const FamilyModel& model, const FormSpec& s1, const FormSpec& s2,
                             const TriangleOptions& opt) {
  if (!s1.certified || !s2.certified) {
    throw PreconditionFailed("triangle_ub: both specs need a certified l-invariant");
  }
  BoundCertificate c;
  c.lower = 0.0;
  c.upper_method = "triangle";
  // Scale s1 to the volume of s2; the l-invariant scales along, so the
  // intermediate point keeps the twist amplitude of s1.
  const double b_mid = s1.b + (s2.a - s1.a);
  if (!(b_mid < model.epsilon())) {
    throw DomainViolation("triangle_ub: intermediate point leaves the parameter domain");
  }
  const double scaling_leg = std::abs(s2.a - s1.a);
  GrayPathSpec g;
  g.family = model.family_ptr();
  g.u_start = s1.u;
  g.u_end = s2.u;
  g.r_grid = opt.r_grid;
  g.tol = opt.tol;
  const double gray_leg = gray_integral(g).value;
  c.upper = scaling_leg + gray_leg;
  c.witnesses = {{"scaling_leg", scaling_leg}, {"gray_leg", gray_leg}, {"b_mid", b_mid}};
  return c;
}

BoundCertificate certificate(const FamilyModel& model, const FormSpec& s1, const FormSpec& s2,
                             const TriangleOptions& opt) {
  BoundCertificate lo = lower_bound(s1, s2);
  const BoundCertificate up = triangle_ub(model, s1, s2, opt);
  lo.upper = up.upper;
  lo.upper_method = up.upper_method;
  lo.witnesses.insert(lo.witnesses.end(), up.witnesses.begin(), up.witnesses.end());
  return lo;
}

SweepReport bilipschitz_sweep(const FamilyModel& model,
                              const std::vector<std::pair<double, double>>& points,
                              const SweepTolerances& tol, std::size_t threads,
                              const TriangleOptions& opt) {
  std::vector<FormSpec> specs(points.size());
  parallel_for(
      points.size(), [&](std::size_t i) { specs[i] = model.embed_point(points[i].first, points[i].second); },
      threads);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) pairs.emplace_back(i, j);

  SweepReport rep;
  rep.rows.resize(pairs.size());
  parallel_for(
      pairs.size(),
      [&](std::size_t idx) {
        const auto [i, j] = pairs[idx];
        SweepRow row;
        row.i = i;
        row.j = j;
        row.a1 = specs[i].a;
        row.b1 = specs[i].b;
        row.a2 = specs[j].a;
        row.b2 = specs[j].b;
        row.dinf = d_inf(specs[i], specs[j]);
        try {
          const BoundCertificate c = certificate(model, specs[i], specs[j], opt);
          row.lower = c.lower;
          row.upper = c.upper;
          const double s1 = row.lower - row.dinf + tol.lower_tol;
          const double s2 = row.upper - row.lower + tol.lower_tol;
          const double s3 = 2.0 * row.dinf + tol.upper_tol - row.upper;
          row.slack = std::min({s1, s2, s3});
          row.pass = row.slack >= 0.0;
          if (s1 < 0.0) row.failure = "lower below d_inf";
          else if (s2 < 0.0) row.failure = "upper below lower";
          else if (s3 < 0.0) row.failure = "upper above 2 d_inf";
        } catch (const Error& e) {
          row.pass = false;
          row.slack = -std::numeric_limits<double>::infinity();
          row.failure = std::string(e.kind()) + ": " + e.what();
        }
        rep.rows[idx] = row;
      },
      threads);

  for (const SweepRow& r : rep.rows) {
    rep.worst_slack = std::min(rep.worst_slack, r.slack);
    if (!r.pass) {
      rep.all_pass = false;
      ++rep.failures;
    }
  }
  return rep;
}

}  // namespace lutzlab
