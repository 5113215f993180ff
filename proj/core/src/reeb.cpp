#include "lutzlab/reeb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lutzlab {

namespace {

struct PairJets {
  Jet h1;
  Jet h2;
  double d;
};

PairJets pair_jets(const ProfilePair& pair, double r) {
  const Jet a = pair.h1.jet(r);
  const Jet b = pair.h2.jet(r);
  return {a, b, a.v * b.d1 - a.d1 * b.v};
}

double det2(const Mat2& m) { return m[0] * m[3] - m[1] * m[2]; }

Mat2 mul(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
          a[2] * b[1] + a[3] * b[3]};
}

Mat2 rotation(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c, -s, s, c};
}

// Conley-Zehnder index of a path with nondegenerate endpoint, read off from
// the interval of rotation numbers of Psi(t) v over directions v: an integer k
// inside the interval gives 2k, otherwise the interval sits in (k, k+1) and
// the index is 2k + 1.
int cz_nondegenerate(const std::vector<Mat2>& path) {
  std::vector<double> dirs;
  constexpr int kDirections = 96;
  for (int i = 0; i < kDirections; ++i) dirs.push_back(kPi * i / kDirections);
  // Real eigenvectors of the endpoint fix the extreme rotation numbers.
  const Mat2& e = path.back();
  const double tr = e[0] + e[3];
  const double disc = tr * tr / 4.0 - det2(e);
  if (disc >= 0.0) {
    for (double sgn : {-1.0, 1.0}) {
      const double lam = tr / 2.0 + sgn * std::sqrt(disc);
      const double vx = std::abs(e[1]) > std::abs(e[2]) ? e[1] : lam - e[3];
      const double vy = std::abs(e[1]) > std::abs(e[2]) ? lam - e[0] : e[2];
      if (vx != 0.0 || vy != 0.0) dirs.push_back(std::atan2(vy, vx));
    }
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double a : dirs) {
    const double vx = std::cos(a), vy = std::sin(a);
    double px = vx, py = vy, total = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) {
      const Mat2& m = path[i];
      const double qx = m[0] * vx + m[1] * vy;
      const double qy = m[2] * vx + m[3] * vy;
      total += std::atan2(px * qy - py * qx, px * qx + py * qy);
      px = qx;
      py = qy;
    }
    const double w = total / kTwoPi;
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  const double k = std::ceil(lo);
  if (k <= hi) return 2 * static_cast<int>(k);
  return 2 * static_cast<int>(std::floor(lo)) + 1;
}

void check_symplectic(const std::vector<Mat2>& path) {
  if (path.size() < 2) throw PreconditionFailed("cz_sp2_path needs at least two samples");
  const Mat2& s = path.front();
  if (std::abs(s[0] - 1.0) > 1e-9 || std::abs(s[1]) > 1e-9 || std::abs(s[2]) > 1e-9 ||
      std::abs(s[3] - 1.0) > 1e-9) {
    throw PreconditionFailed("cz_sp2_path: path must start at the identity");
  }
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (std::abs(det2(path[i]) - 1.0) > 1e-9) {
      throw NotSymplectic("sample " + std::to_string(i) + " has determinant " +
                          std::to_string(det2(path[i])));
    }
  }
}

constexpr double kRotationNudge = 1e-6;

}  // namespace

ReebRates reeb_field(const ProfilePair& pair, double r) {
  const PairJets j = pair_jets(pair, r);
  if (std::abs(j.d) < 1e-12) {
    throw SingularLocus("Wronskian vanishes at r = " + std::to_string(r));
  }
  return {j.h2.d1 / j.d, -j.h1.d1 / j.d};
}

std::vector<TorusOrbitFamily> resonance_scan(const ProfilePair& pair, int pq_max, int grid) {
  if (pq_max < 1) throw PreconditionFailed("resonance_scan needs pq_max >= 1");
  if (grid < 16) throw PreconditionFailed("resonance_scan needs grid >= 16");
  const double eps = pair.epsilon;
  std::vector<double> rs(grid - 1), d1(grid - 1), d2(grid - 1);
  double scale = 0.0;
  for (int i = 1; i < grid; ++i) {
    rs[i - 1] = eps * i / grid;
    d1[i - 1] = pair.h1.d1(rs[i - 1]);
    d2[i - 1] = pair.h2.d1(rs[i - 1]);
    scale = std::max({scale, std::abs(d1[i - 1]), std::abs(d2[i - 1])});
  }

  // Reduced fractions p/q with q >= 0; q = 0 only as 1/0 and p = 0 only as 0/1.
  std::vector<std::pair<int, int>> ratios;
  ratios.emplace_back(1, 0);
  ratios.emplace_back(0, 1);
  for (int q = 1; q <= pq_max; ++q) {
    for (int p = 1; p <= pq_max; ++p) {
      if (std::gcd(p, q) != 1) continue;
      ratios.emplace_back(p, q);
      ratios.emplace_back(-p, q);
    }
  }

  std::vector<TorusOrbitFamily> out;
  auto make_family = [&](double r0, int p, int q) {
    const PairJets j = pair_jets(pair, r0);
    TorusOrbitFamily f;
    f.r0 = r0;
    const int sp = j.h1.d1 > 0 ? 1 : (j.h1.d1 < 0 ? -1 : 0);
    const int sq = j.h2.d1 > 0 ? 1 : (j.h2.d1 < 0 ? -1 : 0);
    f.p = p == 0 ? 0 : std::abs(p) * (sp == 0 ? 1 : sp);
    f.q = q == 0 ? 0 : std::abs(q) * (sq == 0 ? 1 : sq);
    const bool q_ok = f.q != 0 && std::abs(j.h2.d1) > 1e-12;
    const bool p_ok = f.p != 0 && std::abs(j.h1.d1) > 1e-12;
    const double tq = q_ok ? f.q * j.d / j.h2.d1 : std::numeric_limits<double>::quiet_NaN();
    const double tp = p_ok ? kTwoPi * f.p * j.d / j.h1.d1 : std::numeric_limits<double>::quiet_NaN();
    if (q_ok) {
      f.period = std::abs(tq);
      f.formula = 'q';
    } else {
      f.period = std::abs(tp);
      f.formula = 'p';
    }
    if (q_ok && p_ok) f.crosscheck = std::abs(std::abs(tq) - std::abs(tp)) / std::abs(tq);
    f.action = f.period;
    f.morse_bott = morse_bott_check(pair, r0);
    return f;
  };

  const double tol = 1e-11 * std::max(scale, 1.0);
  for (auto [p, q] : ratios) {
    auto g = [&](double r) { return q * pair.h1.d1(r) - kTwoPi * p * pair.h2.d1(r); };
    std::vector<double> gv(rs.size());
    for (std::size_t i = 0; i < rs.size(); ++i) gv[i] = q * d1[i] - kTwoPi * p * d2[i];
    std::size_t i = 0;
    while (i < rs.size()) {
      if (std::abs(gv[i]) <= tol) {
        std::size_t j = i;
        while (j + 1 < rs.size() && std::abs(gv[j + 1]) <= tol) ++j;
        if (j - i >= 2) {
          TorusOrbitFamily f = make_family(rs[i], p, q);
          f.continuum = true;
          f.r_end = rs[j];
          f.morse_bott = false;
          out.push_back(f);
        } else {
          std::size_t best = i;
          for (std::size_t k = i; k <= j; ++k)
            if (std::abs(gv[k]) < std::abs(gv[best])) best = k;
          out.push_back(make_family(rs[best], p, q));
        }
        i = j + 1;
        continue;
      }
      if (i + 1 < rs.size() && std::abs(gv[i + 1]) > tol && (gv[i] > 0) != (gv[i + 1] > 0)) {
        const double r0 = bisect_root(g, rs[i], rs[i + 1], 1e-12);
        out.push_back(make_family(r0, p, q));
      }
      ++i;
    }
  }
  std::sort(out.begin(), out.end(), [](const TorusOrbitFamily& a, const TorusOrbitFamily& b) {
    if (a.r0 != b.r0) return a.r0 < b.r0;
    if (a.q != b.q) return a.q < b.q;
    return a.p < b.p;
  });
  return out;
}

ActionMinima action_minima(const ProfilePair& pair, int grid) {
  const double eps = pair.epsilon;
  auto h1 = [&](double r) { return pair.h1.value(r); };
  std::vector<double> zeros;
  double prev_r = 0.0, prev_v = h1(0.0);
  for (int i = 1; i <= grid; ++i) {
    const double r = eps * i / grid;
    const double v = h1(r);
    if (v == 0.0) {
      zeros.push_back(r);
    } else if (prev_v != 0.0 && (v > 0) != (prev_v > 0)) {
      zeros.push_back(bisect_root(h1, prev_r, r, 1e-14));
    }
    prev_r = r;
    prev_v = v;
  }
  if (zeros.size() != 2) {
    throw InvalidGeometry("h1 has " + std::to_string(zeros.size()) +
                          " zeros in (0, epsilon); a full twist has exactly 2");
  }
  ActionMinima m;
  m.r_plus = zeros[0];
  m.r_plus_prime = zeros[1];
  m.action_plus = kTwoPi * std::abs(pair.h2.value(m.r_plus));
  m.action_plus_prime = kTwoPi * std::abs(pair.h2.value(m.r_plus_prime));
  if (!(m.action_plus < m.action_plus_prime)) {
    throw InvalidGeometry("action at the second zero of h1 does not exceed the first");
  }
  return m;
}

bool morse_bott_check(const ProfilePair& pair, double r0) {
  const PairJets j = pair_jets(pair, r0);
  const double num = j.h1.d2 * j.h2.d1 - j.h1.d1 * j.h2.d2;
  // d/dr (h1'/h2') or of its reciprocal, whichever has the larger denominator.
  const double den = std::max(std::abs(j.h1.d1), std::abs(j.h2.d1));
  if (den == 0.0) return false;
  return std::abs(num) / (den * den) > 1e-8;
}

CoreCz core_orbit_cz(const ProfilePair& pair, int k) {
  const double h1pp = pair.h1.d2(0.0);
  const double h2pp = pair.h2.d2(0.0);
  if (h2pp == 0.0) throw PreconditionFailed("core_orbit_cz needs h2''(0) != 0");
  CoreCz out;
  out.argument = -k * h1pp / (kTwoPi * h2pp);
  out.nearness = std::abs(out.argument - std::round(out.argument));
  out.degenerate = out.nearness <= 1e-10;
  out.index = 2 * static_cast<int>(std::floor(out.argument)) + 1;
  return out;
}

double cz_sp2_path(const std::vector<Mat2>& path) {
  check_symplectic(path);
  // Averaging the indices of the paths nudged by small positive and negative
  // rotations gives the Robbin-Salamon index, including the half-integer
  // contributions of degenerate endpoints.
  int sum = 0;
  for (double sgn : {1.0, -1.0}) {
    std::vector<Mat2> nudged(path.size());
    const double n = static_cast<double>(path.size() - 1);
    for (std::size_t i = 0; i < path.size(); ++i)
      nudged[i] = mul(path[i], rotation(sgn * kRotationNudge * (i / n)));
    sum += cz_nondegenerate(nudged);
  }
  return 0.5 * sum;
}

double cz_sp2_path(const std::function<Mat2(double)>& path, int initial_samples) {
  int n = std::max(initial_samples, 2);
  auto sample = [&](int count) {
    std::vector<Mat2> s(count + 1);
    for (int i = 0; i <= count; ++i) s[i] = path(static_cast<double>(i) / count);
    return s;
  };
  double prev = cz_sp2_path(sample(n));
  int stable = 0;
  for (int round = 0; round < 16; ++round) {
    n *= 2;
    const double cur = cz_sp2_path(sample(n));
    stable = cur == prev ? stable + 1 : 0;
    prev = cur;
    if (stable >= 2) return cur;
  }
  throw QuadratureFailure("cz_sp2_path: index did not stabilise under refinement");
}

double MorseCircle::value(double theta) const {
  return 0.5 * (mu_plus + mu_minus) + 0.5 * (mu_plus - mu_minus) * std::cos(kTwoPi * theta);
}

double MorseCircle::derivative(double theta) const {
  return -kPi * (mu_plus - mu_minus) * std::sin(kTwoPi * theta);
}

PerturbedReebField::PerturbedReebField(ProfilePair pair, TwistParams params, double r_plus)
    : pair_(std::move(pair)),
      params_(params),
      mu_{params.mu_minus, params.mu_plus},
      r_plus_(r_plus),
      half_width_(params.epsilon0 / 4.0) {}

double PerturbedReebField::bump(double r) const {
  const double s = (r - r_plus_) / half_width_;
  if (std::abs(s) >= 1.0) return 0.0;
  const double w = 1.0 - s * s;
  return w * w * w;
}

double PerturbedReebField::bump_derivative(double r) const {
  const double s = (r - r_plus_) / half_width_;
  if (std::abs(s) >= 1.0) return 0.0;
  const double w = 1.0 - s * s;
  return -6.0 * s * w * w / half_width_;
}

std::array<double, 3> PerturbedReebField::form(double theta, double r) const {
  const double f = 1.0 + params_.delta * bump(r) * mu_.value(theta);
  return {f * pair_.h1.value(r), 0.0, f * pair_.h2.value(r)};
}

std::array<double, 3> PerturbedReebField::operator()(double theta, double r, double /*phi*/) const {
  const PairJets j = pair_jets(pair_, r);
  const double b = bump(r), bp = bump_derivative(r);
  const double mu = mu_.value(theta), mup = mu_.derivative(theta);
  const double dl = params_.delta;
  const double f = 1.0 + dl * b * mu;
  const double den = j.d * f * f;
  return {(j.h2.d1 + dl * mu * (bp * j.h2.v + b * j.h2.d1)) / den,
          -dl * mup * b * j.h2.v / den,
          -(j.h1.d1 + dl * mu * (bp * j.h1.v + b * j.h1.d1)) / den};
}

PerturbedReebField perturbed_field(const ProfilePair& pair, const TwistParams& params) {
  const ActionMinima m = action_minima(pair);
  return PerturbedReebField(pair, params, m.r_plus);
}

PerturbedOrbits perturb(const ProfilePair& pair, const TwistParams& params) {
  if (!(params.delta >= 0.0 && params.delta < 1.0))
    throw InvalidGeometry("delta must lie in [0, 1)");
  const ActionMinima m = action_minima(pair);
  PerturbedOrbits o;
  o.r_plus = m.r_plus;
  const double h2 = std::abs(pair.h2.value(m.r_plus));
  o.action_hyperbolic = kTwoPi * h2 * (1.0 + params.delta * params.mu_minus);
  o.action_elliptic = kTwoPi * h2 * (1.0 + params.delta * params.mu_plus);

  const PairJets j = pair_jets(pair, m.r_plus);
  o.shear_rate = -(j.h1.d2 * j.h2.d1 - j.h1.d1 * j.h2.d2) / (j.d * j.d);
  const double f = o.shear_rate;
  o.shear_index = cz_sp2_path(std::function<Mat2(double)>([f](double t) {
    return Mat2{1.0, -f * t, 0.0, 1.0};
  }));
  // One-dimensional orbit space: CZ = shear index - 1/2 + Morse index, where
  // theta_- is the minimum (index 0) and theta_+ the maximum (index 1).
  o.cz_hyperbolic = static_cast<int>(std::lround(o.shear_index - 0.5));
  o.cz_elliptic = static_cast<int>(std::lround(o.shear_index + 0.5));
  constexpr int n = 2;
  o.degree_hyperbolic = o.cz_hyperbolic + n - 3 + 2;
  return o;
}

ClactionReport claction_check(const ProfilePair& pair, const TwistParams& params, double floor_a) {
  const ActionMinima m = action_minima(pair);
  ClactionReport c;
  const double h2p = std::abs(pair.h2.value(m.r_plus));
  c.action_unperturbed = kTwoPi * h2p;
  c.floor_a = floor_a;
  c.below_floor = c.action_unperturbed < floor_a;
  c.perturbed_intercept = std::abs(h2p * (1.0 + params.delta * params.mu_minus));
  c.second_intercept = std::abs(pair.h2.value(m.r_plus_prime));
  c.below_second = c.perturbed_intercept < c.second_intercept;
  c.pass = c.below_floor && c.below_second;
  return c;
}

double l_invariant(const ProfilePair& pair, const TwistParams& params, double floor_a) {
  const ClactionReport c = claction_check(pair, params, floor_a);
  if (!c.pass) {
    throw PreconditionFailed(c.below_floor ? "second intercept does not dominate the perturbed one"
                                           : "unperturbed action is not below the ambient floor");
  }
  return kTwoPi * c.perturbed_intercept;
}

double OpenBookProfiles::g_tilde(double p) const {
  const double s = std::abs(p) / p0;
  return -kPi * (1.0 - smoothstep5(Jet::constant(s)).v);
}

double OpenBookProfiles::g_tilde_prime(double p) const {
  const double s = std::abs(p) / p0;
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return kPi * 30.0 * s * s * (1.0 - s) * (1.0 - s) / p0;
}

double OpenBookProfiles::g(double p) const { return g_tilde(p) + eps_tilde * std::abs(p); }

double OpenBookProfiles::g_prime(double p) const { return g_tilde_prime(p) + eps_tilde; }

double OpenBookProfiles::h(double p) const {
  const double x = std::abs(p);
  const double cut = std::min(x, p0);
  double v = adaptive_simpson([this](double s) { return s * g_prime(s); }, 0.0, cut, 1e-13);
  if (x > p0) v += 0.5 * eps_tilde * (x * x - p0 * p0);
  return 1.0 + v;
}

double OpenBookProfiles::h_tilde(double p) const {
  const double x = std::abs(p);
  const double cut = std::min(x, p0);
  double v = adaptive_simpson([this](double s) { return g(s); }, 0.0, cut, 1e-13);
  if (x > p0) v += 0.5 * eps_tilde * (x * x - p0 * p0);
  return 1.0 - v;
}

OpenBookProfiles openbook_profiles(double p0, double eps_tilde) {
  if (!(p0 > 0.0)) throw PreconditionFailed("openbook_profiles needs p0 > 0");
  if (!(eps_tilde > 0.0)) throw PreconditionFailed("openbook_profiles needs eps_tilde > 0");
  return {p0, eps_tilde};
}

}  // namespace lutzlab
