#pragma once

#include <cmath>
#include <functional>
#include <numbers>

#include "lutzlab/errors.hpp"

namespace lutzlab {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Value with its first two derivatives in a single scalar variable.
struct Jet {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;

  static Jet constant(double c) { return {c, 0.0, 0.0}; }
  static Jet variable(double x) { return {x, 1.0, 0.0}; }
};

inline Jet operator+(Jet a, Jet b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
inline Jet operator-(Jet a, Jet b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
inline Jet operator-(Jet a) { return {-a.v, -a.d1, -a.d2}; }
inline Jet operator*(double c, Jet a) { return {c * a.v, c * a.d1, c * a.d2}; }
inline Jet operator*(Jet a, double c) { return c * a; }
inline Jet operator+(Jet a, double c) { return {a.v + c, a.d1, a.d2}; }
inline Jet operator+(double c, Jet a) { return a + c; }
inline Jet operator-(Jet a, double c) { return {a.v - c, a.d1, a.d2}; }
inline Jet operator-(double c, Jet a) { return {c - a.v, -a.d1, -a.d2}; }
inline Jet operator*(Jet a, Jet b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}
inline Jet operator/(Jet a, Jet b) {
  const double q = a.v / b.v;
  const double q1 = (a.d1 - q * b.d1) / b.v;
  const double q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.v;
  return {q, q1, q2};
}
inline Jet operator/(Jet a, double c) { return {a.v / c, a.d1 / c, a.d2 / c}; }

// Chain rule for an outer function with derivatives (f, f', f'') at a.v.
inline Jet compose(Jet a, double f, double f1, double f2) {
  return {f, f1 * a.d1, f2 * a.d1 * a.d1 + f1 * a.d2};
}
inline Jet sin(Jet a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return compose(a, s, c, -s);
}
inline Jet cos(Jet a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return compose(a, c, -s, -c);
}
inline Jet exp(Jet a) {
  const double e = std::exp(a.v);
  return compose(a, e, e, e);
}
inline Jet log(Jet a) { return compose(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }
inline Jet sqrt(Jet a) {
  const double s = std::sqrt(a.v);
  return compose(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline Jet atan(Jet a) {
  const double w = 1.0 / (1.0 + a.v * a.v);
  return compose(a, std::atan(a.v), w, -2.0 * a.v * w * w);
}
// Angle of the planar point (x, y); derivatives follow the continuous branch.
inline Jet atan2(Jet y, Jet x) {
  const double rr = x.v * x.v + y.v * y.v;
  const double t1 = (x.v * y.d1 - y.v * x.d1) / rr;
  const double num2 = x.v * y.d2 - y.v * x.d2;
  const double drr = 2.0 * (x.v * x.d1 + y.v * y.d1);
  const double t2 = (num2 * rr - (x.v * y.d1 - y.v * x.d1) * drr) / (rr * rr);
  return {std::atan2(y.v, x.v), t1, t2};
}

// Quintic smoothstep 10t^3 - 15t^4 + 6t^5, clamped to [0, 1]; C2 at both ends.
Jet smoothstep5(Jet t);

namespace detail {
template <class F>
double simpson_step(F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth, bool& ok) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double h = b - a;
  const double left = h / 12.0 * (fa + 4.0 * flm + fm);
  const double right = h / 12.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) {
    ok = false;
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, ok) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, ok);
}
}  // namespace detail

// Adaptive Simpson quadrature with an absolute tolerance. Throws
// QuadratureFailure when the recursion budget runs out before convergence.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol = 1e-11, int max_depth = 40) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  bool ok = true;
  const double r = detail::simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, max_depth, ok);
  if (!ok || !std::isfinite(r)) {
    throw QuadratureFailure("adaptive Simpson did not reach tolerance on [" + std::to_string(a) +
                            ", " + std::to_string(b) + "]");
  }
  return r;
}

// Bisection on a bracketing interval; returns the midpoint once the bracket
// is narrower than xtol.
double bisect_root(const std::function<double(double)>& f, double a, double b, double xtol = 1e-13);

// Golden-section search for a maximum of a unimodal function on [a, b].
struct Extremum {
  double x;
  double value;
};
Extremum golden_section_max(const std::function<double(double)>& f, double a, double b,
                            double xtol = 1e-10);

// Normal density truncated to [lo, hi] and renormalised to unit mass.
class TruncatedGaussian {
 public:
  TruncatedGaussian(double mean, double sigma, double lo, double hi);
  double pdf(double x) const;
  double cdf(double x) const;
  double mean() const { return mean_; }
  double sigma() const { return sigma_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double mean_, sigma_, lo_, hi_;
  double mass_;
};

}  // namespace lutzlab
