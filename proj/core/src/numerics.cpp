#include "lutzlab/numerics.hpp"

#include <algorithm>

namespace lutzlab {

Jet smoothstep5(Jet t) {
  if (t.v <= 0.0) return Jet::constant(0.0);
  if (t.v >= 1.0) return Jet::constant(1.0);
  const double x = t.v;
  const double s = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
  const double s1 = 30.0 * x * x * (1.0 - x) * (1.0 - x);
  const double s2 = 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
  return compose(t, s, s1, s2);
}

double bisect_root(const std::function<double(double)>& f, double a, double b, double xtol) {
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0) == (fb > 0)) {
    throw PreconditionFailed("bisect_root: interval does not bracket a sign change");
  }
  for (int it = 0; it < 200 && (b - a) > xtol; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  return 0.5 * (a + b);
}

Extremum golden_section_max(const std::function<double(double)>& f, double a, double b,
                            double xtol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (std::abs(b - a) > xtol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  const double fx = f(x);
  Extremum best{x, fx};
  if (fc > best.value) best = {c, fc};
  if (fd > best.value) best = {d, fd};
  return best;
}

TruncatedGaussian::TruncatedGaussian(double mean, double sigma, double lo, double hi)
    : mean_(mean), sigma_(sigma), lo_(lo), hi_(hi) {
  if (!(sigma > 0.0) || !(hi > lo)) {
    throw PreconditionFailed("TruncatedGaussian needs sigma > 0 and hi > lo");
  }
  const double s = std::sqrt(2.0) * sigma;
  mass_ = 0.5 * (std::erf((hi - mean) / s) - std::erf((lo - mean) / s));
}

double TruncatedGaussian::pdf(double x) const {
  if (x < lo_ || x > hi_) return 0.0;
  const double z = (x - mean_) / sigma_;
  return std::exp(-0.5 * z * z) / (sigma_ * std::sqrt(kTwoPi) * mass_);
}

double TruncatedGaussian::cdf(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return 1.0;
  const double s = std::sqrt(2.0) * sigma_;
  return 0.5 * (std::erf((x - mean_) / s) - std::erf((lo_ - mean_) / s)) / mass_;
}

}  // namespace lutzlab
