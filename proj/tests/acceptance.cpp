// Acceptance runner: one PASS/FAIL line per criterion. With an argument N only
// criterion N runs; the exit status is 0 iff every criterion that ran passed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <limits>
#include <string>

#include "lutzlab/persistence.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace lutzlab {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  double budget_s = 0.0;  // 0: no runtime requirement
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

Outcome contact_condition() {
  const ContactReport c = check_contact_condition(test::reference_smoothed(), 10000);
  Outcome o;
  o.pass = c.pass && c.min_abs_d_over_r > 1e-6;
  o.detail = "min |D/r| = " + num(c.min_abs_d_over_r) + " at r = " + num(c.r_at_min);
  o.budget_s = 1.0;
  return o;
}

Outcome l_round_trip() {
  const FamilyModel model;
  double worst = 0.0;
  bool certified = true;
  for (double l : {0.02, 0.04, 0.06}) {
    for (double k : {1.0, 2.0, 4.0}) {
      const FormSpec s = model.embed_point(std::log(std::sqrt(k)), std::log(l));
      certified = certified && s.certified;
      if (!s.certified) continue;
      const double got = l_invariant(s.pair.scaled(s.scale), s.twist);
      worst = std::max(worst, std::abs(got - l) / l);
    }
  }
  Outcome o;
  o.pass = certified && worst <= 1e-6;
  o.detail = "9 points, worst relative error " + num(worst) + (certified ? "" : ", uncertified point");
  o.budget_s = 5.0;
  return o;
}

Outcome scaling_laws() {
  bool pass = true;
  double worst_v = 0.0, worst_l = 0.0;
  for (int n : {2, 3}) {
    FamilyConfig cfg = default_family_config();
    cfg.n = n;
    const FamilyModel model(cfg);
    const FormSpec s = model.embed_point(0.1, std::log(0.04));
    for (double c : {0.5, 2.0, M_E}) {
      const ScalingReport r = scaling_check(model, s, c, 1e-9);
      pass = pass && r.pass;
      worst_v = std::max(worst_v, r.volume_rel_error);
      worst_l = std::max(worst_l, r.l_rel_error);
    }
  }
  return {pass, "n = 2, 3 and C in {1/2, 2, e}: worst volume error " + num(worst_v) + ", worst l error " +
                    num(worst_l)};
}

Outcome gray_equality() {
  const FamilyModel model;
  GrayPathSpec g;
  g.family = model.family_ptr();
  g.u_start = 0.04;
  g.u_end = 0.06;
  const GrayResult r = gray_integral(g);
  const double rel = std::abs(r.value - std::log(1.5)) / std::log(1.5);
  double worst_arg = 0.0;
  for (const GraySample& s : r.samples) worst_arg = std::max(worst_arg, std::abs(s.r_argmax - 0.25));
  Outcome o;
  o.pass = rel <= 1e-4 && !r.samples.empty() && worst_arg <= 1e-3;
  o.detail = "integral " + num(r.value) + " (relative error " + num(rel) + "), " +
             std::to_string(r.samples.size()) + " u samples, worst |argmax - 1/4| " + num(worst_arg);
  o.budget_s = 30.0;
  return o;
}

Outcome bilipschitz() {
  const FamilyModel model;
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      pts.emplace_back(-0.25 + 0.5 * i / 4.0, std::log(0.02) + (std::log(0.06) - std::log(0.02)) * j / 4.0);
  const SweepReport r = bilipschitz_sweep(model, pts);
  std::size_t lower_fail = 0, upper_fail = 0;
  double worst_ratio = 0.0;
  for (const SweepRow& row : r.rows) {
    if (row.lower < row.dinf - 1e-9 || row.lower > row.upper + 1e-9) ++lower_fail;
    if (row.upper > 2 * row.dinf + 1e-6) ++upper_fail;
    if (row.dinf > 0) worst_ratio = std::max(worst_ratio, row.upper / row.dinf);
  }
  Outcome o;
  o.pass = r.all_pass;
  o.detail = std::to_string(r.rows.size()) + " pairs, " + std::to_string(lower_fail) + " violate d_inf <= lower <= upper, " +
             std::to_string(upper_fail) + " violate upper <= 2 d_inf, worst upper/d_inf " + num(worst_ratio);
  o.budget_s = 300.0;
  return o;
}

Outcome ellipsoid() {
  const double inc = ub_conformal(ellipsoid_ratio_sample(1.0, 3.0, 0.5));
  const double fold = folding_bounds(1.0, 3.0, 0.5, 0.4).folding;
  const double e1 = std::abs(inc - std::log(6.0)), e2 = std::abs(fold - std::log(5.6));
  return {e1 <= 1e-9 && e2 <= 1e-12,
          "inclusion " + num(inc) + " (error " + num(e1) + "), folding " + num(fold) + " (error " + num(e2) + ")"};
}

Outcome cz_consistency() {
  const double shear = cz_sp2_path(std::function<Mat2(double)>([](double t) {
    return Mat2{1.0, -t, 0.0, 1.0};
  }));
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> c(0.5, 2.0), alpha(0.1, 3.0), beta(0.5, 2.0);
  int caps = 0, agree = 0, total = 0;
  while (caps < 5) {
    const ProfilePair cap = test::quadratic_cap(c(rng), alpha(rng), beta(rng));
    bool clean = true;
    for (int k = 1; k <= 3; ++k) clean = clean && core_orbit_cz(cap, k).nearness > 1e-3;
    if (!clean) continue;
    for (int k = 1; k <= 3; ++k) {
      ++total;
      if (cz_sp2_path(test::linearized_core_flow(cap, k).path) == core_orbit_cz(cap, k).index) ++agree;
    }
    ++caps;
  }
  return {shear == 0.5 && agree == total,
          "shear index " + num(shear) + ", oracle agreement " + std::to_string(agree) + "/" + std::to_string(total)};
}

Outcome mollifier_bound() {
  const TwistParams base = test::reference_params();
  std::vector<double> ratios;
  for (double f : {1e-2, 1e-3, 1e-4}) {
    TwistParams p = base;
    p.delta0 = f * p.epsilon0;
    const ProfilePair pair = mollify(build_paper_path(p), SmoothingWindow::standard(p.epsilon0, p.delta0));
    ratios.push_back(verify_smoothing_bound(pair, p.u).max_ratio);
  }
  const bool decreasing = ratios[0] > ratios[1] && ratios[1] > ratios[2];
  const double bound = 1.0 / base.u;
  return {decreasing && ratios[2] < bound, "max ratios " + num(ratios[0]) + ", " + num(ratios[1]) + ", " +
                                               num(ratios[2]) + " against 1/u = " + num(bound)};
}

Outcome persistence_oracle() {
  std::mt19937_64 rng(12345);
  int mismatches = 0, finite = 0, leibniz_fail = 0, longest_fail = 0, bars_checked = 0;
  for (int i = 0; i < 50; ++i) {
    const FilteredDGA dga = random_admissible_dga(rng);
    const Barcode b = barcode(dga);
    if (!(b.bars == brute_force_oracle(dga).bars)) ++mismatches;
    const auto ell = unit_vanishing_level(dga);
    if (!ell) continue;
    ++finite;
    mpq_class longest = 0;
    for (const Bar& bar : b.bars) {
      if (!bar.death) continue;
      longest = std::max(longest, mpq_class(*bar.death - bar.birth));
      const Monomial& y = b.basis[bar.birth_index];
      if (!boundary(dga, y).empty()) continue;
      ++bars_checked;
      if (*bar.death > leibniz_upper_bound(dga, y)) ++leibniz_fail;
    }
    if (longest != *ell) ++longest_fail;
  }
  return {mismatches == 0 && leibniz_fail == 0 && longest_fail == 0,
          "50 DGAs, " + std::to_string(mismatches) + " oracle mismatches, " + std::to_string(finite) +
              " with finite unit level, " + std::to_string(leibniz_fail) + "/" + std::to_string(bars_checked) +
              " Leibniz violations, " + std::to_string(longest_fail) + " longest-bar violations"};
}

Outcome pseudometric() {
  const FamilyModel model;
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> a(-0.25, 0.25), b(std::log(0.02), std::log(0.06));
  double worst = -std::numeric_limits<double>::infinity();
  int fails = 0;
  for (int t = 0; t < 20; ++t) {
    const FormSpec x = model.embed_point(a(rng), b(rng));
    const FormSpec y = model.embed_point(a(rng), b(rng));
    const FormSpec z = model.embed_point(a(rng), b(rng));
    const double excess =
        triangle_ub(model, x, z).upper - triangle_ub(model, x, y).upper - triangle_ub(model, y, z).upper;
    worst = std::max(worst, excess);
    if (excess > 1e-9) ++fails;
  }
  return {fails == 0, "20 triples, " + std::to_string(fails) + " violations, worst excess " + num(worst)};
}

int run_criterion(int n) {
  static const std::function<Outcome()> criteria[] = {
      contact_condition, l_round_trip,    scaling_laws,   gray_equality,      bilipschitz,
      ellipsoid,         cz_consistency,  mollifier_bound, persistence_oracle, pseudometric};
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = criteria[n - 1]();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = o.budget_s <= 0.0 || secs < o.budget_s;
  const bool pass = o.pass && in_time;
  std::printf("criterion %d: %s %s; %.3f s", n, pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
  if (o.budget_s > 0.0) std::printf(" (budget %.0f s%s)", o.budget_s, in_time ? "" : ", exceeded");
  std::printf("\n");
  std::fflush(stdout);
  return pass ? 0 : 1;
}

}  // namespace
}  // namespace lutzlab

int main(int argc, char** argv) {
  if (argc > 1) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > 10) {
      std::fprintf(stderr, "criterion must be in 1..10\n");
      return 2;
    }
    return lutzlab::run_criterion(n);
  }
  int failed = 0;
  for (int n = 1; n <= 10; ++n) failed += lutzlab::run_criterion(n);
  return failed == 0 ? 0 : 1;
}
