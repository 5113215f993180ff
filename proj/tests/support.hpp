#pragma once

#include <cmath>

#include "lutzlab/distance.hpp"
#include "lutzlab/family.hpp"
#include "lutzlab/profile.hpp"
#include "lutzlab/reeb.hpp"

namespace lutzlab::test {

// Reference twist: eps0 = 0.05, u = 0.05, delta = 0.01, mu_- = -1, delta0 = eps0/100.
inline TwistParams reference_params() {
  TwistParams p;
  p.delta0 = p.epsilon0 / 100.0;
  return with_solved_continuity(p);
}

inline const ProfilePair& reference_raw() {
  static const ProfilePair pair = build_paper_path(reference_params());
  return pair;
}

inline const ProfilePair& reference_smoothed() {
  static const ProfilePair pair = [] {
    const TwistParams p = reference_params();
    return mollify(build_paper_path(p), SmoothingWindow::standard(p.epsilon0, p.delta0));
  }();
  return pair;
}

inline const FamilyModel& default_model() {
  static const FamilyModel model;
  return model;
}

// h1 = c - alpha r^2, h2 = beta r^2 on [0, 1].
inline ProfilePair quadratic_cap(double c, double alpha, double beta) {
  ProfilePair p;
  p.h1 = PiecewiseProfile({0.0, 1.0}, {PolySegment{{c, 0.0, -alpha}}});
  p.h2 = PiecewiseProfile({0.0, 1.0}, {PolySegment{{0.0, 0.0, beta}}});
  p.epsilon = 1.0;
  return p;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace lutzlab::test
