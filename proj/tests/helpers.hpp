#pragma once

#include "ihoc/model.hpp"

#include <memory>
#include <random>

namespace ihoc::testing {

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs)
    v(i++) = x;
  return v;
}

inline Vec scalar(double x) { return Vec::Constant(1, x); }

inline Mat mat1(double x) { return Mat::Constant(1, 1, x); }

inline Vec gaussian(int n, std::mt19937_64 &rng, double s = 1.0) {
  std::normal_distribution<double> g(0.0, s);
  Vec v(n);
  for (int i = 0; i < n; ++i)
    v(i) = g(rng);
  return v;
}

inline Mat random_matrix(int r, int c, std::mt19937_64 &rng, double lo = -1.0,
                         double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      m(i, j) = u(rng);
  return m;
}

inline ConvexControlSet unit_box(int m, double b = 1.0) {
  return ConvexControlSet::box(Vec::Constant(m, -b), Vec::Constant(m, b));
}

/// Stationary problem from one stage.
inline ControlProblem stationary_problem(std::shared_ptr<const StageDynamics> f,
                                         std::shared_ptr<const StageReward> phi,
                                         ConvexControlSet u, Vec sigma,
                                         Mode mode = Mode::equation, int s = 1,
                                         double discount = 1.0) {
  return ControlProblem(StageSchedule::stationary({f, phi, u}), sigma, mode, s,
                        discount);
}

/// Rollout of the process from sigma under the given controls.
inline Process rollout(const ControlProblem &p, const VecSeq &controls) {
  Process proc;
  proc.x.push_back(p.sigma());
  for (std::size_t t = 0; t < controls.size(); ++t) {
    proc.u.push_back(controls[t]);
    proc.x.push_back(p.f(static_cast<int>(t), proc.x.back(), controls[t]));
  }
  return proc;
}

} // namespace ihoc::testing
