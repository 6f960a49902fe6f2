#include "helpers.hpp"

#include "ihoc/assumptions.hpp"
#include "ihoc/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace ihoc;
using namespace ihoc::testing;

TEST_CASE("central differences are exact on linear dynamics") {
  std::mt19937_64 rng(1);
  const Mat a = random_matrix(3, 3, rng), b = random_matrix(3, 2, rng);
  const auto p = stationary_problem(std::make_shared<LinearDynamics>(a, b),
                                    std::make_shared<ZeroReward>(3, 2),
                                    unit_box(2), gaussian(3, rng));
  const auto proc = rollout(p, {Vec::Constant(2, 0.1), Vec::Constant(2, -0.2),
                                Vec::Constant(2, 0.3)});
  // exact up to rounding of (f(x+h) - f(x-h)) / 2h
  for (double h : {1e-3, 1e-5}) {
    const auto rep = check_derivatives(p, proc, h);
    for (const auto &s : rep.stages) {
      CHECK(s.dyn_x <= 1e-15 / h);
      CHECK(s.dyn_u <= 1e-15 / h);
    }
  }
}

TEST_CASE("linear reward differences are accurate") {
  const auto p = stationary_problem(
      std::make_shared<LinearDynamics>(Mat::Identity(2, 2), Mat::Identity(2, 2)),
      std::make_shared<LinearReward>(vec({1.5, -2}), vec({0.5, 3})), unit_box(2),
      vec({1, 2}), Mode::equation, 1, 0.9);
  const auto proc = rollout(p, {vec({0.1, 0.1}), vec({0.2, 0}), vec({0, 0.3})});
  const auto rep = check_derivatives(p, proc, 1e-5);
  for (const auto &s : rep.stages) {
    CHECK(s.reward_x <= 1e-10);
    CHECK(s.reward_u <= 1e-10);
  }
}

TEST_CASE("cubic reward: central difference error matches h^2") {
  auto cubic = std::make_shared<FunctionReward>(
      [](const Vec &x, const Vec &) { return std::pow(x(0), 3); },
      [](const Vec &x, const Vec &) { return scalar(3 * x(0) * x(0)); },
      [](const Vec &, const Vec &) { return scalar(0); });
  const auto p = stationary_problem(std::make_shared<StaticDynamics>(1, 1), cubic,
                                    unit_box(1), scalar(1));
  const auto proc = rollout(p, {scalar(0), scalar(0), scalar(0)});
  const double h = 1e-5;
  const auto rep = check_derivatives(p, proc, h);
  // ((1+h)^3 - (1-h)^3) / 2h = 3 + h^2, relative to 3
  for (const auto &s : rep.stages)
    CHECK(s.reward_x == doctest::Approx(h * h / 3).epsilon(1e-3));
  CHECK(rep.ok(1e-5));
}

TEST_CASE("wrong analytic derivatives are flagged") {
  auto bad = std::make_shared<FunctionDynamics>(
      1, 1, [](const Vec &x, const Vec &u) { return Vec(x + 2 * u); },
      [](const Vec &, const Vec &) { return mat1(1); },
      [](const Vec &, const Vec &) { return mat1(1); });
  const auto p = stationary_problem(bad, std::make_shared<ZeroReward>(1, 1),
                                    unit_box(1), scalar(0));
  const auto proc = rollout(p, {scalar(0.1), scalar(0.1), scalar(0.1)});
  CHECK_FALSE(check_derivatives(p, proc).ok());
}

TEST_CASE("non-finite evaluation raises NonFiniteValue") {
  const auto p = stationary_problem(std::make_shared<GrowthDynamics>(0.3),
                                    std::make_shared<LogControlReward>(1, 1),
                                    ConvexControlSet::box(scalar(-1), scalar(1)),
                                    scalar(0.5));
  Process proc;
  proc.x = {scalar(0.5), scalar(0.2), scalar(0.1), scalar(0.05)};
  proc.u = {scalar(-0.1), scalar(0.1), scalar(0.1)};
  CHECK_THROWS_AS(check_derivatives(p, proc), NonFiniteValue);
}

TEST_CASE("stage schedules") {
  const StageData a{std::make_shared<StaticDynamics>(1, 1),
                    std::make_shared<ZeroReward>(1, 1), unit_box(1)};
  const StageData b{std::make_shared<LinearDynamics>(mat1(2), mat1(1)),
                    std::make_shared<ZeroReward>(1, 1), unit_box(1, 2.0)};
  const auto per = StageSchedule::periodic({a, b});
  CHECK(per.at(0).dynamics->name() == "static");
  CHECK(per.at(3).dynamics->name() == "linear");
  const auto tab = StageSchedule::tabulated({a, b});
  CHECK(tab.at(0).dynamics->name() == "static");
  CHECK(tab.at(7).dynamics->name() == "linear");
  CHECK(StageSchedule::stationary(a).at(100).dynamics->name() == "static");
}

TEST_CASE("discount is applied to the reward weight") {
  const auto p = stationary_problem(
      std::make_shared<StaticDynamics>(1, 1),
      std::make_shared<QuadraticReward>(mat1(1), mat1(1)), unit_box(1), scalar(1),
      Mode::equation, 1, 0.5);
  CHECK(p.phi(0, scalar(1), scalar(1)) == doctest::Approx(-2.0));
  CHECK(p.phi(2, scalar(1), scalar(1)) == doctest::Approx(-0.5));
  CHECK(p.phix(1, scalar(1), scalar(0))(0) == doctest::Approx(-1.0));
}

TEST_CASE("feasibility in both modes") {
  const auto p = stationary_problem(
      std::make_shared<LinearDynamics>(mat1(1), mat1(1)),
      std::make_shared<ZeroReward>(1, 1), unit_box(1), scalar(0));
  Process proc;
  proc.x = {scalar(0), scalar(0.5), scalar(0.5), scalar(1.0)};
  proc.u = {scalar(1), scalar(0), scalar(0.5)};
  const auto eq = check_feasibility(p, proc);
  CHECK(eq.dynamics_gap == doctest::Approx(0.5));
  CHECK_FALSE(eq.ok(1e-9));
  const auto iq = check_feasibility(p.with_mode(Mode::inequation), proc);
  CHECK(iq.ok(1e-9));
}

TEST_CASE("process tail and window") {
  Process proc;
  proc.x = {scalar(0), scalar(1), scalar(2), scalar(3)};
  proc.u = {scalar(0), scalar(0), scalar(0)};
  CHECK_THROWS_AS(proc.state(5), IndexMismatch);
  proc.tail = SteadyState{scalar(9), scalar(8)};
  CHECK(proc.state(5)(0) == 9.0);
  CHECK(proc.control(5)(0) == 8.0);
  const auto w = proc.window(5);
  CHECK(w.horizon() == 5);
  CHECK(w.x.back()(0) == 9.0);
}

TEST_CASE("problem construction validates dimensions") {
  const StageData s{std::make_shared<StaticDynamics>(2, 1),
                    std::make_shared<ZeroReward>(2, 1), unit_box(1)};
  CHECK_THROWS_AS(ControlProblem(StageSchedule::stationary(s), Vec::Zero(3),
                                 Mode::equation, 1),
                  DimensionMismatch);
  CHECK_THROWS(ControlProblem(StageSchedule::stationary(s), Vec::Zero(2),
                              Mode::equation, 0));
}
