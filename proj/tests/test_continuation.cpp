#include "helpers.hpp"

#include "ihoc/catalog.hpp"
#include "ihoc/continuation.hpp"
#include "ihoc/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace ihoc;
using namespace ihoc::testing;

namespace {

ContinuationTrace synthetic(const std::vector<int> &horizons,
                            const std::function<MultiplierPath(int)> &path_for) {
  ContinuationTrace trace;
  trace.horizons = horizons;
  for (int T : horizons) {
    HorizonRecord r;
    r.T = T;
    r.ok = true;
    r.status = SolveStatus::converged;
    r.path = path_for(T);
    trace.records.push_back(r);
  }
  return trace;
}

MultiplierPath constant_path(double l0, const Vec &p, int T) {
  MultiplierPath m;
  m.lambda0 = l0;
  m.p.assign(static_cast<std::size_t>(T + 1), p);
  return m;
}

} // namespace

TEST_CASE("constant sequences converge to the constant") {
  const auto trace = synthetic({5, 10, 20}, [](int T) {
    return constant_path(0.25, vec({0.75, 0}), T);
  });
  const auto lim = detect_limit(trace, 3, 1e-9);
  CHECK(lim.converged);
  CHECK(lim.limit.lambda0 == doctest::Approx(0.25));
  CHECK(lim.limit.p.front()(0) == doctest::Approx(0.75));
}

TEST_CASE("lambda0 = 1/2 + 1/T converges within the window tolerance") {
  const auto trace = synthetic({40, 80, 160}, [](int T) {
    return constant_path(0.5 + 1.0 / T, scalar(0.5 - 1.0 / T), T);
  });
  const auto lim = detect_limit(trace, 3, 1e-2);
  CHECK(lim.converged);
  CHECK(lim.lambda0_converged);
  // oracle: mean of 1/2 + 1/40, 1/2 + 1/80, 1/2 + 1/160
  const double mean = 0.5 + (1.0 / 40 + 1.0 / 80 + 1.0 / 160) / 3.0;
  CHECK(lim.limit.lambda0 == doctest::Approx(mean).epsilon(1e-14));
  CHECK(std::abs(lim.limit.lambda0 - 0.5) < 2e-2);
}

TEST_CASE("alternating costates do not converge, amplitude 2") {
  int sign = 1;
  const auto trace = synthetic({5, 10, 20, 40}, [&](int T) {
    sign = -sign;
    return constant_path(0.0, scalar(sign), T);
  });
  const auto lim = detect_limit(trace, 3, 1e-6);
  CHECK_FALSE(lim.converged);
  CHECK_FALSE(lim.unconverged_stages.empty());
  CHECK(lim.amplitude == doctest::Approx(2.0));
  CHECK(lim.worst_stage >= 1);
}

TEST_CASE("LQ verify-mode continuation") {
  const auto params = lq_default(2);
  const auto ric = riccati_stationary(params.a, params.b, params.q, params.r,
                                      params.discount);
  const auto problem = lq_problem(params);
  const auto ref = lq_reference(params, ric, 40);
  const auto trace = run_continuation(problem, VerifyMode{ref}, {5, 10, 20, 40}, 1);
  REQUIRE(trace.records.size() == 4);
  // oracle normalized lambda0 at s = 1
  const auto oracle = normalize(lq_multipliers(params, ric, ref), 1);
  for (const auto &r : trace.records) {
    REQUIRE(r.ok);
    CHECK(r.certificate.pass);
    CHECK(std::abs(r.path.lambda0 + r.path.at(1).norm() - 1.0) <= 1e-12);
    CHECK(r.path.lambda0 == doctest::Approx(oracle.lambda0).epsilon(1e-5));
  }
  REQUIRE(trace.limit.has_value());
  CHECK(trace.limit->converged);

  // stage-1 multipliers stabilize: successive differences do not grow
  std::vector<double> diffs;
  for (std::size_t i = 1; i < trace.records.size(); ++i)
    diffs.push_back((trace.records[i].path.at(1) - trace.records[i - 1].path.at(1)).norm());
  CHECK(diffs[2] <= diffs[1] + 1e-10);

  const auto rep = degeneracy_monitor(trace, problem, ref);
  CHECK(rep.normalization_ok);
  CHECK(rep.bounds_ok);
  CHECK(rep.cone_ok);
  CHECK_FALSE(rep.abnormal);
  CHECK(rep.limit_margin == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("LQ solve-mode primal gap shrinks with T") {
  const auto params = lq_default(2);
  const auto ric = riccati_stationary(params.a, params.b, params.q, params.r,
                                      params.discount);
  const auto problem = lq_problem(params);
  const auto ref = lq_reference(params, ric, 80);
  const auto trace = run_continuation(problem, SolveMode{}, default_schedule(), 1);
  CHECK(trace.terminal_source == "computed");
  double prev = std::numeric_limits<double>::infinity();
  for (const auto &r : trace.records) {
    REQUIRE(r.ok);
    double gap = 0.0;
    for (int t = 0; t <= r.T; ++t)
      gap = std::max({gap, (r.primal.x[t] - ref.x[t]).norm(),
                      (r.primal.u[t] - ref.u[t]).norm()});
    CHECK(gap <= prev + 1e-9);
    prev = gap;
  }
}

TEST_CASE("warm and cold continuation agree") {
  const auto params = lq_default(3);
  const auto problem = lq_problem(params);
  ContinuationConfig warm, cold;
  cold.warm_start = false;
  const auto a = run_continuation(problem, SolveMode{}, {5, 10, 20}, 1, warm);
  const auto b = run_continuation(problem, SolveMode{}, {5, 10, 20}, 1, cold);
  for (std::size_t i = 0; i < 3; ++i) {
    REQUIRE(a.records[i].ok);
    REQUIRE(b.records[i].ok);
    CHECK(std::abs(a.records[i].objective - b.records[i].objective) <= 1e-8);
  }
}

TEST_CASE("zero reward: lambda0 = 1 and p = 0 for all T") {
  const auto problem = zero_reward_problem(1);
  const auto ref = zero_reward_reference(1, 20);
  const auto trace = run_continuation(problem, VerifyMode{ref}, {5, 10, 20}, 1);
  for (const auto &r : trace.records) {
    REQUIRE(r.ok);
    CHECK(r.path.lambda0 == doctest::Approx(1.0));
    CHECK(r.path.at(1).norm() <= 1e-8);
  }
  REQUIRE(trace.limit.has_value());
  CHECK(trace.limit->limit.lambda0 == doctest::Approx(1.0));
}

TEST_CASE("abnormal instance is flagged for every horizon") {
  const auto problem = abnormal_problem(2);
  const auto ref = abnormal_reference(2, 20);
  const auto trace = run_continuation(problem, VerifyMode{ref}, {5, 10, 20}, 1);
  for (const auto &r : trace.records) {
    REQUIRE(r.ok);
    CHECK(r.path.lambda0 == 0.0);
    CHECK(r.path.at(1).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.abnormal_extraction);
  }
  const auto rep = degeneracy_monitor(trace, problem, ref);
  CHECK(rep.abnormal);
  CHECK(rep.limit_margin == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("a failed horizon is listed and premises are still evaluated") {
  const auto params = lq_default(2);
  const auto problem = lq_problem(params);
  const auto ric = riccati_stationary(params.a, params.b, params.q, params.r,
                                      params.discount);
  const auto ref = lq_reference(params, ric, 20);
  auto trace = run_continuation(problem, VerifyMode{ref}, {5, 10, 20}, 1);
  trace.records[1].ok = false;
  trace.records[1].status = SolveStatus::max_iterations;
  trace.records[1].error = "forced";
  const auto rep = degeneracy_monitor(trace, problem, ref);
  CHECK(rep.failed_horizons == std::vector<int>{10});
  CHECK(rep.audits.size() == 3);
  CHECK(rep.audits[0].bound_ok);
  CHECK(rep.audits[2].bound_ok);
}

TEST_CASE("schedule validation") {
  const auto problem = lq_problem(lq_default(1));
  CHECK_THROWS(run_continuation(problem, SolveMode{}, {}, 1));
  CHECK_THROWS(run_continuation(problem, SolveMode{}, {10, 5}, 1));
  CHECK_THROWS(run_continuation(problem, SolveMode{}, {5, 10}, 6));
  const auto short_ref = lq_reference(lq_default(1),
                                      riccati_stationary(mat1(0.9), mat1(1), mat1(1),
                                                         mat1(1), 0.95),
                                      5);
  Process untailed = short_ref;
  untailed.tail.reset();
  CHECK_THROWS_AS(run_continuation(problem, VerifyMode{untailed}, {5, 10}, 1),
                  IndexMismatch);
}

TEST_CASE("steady state of the Ramsey tail") {
  RamseyParams rp;
  const auto ss = find_steady_state(ramsey_problem(rp));
  REQUIRE(ss.has_value());
  CHECK(ss->x(0) == doctest::Approx(ramsey_steady_capital(rp)).epsilon(1e-10));
}
