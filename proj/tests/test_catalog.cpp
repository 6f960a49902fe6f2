#include "helpers.hpp"

#include "ihoc/assumptions.hpp"
#include "ihoc/catalog.hpp"
#include "ihoc/errors.hpp"
#include "ihoc/finite_horizon.hpp"
#include "ihoc/pontryagin.hpp"

#include <doctest.h>

#include <cmath>

using namespace ihoc;
using namespace ihoc::testing;

TEST_CASE("scalar Riccati fixed point is the golden ratio") {
  const auto ric = riccati_stationary(mat1(1), mat1(1), mat1(1), mat1(1), 1.0);
  // positive root of P^2 = P + 1
  CHECK(ric.p(0, 0) == doctest::Approx((1 + std::sqrt(5.0)) / 2).epsilon(1e-12));
  const double p = ric.p(0, 0);
  CHECK(std::abs(p * p - p - 1) <= 1e-10);
}

TEST_CASE("Riccati degenerate cases") {
  const Mat q = Mat::Identity(2, 2) * 3.0;
  const auto no_dyn = riccati_stationary(Mat::Zero(2, 2), Mat::Zero(2, 1), q,
                                         Mat::Identity(1, 1), 0.9);
  CHECK((no_dyn.p - q).norm() <= 1e-12);
  const auto no_cost = riccati_stationary(Mat::Identity(2, 2) * 0.8, Mat::Ones(2, 1),
                                          Mat::Zero(2, 2), Mat::Identity(1, 1), 0.9);
  CHECK(no_cost.p.norm() <= 1e-12);
}

TEST_CASE("Riccati identity P = Q + b A'P(A - BK)") {
  for (int n = 1; n <= 4; ++n) {
    const auto params = lq_default(n);
    const auto ric = riccati_stationary(params.a, params.b, params.q, params.r,
                                        params.discount);
    const Mat rhs = params.q + params.discount * params.a.transpose() * ric.p *
                                   (params.a - params.b * ric.gain);
    CHECK((rhs - ric.p).norm() <= 1e-9 * std::max(1.0, ric.p.norm()));
  }
}

TEST_CASE("LQ oracle multipliers satisfy the adjoint recursion") {
  for (int n = 1; n <= 4; ++n) {
    const auto params = lq_default(n);
    const auto ric = riccati_stationary(params.a, params.b, params.q, params.r,
                                        params.discount);
    const auto proc = lq_reference(params, ric, 15);
    const auto path = lq_multipliers(params, ric, proc);
    const auto problem = lq_problem(params);
    for (int t = 1; t <= 15; ++t)
      CHECK((adjoint_step(problem, proc, t, path.at(t + 1), 1.0) - path.at(t)).norm() <=
            1e-9);
  }
}

TEST_CASE("Ramsey steady state gives a constant trajectory") {
  RamseyParams rp;
  rp.k0 = ramsey_steady_capital(rp);
  CHECK(rp.k0 == doctest::Approx(std::pow(rp.alpha * rp.discount, 1 / (1 - rp.alpha))));
  const auto proc = ramsey_reference(rp, 10);
  for (const auto &x : proc.x)
    CHECK(x(0) == doctest::Approx(rp.k0).epsilon(1e-14));
}

TEST_CASE("Ramsey policy identity and multiplier ratio") {
  RamseyParams rp;
  const auto proc = ramsey_reference(rp, 25);
  for (int t = 0; t <= 25; ++t) {
    const double k = proc.x[t](0), c = proc.u[t](0);
    CHECK(c / std::pow(k, rp.alpha) ==
          doctest::Approx(1 - rp.alpha * rp.discount).epsilon(1e-14));
  }
  const auto path = ramsey_multipliers(rp, proc);
  for (int t = 0; t <= 25; ++t) {
    const double ratio = path.at(t + 1)(0) * proc.u[t](0) / std::pow(rp.discount, t);
    CHECK(std::abs(ratio - 1.0) <= 1e-6);
  }
}

TEST_CASE("Ramsey closed form beats the matched-terminal truncation") {
  RamseyParams rp;
  const auto problem = ramsey_problem(rp);
  const auto ref = ramsey_reference(rp, 30);
  const auto tp = build_truncation(problem, 30, ref.x.back());
  const auto kkt = solve_truncation(tp, make_start(tp, StartStrategy::interpolate));
  REQUIRE(kkt.converged());
  const double closed = ramsey_objective(rp, ref);
  CHECK(closed - kkt.objective <= 1e-6);
  CHECK(closed - kkt.objective >= -1e-6);
}

TEST_CASE("Ramsey reference rejects an empty capital stock") {
  RamseyParams rp;
  rp.k0 = 0.0;
  CHECK_THROWS_AS(ramsey_reference(rp, 5), DomainViolation);
}

TEST_CASE("every catalog oracle passes its certificate") {
  for (const auto &name : catalog_names()) {
    for (int n : {1, 2}) {
      const auto entry = catalog_entry(name, n);
      const auto proc = entry.reference(12);
      const auto path = entry.multipliers(proc);
      const auto cert = verify_certificate(entry.problem, proc, path, 1, 1e-6);
      INFO(name, " n=", n);
      CHECK(cert.pass);
      CHECK(check_feasibility(entry.problem, proc).ok(1e-10));
    }
  }
}

TEST_CASE("every catalog problem has accurate derivatives") {
  for (const auto &name : catalog_names()) {
    const auto entry = catalog_entry(name, 2);
    const auto proc = entry.reference(10);
    INFO(name);
    CHECK(check_derivatives(entry.problem, proc).worst() <= 1e-5);
  }
}

TEST_CASE("abnormal oracle is normalized to (0, 1)") {
  const Vec p = vec({3, 4});
  const auto path = abnormal_multipliers(p, 6);
  for (int s = 1; s <= 7; ++s) {
    const auto n = normalize(path, s);
    CHECK(n.lambda0 == 0.0);
    CHECK(n.at(s).norm() == doctest::Approx(1.0).epsilon(1e-15));
  }
  const auto cert = verify_certificate(abnormal_problem(2), abnormal_reference(2, 6),
                                       path, 1);
  CHECK(cert.pass);
  CHECK(cert.lambda0 == 0.0);
}

TEST_CASE("unknown catalog names are configuration errors") {
  CHECK_THROWS_AS(catalog_entry("nope"), ConfigError);
  CHECK_THROWS(lq_default(5));
}
