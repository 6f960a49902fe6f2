#include "helpers.hpp"

#include "ihoc/catalog.hpp"
#include "ihoc/errors.hpp"
#include "ihoc/pontryagin.hpp"

#include <doctest.h>

#include <cmath>

using namespace ihoc;
using namespace ihoc::testing;

namespace {

/// Maximum of <q, v - u> over the 2^m vertices of a box.
double vertex_max(const Vec &lo, const Vec &hi, const Vec &u, const Vec &q) {
  const int m = static_cast<int>(lo.size());
  double best = -std::numeric_limits<double>::infinity();
  for (long mask = 0; mask < (1L << m); ++mask) {
    Vec v(m);
    for (int i = 0; i < m; ++i)
      v(i) = (mask >> i) & 1 ? hi(i) : lo(i);
    best = std::max(best, q.dot(v - u));
  }
  return best;
}

struct LqFixture {
  LqParams params = lq_default(2);
  RiccatiSolution ric =
      riccati_stationary(params.a, params.b, params.q, params.r, params.discount);
  ControlProblem problem = lq_problem(params);
  Process proc = lq_reference(params, ric, 20);
  MultiplierPath path = lq_multipliers(params, ric, proc);
};

} // namespace

TEST_CASE("adjoint step examples") {
  const auto id = stationary_problem(std::make_shared<StaticDynamics>(2, 1),
                                     std::make_shared<ZeroReward>(2, 1), unit_box(1),
                                     Vec::Zero(2));
  Process proc;
  proc.x.assign(4, Vec::Zero(2));
  proc.u.assign(3, Vec::Zero(1));
  const Vec pn = vec({1, -2});
  CHECK((adjoint_step(id, proc, 1, pn, 1.0) - pn).norm() == 0.0);

  const Vec c = vec({0.5, 3});
  const auto lin = stationary_problem(std::make_shared<StaticDynamics>(2, 1),
                                      std::make_shared<LinearReward>(c, Vec::Zero(1)),
                                      unit_box(1), Vec::Zero(2));
  CHECK((adjoint_step(lin, proc, 1, pn, 1.0) - (pn + c)).norm() == 0.0);

  const auto sc = stationary_problem(
      std::make_shared<LinearDynamics>(mat1(2), mat1(1)),
      std::make_shared<QuadraticReward>(mat1(1), mat1(0)), unit_box(1), scalar(1));
  Process one;
  one.x.assign(4, scalar(1));
  one.u.assign(3, scalar(0));
  CHECK(adjoint_step(sc, one, 1, scalar(3), 1.0)(0) == doctest::Approx(4.0));
}

TEST_CASE("adjoint sweep examples") {
  const auto id = stationary_problem(std::make_shared<StaticDynamics>(1, 1),
                                     std::make_shared<ZeroReward>(1, 1), unit_box(1),
                                     scalar(0));
  Process proc;
  proc.x.assign(6, scalar(0));
  proc.u.assign(5, scalar(0));
  const auto zero = adjoint_sweep(id, proc, scalar(0), 1.0, 4);
  for (const auto &p : zero.p)
    CHECK(p.norm() == 0.0);

  LqFixture lq;
  const auto sweep = adjoint_sweep(lq.problem, lq.proc, lq.path.at(21), 1.0, 20);
  for (int t = 1; t <= 21; ++t)
    CHECK((sweep.at(t) - lq.path.at(t)).norm() <= 1e-6);
}

TEST_CASE("vi residual examples") {
  const auto u = unit_box(1);
  CHECK(vi_residual(u, scalar(0.5), scalar(2)) == doctest::Approx(1.0));
  CHECK(vi_residual(u, scalar(1), scalar(2)) == doctest::Approx(0.0));
  const auto ball = ConvexControlSet::ball(Vec::Zero(2), 1.0);
  CHECK(std::abs(vi_residual(ball, vec({0.6, 0.8}), vec({3, 4}))) <= 1e-12);
  CHECK_THROWS_AS(vi_residual(u, scalar(2), scalar(1)), PointNotInSet);
}

TEST_CASE("vi residual equals the box vertex maximum and is nonnegative") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> dim(1, 10);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 300; ++k) {
    const int m = dim(rng);
    const Vec lo = -Vec::Random(m).cwiseAbs() - Vec::Constant(m, 0.1);
    const Vec hi = Vec::Random(m).cwiseAbs();
    Vec uh(m);
    for (int i = 0; i < m; ++i)
      uh(i) = lo(i) + unif(rng) * (hi(i) - lo(i));
    if (k % 3 == 0)
      uh(0) = hi(0);
    const Vec q = gaussian(m, rng);
    const auto set = ConvexControlSet::box(lo, hi);
    const double r = vi_residual(set, uh, q);
    CHECK(std::abs(r - vertex_max(lo, hi, uh, q)) <= 1e-12);
    CHECK(r >= -1e-12);
  }
}

TEST_CASE("interior points force q to be small when the VI gap is small") {
  std::mt19937_64 rng(31);
  const auto set = unit_box(3);
  const Vec uh = vec({0.2, -0.1, 0.3});
  const double rho = set.boundary_distance(uh);
  const double tol = 1e-3;
  for (int k = 0; k < 500; ++k) {
    const Vec q = gaussian(3, rng, 1e-3);
    if (vi_residual(set, uh, q) <= tol)
      CHECK(q.norm() <= 2 * tol / rho);
  }
}

TEST_CASE("oracle certificate passes on LQ") {
  LqFixture lq;
  const auto cert = verify_certificate(lq.problem, lq.proc, lq.path, 1, 1e-6);
  CHECK(cert.pass);
  const auto scaled = verify_certificate(lq.problem, lq.proc, lq.path.scaled(7.0), 1, 1e-6);
  CHECK(scaled.pass == cert.pass);
  CHECK(scaled.adjoint_ok == cert.adjoint_ok);
  CHECK(scaled.vi_ok == cert.vi_ok);
}

TEST_CASE("zero path fails nontriviality at every t >= s") {
  LqFixture lq;
  MultiplierPath zero;
  zero.p.assign(21, Vec::Zero(2));
  const auto cert = verify_certificate(lq.problem, lq.proc, zero, 3, 1e-6);
  CHECK_FALSE(cert.pass);
  CHECK_FALSE(cert.nontrivial_ok);
  std::vector<int> expected;
  for (int t = 3; t <= 21; ++t)
    expected.push_back(t);
  CHECK(cert.nontrivial_failures == expected);
}

TEST_CASE("residuals scale linearly with the multipliers") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> cdist(1e-3, 1e3);
  LqFixture lq;
  MultiplierPath noisy = lq.path;
  for (auto &p : noisy.p)
    p += gaussian(2, rng, 1e-4);
  const auto base = verify_certificate(lq.problem, lq.proc, noisy, 1, 1e-6);
  for (int k = 0; k < 50; ++k) {
    const double c = cdist(rng);
    const auto sc = verify_certificate(lq.problem, lq.proc, noisy.scaled(c), 1, 1e-6);
    for (std::size_t i = 0; i < base.adjoint.size(); ++i)
      CHECK(sc.adjoint[i] == doctest::Approx(c * base.adjoint[i]).epsilon(1e-9));
    for (std::size_t i = 0; i < base.vi.size(); ++i)
      CHECK(sc.vi[i] == doctest::Approx(c * base.vi[i]).epsilon(1e-9));
    CHECK(sc.pass == base.pass);
    CHECK(sc.adjoint_failures == base.adjoint_failures);
    CHECK(sc.vi_failures == base.vi_failures);
  }
}

TEST_CASE("normalization") {
  LqFixture lq;
  const auto n1 = normalize(lq.path, 2);
  CHECK(std::abs(n1.lambda0 + n1.at(2).norm() - 1.0) <= 1e-15);
  const auto n2 = normalize(n1, 2);
  CHECK(n2.lambda0 == n1.lambda0);
  for (int t = 1; t <= n1.last_index(); ++t)
    CHECK((n2.at(t) - n1.at(t)).norm() <= 1e-15);
  MultiplierPath zero;
  zero.p.assign(3, Vec::Zero(2));
  CHECK_THROWS_AS(normalize(zero, 1), Error);
  CHECK_THROWS_AS(normalize(lq.path, 40), IndexMismatch);
}

TEST_CASE("certificate needs p_{T+1}") {
  LqFixture lq;
  MultiplierPath short_path = lq.path;
  short_path.p.pop_back();
  CHECK_THROWS(verify_certificate(lq.problem, lq.proc, short_path, 1));
}

TEST_CASE("inequation sign condition") {
  RamseyParams rp;
  const auto p = ramsey_problem(rp, Mode::inequation);
  const auto proc = ramsey_reference(rp, 10);
  const auto path = ramsey_multipliers(rp, proc);
  CHECK(verify_certificate(p, proc, path, 1).pass);
  auto neg = path;
  neg.at(4) = -neg.at(4);
  const auto cert = verify_certificate(p, proc, neg, 1);
  CHECK_FALSE(cert.sign_ok);
  CHECK(std::find(cert.sign_failures.begin(), cert.sign_failures.end(), 4) !=
        cert.sign_failures.end());
}

TEST_CASE("bound audit: identity dynamics and zero reward give zero slack") {
  const auto id = stationary_problem(std::make_shared<StaticDynamics>(1, 1),
                                     std::make_shared<ZeroReward>(1, 1),
                                     unit_box(1, 10.0), scalar(0));
  Process proc;
  proc.x.assign(12, scalar(0));
  proc.u.assign(11, scalar(0));
  std::map<int, MultiplierPath> paths;
  for (int T : {5, 10}) {
    MultiplierPath p;
    p.lambda0 = 0.0;
    p.p.assign(static_cast<std::size_t>(T + 1), scalar(1));
    paths[T] = p;
  }
  const auto audit = bound_audit(id, proc, paths, 1);
  CHECK(audit.ok());
  for (const auto &[T, s] : audit.slack)
    for (double v : s)
      CHECK(std::abs(v) <= 1e-12);
  for (std::size_t t = 1; t < audit.a.size(); ++t) {
    CHECK(audit.a[t] == doctest::Approx(0.0));
    CHECK(audit.b[t] == doctest::Approx(1.0));
  }
}

TEST_CASE("bound audit throws MarginZero when r_t vanishes") {
  const auto p = abnormal_problem(1);
  const auto proc = abnormal_reference(1, 6);
  std::map<int, MultiplierPath> paths{{5, abnormal_multipliers(scalar(1), 5)}};
  // static dynamics still have r_t = 1 (D1 f = I)
  CHECK_NOTHROW(bound_audit(p, proc, paths, 1));
  const auto dead = stationary_problem(std::make_shared<LinearDynamics>(mat1(0), mat1(0)),
                                       std::make_shared<ZeroReward>(1, 1), unit_box(1),
                                       scalar(0));
  CHECK_THROWS_AS(bound_audit(dead, proc, paths, 1), MarginZero);
}

TEST_CASE("bound audit on LQ across horizons") {
  LqFixture lq;
  std::map<int, MultiplierPath> paths;
  for (int T : {5, 10, 20}) {
    const auto proc = lq_reference(lq.params, lq.ric, T);
    paths[T] = normalize(lq_multipliers(lq.params, lq.ric, proc), 1);
  }
  const auto audit = bound_audit(lq.problem, lq.proc, paths, 1);
  CHECK(audit.min_slack >= 0.0 - 1e-12);
}

TEST_CASE("cone bound check") {
  LqFixture lq;
  const auto gens = sample_cone_generators(lq.problem.control_set(1), lq.proc.u[1], 32, 4);
  const auto rep = cone_bound_check(lq.problem, lq.proc, lq.path, 2, gens);
  CHECK(rep.worst <= 1e-7);

  const auto p = abnormal_problem(1);
  const auto proc = abnormal_reference(1, 5);
  const auto g = sample_cone_generators(p.control_set(0), proc.u[0], 16, 1);
  const auto ab = cone_bound_check(p, proc, abnormal_multipliers(scalar(1), 5), 1, g);
  CHECK(ab.ok(1e-12));

  VecSeq outward{scalar(1)};
  Process edge = proc;
  edge.u[0] = scalar(1);
  CHECK_THROWS_AS(cone_bound_check(p, edge, abnormal_multipliers(scalar(1), 5), 1, outward),
                  TangentConeViolation);
}
