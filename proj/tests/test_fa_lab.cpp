#include "helpers.hpp"

#include "ihoc/errors.hpp"
#include "ihoc/fa_lab.hpp"

#include <doctest.h>

#include <cmath>

using namespace ihoc;
using namespace ihoc::testing;

namespace {

SubadditiveFamily norm_family(int dim, int count) {
  SubadditiveFamily f;
  f.dim = dim;
  f.sublinear = true;
  for (int n = 0; n < count; ++n) {
    f.members.push_back([](const Vec &z) { return z.norm(); });
    f.lambda.push_back(1.0);
  }
  return f;
}

Mat rotation(double th) {
  Mat r(2, 2);
  r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  return r;
}

/// Largest singular value by power iteration on M'M.
double power_iteration(const Mat &m, int iters = 2000) {
  Vec v = Vec::Ones(m.cols()).normalized();
  double sigma = 0.0;
  for (int k = 0; k < iters; ++k) {
    Vec w = m.transpose() * (m * v);
    const double nw = w.norm();
    if (nw == 0.0)
      return 0.0;
    v = w / nw;
    sigma = std::sqrt(nw);
  }
  return (m * v).norm() > sigma ? (m * v).norm() : sigma;
}

ConvexBody ball_body(int dim, double radius, int probes = 400) {
  const auto k = ConvexControlSet::ball(Vec::Zero(dim), radius);
  return ConvexBody(k, Vec::Zero(dim), probe_points(k, probes, 0));
}

} // namespace

TEST_CASE("uniform bound of the norm family on the unit ball") {
  const auto body = ball_body(2, 1.0);
  CHECK(uniform_bound_estimate(norm_family(2, 3), body).estimate ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rotation family is a family of isometries") {
  SubadditiveFamily f;
  f.dim = 2;
  for (int n = 0; n < 8; ++n) {
    const Mat r = rotation(0.4 * n);
    f.members.push_back([r](const Vec &z) { return (r * z).norm(); });
    f.lambda.push_back(1.0);
  }
  CHECK(uniform_bound_estimate(f, ball_body(2, 1.0)).estimate ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("absolute linear functionals obey Cauchy-Schwarz") {
  std::mt19937_64 rng(6);
  SubadditiveFamily f;
  f.dim = 3;
  double vmax = 0.0;
  for (int n = 0; n < 10; ++n) {
    Vec v = gaussian(3, rng);
    v *= 3.0 / std::max(3.0, v.norm()) * 0.99;
    vmax = std::max(vmax, v.norm());
    f.members.push_back([v](const Vec &z) { return std::abs(v.dot(z)); });
    f.lambda.push_back(1.0);
  }
  const double est = uniform_bound_estimate(f, ball_body(3, 2.0, 2000)).estimate;
  CHECK(est <= 2.0 * vmax + 1e-12);
  CHECK(est <= 6.0);
  CHECK(est >= 0.8 * 2.0 * vmax);
}

TEST_CASE("uniform bound is monotone in the probe set") {
  const auto k = ConvexControlSet::ball(Vec::Zero(2), 1.0);
  const auto all = probe_points(k, 200, 3);
  SubadditiveFamily f;
  f.dim = 2;
  f.members.push_back([](const Vec &z) { return std::abs(z(0) - 0.3 * z(1)); });
  f.lambda.push_back(1.0);
  double prev = -1.0;
  for (std::size_t size : {5, 20, 80, 200}) {
    const VecSeq sub(all.begin(), all.begin() + static_cast<long>(size));
    const double e = uniform_bound_estimate(f, ConvexBody(k, Vec::Zero(2), sub)).estimate;
    CHECK(e >= prev);
    prev = e;
  }
}

TEST_CASE("operator norm audit examples") {
  std::vector<Mat> rots;
  for (int n = 1; n <= 12; ++n) {
    Mat p = Mat::Identity(2, 2);
    for (int k = 0; k < n; ++k)
      p = rotation(0.3) * p;
    rots.push_back(p);
  }
  std::mt19937_64 rng(1);
  VecSeq probes{gaussian(2, rng), gaussian(2, rng)};
  const auto ar = operator_norm_audit(rots, probes);
  CHECK(ar.uniform == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ar.consistent);

  std::vector<Mat> diag;
  for (int n = 1; n <= 20; ++n) {
    Mat d = Mat::Identity(2, 2);
    d(1, 1) = 1.0 / n;
    diag.push_back(d);
  }
  CHECK(operator_norm_audit(diag, probes).uniform == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("random 2x2 families are cross-checked by power iteration") {
  std::mt19937_64 rng(77);
  for (int k = 0; k < 30; ++k) {
    std::vector<Mat> fam;
    double oracle = 0.0;
    for (int n = 0; n < 6; ++n) {
      fam.push_back(random_matrix(2, 2, rng));
      oracle = std::max(oracle, power_iteration(fam.back()));
    }
    const auto a = operator_norm_audit(fam, {gaussian(2, rng)});
    CHECK(std::abs(a.uniform - oracle) <= 1e-10);
    CHECK(a.consistent);
  }
}

TEST_CASE("operator norm is invariant under orthogonal conjugation") {
  std::mt19937_64 rng(19);
  for (int k = 0; k < 20; ++k) {
    std::vector<Mat> fam, conj;
    const Mat q = Eigen::HouseholderQR<Mat>(random_matrix(3, 3, rng)).householderQ();
    const Mat w = Eigen::HouseholderQR<Mat>(random_matrix(3, 3, rng)).householderQ();
    for (int n = 0; n < 5; ++n) {
      fam.push_back(random_matrix(3, 3, rng));
      conj.push_back(q * fam.back() * w.transpose());
    }
    CHECK(std::abs(operator_norm_audit(fam, {}).uniform -
                   operator_norm_audit(conj, {}).uniform) <= 1e-12);
  }
}

TEST_CASE("subadditivity defects") {
  CHECK(subadditivity_defect(norm_family(3, 2), 200, 1) <= 1e-12);
  CHECK(homogeneity_defect(norm_family(3, 2), 200, 1) <= 1e-12);
  SubadditiveFamily sq;
  sq.dim = 1;
  sq.members.push_back([](const Vec &z) { return z.squaredNorm(); });
  sq.lambda.push_back(1.0);
  CHECK(subadditivity_defect(sq, 200, 1) > 0.0);
}

TEST_CASE("witness search: zero family needs R = 0") {
  SubadditiveFamily f;
  f.dim = 2;
  f.members.push_back([](const Vec &) { return 0.0; });
  f.lambda.push_back(0.0);
  const auto k = unit_box(2);
  const auto res = lemma33_constant_search(f, ConvexBody(k, Vec::Zero(2), probe_points(k, 16, 0)), 5);
  CHECK(res.constant == 0.0);
  CHECK(res.premise_ok);
}

TEST_CASE("witness search: positive parts on the unit square") {
  SubadditiveFamily f;
  f.dim = 2;
  for (double lam : {0.5, 1.0, 2.0}) {
    f.members.push_back([lam](const Vec &z) { return lam * std::max(z(0), 0.0); });
    f.lambda.push_back(lam);
  }
  const auto k = ConvexControlSet::box(Vec::Zero(2), Vec::Ones(2));
  const ConvexBody body(k, Vec::Zero(2), probe_points(k, 64, 0));
  const auto res = lemma33_constant_search(f, body, 9);
  CHECK(res.constant == 1.0);
  CHECK(res.witness.norm() <= 1e-12);
  for (double m : res.margins)
    CHECK(m >= -1e-12);
}

TEST_CASE("witness search: a nonpositive linear functional with lambda = 0") {
  SubadditiveFamily f;
  f.dim = 2;
  const Vec v = vec({-1, -1});
  f.members.push_back([v](const Vec &z) { return v.dot(z); });
  f.lambda.push_back(0.0);
  const auto k = ConvexControlSet::box(Vec::Zero(2), Vec::Ones(2));
  const Vec a = vec({0.5, 0.5});
  const ConvexBody body(k, a, probe_points(k, 64, 0));
  const auto res = lemma33_constant_search(f, body, 11);
  CHECK(res.premise_ok);
  // oracle: sup_B p(h - a) = 1 at h = 0, and p(b - a) peaks at b = 0 with value 1
  CHECK(res.constant == 1.0);
  CHECK(res.witness.norm() <= 1e-12);
  CHECK(res.margins[0] >= -1e-12);
}

TEST_CASE("witness search reports failure on a too-short ladder") {
  SubadditiveFamily f;
  f.dim = 1;
  f.members.push_back([](const Vec &z) { return 100.0 * std::abs(z(0)); });
  f.lambda.push_back(1e-6);
  const auto k = unit_box(1);
  // K = {a} forces b = a, so R must reach 1e8
  const auto pt = ConvexControlSet::box(Vec::Zero(1), Vec::Zero(1));
  const ConvexBody body(pt, Vec::Zero(1), {scalar(1)});
  CHECK_THROWS_AS(lemma33_constant_search(f, body, 3, 4), NoWitnessFound);
  CHECK_NOTHROW(lemma33_constant_search(f, ConvexBody(k, Vec::Zero(1), {scalar(1)}), 9, 20));
}

TEST_CASE("convex body preconditions") {
  const auto k = unit_box(2);
  CHECK_THROWS_AS(ConvexBody(k, vec({2, 0}), {vec({0, 0})}), PointNotInSet);
  CHECK_THROWS_AS(ConvexBody(k, vec({0, 0}), {}), Error);
}

TEST_CASE("normalized families cannot vanish entrywise in finite dimension") {
  // lambda + |f| = 1 and |f| <= sqrt(d) max_i |f_i| keep max(lambda, |f_i|) away
  // from zero
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int d = 1; d <= 6; ++d) {
    for (int k = 0; k < 200; ++k) {
      const double lam = std::pow(unif(rng), 8);
      Vec f = gaussian(d, rng);
      f *= (1.0 - lam) / f.norm();
      const double entry = f.lpNorm<Eigen::Infinity>();
      CHECK(std::max(lam, entry) >= 1.0 / (1.0 + std::sqrt(double(d))) - 1e-15);
    }
  }
}
