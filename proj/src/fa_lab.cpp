#include "ihoc/fa_lab.hpp"

#include "ihoc/errors.hpp"
#include "ihoc/linalg.hpp"

#include <fmt/core.h>

#include <cmath>
#include <limits>
#include <random>

namespace ihoc {

void SubadditiveFamily::validate() const {
  if (dim < 1)
    throw Error("family dimension must be positive");
  if (lambda.size() != members.size())
    throw Error("family needs one companion scalar per member");
  for (double l : lambda)
    if (!(l >= 0.0))
      throw Error("companion scalars must be nonnegative");
}

namespace {

Vec gaussian(int dim, std::mt19937_64 &rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Vec v(dim);
  for (int i = 0; i < dim; ++i)
    v(i) = g(rng);
  return v;
}

} // namespace

double subadditivity_defect(const SubadditiveFamily &family, int pairs,
                            std::uint64_t seed, double scale) {
  family.validate();
  std::mt19937_64 rng(seed);
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < pairs; ++k) {
    const Vec x = gaussian(family.dim, rng, scale);
    const Vec y = gaussian(family.dim, rng, scale);
    for (int n = 0; n < family.size(); ++n)
      worst = std::max(worst, family.eval(n, x + y) - family.eval(n, x) -
                                  family.eval(n, y));
  }
  return worst;
}

double homogeneity_defect(const SubadditiveFamily &family, int samples,
                          std::uint64_t seed) {
  family.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> alpha(0.0, 5.0);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Vec z = gaussian(family.dim, rng, 1.0);
    const double a = alpha(rng);
    for (int n = 0; n < family.size(); ++n)
      worst = std::max(worst,
                       std::abs(family.eval(n, a * z) - a * family.eval(n, z)));
  }
  return worst;
}

ConvexBody::ConvexBody(ConvexControlSet k, Vec point, VecSeq b)
    : set(std::move(k)), a(std::move(point)), probes(std::move(b)) {
  if (a.size() != set.dim())
    throw DimensionMismatch("distinguished point has the wrong dimension");
  if (!set.contains(a, 1e-12))
    throw PointNotInSet("distinguished point a is not in K");
  if (probes.empty())
    throw Error("probe set B is empty");
  for (const auto &h : probes) {
    if (h.size() != set.dim())
      throw DimensionMismatch("probe has the wrong dimension");
    probe_radius = std::max(probe_radius, h.norm());
  }
}

VecSeq probe_points(const ConvexControlSet &set, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return set.sample(count, rng);
}

UniformBound uniform_bound_estimate(const SubadditiveFamily &family,
                                    const ConvexBody &body) {
  family.validate();
  UniformBound ub;
  ub.estimate = -std::numeric_limits<double>::infinity();
  for (int n = 0; n < family.size(); ++n) {
    for (const auto &h : body.probes) {
      const double v = family.eval(n, h - body.a);
      if (!std::isfinite(v))
        throw NonFiniteValue(fmt::format("p_{} is not finite on a probe", n));
      if (v > ub.estimate) {
        ub.estimate = v;
        ub.member = n;
        ub.probe = h;
      }
    }
  }
  return ub;
}

OperatorNormAudit operator_norm_audit(const std::vector<Mat> &operators,
                                      const VecSeq &probes) {
  OperatorNormAudit audit;
  for (std::size_t i = 0; i < operators.size(); ++i) {
    const double nrm = linalg::op_norm(operators[i]);
    if (nrm > audit.uniform || audit.argmax < 0) {
      audit.uniform = nrm;
      audit.argmax = static_cast<int>(i);
    }
  }
  audit.consistent = true;
  for (const auto &x : probes) {
    double sup = 0.0;
    for (const auto &op : operators)
      sup = std::max(sup, (op * x).norm());
    audit.pointwise.push_back(sup);
    const double nx = x.norm();
    if (nx > 0.0 && sup / nx > audit.uniform * (1.0 + 1e-12) + 1e-15)
      audit.consistent = false;
  }
  return audit;
}

namespace {

void bounding_box(const ConvexControlSet &set, Vec &lo, Vec &hi) {
  switch (set.kind()) {
  case ConvexControlSet::Kind::box:
    lo = set.lo();
    hi = set.hi();
    return;
  case ConvexControlSet::Kind::ball:
    lo = set.center().array() - set.radius();
    hi = set.center().array() + set.radius();
    return;
  case ConvexControlSet::Kind::polytope:
    if (!set.bounded())
      throw Error("grid search needs a bounded body K");
    lo = hi = set.vertices().front();
    for (const auto &v : set.vertices()) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    return;
  }
}

} // namespace

Lemma33Result lemma33_constant_search(const SubadditiveFamily &family,
                                      const ConvexBody &body, int resolution,
                                      int ladder_max) {
  family.validate();
  if (resolution < 2)
    throw Error("grid resolution must be at least 2");
  const int dim = body.set.dim();
  const int count = family.size();

  Lemma33Result res;
  res.sup_over_probes.assign(static_cast<std::size_t>(count),
                             -std::numeric_limits<double>::infinity());
  for (int n = 0; n < count; ++n)
    for (const auto &h : body.probes)
      res.sup_over_probes[n] =
          std::max(res.sup_over_probes[n], family.eval(n, h - body.a));

  std::vector<double> ladder{0.0};
  for (int k = 0; k <= ladder_max; ++k)
    ladder.push_back(std::ldexp(1.0, k));

  // premise: wherever lambda_n = 0, p_n must stay nonpositive on K
  {
    std::mt19937_64 rng(0);
    for (const auto &z : body.set.sample(64, rng))
      for (int n = 0; n < count; ++n)
        if (family.lambda[n] == 0.0 && family.eval(n, z) > 1e-12)
          res.premise_ok = false;
  }

  Vec lo, hi;
  bounding_box(body.set, lo, hi);
  const AffineHull aff = body.set.affine_hull();
  const double cells = std::pow(resolution, dim);
  if (cells > 2e6)
    throw Error("grid too large; lower the resolution");

  double best_r = std::numeric_limits<double>::infinity();
  double best_dist = std::numeric_limits<double>::infinity();
  Vec best_b;
  const long total = static_cast<long>(cells);
  for (long cell = 0; cell < total; ++cell) {
    long rem = cell;
    Vec g(dim);
    for (int i = 0; i < dim; ++i) {
      const int k = static_cast<int>(rem % resolution);
      rem /= resolution;
      g(i) = lo(i) + (hi(i) - lo(i)) * k / (resolution - 1);
    }
    // place the candidate on Aff(K)
    const Vec b = aff.point + aff.directions * (aff.directions.transpose() *
                                                (g - aff.point));
    ++res.candidates;
    double r_lo = 0.0, r_hi = std::numeric_limits<double>::infinity();
    bool feasible = true;
    for (int n = 0; n < count && feasible; ++n) {
      const double d = family.lambda[n] + family.eval(n, b - body.a);
      const double s = res.sup_over_probes[n];
      if (d > 0.0)
        r_lo = std::max(r_lo, s / d);
      else if (d == 0.0)
        feasible = s <= 0.0;
      else if (s <= 0.0)
        r_hi = std::min(r_hi, s / d);
      else
        feasible = false;
    }
    if (!feasible)
      continue;
    for (double r : ladder) {
      if (r > best_r)
        break;
      if (r >= r_lo * (1.0 - 1e-12) && r <= r_hi) {
        const double dist = (b - body.a).norm();
        if (r < best_r || dist < best_dist) {
          best_r = r;
          best_dist = dist;
          best_b = b;
        }
        break;
      }
    }
  }
  if (!std::isfinite(best_r))
    throw NoWitnessFound(fmt::format(
        "no witness at resolution {} with R <= 2^{}", resolution, ladder_max));
  res.witness = best_b;
  res.constant = best_r;
  for (int n = 0; n < count; ++n)
    res.margins.push_back(
        best_r * (family.lambda[n] + family.eval(n, best_b - body.a)) -
        res.sup_over_probes[n]);
  return res;
}

} // namespace ihoc
