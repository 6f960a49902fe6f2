#include "ihoc/assumptions.hpp"

#include "ihoc/errors.hpp"
#include "ihoc/linalg.hpp"

#include <fmt/core.h>

#include <random>

namespace ihoc {

double DerivativeReport::worst() const {
  double w = 0.0;
  for (const auto &s : stages)
    w = std::max(w, s.worst());
  return w;
}

double relative_error(const Mat &analytic, const Mat &numeric) {
  if (analytic.size() == 0)
    return 0.0;
  const double scale = std::max(1.0, analytic.lpNorm<Eigen::Infinity>());
  return (analytic - numeric).lpNorm<Eigen::Infinity>() / scale;
}

namespace {

void require_finite(const Mat &m, const char *what, int t) {
  if (!m.allFinite())
    throw NonFiniteValue(fmt::format("{} non-finite at stage {}", what, t));
}

} // namespace

DerivativeReport check_derivatives(const ControlProblem &problem,
                                   const Process &proc, double h) {
  if (!(h > 0.0))
    throw Error("finite-difference step must be positive");
  const int n = problem.state_dim();
  const int m = problem.control_dim();
  DerivativeReport rep;
  rep.step = h;
  for (int t = 0; t <= proc.horizon(); ++t) {
    const Vec &x = proc.x[static_cast<std::size_t>(t)];
    const Vec &u = proc.u[static_cast<std::size_t>(t)];
    const Mat fx = problem.fx(t, x, u);
    const Mat fu = problem.fu(t, x, u);
    const Vec gx = problem.phix(t, x, u);
    const Vec gu = problem.phiu(t, x, u);
    require_finite(fx, "D1 f", t);
    require_finite(fu, "D2 f", t);
    require_finite(gx, "D1 phi", t);
    require_finite(gu, "D2 phi", t);

    Mat nfx(n, n), nfu(n, m);
    Vec ngx(n), ngu(m);
    for (int j = 0; j < n; ++j) {
      Vec xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      const Vec fp = problem.f(t, xp, u), fm = problem.f(t, xm, u);
      const double pp = problem.phi(t, xp, u), pm = problem.phi(t, xm, u);
      require_finite(fp, "f", t);
      require_finite(fm, "f", t);
      if (!std::isfinite(pp) || !std::isfinite(pm))
        throw NonFiniteValue(fmt::format("phi non-finite at stage {}", t));
      nfx.col(j) = (fp - fm) / (2.0 * h);
      ngx(j) = (pp - pm) / (2.0 * h);
    }
    for (int j = 0; j < m; ++j) {
      Vec up = u, um = u;
      up(j) += h;
      um(j) -= h;
      const Vec fp = problem.f(t, x, up), fm = problem.f(t, x, um);
      const double pp = problem.phi(t, x, up), pm = problem.phi(t, x, um);
      require_finite(fp, "f", t);
      require_finite(fm, "f", t);
      if (!std::isfinite(pp) || !std::isfinite(pm))
        throw NonFiniteValue(fmt::format("phi non-finite at stage {}", t));
      nfu.col(j) = (fp - fm) / (2.0 * h);
      ngu(j) = (pp - pm) / (2.0 * h);
    }
    rep.stages.push_back({t, relative_error(fx, nfx), relative_error(fu, nfu),
                          relative_error(gx, ngx), relative_error(gu, ngu)});
  }
  return rep;
}

VecSeq unit_directions(int n, int count, std::uint64_t seed) {
  VecSeq dirs;
  for (int i = 0; i < n; ++i)
    for (double sign : {1.0, -1.0}) {
      Vec e = Vec::Zero(n);
      e(i) = sign;
      dirs.push_back(e);
    }
  if (n == 1)
    return dirs;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (static_cast<int>(dirs.size()) < 2 * n + count) {
    Vec d(n);
    for (int i = 0; i < n; ++i)
      d(i) = gauss(rng);
    const double nd = d.norm();
    if (nd > 1e-12)
      dirs.push_back(d / nd);
  }
  return dirs;
}

double interiority_margin(const Mat &fx, const Mat &fu,
                          const ConvexControlSet &set, const Vec &u_hat,
                          const VecSeq &directions) {
  const auto n = fx.rows();
  const auto m = fu.cols();
  if (fx.cols() != n || fu.rows() != n || set.dim() != m)
    throw DimensionMismatch("interiority margin: derivative shapes disagree");
  Mat joint(n, n + m);
  joint << fx, fu;
  const Mat cone = set.tangent_cone_rows(u_hat);
  if (cone.rows() == 0)
    return linalg::inscribed_radius(joint);

  Mat ain = Mat::Zero(cone.rows(), n + m);
  ain.rightCols(m) = cone;
  const Vec bin = Vec::Zero(cone.rows());
  const Vec origin = Vec::Zero(n + m);
  double r = std::numeric_limits<double>::infinity();
  for (const auto &d : directions) {
    auto z = linalg::project_polyhedron(origin, joint, d, ain, bin);
    if (!z)
      return 0.0;
    const double nz = z->norm();
    if (nz == 0.0)
      continue;
    r = std::min(r, d.norm() / nz);
  }
  return r;
}

double interiority_margin(const Mat &fx, const Mat &fu,
                          const ConvexControlSet &set, const Vec &u_hat,
                          int direction_samples, std::uint64_t seed) {
  return interiority_margin(
      fx, fu, set, u_hat,
      unit_directions(static_cast<int>(fx.rows()), direction_samples, seed));
}

double interiority_margin(const ControlProblem &problem, const Process &proc,
                          int t, int direction_samples, std::uint64_t seed) {
  if (t < 1)
    throw IndexMismatch("interiority margin is defined for t >= 1");
  const Vec x = proc.state(t);
  const Vec u = proc.control(t);
  return interiority_margin(problem.fx(t, x, u), problem.fu(t, x, u),
                            problem.control_set(t), u, direction_samples, seed);
}

RankCodim rank_codim(const Mat &fu) {
  const int r = linalg::numerical_rank(fu);
  return {r, static_cast<int>(fu.rows()) - r};
}

RankCodim rank_codim(const ControlProblem &problem, const Process &proc, int t) {
  if (t < 0)
    throw IndexMismatch("negative stage index");
  return rank_codim(problem.fu(t, proc.state(t), proc.control(t)));
}

Mat tangent_cone_span(const ConvexControlSet &set, const Vec &u_hat) {
  const Mat rows = set.tangent_cone_rows(u_hat);
  // a row is an implicit equality of {k : rows k <= 0} exactly when the
  // projection of its negation onto the cone vanishes
  std::vector<Eigen::Index> implicit;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const Vec probe = -rows.row(i).transpose();
    if (linalg::project_cone(probe, rows).norm() <= 1e-12)
      implicit.push_back(i);
  }
  Mat eq(static_cast<Eigen::Index>(implicit.size()), set.dim());
  for (std::size_t k = 0; k < implicit.size(); ++k)
    eq.row(static_cast<Eigen::Index>(k)) = rows.row(implicit[k]);
  return linalg::null_space(eq);
}

AnchorReport anchor_check(const Mat &fu, const ConvexControlSet &set,
                          const Vec &u_hat) {
  AnchorReport rep;
  const Mat span = tangent_cone_span(set, u_hat);
  const int n = static_cast<int>(fu.rows());
  rep.span_dim = span.cols() == 0 ? 0 : linalg::numerical_rank(fu * span);
  rep.affine_codim = n - rep.span_dim;
  rep.relative_interior_nonempty = true;
  return rep;
}

AnchorReport anchor_check(const ControlProblem &problem, const Process &proc,
                          int s) {
  const Vec x = proc.state(s);
  const Vec u = proc.control(s);
  auto rep = anchor_check(problem.fu(s, x, u), problem.control_set(s), u);
  rep.stage = s;
  return rep;
}

} // namespace ihoc
