#include "ihoc/pontryagin.hpp"

#include "ihoc/assumptions.hpp"
#include "ihoc/errors.hpp"
#include "ihoc/linalg.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace ihoc {

double MultiplierPath::scale() const {
  double m = 0.0;
  for (const auto &v : p)
    m = std::max(m, v.norm());
  return lambda0 + m;
}

MultiplierPath MultiplierPath::scaled(double c) const {
  MultiplierPath out = *this;
  out.lambda0 = c * lambda0;
  for (auto &v : out.p)
    v *= c;
  out.normalized_at.reset();
  return out;
}

MultiplierPath normalize(const MultiplierPath &path, int s) {
  if (s < 1 || s > path.last_index())
    throw IndexMismatch(fmt::format("normalization stage {} outside 1..{}", s,
                                    path.last_index()));
  const double c = path.lambda0 + path.at(s).norm();
  if (!(c > 0.0))
    throw Error(fmt::format("(lambda0, p_{}) vanishes; cannot normalize", s));
  MultiplierPath out = path;
  if (std::abs(c - 1.0) > 1e-15) {
    out.lambda0 = path.lambda0 / c;
    for (auto &v : out.p)
      v /= c;
  }
  out.normalized_at = s;
  return out;
}

Vec adjoint_step(const ControlProblem &problem, const Process &proc, int t,
                 const Vec &p_next, double lambda0) {
  if (t < 1)
    throw IndexMismatch("the adjoint recursion starts at t = 1");
  if (p_next.size() != problem.state_dim())
    throw DimensionMismatch("costate has the wrong dimension");
  const Vec x = proc.state(t);
  const Vec u = proc.control(t);
  const Vec p = problem.fx(t, x, u).transpose() * p_next +
                lambda0 * problem.phix(t, x, u);
  if (!p.allFinite())
    throw NonFiniteValue(fmt::format("adjoint step non-finite at stage {}", t));
  return p;
}

MultiplierPath adjoint_sweep(const ControlProblem &problem, const Process &proc,
                             const Vec &p_terminal, double lambda0, int T) {
  if (T < 1)
    throw IndexMismatch("adjoint sweep needs T >= 1");
  MultiplierPath path;
  path.lambda0 = lambda0;
  path.p.assign(static_cast<std::size_t>(T + 1), Vec());
  path.at(T + 1) = p_terminal;
  for (int t = T; t >= 1; --t)
    path.at(t) = adjoint_step(problem, proc, t, path.at(t + 1), lambda0);
  return path;
}

double vi_residual(const ConvexControlSet &set, const Vec &u_hat,
                   const Vec &q) {
  if (q.size() != set.dim() || u_hat.size() != set.dim())
    throw DimensionMismatch("variational inequality: dimension mismatch");
  if (!set.contains(u_hat, 1e-8))
    throw PointNotInSet("control is not in its control set");
  return set.support(q) - q.dot(u_hat);
}

double vi_residual(const ControlProblem &problem, const Process &proc, int t,
                   const Vec &p_next, double lambda0) {
  const Vec x = proc.state(t);
  const Vec u = proc.control(t);
  const Vec q = lambda0 * problem.phiu(t, x, u) +
                problem.fu(t, x, u).transpose() * p_next;
  if (!q.allFinite())
    throw NonFiniteValue(fmt::format("VI functional non-finite at stage {}", t));
  return vi_residual(problem.control_set(t), u, q);
}

double Certificate::worst_adjoint() const {
  return adjoint.empty() ? 0.0 : *std::max_element(adjoint.begin(), adjoint.end());
}

double Certificate::worst_vi() const {
  return vi.empty() ? 0.0 : *std::max_element(vi.begin(), vi.end());
}

Certificate verify_certificate(const ControlProblem &problem,
                               const Process &proc, const MultiplierPath &path,
                               int s, double tol) {
  const int T = proc.horizon();
  if (T < 1)
    throw IndexMismatch("certificate needs a window with T >= 1");
  if (path.last_index() < T + 1)
    throw IndexMismatch(fmt::format(
        "multiplier path has p_1..p_{} but the window needs p_1..p_{}",
        path.last_index(), T + 1));
  if (s < 1)
    throw IndexMismatch("anchor stage s must be at least 1");

  Certificate c;
  c.horizon = T;
  c.anchor_s = s;
  c.tol = tol;
  c.mode = problem.mode();
  c.lambda0 = path.lambda0;
  double pmax = 0.0;
  for (int t = 1; t <= T + 1; ++t)
    pmax = std::max(pmax, path.at(t).norm());
  c.scale = path.lambda0 + pmax;
  const double bar = tol * c.scale;

  for (int t = 1; t <= T; ++t) {
    const Vec rhs = adjoint_step(problem, proc, t, path.at(t + 1), path.lambda0);
    const double r = (path.at(t) - rhs).norm();
    c.adjoint.push_back(r);
    if (!(r <= bar))
      c.adjoint_failures.push_back(t);
  }
  for (int t = 0; t <= T; ++t) {
    const double r = vi_residual(problem, proc, t, path.at(t + 1), path.lambda0);
    c.vi.push_back(r);
    if (!(r <= bar))
      c.vi_failures.push_back(t);
  }
  for (int t = 1; t <= T + 1; ++t) {
    const double mgn = path.lambda0 + path.at(t).norm();
    c.margin.push_back(mgn);
    if (t >= s && (c.scale == 0.0 || !(mgn >= bar)))
      c.nontrivial_failures.push_back(t);
  }
  bool sign = path.lambda0 >= -bar;
  if (problem.mode() == Mode::inequation) {
    for (int t = 1; t <= T + 1; ++t) {
      const double lo = path.at(t).size() ? path.at(t).minCoeff() : 0.0;
      c.positivity.push_back(lo);
      if (!(lo >= -bar))
        c.sign_failures.push_back(t);
    }
  }
  c.sign_ok = sign && c.sign_failures.empty();
  c.adjoint_ok = c.adjoint_failures.empty();
  c.vi_ok = c.vi_failures.empty();
  c.nontrivial_ok = c.nontrivial_failures.empty();
  c.pass = c.adjoint_ok && c.vi_ok && c.nontrivial_ok && c.sign_ok;
  return c;
}

BoundAudit bound_audit(const ControlProblem &problem, const Process &proc,
                       const std::map<int, MultiplierPath> &paths_by_horizon,
                       int s, int direction_samples, std::uint64_t seed) {
  if (paths_by_horizon.empty())
    throw Error("bound audit needs at least one horizon");
  if (s < 1)
    throw IndexMismatch("anchor stage s must be at least 1");
  const int tmax = paths_by_horizon.rbegin()->first;
  if (paths_by_horizon.begin()->first < s)
    throw IndexMismatch("every audited horizon must satisfy T >= s");

  BoundAudit audit;
  audit.anchor_s = s;
  audit.margins.assign(static_cast<std::size_t>(tmax + 1), 0.0);
  audit.a.assign(static_cast<std::size_t>(tmax + 2), 0.0);
  audit.b.assign(static_cast<std::size_t>(tmax + 2), 0.0);
  auto idx = [](int t) { return static_cast<std::size_t>(t); };

  audit.a[idx(s)] = 0.0;
  audit.b[idx(s)] = 1.0;
  for (int t = s; t <= tmax; ++t) {
    const double r =
        interiority_margin(problem, proc, t, direction_samples, seed);
    audit.margins[idx(t)] = r;
    if (!(r > 1e-14))
      throw MarginZero(fmt::format("interiority margin vanishes at stage {}", t),
                       t);
    const Vec x = proc.state(t), u = proc.control(t);
    const double dphi = std::hypot(problem.phix(t, x, u).norm(),
                                   problem.phiu(t, x, u).norm());
    audit.a[idx(t + 1)] = (audit.a[idx(t)] + dphi) / r;
    audit.b[idx(t + 1)] = audit.b[idx(t)] / r;
  }
  for (int t = s - 1; t >= 1; --t) {
    const Vec x = proc.state(t), u = proc.control(t);
    const double nfx = linalg::op_norm(problem.fx(t, x, u));
    audit.a[idx(t)] = audit.a[idx(t + 1)] * nfx + problem.phix(t, x, u).norm();
    audit.b[idx(t)] = audit.b[idx(t + 1)] * nfx;
  }

  for (const auto &[T, path] : paths_by_horizon) {
    if (path.last_index() < T + 1)
      throw IndexMismatch(fmt::format("path for T = {} is too short", T));
    const double ps = path.at(s).norm();
    std::vector<double> slack;
    for (int t = 1; t <= T + 1; ++t) {
      const double v = audit.a[idx(t)] * path.lambda0 + audit.b[idx(t)] * ps -
                       path.at(t).norm();
      slack.push_back(v);
      audit.min_slack = std::min(audit.min_slack, v);
    }
    audit.slack[T] = std::move(slack);
  }
  return audit;
}

ConeBoundReport cone_bound_check(const ControlProblem &problem,
                                 const Process &proc,
                                 const MultiplierPath &path, int s,
                                 const VecSeq &generators, double tol) {
  if (s < 1 || s > path.last_index())
    throw IndexMismatch("cone bound needs 1 <= s <= last costate index");
  const Vec x = proc.state(s - 1), u = proc.control(s - 1);
  const Mat fu = problem.fu(s - 1, x, u);
  const Vec gu = problem.phiu(s - 1, x, u);
  const auto &set = problem.control_set(s - 1);
  ConeBoundReport rep;
  rep.anchor_s = s;
  for (const auto &y : generators) {
    if (!set.tangent_cone_contains(u, y))
      throw TangentConeViolation(
          fmt::format("generator leaves the tangent cone at stage {}", s - 1));
    const double cz = -gu.dot(y);
    const double v = path.at(s).dot(fu * y) - path.lambda0 * cz;
    rep.c_z.push_back(cz);
    rep.violation.push_back(v);
    rep.worst = std::max(rep.worst, v);
  }
  (void)tol;
  return rep;
}

VecSeq sample_cone_generators(const ConvexControlSet &set, const Vec &u_hat,
                              int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  VecSeq out;
  const int m = set.dim();
  for (int attempt = 0; attempt < 100 * std::max(count, 1) &&
                        static_cast<int>(out.size()) < count;
       ++attempt) {
    Vec v(m);
    for (int i = 0; i < m; ++i)
      v(i) = gauss(rng);
    const Vec y = set.project_tangent_cone(u_hat, v);
    const double ny = y.norm();
    if (ny > 1e-9)
      out.push_back(y / ny);
  }
  return out;
}

} // namespace ihoc
