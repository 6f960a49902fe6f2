#include "ihoc/finite_horizon.hpp"

#include "ihoc/errors.hpp"
#include "ihoc/pontryagin.hpp"

#include <fmt/core.h>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace ihoc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Max of |grad_x L|_inf and the per-stage VI gaps for the Lagrangian
/// gradient `grad` (already including the multipliers).
double stationarity_of(const TruncatedProblem &tp, const Vec &z,
                       const Vec &grad) {
  const auto &lay = tp.layout();
  double s = 0.0;
  if (lay.T > 0)
    s = grad.head(lay.T * lay.n).lpNorm<Eigen::Infinity>();
  for (int t = 0; t <= lay.T; ++t) {
    const Vec q = grad.segment(lay.u_offset(t), lay.m);
    const Vec u = z.segment(lay.u_offset(t), lay.m);
    const double gap = tp.problem().control_set(t).support(q) - q.dot(u);
    s = std::max(s, gap);
  }
  return std::isfinite(s) ? s : kInf;
}

/// Augmented Lagrangian merit with its multiplier estimate.
class Merit {
public:
  Merit(const TruncatedProblem &tp, const Vec &mu, double rho)
      : tp_(tp), mu_(mu), rho_(rho), ineq_(tp.mode() == Mode::inequation) {}

  Vec estimate(const Vec &g) const {
    Vec w = mu_ - rho_ * g;
    if (ineq_)
      w = w.cwiseMax(0.0);
    return w;
  }

  double value(const Vec &z) const {
    const double j = tp_.objective(z);
    const Vec g = tp_.constraints(z);
    if (!std::isfinite(j) || !g.allFinite())
      return kInf;
    double v = -j;
    if (ineq_) {
      const Vec w = estimate(g);
      v += (w.squaredNorm() - mu_.squaredNorm()) / (2.0 * rho_);
    } else {
      v += -mu_.dot(g) + 0.5 * rho_ * g.squaredNorm();
    }
    return std::isfinite(v) ? v : kInf;
  }

  /// Returns the merit gradient; `lag_grad` receives grad J + Dg' w.
  Vec gradient(const Vec &z, Vec &lag_grad) const {
    const Vec w = estimate(tp_.constraints(z));
    lag_grad = tp_.objective_gradient(z) + tp_.jacobian_transpose_apply(z, w);
    return -lag_grad;
  }

private:
  const TruncatedProblem &tp_;
  const Vec &mu_;
  double rho_;
  bool ineq_;
};

struct InnerResult {
  int iterations = 0;
  double stationarity = kInf;
};

/// Nonmonotone spectral projected gradient on the merit.
InnerResult spg(const TruncatedProblem &tp, const Merit &merit, Vec &z,
                double omega, int max_iter) {
  constexpr int kMemory = 10;
  constexpr double kArmijo = 1e-4;
  InnerResult res;
  z = tp.project(z);
  double f = merit.value(z);
  Vec lag;
  Vec g = merit.gradient(z, lag);
  std::deque<double> hist{f};
  double alpha = 1.0 / std::max(1.0, (tp.project(z - g) - z).lpNorm<Eigen::Infinity>());

  for (int k = 0; k < max_iter; ++k) {
    res.stationarity = stationarity_of(tp, z, lag);
    if (res.stationarity <= omega || !std::isfinite(f))
      break;
    const Vec d = tp.project(z - alpha * g) - z;
    const double gd = g.dot(d);
    if (d.lpNorm<Eigen::Infinity>() == 0.0 || !(gd < 0.0)) {
      // zero step at the current spectral length; restart with a unit step
      if (alpha == 1.0)
        break;
      alpha = 1.0;
      continue;
    }
    const double fmax = *std::max_element(hist.begin(), hist.end());
    double lam = 1.0;
    Vec zn;
    double fn = kInf;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      zn = z + lam * d;
      fn = merit.value(zn);
      if (fn <= fmax + kArmijo * lam * gd + 1e-15 * std::abs(fmax)) {
        accepted = true;
        break;
      }
      lam *= 0.5;
    }
    res.iterations = k + 1;
    if (!accepted)
      break;
    Vec lagn;
    const Vec gn = merit.gradient(zn, lagn);
    const Vec s = zn - z;
    const Vec y = gn - g;
    const double sy = s.dot(y);
    alpha = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e12) : 1e12;
    z = zn;
    f = fn;
    g = gn;
    lag = lagn;
    hist.push_back(f);
    if (static_cast<int>(hist.size()) > kMemory)
      hist.pop_front();
  }
  res.stationarity = stationarity_of(tp, z, lag);
  return res;
}

double infeasibility(const TruncatedProblem &tp, const Vec &g) {
  if (tp.mode() == Mode::equation)
    return g.lpNorm<Eigen::Infinity>();
  return (-g).cwiseMax(0.0).lpNorm<Eigen::Infinity>();
}

std::optional<MultiplierPath> abnormal_candidate(const TruncatedProblem &tp,
                                                 const Vec &z) {
  const Mat jac = tp.jacobian(z);
  if (!jac.allFinite())
    return std::nullopt;
  Eigen::BDCSVD<Mat> svd(jac, Eigen::ComputeFullU);
  const Vec sv = svd.singularValues();
  const auto rows = jac.rows();
  const double top = sv.size() ? sv(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-10 * top)
      ++rank;
  if (top == 0.0)
    rank = 0;
  if (rank >= rows)
    return std::nullopt;
  // a multi-dimensional left kernel is resolved by projecting the all-ones
  // vector onto it, which keeps the choice consistent across horizons
  const Mat kernel = svd.matrixU().rightCols(rows - rank);
  Vec w = kernel * (kernel.transpose() * Vec::Ones(rows));
  if (w.norm() <= 1e-8 * std::sqrt(static_cast<double>(rows)))
    w = svd.matrixU().col(rows - 1);
  w.normalize();
  Eigen::Index imax = 0;
  w.cwiseAbs().maxCoeff(&imax);
  if (w(imax) < 0.0)
    w = -w;
  if (tp.mode() == Mode::inequation && w.minCoeff() < -1e-12)
    return std::nullopt;
  MultiplierPath path;
  path.lambda0 = 0.0;
  const int n = tp.layout().n;
  for (int t = 1; t <= tp.horizon() + 1; ++t)
    path.p.push_back(w.segment((t - 1) * n, n));
  return path;
}

} // namespace

double lagrangian_stationarity(const TruncatedProblem &tp, const Vec &z,
                               double lambda0, const Vec &multipliers) {
  const Vec grad = lambda0 * tp.objective_gradient(z) +
                   tp.jacobian_transpose_apply(z, multipliers);
  return stationarity_of(tp, z, grad);
}

KKTPoint solve_truncation(const TruncatedProblem &tp, const Vec &start,
                          const SolverConfig &cfg) {
  return solve_truncation(tp, StartPoint{start, Vec()}, cfg);
}

KKTPoint solve_truncation(const TruncatedProblem &tp, const StartPoint &start,
                          const SolverConfig &cfg) {
  const auto &lay = tp.layout();
  if (start.z.size() != lay.size())
    throw DimensionMismatch("start vector has the wrong size");
  const bool ineq = tp.mode() == Mode::inequation;

  Vec z = tp.project(start.z);
  Vec mu = start.multipliers.size() == lay.constraint_size()
               ? start.multipliers
               : Vec::Zero(lay.constraint_size());
  if (ineq)
    mu = mu.cwiseMax(0.0);
  double rho = cfg.penalty_initial;
  double omega = std::max(cfg.stationarity_tol, 1e-2);
  const double omega_floor = 0.1 * cfg.stationarity_tol;

  KKTPoint kkt;
  double prev_phase = kInf;
  double feas_at_increase = kInf;
  int stalled_increases = 0;

  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    const Merit merit(tp, mu, rho);
    const auto inner = spg(tp, merit, z, omega, cfg.max_inner);
    kkt.iterations += inner.iterations;
    kkt.outer_iterations = outer;

    const Vec g = tp.constraints(z);
    const Vec w = merit.estimate(g);
    const double feas = g.allFinite() ? infeasibility(tp, g) : kInf;
    const double phase =
        ineq ? g.cwiseMin(mu / rho).lpNorm<Eigen::Infinity>() : feas;
    const double stat = lagrangian_stationarity(tp, z, 1.0, w);
    mu = w;
    kkt.feasibility = feas;
    kkt.stationarity = stat;
    kkt.penalty = rho;

    if (feas <= cfg.feasibility_tol && phase <= cfg.feasibility_tol &&
        stat <= cfg.stationarity_tol) {
      kkt.status = SolveStatus::converged;
      break;
    }
    if (phase > cfg.feasibility_tol && phase > 0.25 * prev_phase) {
      if (rho >= cfg.penalty_max || feas > 0.5 * feas_at_increase)
        ++stalled_increases;
      else
        stalled_increases = 0;
      feas_at_increase = std::min(feas_at_increase, feas);
      rho = std::min(rho * cfg.penalty_growth, cfg.penalty_max);
      if (stalled_increases >= 3 && feas > 1e3 * cfg.feasibility_tol) {
        kkt.status = SolveStatus::infeasible;
        break;
      }
    }
    prev_phase = phase;
    omega = std::max(omega_floor, 0.1 * omega);
  }

  kkt.z = z;
  kkt.primal = tp.unpack(z);
  kkt.objective = tp.objective(z);
  kkt.lambda0 = 1.0;
  kkt.costates.clear();
  for (int t = 1; t <= lay.T + 1; ++t)
    kkt.costates.push_back(mu.segment((t - 1) * lay.n, lay.n));
  if (ineq) {
    const Vec g = tp.constraints(z);
    kkt.complementarity = mu.cwiseProduct(g).lpNorm<Eigen::Infinity>();
  }
  kkt.abnormal = abnormal_candidate(tp, z);
  return kkt;
}

MultiplierPath extract_multipliers(const KKTPoint &kkt,
                                   const TruncatedProblem &tp,
                                   const SolverConfig &cfg) {
  if (!kkt.converged())
    throw NoConvergence(fmt::format("truncation T = {} did not converge ({})",
                                    tp.horizon(), to_string(kkt.status)));
  MultiplierPath path;
  if (kkt.abnormal) {
    path = *kkt.abnormal;
  } else {
    path.lambda0 = kkt.lambda0;
    path.p = kkt.costates;
  }
  const int T = tp.horizon();
  const double bar = 10.0 * cfg.stationarity_tol;
  const auto &problem = tp.problem();
  const Process &proc = kkt.primal;

  int worst_t = -1;
  double worst = 0.0;
  for (int t = 1; t <= T; ++t) {
    const double r =
        (path.at(t) - adjoint_step(problem, proc, t, path.at(t + 1), path.lambda0))
            .norm();
    if (r > worst) {
      worst = r;
      worst_t = t;
    }
  }
  if (worst > bar)
    throw ConditionViolation(
        fmt::format("adjoint condition fails at stage {} (residual {:.3e})",
                    worst_t, worst),
        worst_t, worst);

  worst = 0.0;
  for (int t = 0; t <= T; ++t) {
    const double r = vi_residual(problem, proc, t, path.at(t + 1), path.lambda0);
    if (r > worst) {
      worst = r;
      worst_t = t;
    }
  }
  if (worst > bar)
    throw ConditionViolation(
        fmt::format("variational inequality fails at stage {} (residual {:.3e})",
                    worst_t, worst),
        worst_t, worst);

  if (tp.mode() == Mode::inequation) {
    for (int t = 1; t <= T + 1; ++t) {
      const double lo = path.at(t).minCoeff();
      if (lo < -bar)
        throw ConditionViolation(
            fmt::format("costate p_{} has a negative entry ({:.3e})", t, lo), t,
            -lo);
    }
  }
  return path;
}

} // namespace ihoc
