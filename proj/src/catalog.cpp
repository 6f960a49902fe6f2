#include "ihoc/catalog.hpp"

#include "ihoc/errors.hpp"

#include <fmt/core.h>

#include <cmath>
#include <memory>

namespace ihoc {

RiccatiSolution riccati_stationary(const Mat &a, const Mat &b, const Mat &q,
                                   const Mat &r, double discount, double tol,
                                   int max_iter) {
  const auto n = a.rows();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n ||
      r.rows() != b.cols() || r.cols() != b.cols())
    throw DimensionMismatch("riccati: inconsistent A, B, Q, R shapes");
  if (!(discount > 0.0))
    throw Error("riccati: discount must be positive");
  constexpr double kDamping = 0.5;
  const double beta = discount;
  auto gain_of = [&](const Mat &p) -> Mat {
    const Mat s = r + beta * b.transpose() * p * b;
    return beta * s.ldlt().solve(b.transpose() * p * a);
  };
  Mat p = q;
  for (int it = 1; it <= max_iter; ++it) {
    const Mat k = gain_of(p);
    Mat next = q + beta * a.transpose() * p * a -
               beta * a.transpose() * p * b * k;
    next = 0.5 * (next + next.transpose());
    const Mat damped = (1.0 - kDamping) * p + kDamping * next;
    if (!damped.allFinite())
      break;
    const double step = (damped - p).lpNorm<Eigen::Infinity>();
    p = damped;
    if (step <= tol * std::max(1.0, p.lpNorm<Eigen::Infinity>()))
      return {p, gain_of(p), it};
  }
  throw NoConvergence("riccati iteration did not reach its tolerance");
}

LqParams lq_default(int n) {
  if (n < 1 || n > 4)
    throw ConfigError("the default LQ block supports 1 <= n <= 4");
  LqParams p;
  p.a = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    p.a(i, i) = 0.9;
    if (i + 1 < n)
      p.a(i, i + 1) = 0.2;
  }
  p.b = Mat::Identity(n, n);
  p.q = Mat::Identity(n, n);
  p.r = 0.5 * Mat::Identity(n, n);
  p.discount = 0.95;
  const double base[4] = {1.0, 0.5, -0.5, 0.25};
  p.sigma = Vec(n);
  for (int i = 0; i < n; ++i)
    p.sigma(i) = base[i];
  return p;
}

ControlProblem lq_problem(const LqParams &params, int anchor_s) {
  const auto n = params.a.rows();
  const auto m = params.b.cols();
  StageData sd{std::make_shared<LinearDynamics>(params.a, params.b),
               std::make_shared<QuadraticReward>(params.q, params.r),
               ConvexControlSet::box(Vec::Constant(m, -params.control_bound),
                                     Vec::Constant(m, params.control_bound))};
  ControlProblem pb(StageSchedule::stationary(std::move(sd)), params.sigma,
                    Mode::equation, anchor_s, params.discount);
  return pb.with_steady_state({Vec::Zero(n), Vec::Zero(m)});
}

Process lq_reference(const LqParams &params, const RiccatiSolution &ric, int T) {
  Process proc;
  Vec x = params.sigma;
  for (int t = 0; t <= T; ++t) {
    const Vec u = -ric.gain * x;
    proc.x.push_back(x);
    proc.u.push_back(u);
    x = params.a * x + params.b * u;
  }
  proc.x.push_back(x);
  return proc;
}

MultiplierPath lq_multipliers(const LqParams &params, const RiccatiSolution &ric,
                              const Process &proc) {
  MultiplierPath path;
  path.lambda0 = 1.0;
  for (int t = 1; t <= proc.horizon() + 1; ++t)
    path.p.push_back(-2.0 * std::pow(params.discount, t) * (ric.p * proc.x[t]));
  return path;
}

double ramsey_steady_capital(const RamseyParams &params) {
  return std::pow(params.alpha * params.discount, 1.0 / (1.0 - params.alpha));
}

ControlProblem ramsey_problem(const RamseyParams &params, Mode mode,
                              int anchor_s) {
  if (!(params.alpha > 0.0 && params.alpha < 1.0))
    throw DomainViolation("ramsey: need 0 < alpha < 1");
  if (!(params.discount > 0.0 && params.discount < 1.0))
    throw DomainViolation("ramsey: need 0 < beta < 1");
  if (!(params.k0 > 0.0))
    throw DomainViolation("ramsey: initial capital must be positive");
  StageData sd{std::make_shared<GrowthDynamics>(params.alpha),
               std::make_shared<LogControlReward>(1, 1),
               ConvexControlSet::box(Vec::Constant(1, params.c_lo),
                                     Vec::Constant(1, params.c_hi))};
  ControlProblem pb(StageSchedule::stationary(std::move(sd)),
                    Vec::Constant(1, params.k0), mode, anchor_s,
                    params.discount);
  const double kss = ramsey_steady_capital(params);
  return pb.with_steady_state(
      {Vec::Constant(1, kss), Vec::Constant(1, std::pow(kss, params.alpha) - kss)});
}

Process ramsey_reference(const RamseyParams &params, int T) {
  const double ab = params.alpha * params.discount;
  Process proc;
  double k = params.k0;
  for (int t = 0; t <= T; ++t) {
    if (!(k > 0.0))
      throw DomainViolation(fmt::format("capital is not positive at t = {}", t));
    const double y = std::pow(k, params.alpha);
    proc.x.push_back(Vec::Constant(1, k));
    proc.u.push_back(Vec::Constant(1, (1.0 - ab) * y));
    k = ab * y;
  }
  if (!(k > 0.0))
    throw DomainViolation(fmt::format("capital is not positive at t = {}", T + 1));
  proc.x.push_back(Vec::Constant(1, k));
  return proc;
}

MultiplierPath ramsey_multipliers(const RamseyParams &params,
                                  const Process &proc) {
  MultiplierPath path;
  path.lambda0 = 1.0;
  for (int t = 0; t <= proc.horizon(); ++t)
    path.p.push_back(
        Vec::Constant(1, std::pow(params.discount, t) / proc.u[t](0)));
  return path;
}

double ramsey_objective(const RamseyParams &params, const Process &proc) {
  double j = 0.0;
  for (int t = 0; t <= proc.horizon(); ++t)
    j += std::pow(params.discount, t) * std::log(proc.u[t](0));
  return j;
}

ControlProblem abnormal_problem(int n, int anchor_s) {
  if (n < 1)
    throw DimensionMismatch("abnormal instance needs n >= 1");
  StageData sd{std::make_shared<StaticDynamics>(n, n),
               std::make_shared<QuadraticReward>(Mat::Zero(n, n),
                                                 Mat::Identity(n, n)),
               ConvexControlSet::box(Vec::Constant(n, -1.0), Vec::Constant(n, 1.0))};
  ControlProblem pb(StageSchedule::stationary(std::move(sd)), Vec::Ones(n),
                    Mode::equation, anchor_s, 0.95);
  return pb.with_steady_state({Vec::Ones(n), Vec::Zero(n)});
}

Process abnormal_reference(int n, int T) {
  Process proc;
  for (int t = 0; t <= T + 1; ++t)
    proc.x.push_back(Vec::Ones(n));
  for (int t = 0; t <= T; ++t)
    proc.u.push_back(Vec::Zero(n));
  proc.tail = SteadyState{Vec::Ones(n), Vec::Zero(n)};
  return proc;
}

MultiplierPath abnormal_multipliers(const Vec &p, int T) {
  MultiplierPath path;
  path.lambda0 = 0.0;
  path.p.assign(static_cast<std::size_t>(T + 1), p);
  return path;
}

ControlProblem zero_reward_problem(int n, int anchor_s) {
  if (n < 1)
    throw DimensionMismatch("zero-reward instance needs n >= 1");
  StageData sd{std::make_shared<LinearDynamics>(Mat::Identity(n, n),
                                                Mat::Identity(n, n)),
               std::make_shared<ZeroReward>(n, n),
               ConvexControlSet::box(Vec::Constant(n, -1.0), Vec::Constant(n, 1.0))};
  ControlProblem pb(StageSchedule::stationary(std::move(sd)),
                    Vec::Constant(n, 0.5), Mode::equation, anchor_s, 0.95);
  return pb.with_steady_state({Vec::Constant(n, 0.5), Vec::Zero(n)});
}

Process zero_reward_reference(int n, int T) {
  Process proc;
  for (int t = 0; t <= T + 1; ++t)
    proc.x.push_back(Vec::Constant(n, 0.5));
  for (int t = 0; t <= T; ++t)
    proc.u.push_back(Vec::Zero(n));
  proc.tail = SteadyState{Vec::Constant(n, 0.5), Vec::Zero(n)};
  return proc;
}

CatalogEntry lq_entry(const LqParams &params, int anchor_s) {
  const auto ric = riccati_stationary(params.a, params.b, params.q, params.r,
                                      params.discount);
  return {"lq", "discounted LQ regulator with a Riccati oracle",
          lq_problem(params, anchor_s),
          [params, ric](int T) { return lq_reference(params, ric, T); },
          [params, ric](const Process &proc) {
            return lq_multipliers(params, ric, proc);
          }};
}

CatalogEntry ramsey_entry(const RamseyParams &params, Mode mode, int anchor_s) {
  return {mode == Mode::equation ? "ramsey" : "ramsey_free_disposal",
          "log-utility growth model with a closed-form policy",
          ramsey_problem(params, mode, anchor_s),
          [params](int T) { return ramsey_reference(params, T); },
          [params](const Process &proc) {
            return ramsey_multipliers(params, proc);
          }};
}

CatalogEntry abnormal_entry(int n, int anchor_s) {
  return {"abnormal", "control-free dynamics; only abnormal multipliers are informative",
          abnormal_problem(n, anchor_s),
          [n](int T) { return abnormal_reference(n, T); },
          [n](const Process &proc) {
            Vec p = Vec::Zero(n);
            p(0) = 1.0;
            return abnormal_multipliers(p, proc.horizon());
          }};
}

CatalogEntry zero_reward_entry(int n, int anchor_s) {
  return {"zero_reward", "constant objective; every feasible process is optimal",
          zero_reward_problem(n, anchor_s),
          [n](int T) { return zero_reward_reference(n, T); },
          [](const Process &proc) {
            MultiplierPath path;
            path.lambda0 = 1.0;
            path.p.assign(static_cast<std::size_t>(proc.horizon() + 1),
                          Vec::Zero(proc.x[0].size()));
            return path;
          }};
}

std::vector<std::string> catalog_names() {
  return {"lq", "lq_scalar", "ramsey", "ramsey_free_disposal", "abnormal",
          "zero_reward"};
}

CatalogEntry catalog_entry(const std::string &name, int n) {
  if (name == "lq")
    return lq_entry(lq_default(n));
  if (name == "lq_scalar") {
    LqParams p;
    p.a = p.b = p.q = p.r = Mat::Ones(1, 1);
    p.discount = 1.0;
    p.sigma = Vec::Ones(1);
    auto e = lq_entry(p);
    e.name = "lq_scalar";
    return e;
  }
  if (name == "ramsey")
    return ramsey_entry(RamseyParams{}, Mode::equation);
  if (name == "ramsey_free_disposal")
    return ramsey_entry(RamseyParams{}, Mode::inequation);
  if (name == "abnormal")
    return abnormal_entry(n);
  if (name == "zero_reward")
    return zero_reward_entry(n);
  throw ConfigError(fmt::format("unknown catalog entry '{}'", name));
}

} // namespace ihoc
