#include "ihoc/continuation.hpp"

#include "ihoc/errors.hpp"
#include "ihoc/linalg.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

namespace ihoc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Stage used as the stationary tail: the first periodic entry or the last
/// tabulated one.
int tail_stage(const ControlProblem &problem) {
  const auto &sched = problem.stages();
  if (sched.kind() == StageSchedule::Kind::tabulated)
    return static_cast<int>(sched.entries().size()) - 1;
  return 0;
}

Vec steady_residual(const StageData &sd, double beta, const Vec &v, int n,
                    int m) {
  const Vec x = v.head(n), u = v.segment(n, m), pi = v.tail(n);
  Vec r(2 * n + m);
  r.head(n) = sd.dynamics->eval(x, u) - x;
  r.segment(n, n) = beta * sd.dynamics->d1(x, u).transpose() * pi +
                    beta * sd.reward->d1(x, u) - pi;
  r.tail(m) = sd.reward->d2(x, u) + sd.dynamics->d2(x, u).transpose() * pi;
  return r;
}

} // namespace

std::optional<SteadyState> find_steady_state(const ControlProblem &problem,
                                             double tol, int max_iter) {
  if (problem.stages().kind() == StageSchedule::Kind::periodic &&
      problem.stages().entries().size() > 1)
    return std::nullopt;
  const int n = problem.state_dim(), m = problem.control_dim();
  const int t = tail_stage(problem);
  const StageData &sd = problem.stage(t);
  const double beta = problem.discount();
  const auto &set = sd.control_set;

  Vec v = Vec::Zero(2 * n + m);
  if (problem.steady_state()) {
    v.head(n) = problem.steady_state()->x;
    v.segment(n, m) = problem.steady_state()->u;
  } else {
    v.head(n) = problem.sigma();
    v.segment(n, m) = set.project(Vec::Zero(m));
  }
  auto res = [&](const Vec &w) { return steady_residual(sd, beta, w, n, m); };
  Vec r = res(v);
  if (!r.allFinite())
    return std::nullopt;
  for (int it = 0; it < max_iter && r.lpNorm<Eigen::Infinity>() > tol; ++it) {
    Mat jac(r.size(), v.size());
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(v(j)));
      Vec vp = v, vm = v;
      vp(j) += h;
      vm(j) -= h;
      jac.col(j) = (res(vp) - res(vm)) / (2.0 * h);
    }
    if (!jac.allFinite())
      return std::nullopt;
    const Vec step = jac.completeOrthogonalDecomposition().solve(-r);
    double lam = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls, lam *= 0.5) {
      const Vec cand = v + lam * step;
      const Vec rc = res(cand);
      if (rc.allFinite() && rc.norm() < (1.0 - 1e-4 * lam) * r.norm()) {
        v = cand;
        r = rc;
        moved = true;
        break;
      }
    }
    if (!moved)
      break;
  }
  if (!(r.lpNorm<Eigen::Infinity>() <= std::max(tol, 1e-9)))
    return std::nullopt;
  const Vec u = v.segment(n, m);
  if (!set.contains(u, 1e-9))
    return std::nullopt;
  return SteadyState{v.head(n), u};
}

namespace {

struct TerminalChoice {
  Vec terminal;
  std::string source;
  std::optional<SteadyState> tail;
};

TerminalChoice solve_mode_terminal(const ControlProblem &problem,
                                   const SolveMode &mode) {
  if (mode.terminal) {
    if (mode.terminal->size() != problem.state_dim())
      throw DimensionMismatch("terminal anchor has the wrong dimension");
    std::optional<SteadyState> tail;
    if (problem.steady_state())
      tail = SteadyState{*mode.terminal, problem.steady_state()->u};
    return {*mode.terminal, "user", tail};
  }
  if (auto ss = find_steady_state(problem))
    return {ss->x, "computed", ss};
  if (problem.steady_state())
    return {problem.steady_state()->x, "problem", problem.steady_state()};
  throw Error("no terminal anchor: steady-state search failed and none given");
}

HorizonRecord solve_horizon(const ControlProblem &problem, int T,
                            const Vec &terminal, const StartPoint &start,
                            int s, const ContinuationConfig &cfg) {
  HorizonRecord rec;
  rec.T = T;
  try {
    const auto tp = build_truncation(problem, T, terminal);
    const auto kkt = solve_truncation(tp, start, cfg.solver);
    rec.status = kkt.status;
    rec.iterations = kkt.iterations;
    rec.objective = kkt.objective;
    rec.stationarity = kkt.stationarity;
    rec.feasibility = kkt.feasibility;
    rec.complementarity = kkt.complementarity;
    rec.primal = kkt.primal;
    rec.abnormal_extraction = kkt.abnormal.has_value();
    rec.raw = extract_multipliers(kkt, tp, cfg.solver);
    rec.path = normalize(rec.raw, s);
    rec.certificate = verify_certificate(problem, rec.primal, rec.path, s,
                                         cfg.certificate_tol);
    rec.ok = true;
  } catch (const std::exception &e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

} // namespace

ContinuationTrace run_continuation(const ControlProblem &problem,
                                   const ContinuationMode &mode,
                                   const std::vector<int> &schedule, int s,
                                   const ContinuationConfig &cfg) {
  if (schedule.empty())
    throw Error("horizon schedule is empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 2)
      throw Error("every scheduled horizon must satisfy T >= 2");
    if (i > 0 && schedule[i] <= schedule[i - 1])
      throw Error("horizon schedule must be strictly increasing");
  }
  if (s < 1)
    throw Error("anchor stage s must be at least 1");
  if (s > schedule.front())
    throw Error("anchor stage s must not exceed the smallest horizon");

  ContinuationTrace trace;
  trace.anchor_s = s;
  trace.horizons = schedule;

  // extension process supplying stages beyond a warm start's reach
  Process extension;
  const VerifyMode *verify = std::get_if<VerifyMode>(&mode);
  auto terminal_for = [&](int T) -> Vec {
    return verify ? verify->candidate.state(T + 1) : trace.terminal_anchor;
  };
  if (verify) {
    trace.verify_mode = true;
    trace.terminal_source = "candidate";
    extension = verify->candidate;
    if (verify->candidate.horizon() < schedule.back() &&
        !verify->candidate.tail)
      throw IndexMismatch(fmt::format(
          "candidate covers T = {} but the schedule reaches {}",
          verify->candidate.horizon(), schedule.back()));
  } else {
    const auto choice = solve_mode_terminal(problem, std::get<SolveMode>(mode));
    trace.terminal_anchor = choice.terminal;
    trace.terminal_source = choice.source;
    const Vec u_tail = choice.tail ? choice.tail->u
                                   : problem.control_set(tail_stage(problem))
                                         .project(Vec::Zero(problem.control_dim()));
    extension.tail = SteadyState{choice.terminal, u_tail};
  }

  const StartStrategy cold = verify ? StartStrategy::warm : cfg.solver.start;
  auto cold_start = [&](const TruncatedProblem &tp) {
    if (verify)
      return make_start(tp, StartStrategy::warm, nullptr, &extension);
    const StartStrategy st =
        cold == StartStrategy::warm ? StartStrategy::rollout : cold;
    return make_start(tp, st, nullptr, &extension);
  };

  if (!cfg.warm_start && cfg.parallel && schedule.size() > 1) {
    std::vector<std::future<HorizonRecord>> jobs;
    for (int T : schedule) {
      jobs.push_back(std::async(std::launch::async, [&, T] {
        try {
          const auto tp = build_truncation(problem, T, terminal_for(T));
          return solve_horizon(problem, T, terminal_for(T), cold_start(tp), s,
                               cfg);
        } catch (const std::exception &e) {
          HorizonRecord rec;
          rec.T = T;
          rec.error = e.what();
          return rec;
        }
      }));
    }
    for (auto &j : jobs)
      trace.records.push_back(j.get());
  } else {
    const HorizonRecord *prev = nullptr;
    for (int T : schedule) {
      HorizonRecord rec;
      try {
        const auto tp = build_truncation(problem, T, terminal_for(T));
        StartPoint start;
        if (cfg.warm_start && prev && prev->ok)
          start = make_start(tp, StartStrategy::warm, &prev->primal, &extension,
                             &prev->raw.p);
        else
          start = cold_start(tp);
        rec = solve_horizon(problem, T, terminal_for(T), start, s, cfg);
      } catch (const std::exception &e) {
        rec.T = T;
        rec.error = e.what();
      }
      trace.records.push_back(std::move(rec));
      prev = &trace.records.back();
    }
  }

  int ok_count = 0;
  for (const auto &r : trace.records)
    ok_count += r.ok ? 1 : 0;
  if (ok_count >= std::max(2, cfg.limit_window))
    trace.limit = detect_limit(trace, cfg.limit_window, cfg.limit_tol);
  return trace;
}

namespace {

/// Convergence of a vector series under the window rule.
bool series_converged(const std::vector<Vec> &series, double tol,
                      double &amplitude) {
  amplitude = 0.0;
  const auto dim = series.front().size();
  for (Eigen::Index i = 0; i < dim; ++i) {
    double lo = kInf, hi = -kInf;
    for (const auto &v : series) {
      lo = std::min(lo, v(i));
      hi = std::max(hi, v(i));
    }
    amplitude = std::max(amplitude, hi - lo);
  }
  std::vector<double> diffs;
  for (std::size_t k = 1; k < series.size(); ++k)
    diffs.push_back((series[k] - series[k - 1]).norm());
  if (!(diffs.back() <= tol))
    return false;
  for (std::size_t k = 1; k < diffs.size(); ++k)
    if (diffs[k] > diffs[k - 1] + 0.1 * tol)
      return false;
  return true;
}

} // namespace

LimitResult detect_limit(const ContinuationTrace &trace, int window, double tol) {
  LimitResult res;
  res.window = window;
  res.tol = tol;
  std::vector<const HorizonRecord *> ok;
  for (const auto &r : trace.records)
    if (r.ok)
      ok.push_back(&r);
  if (window < 2 || static_cast<int>(ok.size()) < window) {
    res.amplitude = kInf;
    return res;
  }
  std::vector<const HorizonRecord *> last(ok.end() - window, ok.end());

  int kmax = std::numeric_limits<int>::max();
  for (const auto *r : last)
    kmax = std::min(kmax, r->path.last_index());

  // amplitude reports the widest unconverged series, or the widest overall
  // when everything converged
  double spread_all = 0.0, spread_bad = -1.0;
  auto account = [&](bool conv, double amp, int stage) {
    spread_all = std::max(spread_all, amp);
    if (!conv && amp > spread_bad) {
      spread_bad = amp;
      res.worst_stage = stage;
    }
  };

  std::vector<Vec> lam;
  for (const auto *r : last)
    lam.push_back(Vec::Constant(1, r->path.lambda0));
  double amp = 0.0;
  res.lambda0_converged = series_converged(lam, tol, amp);
  account(res.lambda0_converged, amp, 0);
  double lsum = 0.0;
  for (const auto &v : lam)
    lsum += v(0);
  res.limit.lambda0 = lsum / window;

  for (int t = 1; t <= kmax; ++t) {
    std::vector<Vec> series;
    for (const auto *r : last)
      series.push_back(r->path.at(t));
    const bool conv = series_converged(series, tol, amp);
    (conv ? res.converged_stages : res.unconverged_stages).push_back(t);
    account(conv, amp, t);
    Vec avg = Vec::Zero(series.front().size());
    for (const auto &v : series)
      avg += v;
    res.limit.p.push_back(avg / window);
  }
  res.converged = res.lambda0_converged && res.unconverged_stages.empty();
  res.amplitude = res.converged ? spread_all : spread_bad;
  return res;
}

DegeneracyReport degeneracy_monitor(const ContinuationTrace &trace,
                                    const ControlProblem &problem,
                                    const std::optional<Process> &reference,
                                    double tol, int cone_samples,
                                    std::uint64_t seed) {
  DegeneracyReport rep;
  const int s = trace.anchor_s;
  rep.normalization_ok = true;
  rep.bounds_ok = true;
  rep.cone_ok = true;
  bool any = false;
  bool all_lambda_small = true;
  for (const auto &r : trace.records) {
    if (!r.ok) {
      rep.normalization_ok = false;
      rep.bounds_ok = false;
      rep.cone_ok = false;
      rep.failed_horizons.push_back(r.T);
      HorizonAudit a;
      a.T = r.T;
      a.error = r.error;
      rep.audits.push_back(a);
      continue;
    }
    any = true;
    all_lambda_small = all_lambda_small && r.path.lambda0 <= tol;
    const double nerr = std::abs(r.path.lambda0 + r.path.at(s).norm() - 1.0);
    rep.worst_normalization = std::max(rep.worst_normalization, nerr);
    if (!(r.path.normalized_at == s && nerr <= 1e-12))
      rep.normalization_ok = false;

    const Process &proc = reference ? *reference : r.primal;
    HorizonAudit a;
    a.T = r.T;
    try {
      const auto audit = bound_audit(problem, proc, {{r.T, r.path}}, s, 64, seed);
      a.min_slack = audit.min_slack;
      a.bound_ok = audit.ok(1e-8);
      const auto &set = problem.control_set(s - 1);
      const Vec u = proc.control(s - 1);
      const auto gens = sample_cone_generators(set, u, cone_samples, seed);
      const auto cone = cone_bound_check(problem, proc, r.path, s, gens, tol);
      a.cone_worst = gens.empty() ? 0.0 : cone.worst;
      a.cone_ok = gens.empty() || cone.ok(tol);
    } catch (const std::exception &e) {
      a.error = e.what();
      a.bound_ok = false;
      a.cone_ok = false;
    }
    rep.bounds_ok = rep.bounds_ok && a.bound_ok;
    rep.cone_ok = rep.cone_ok && a.cone_ok;
    rep.audits.push_back(a);
  }
  if (!any) {
    rep.normalization_ok = rep.bounds_ok = rep.cone_ok = false;
    return rep;
  }

  const int ok_count = static_cast<int>(std::count_if(
      trace.records.begin(), trace.records.end(),
      [](const HorizonRecord &r) { return r.ok; }));
  const int window = trace.limit ? trace.limit->window
                                 : std::min(3, std::max(2, ok_count));
  rep.limit = trace.limit ? *trace.limit : detect_limit(trace, window, tol);
  rep.unconverged_stages = rep.limit.unconverged_stages;
  if (rep.limit.window >= 2 && rep.limit.amplitude < kInf &&
      static_cast<int>(rep.limit.limit.p.size()) >= s) {
    rep.abnormal = rep.limit.lambda0_converged
                       ? rep.limit.limit.lambda0 <= tol
                       : all_lambda_small;
    rep.limit_margin = rep.limit.limit.lambda0 + rep.limit.limit.p[s - 1].norm();
  } else {
    // a single usable horizon: its own pair stands in for the limit
    const HorizonRecord *last = nullptr;
    for (const auto &r : trace.records)
      if (r.ok)
        last = &r;
    rep.abnormal = last->path.lambda0 <= tol;
    rep.limit_margin = last->path.lambda0 + last->path.at(s).norm();
  }
  rep.margin_ok = rep.limit_margin >= 1.0 - tol;
  return rep;
}

} // namespace ihoc
