#include "ihoc/finite_horizon.hpp"

#include "ihoc/errors.hpp"

#include <fmt/core.h>

#include <cmath>

namespace ihoc {

TruncatedProblem::TruncatedProblem(ControlProblem problem, int T, Vec terminal)
    : problem_(std::move(problem)), terminal_(std::move(terminal)) {
  if (T < 2)
    throw IndexMismatch("truncation horizon must satisfy T >= 2");
  if (terminal_.size() != problem_.state_dim())
    throw DimensionMismatch("terminal anchor has the wrong dimension");
  layout_ = {problem_.state_dim(), problem_.control_dim(), T};
}

TruncatedProblem build_truncation(const ControlProblem &problem, int T,
                                  const Vec &terminal) {
  return TruncatedProblem(problem, T, terminal);
}

void TruncatedProblem::check_size(const Vec &z) const {
  if (z.size() != layout_.size())
    throw DimensionMismatch(fmt::format("decision vector has size {}, need {}",
                                        z.size(), layout_.size()));
}

Vec TruncatedProblem::state(const Vec &z, int t) const {
  if (t == 0)
    return problem_.sigma();
  if (t == layout_.T + 1)
    return terminal_;
  return z.segment(layout_.x_offset(t), layout_.n);
}

Vec TruncatedProblem::control(const Vec &z, int t) const {
  return z.segment(layout_.u_offset(t), layout_.m);
}

double TruncatedProblem::objective(const Vec &z) const {
  check_size(z);
  double j = 0.0;
  for (int t = 0; t <= layout_.T; ++t)
    j += problem_.phi(t, state(z, t), control(z, t));
  return j;
}

Vec TruncatedProblem::objective_gradient(const Vec &z) const {
  check_size(z);
  Vec g = Vec::Zero(layout_.size());
  for (int t = 0; t <= layout_.T; ++t) {
    const Vec x = state(z, t), u = control(z, t);
    if (t >= 1)
      g.segment(layout_.x_offset(t), layout_.n) = problem_.phix(t, x, u);
    g.segment(layout_.u_offset(t), layout_.m) = problem_.phiu(t, x, u);
  }
  return g;
}

Vec TruncatedProblem::constraints(const Vec &z) const {
  check_size(z);
  const int n = layout_.n;
  Vec g(layout_.constraint_size());
  for (int t = 0; t <= layout_.T; ++t)
    g.segment(t * n, n) =
        -state(z, t + 1) + problem_.f(t, state(z, t), control(z, t));
  return g;
}

Vec TruncatedProblem::jacobian_apply(const Vec &z, const Vec &dz) const {
  check_size(z);
  check_size(dz);
  const int n = layout_.n, T = layout_.T;
  Vec b(layout_.constraint_size());
  for (int t = 0; t <= T; ++t) {
    const Vec x = state(z, t), u = control(z, t);
    Vec row = problem_.fu(t, x, u) * dz.segment(layout_.u_offset(t), layout_.m);
    if (t >= 1)
      row += problem_.fx(t, x, u) * dz.segment(layout_.x_offset(t), n);
    if (t + 1 <= T)
      row -= dz.segment(layout_.x_offset(t + 1), n);
    b.segment(t * n, n) = row;
  }
  return b;
}

Vec TruncatedProblem::jacobian_transpose_apply(const Vec &z, const Vec &w) const {
  check_size(z);
  if (w.size() != layout_.constraint_size())
    throw DimensionMismatch("constraint-space vector has the wrong size");
  const int n = layout_.n, T = layout_.T;
  Vec out = Vec::Zero(layout_.size());
  for (int t = 0; t <= T; ++t) {
    const Vec x = state(z, t), u = control(z, t);
    const Vec wt = w.segment(t * n, n);
    out.segment(layout_.u_offset(t), layout_.m) +=
        problem_.fu(t, x, u).transpose() * wt;
    if (t >= 1)
      out.segment(layout_.x_offset(t), n) += problem_.fx(t, x, u).transpose() * wt;
    if (t + 1 <= T)
      out.segment(layout_.x_offset(t + 1), n) -= wt;
  }
  return out;
}

Mat TruncatedProblem::jacobian(const Vec &z) const {
  check_size(z);
  const int n = layout_.n, m = layout_.m, T = layout_.T;
  Mat jac = Mat::Zero(layout_.constraint_size(), layout_.size());
  for (int t = 0; t <= T; ++t) {
    const Vec x = state(z, t), u = control(z, t);
    jac.block(t * n, layout_.u_offset(t), n, m) = problem_.fu(t, x, u);
    if (t >= 1)
      jac.block(t * n, layout_.x_offset(t), n, n) = problem_.fx(t, x, u);
    if (t + 1 <= T)
      jac.block(t * n, layout_.x_offset(t + 1), n, n) = -Mat::Identity(n, n);
  }
  return jac;
}

Vec TruncatedProblem::pack(const Process &proc) const {
  Vec z(layout_.size());
  for (int t = 1; t <= layout_.T; ++t) {
    const Vec x = proc.state(t);
    if (x.size() != layout_.n)
      throw DimensionMismatch("process state has the wrong dimension");
    z.segment(layout_.x_offset(t), layout_.n) = x;
  }
  for (int t = 0; t <= layout_.T; ++t) {
    const Vec u = proc.control(t);
    if (u.size() != layout_.m)
      throw DimensionMismatch("process control has the wrong dimension");
    z.segment(layout_.u_offset(t), layout_.m) = u;
  }
  return z;
}

Process TruncatedProblem::unpack(const Vec &z) const {
  check_size(z);
  Process proc;
  for (int t = 0; t <= layout_.T + 1; ++t)
    proc.x.push_back(state(z, t));
  for (int t = 0; t <= layout_.T; ++t)
    proc.u.push_back(control(z, t));
  proc.tail = problem_.steady_state();
  return proc;
}

Vec TruncatedProblem::project(const Vec &z) const {
  check_size(z);
  Vec out = z;
  for (int t = 0; t <= layout_.T; ++t)
    out.segment(layout_.u_offset(t), layout_.m) =
        problem_.control_set(t).project(control(z, t));
  return out;
}

const char *to_string(StartStrategy s) {
  switch (s) {
  case StartStrategy::zero:
    return "zero";
  case StartStrategy::rollout:
    return "rollout";
  case StartStrategy::interpolate:
    return "interpolate";
  case StartStrategy::warm:
    return "warm";
  }
  return "?";
}

StartStrategy start_strategy_from_string(const std::string &name) {
  if (name == "zero")
    return StartStrategy::zero;
  if (name == "rollout")
    return StartStrategy::rollout;
  if (name == "interpolate")
    return StartStrategy::interpolate;
  if (name == "warm" || name == "warm-start-from-previous-T")
    return StartStrategy::warm;
  throw ConfigError(fmt::format("unknown start strategy '{}'", name));
}

const char *to_string(SolveStatus s) {
  switch (s) {
  case SolveStatus::converged:
    return "converged";
  case SolveStatus::max_iterations:
    return "max_iterations";
  case SolveStatus::infeasible:
    return "infeasible";
  }
  return "?";
}

namespace {

Vec nominal_control(const TruncatedProblem &tp, int t) {
  const auto &ss = tp.problem().steady_state();
  const Vec u = ss ? ss->u : Vec::Zero(tp.layout().m);
  return tp.problem().control_set(t).project(u);
}

} // namespace

StartPoint make_start(const TruncatedProblem &tp, StartStrategy strategy,
                      const Process *reference, const Process *extension,
                      const VecSeq *previous_costates) {
  const auto &lay = tp.layout();
  const auto &problem = tp.problem();
  const int T = lay.T;
  StartPoint sp;
  sp.z = Vec::Zero(lay.size());

  if (strategy == StartStrategy::warm && reference == nullptr)
    strategy = extension ? StartStrategy::warm : StartStrategy::rollout;

  switch (strategy) {
  case StartStrategy::zero:
    break;
  case StartStrategy::rollout: {
    Vec x = problem.sigma();
    for (int t = 0; t <= T; ++t) {
      const Vec u = nominal_control(tp, t);
      sp.z.segment(lay.u_offset(t), lay.m) = u;
      if (t < T) {
        x = problem.f(t, x, u);
        if (!x.allFinite())
          x = problem.sigma();
        sp.z.segment(lay.x_offset(t + 1), lay.n) = x;
      }
    }
    break;
  }
  case StartStrategy::interpolate: {
    for (int t = 1; t <= T; ++t) {
      const double w = static_cast<double>(t) / (T + 1);
      sp.z.segment(lay.x_offset(t), lay.n) =
          (1.0 - w) * problem.sigma() + w * tp.terminal();
    }
    for (int t = 0; t <= T; ++t)
      sp.z.segment(lay.u_offset(t), lay.m) = nominal_control(tp, t);
    break;
  }
  case StartStrategy::warm: {
    auto pick_state = [&](int t) -> Vec {
      if (reference && t <= reference->horizon() + 1)
        return reference->state(t);
      if (extension)
        return extension->state(t);
      return reference->state(t);
    };
    auto pick_control = [&](int t) -> Vec {
      if (reference && t <= reference->horizon())
        return reference->control(t);
      if (extension)
        return extension->control(t);
      return reference->control(t);
    };
    for (int t = 1; t <= T; ++t)
      sp.z.segment(lay.x_offset(t), lay.n) = pick_state(t);
    for (int t = 0; t <= T; ++t)
      sp.z.segment(lay.u_offset(t), lay.m) = pick_control(t);
    break;
  }
  }
  sp.z = tp.project(sp.z);
  // a rollout can leave the dynamics' domain (negative capital, say); the
  // straight line towards the terminal anchor is the fallback
  if (strategy == StartStrategy::rollout &&
      !(std::isfinite(tp.objective(sp.z)) && tp.constraints(sp.z).allFinite()))
    return make_start(tp, StartStrategy::interpolate, reference, extension,
                      previous_costates);

  if (previous_costates && !previous_costates->empty()) {
    sp.multipliers = Vec::Zero(lay.constraint_size());
    // the last stored costate belongs to the old terminal constraint, so
    // only the interior prefix is reused
    const int keep =
        std::min(static_cast<int>(previous_costates->size()) - 1, T + 1);
    for (int t = 1; t <= keep; ++t) {
      const Vec &p = (*previous_costates)[static_cast<std::size_t>(t - 1)];
      if (p.size() == lay.n)
        sp.multipliers.segment((t - 1) * lay.n, lay.n) = p;
    }
  }
  return sp;
}

} // namespace ihoc
