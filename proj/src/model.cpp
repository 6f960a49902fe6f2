#include "ihoc/model.hpp"

#include "ihoc/errors.hpp"

#include <fmt/core.h>

#include <cmath>
#include <limits>

namespace ihoc {

LinearDynamics::LinearDynamics(Mat a, Mat b, Vec c)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  if (a_.rows() != a_.cols() || b_.rows() != a_.rows() ||
      c_.size() != a_.rows() || a_.rows() == 0 || b_.cols() == 0)
    throw DimensionMismatch("linear dynamics: A must be n x n, B n x m, c n");
}

LinearDynamics::LinearDynamics(Mat a, Mat b)
    : LinearDynamics(a, b, Vec::Zero(a.rows())) {}

Vec LinearDynamics::eval(const Vec &x, const Vec &u) const {
  return a_ * x + b_ * u + c_;
}

GrowthDynamics::GrowthDynamics(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainViolation("growth dynamics need 0 < alpha < 1");
}

Vec GrowthDynamics::eval(const Vec &x, const Vec &u) const {
  Vec out(1);
  out(0) = x(0) > 0.0 ? std::pow(x(0), alpha_) - u(0)
                      : std::numeric_limits<double>::quiet_NaN();
  return out;
}

Mat GrowthDynamics::d1(const Vec &x, const Vec &) const {
  Mat out(1, 1);
  out(0, 0) = x(0) > 0.0 ? alpha_ * std::pow(x(0), alpha_ - 1.0)
                         : std::numeric_limits<double>::quiet_NaN();
  return out;
}

Mat GrowthDynamics::d2(const Vec &, const Vec &) const {
  return Mat::Constant(1, 1, -1.0);
}

FunctionDynamics::FunctionDynamics(int n, int m, EvalFn f, JacFn d1, JacFn d2,
                                   std::string name)
    : n_(n), m_(m), f_(std::move(f)), d1_(std::move(d1)), d2_(std::move(d2)),
      name_(std::move(name)) {}

QuadraticReward::QuadraticReward(Mat q, Mat r) : q_(std::move(q)), r_(std::move(r)) {
  if (q_.rows() != q_.cols() || r_.rows() != r_.cols())
    throw DimensionMismatch("quadratic reward needs square Q and R");
}

double QuadraticReward::eval(const Vec &x, const Vec &u) const {
  return -(x.dot(q_ * x) + u.dot(r_ * u));
}

double LogControlReward::eval(const Vec &, const Vec &u) const {
  return u(0) > 0.0 ? std::log(u(0)) : std::numeric_limits<double>::quiet_NaN();
}

Vec LogControlReward::d2(const Vec &, const Vec &u) const {
  Vec g = Vec::Zero(m_);
  g(0) = u(0) > 0.0 ? 1.0 / u(0) : std::numeric_limits<double>::quiet_NaN();
  return g;
}

StageSchedule StageSchedule::stationary(StageData stage) {
  StageSchedule s;
  s.kind_ = Kind::stationary;
  s.entries_.push_back(std::move(stage));
  return s;
}

StageSchedule StageSchedule::periodic(std::vector<StageData> cycle) {
  if (cycle.empty())
    throw Error("periodic schedule needs at least one stage");
  StageSchedule s;
  s.kind_ = Kind::periodic;
  s.entries_ = std::move(cycle);
  return s;
}

StageSchedule StageSchedule::tabulated(std::vector<StageData> table) {
  if (table.empty())
    throw Error("tabulated schedule needs at least one stage");
  StageSchedule s;
  s.kind_ = Kind::tabulated;
  s.entries_ = std::move(table);
  return s;
}

const StageData &StageSchedule::at(int t) const {
  if (t < 0)
    throw IndexMismatch("negative stage index");
  const auto k = static_cast<int>(entries_.size());
  switch (kind_) {
  case Kind::stationary:
    return entries_.front();
  case Kind::periodic:
    return entries_[static_cast<std::size_t>(t % k)];
  case Kind::tabulated:
    return entries_[static_cast<std::size_t>(std::min(t, k - 1))];
  }
  return entries_.front();
}

ControlProblem::ControlProblem(StageSchedule stages, Vec sigma, Mode mode,
                               int anchor_s, double discount)
    : stages_(std::move(stages)), sigma_(std::move(sigma)), mode_(mode),
      anchor_s_(anchor_s), discount_(discount) {
  const auto &entries = stages_.entries();
  if (entries.empty())
    throw Error("problem has no stages");
  n_ = entries.front().dynamics->state_dim();
  m_ = entries.front().dynamics->control_dim();
  for (const auto &e : entries) {
    if (!e.dynamics || !e.reward)
      throw Error("stage is missing dynamics or reward");
    if (e.dynamics->state_dim() != n_ || e.dynamics->control_dim() != m_ ||
        e.control_set.dim() != m_)
      throw DimensionMismatch("all stages must share dimensions n and m");
  }
  if (sigma_.size() != n_)
    throw DimensionMismatch("initial state has the wrong dimension");
  if (anchor_s_ < 1)
    throw Error("anchor stage s must be at least 1");
  if (!(discount_ > 0.0) || !std::isfinite(discount_))
    throw Error("discount must be positive and finite");
}

ControlProblem ControlProblem::with_steady_state(SteadyState ss) const {
  if (ss.x.size() != n_ || ss.u.size() != m_)
    throw DimensionMismatch("steady state has the wrong dimension");
  ControlProblem p = *this;
  p.steady_ = std::move(ss);
  return p;
}

ControlProblem ControlProblem::with_mode(Mode mode) const {
  ControlProblem p = *this;
  p.mode_ = mode;
  return p;
}

ControlProblem ControlProblem::with_anchor(int s) const {
  if (s < 1)
    throw Error("anchor stage s must be at least 1");
  ControlProblem p = *this;
  p.anchor_s_ = s;
  return p;
}

double ControlProblem::weight(int t) const {
  return discount_ == 1.0 ? 1.0 : std::pow(discount_, t);
}

Vec ControlProblem::f(int t, const Vec &x, const Vec &u) const {
  return stages_.at(t).dynamics->eval(x, u);
}
Mat ControlProblem::fx(int t, const Vec &x, const Vec &u) const {
  return stages_.at(t).dynamics->d1(x, u);
}
Mat ControlProblem::fu(int t, const Vec &x, const Vec &u) const {
  return stages_.at(t).dynamics->d2(x, u);
}
double ControlProblem::phi(int t, const Vec &x, const Vec &u) const {
  return weight(t) * stages_.at(t).reward->eval(x, u);
}
Vec ControlProblem::phix(int t, const Vec &x, const Vec &u) const {
  return weight(t) * stages_.at(t).reward->d1(x, u);
}
Vec ControlProblem::phiu(int t, const Vec &x, const Vec &u) const {
  return weight(t) * stages_.at(t).reward->d2(x, u);
}
const ConvexControlSet &ControlProblem::control_set(int t) const {
  return stages_.at(t).control_set;
}

Vec Process::state(int t) const {
  if (t >= 0 && t < static_cast<int>(x.size()))
    return x[static_cast<std::size_t>(t)];
  if (t >= 0 && tail)
    return tail->x;
  throw IndexMismatch(fmt::format("state index {} outside the process window", t));
}

Vec Process::control(int t) const {
  if (t >= 0 && t < static_cast<int>(u.size()))
    return u[static_cast<std::size_t>(t)];
  if (t >= 0 && tail)
    return tail->u;
  throw IndexMismatch(fmt::format("control index {} outside the process window", t));
}

Process Process::window(int T) const {
  Process p;
  p.tail = tail;
  for (int t = 0; t <= T + 1; ++t)
    p.x.push_back(state(t));
  for (int t = 0; t <= T; ++t)
    p.u.push_back(control(t));
  return p;
}

FeasibilityReport check_feasibility(const ControlProblem &problem,
                                    const Process &proc) {
  FeasibilityReport rep;
  if (proc.x.size() != proc.u.size() + 1)
    throw IndexMismatch("process needs T+2 states for T+1 controls");
  rep.initial_gap = (proc.x.front() - problem.sigma()).norm();
  for (int t = 0; t <= proc.horizon(); ++t) {
    const auto &xt = proc.x[static_cast<std::size_t>(t)];
    const auto &ut = proc.u[static_cast<std::size_t>(t)];
    const Vec next = problem.f(t, xt, ut);
    if (!next.allFinite())
      throw NonFiniteValue(fmt::format("dynamics non-finite at stage {}", t));
    const Vec diff = proc.x[static_cast<std::size_t>(t) + 1] - next;
    const double gap = problem.mode() == Mode::equation
                           ? diff.norm()
                           : diff.cwiseMax(0.0).norm();
    const double cgap = problem.control_set(t).distance(ut);
    if (gap > rep.dynamics_gap || cgap > rep.control_gap)
      rep.worst_stage = t;
    rep.dynamics_gap = std::max(rep.dynamics_gap, gap);
    rep.control_gap = std::max(rep.control_gap, cgap);
  }
  return rep;
}

} // namespace ihoc
