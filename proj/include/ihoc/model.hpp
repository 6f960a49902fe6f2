#pragma once

#include "ihoc/control_set.hpp"
#include "ihoc/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace ihoc {

/// Stage map f_t : X x U -> X with its partial differentials.
class StageDynamics {
public:
  virtual ~StageDynamics() = default;
  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual Vec eval(const Vec &x, const Vec &u) const = 0;
  /// D_1 f, n x n.
  virtual Mat d1(const Vec &x, const Vec &u) const = 0;
  /// D_2 f, n x m.
  virtual Mat d2(const Vec &x, const Vec &u) const = 0;
  virtual std::string name() const = 0;
};

/// Stage reward phi_t : X x U -> R (undiscounted).
class StageReward {
public:
  virtual ~StageReward() = default;
  virtual double eval(const Vec &x, const Vec &u) const = 0;
  virtual Vec d1(const Vec &x, const Vec &u) const = 0;
  virtual Vec d2(const Vec &x, const Vec &u) const = 0;
  virtual std::string name() const = 0;
};

/// f(x,u) = A x + B u + c
class LinearDynamics final : public StageDynamics {
public:
  LinearDynamics(Mat a, Mat b, Vec c);
  LinearDynamics(Mat a, Mat b);
  int state_dim() const override { return static_cast<int>(a_.rows()); }
  int control_dim() const override { return static_cast<int>(b_.cols()); }
  Vec eval(const Vec &x, const Vec &u) const override;
  Mat d1(const Vec &, const Vec &) const override { return a_; }
  Mat d2(const Vec &, const Vec &) const override { return b_; }
  std::string name() const override { return "linear"; }
  const Mat &a() const { return a_; }
  const Mat &b() const { return b_; }

private:
  Mat a_, b_;
  Vec c_;
};

/// One-sector growth: k' = k^alpha - c. Returns NaN off the domain k > 0.
class GrowthDynamics final : public StageDynamics {
public:
  explicit GrowthDynamics(double alpha);
  int state_dim() const override { return 1; }
  int control_dim() const override { return 1; }
  Vec eval(const Vec &x, const Vec &u) const override;
  Mat d1(const Vec &x, const Vec &u) const override;
  Mat d2(const Vec &x, const Vec &u) const override;
  std::string name() const override { return "growth"; }
  double alpha() const { return alpha_; }

private:
  double alpha_;
};

/// f(x,u) = x, so the control never acts on the state.
class StaticDynamics final : public StageDynamics {
public:
  StaticDynamics(int n, int m) : n_(n), m_(m) {}
  int state_dim() const override { return n_; }
  int control_dim() const override { return m_; }
  Vec eval(const Vec &x, const Vec &) const override { return x; }
  Mat d1(const Vec &, const Vec &) const override {
    return Mat::Identity(n_, n_);
  }
  Mat d2(const Vec &, const Vec &) const override {
    return Mat::Zero(n_, m_);
  }
  std::string name() const override { return "static"; }

private:
  int n_, m_;
};

/// Dynamics assembled from callables, mostly for tests and ad hoc models.
class FunctionDynamics final : public StageDynamics {
public:
  using EvalFn = std::function<Vec(const Vec &, const Vec &)>;
  using JacFn = std::function<Mat(const Vec &, const Vec &)>;
  FunctionDynamics(int n, int m, EvalFn f, JacFn d1, JacFn d2,
                   std::string name = "function");
  int state_dim() const override { return n_; }
  int control_dim() const override { return m_; }
  Vec eval(const Vec &x, const Vec &u) const override { return f_(x, u); }
  Mat d1(const Vec &x, const Vec &u) const override { return d1_(x, u); }
  Mat d2(const Vec &x, const Vec &u) const override { return d2_(x, u); }
  std::string name() const override { return name_; }

private:
  int n_, m_;
  EvalFn f_;
  JacFn d1_, d2_;
  std::string name_;
};

/// phi(x,u) = -(x'Qx + u'Ru), the negated quadratic cost.
class QuadraticReward final : public StageReward {
public:
  QuadraticReward(Mat q, Mat r);
  double eval(const Vec &x, const Vec &u) const override;
  Vec d1(const Vec &x, const Vec &) const override { return -2.0 * (q_ * x); }
  Vec d2(const Vec &, const Vec &u) const override { return -2.0 * (r_ * u); }
  std::string name() const override { return "quadratic"; }

private:
  Mat q_, r_;
};

/// phi(x,u) = <cx, x> + <cu, u>
class LinearReward final : public StageReward {
public:
  LinearReward(Vec cx, Vec cu) : cx_(std::move(cx)), cu_(std::move(cu)) {}
  double eval(const Vec &x, const Vec &u) const override {
    return cx_.dot(x) + cu_.dot(u);
  }
  Vec d1(const Vec &, const Vec &) const override { return cx_; }
  Vec d2(const Vec &, const Vec &) const override { return cu_; }
  std::string name() const override { return "linear"; }

private:
  Vec cx_, cu_;
};

/// phi(x,u) = ln(u_0); NaN when u_0 <= 0.
class LogControlReward final : public StageReward {
public:
  LogControlReward(int n, int m) : n_(n), m_(m) {}
  double eval(const Vec &x, const Vec &u) const override;
  Vec d1(const Vec &, const Vec &) const override { return Vec::Zero(n_); }
  Vec d2(const Vec &x, const Vec &u) const override;
  std::string name() const override { return "log_control"; }

private:
  int n_, m_;
};

class ZeroReward final : public StageReward {
public:
  ZeroReward(int n, int m) : n_(n), m_(m) {}
  double eval(const Vec &, const Vec &) const override { return 0.0; }
  Vec d1(const Vec &, const Vec &) const override { return Vec::Zero(n_); }
  Vec d2(const Vec &, const Vec &) const override { return Vec::Zero(m_); }
  std::string name() const override { return "zero"; }

private:
  int n_, m_;
};

class FunctionReward final : public StageReward {
public:
  using EvalFn = std::function<double(const Vec &, const Vec &)>;
  using GradFn = std::function<Vec(const Vec &, const Vec &)>;
  FunctionReward(EvalFn f, GradFn d1, GradFn d2, std::string name = "function")
      : f_(std::move(f)), d1_(std::move(d1)), d2_(std::move(d2)),
        name_(std::move(name)) {}
  double eval(const Vec &x, const Vec &u) const override { return f_(x, u); }
  Vec d1(const Vec &x, const Vec &u) const override { return d1_(x, u); }
  Vec d2(const Vec &x, const Vec &u) const override { return d2_(x, u); }
  std::string name() const override { return name_; }

private:
  EvalFn f_;
  GradFn d1_, d2_;
  std::string name_;
};

/// Data attached to one stage t.
struct StageData {
  std::shared_ptr<const StageDynamics> dynamics;
  std::shared_ptr<const StageReward> reward;
  ConvexControlSet control_set;
};

/// Maps t in N to stage data. Stationary problems repeat one entry,
/// periodic ones cycle, tabulated ones use entries[t] and then keep the last
/// entry forever, which is the eventual-stationarity tail.
class StageSchedule {
public:
  enum class Kind { stationary, periodic, tabulated };

  static StageSchedule stationary(StageData stage);
  static StageSchedule periodic(std::vector<StageData> cycle);
  static StageSchedule tabulated(std::vector<StageData> table);

  Kind kind() const { return kind_; }
  const StageData &at(int t) const;
  const std::vector<StageData> &entries() const { return entries_; }

private:
  Kind kind_ = Kind::stationary;
  std::vector<StageData> entries_;
};

/// Steady-state tail: x_t = x, u_t = u beyond the stored window.
struct SteadyState {
  Vec x;
  Vec u;
};

/// Infinite-horizon problem: maximize sum_t discount^t phi_t(x_t, u_t) over
/// processes starting at sigma, with controls in U_t.
class ControlProblem {
public:
  ControlProblem(StageSchedule stages, Vec sigma, Mode mode, int anchor_s,
                 double discount = 1.0);

  int state_dim() const { return n_; }
  int control_dim() const { return m_; }
  const Vec &sigma() const { return sigma_; }
  Mode mode() const { return mode_; }
  int anchor_s() const { return anchor_s_; }
  double discount() const { return discount_; }
  const StageSchedule &stages() const { return stages_; }
  /// The positivity cone of the inequation mode is the nonnegative orthant,
  /// whose interior is never empty.
  bool positivity_cone_has_interior() const { return true; }

  const std::optional<SteadyState> &steady_state() const { return steady_; }
  ControlProblem with_steady_state(SteadyState ss) const;
  ControlProblem with_mode(Mode mode) const;
  ControlProblem with_anchor(int s) const;

  // Stage-t quantities, discount already applied to the reward.
  Vec f(int t, const Vec &x, const Vec &u) const;
  Mat fx(int t, const Vec &x, const Vec &u) const;
  Mat fu(int t, const Vec &x, const Vec &u) const;
  double phi(int t, const Vec &x, const Vec &u) const;
  Vec phix(int t, const Vec &x, const Vec &u) const;
  Vec phiu(int t, const Vec &x, const Vec &u) const;
  double weight(int t) const;
  const ConvexControlSet &control_set(int t) const;
  const StageData &stage(int t) const { return stages_.at(t); }

private:
  StageSchedule stages_;
  Vec sigma_;
  Mode mode_;
  int anchor_s_;
  double discount_;
  int n_ = 0, m_ = 0;
  std::optional<SteadyState> steady_;
};

/// Process window: x_0..x_{T+1}, u_0..u_T and an optional steady tail.
struct Process {
  VecSeq x;
  VecSeq u;
  std::optional<SteadyState> tail;

  int horizon() const { return static_cast<int>(u.size()) - 1; }
  /// x_t, using the tail beyond the window. Throws IndexMismatch otherwise.
  Vec state(int t) const;
  Vec control(int t) const;
  /// Window 0..T (states up to T+1) cut from this process.
  Process window(int T) const;
};

struct FeasibilityReport {
  double initial_gap = 0.0;     ///< |x_0 - sigma|
  double dynamics_gap = 0.0;    ///< worst equation/inequation violation
  double control_gap = 0.0;     ///< worst distance of u_t to U_t
  int worst_stage = -1;
  bool ok(double tol) const {
    return initial_gap <= tol && dynamics_gap <= tol && control_gap <= tol;
  }
};

/// Ead / Iad membership of the window, per the problem's mode.
FeasibilityReport check_feasibility(const ControlProblem &problem,
                                    const Process &proc);

} // namespace ihoc
