#pragma once

#include "ihoc/model.hpp"
#include "ihoc/multipliers.hpp"

#include <optional>
#include <string>

namespace ihoc {

/// Flattened decision vector (x_1..x_T, u_0..u_T).
struct DecisionLayout {
  int n = 0;
  int m = 0;
  int T = 0;
  int size() const { return T * n + (T + 1) * m; }
  int constraint_size() const { return (T + 1) * n; }
  /// Offset of x_t, 1 <= t <= T.
  int x_offset(int t) const { return (t - 1) * n; }
  /// Offset of u_t, 0 <= t <= T.
  int u_offset(int t) const { return T * n + t * m; }
};

/// Horizon-T restriction: maximize J^T over (x_1..x_T, u_0..u_T) subject to
/// g^T = 0 (equation mode) or g^T >= 0 (inequation mode) and u_t in U_t.
/// Block t of g^T is -x_{t+1} + f_t(x_t, u_t) with x_0 = sigma and
/// x_{T+1} = terminal.
class TruncatedProblem {
public:
  TruncatedProblem(ControlProblem problem, int T, Vec terminal);

  const ControlProblem &problem() const { return problem_; }
  const DecisionLayout &layout() const { return layout_; }
  int horizon() const { return layout_.T; }
  const Vec &terminal() const { return terminal_; }
  Mode mode() const { return problem_.mode(); }

  Vec state(const Vec &z, int t) const;
  Vec control(const Vec &z, int t) const;

  double objective(const Vec &z) const;
  Vec objective_gradient(const Vec &z) const;
  Vec constraints(const Vec &z) const;
  /// Directional derivative Dg^T(z) dz, blocks b_1..b_{T+1}.
  Vec jacobian_apply(const Vec &z, const Vec &dz) const;
  /// Dg^T(z)' w for w with T+1 blocks.
  Vec jacobian_transpose_apply(const Vec &z, const Vec &w) const;
  Mat jacobian(const Vec &z) const;

  Vec pack(const Process &proc) const;
  Process unpack(const Vec &z) const;
  /// Projects every control block onto its set; states are left alone.
  Vec project(const Vec &z) const;

private:
  void check_size(const Vec &z) const;

  ControlProblem problem_;
  DecisionLayout layout_;
  Vec terminal_;
};

/// Throws DimensionMismatch or IndexMismatch (T < 2).
TruncatedProblem build_truncation(const ControlProblem &problem, int T,
                                  const Vec &terminal);

enum class StartStrategy { zero, rollout, interpolate, warm };
const char *to_string(StartStrategy s);
StartStrategy start_strategy_from_string(const std::string &name);

struct SolverConfig {
  double feasibility_tol = 1e-8;
  double stationarity_tol = 1e-8;
  double recheck_tol = 1e-7;
  int max_outer = 80;
  int max_inner = 20000;
  double penalty_initial = 10.0;
  double penalty_growth = 10.0;
  double penalty_max = 1e10;
  StartStrategy start = StartStrategy::warm;
};

enum class SolveStatus { converged, max_iterations, infeasible };
const char *to_string(SolveStatus s);

/// Primal-dual output of the truncation solver with lambda0 = 1 and
/// p_t the multiplier of block t-1. When Dg^T is rank deficient an abnormal
/// candidate (lambda0 = 0, p in the left kernel) is attached as well.
struct KKTPoint {
  Process primal;
  Vec z;
  double lambda0 = 1.0;
  VecSeq costates; ///< p_1..p_{T+1}
  std::optional<MultiplierPath> abnormal;
  double objective = 0.0;
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0; ///< max |<p_t, g_{t-1}>|, inequation mode
  double penalty = 0.0;
  int iterations = 0;
  int outer_iterations = 0;
  SolveStatus status = SolveStatus::max_iterations;
  bool converged() const { return status == SolveStatus::converged; }
};

/// Starting point plus multiplier guess (empty means zero).
struct StartPoint {
  Vec z;
  Vec multipliers;
};

/// Builds a start for the given strategy. `reference` supplies the states and
/// controls used by `warm` (a previous, shorter solution or candidate) and
/// `extension` fills stages beyond it; `previous_costates` seeds multipliers.
StartPoint make_start(const TruncatedProblem &tp, StartStrategy strategy,
                      const Process *reference = nullptr,
                      const Process *extension = nullptr,
                      const VecSeq *previous_costates = nullptr);

/// Augmented Lagrangian over the coupling constraints with a spectral
/// projected-gradient inner loop. Unconverged runs come back flagged rather
/// than thrown.
KKTPoint solve_truncation(const TruncatedProblem &tp, const StartPoint &start,
                          const SolverConfig &cfg = {});
KKTPoint solve_truncation(const TruncatedProblem &tp, const Vec &start,
                          const SolverConfig &cfg = {});

/// Stationarity of L = l0 J + sum <p_t, g_{t-1}>: max of the x-gradient norm
/// and the per-stage VI gaps in u.
double lagrangian_stationarity(const TruncatedProblem &tp, const Vec &z,
                               double lambda0, const Vec &multipliers);

/// Repackages the multipliers, preferring the abnormal candidate when one was
/// found, and re-checks the adjoint and VI conditions at 10x the stationarity
/// tolerance (plus p >= 0 in inequation mode). Throws ConditionViolation.
MultiplierPath extract_multipliers(const KKTPoint &kkt,
                                   const TruncatedProblem &tp,
                                   const SolverConfig &cfg = {});

} // namespace ihoc
