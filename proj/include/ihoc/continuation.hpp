#pragma once

#include "ihoc/finite_horizon.hpp"
#include "ihoc/pontryagin.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ihoc {

/// Verify mode: truncations are anchored at the candidate's x_{T+1}.
struct VerifyMode {
  Process candidate;
};

/// Solve mode: truncations are anchored at a steady state, computed when
/// possible and otherwise taken from `terminal` or the problem's own tail.
struct SolveMode {
  std::optional<Vec> terminal;
};

using ContinuationMode = std::variant<VerifyMode, SolveMode>;

struct ContinuationConfig {
  SolverConfig solver;
  double certificate_tol = 1e-6;
  bool warm_start = true;
  /// Cold-started horizons may be solved on worker threads.
  bool parallel = true;
  int limit_window = 3;
  double limit_tol = 1e-6;
};

inline std::vector<int> default_schedule() { return {5, 10, 20, 40, 80}; }

struct HorizonRecord {
  int T = 0;
  bool ok = false;
  std::string error;
  SolveStatus status = SolveStatus::max_iterations;
  int iterations = 0;
  double objective = 0.0;
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
  bool abnormal_extraction = false;
  Process primal;
  MultiplierPath raw;   ///< multipliers before normalization
  MultiplierPath path;  ///< normalized at the anchor stage
  Certificate certificate;
};

struct LimitCandidate {
  double lambda0 = 0.0;
  VecSeq p; ///< p_1..p_k
};

struct LimitResult {
  bool converged = false;
  int window = 0;
  double tol = 0.0;
  LimitCandidate limit;         ///< window averages, filled either way
  bool lambda0_converged = false;
  std::vector<int> converged_stages;
  std::vector<int> unconverged_stages;
  /// max - min over the window of the worst offending coordinate.
  double amplitude = 0.0;
  int worst_stage = 0; ///< 0 stands for lambda0
};

struct ContinuationTrace {
  int anchor_s = 1;
  bool verify_mode = false;
  Vec terminal_anchor; ///< solve mode only
  std::string terminal_source;
  std::vector<int> horizons;
  std::vector<HorizonRecord> records;
  std::optional<LimitResult> limit;
};

/// Solves the truncations of the schedule, normalizes the multipliers at s
/// and certifies every horizon. Per-horizon failures are recorded, not thrown.
ContinuationTrace run_continuation(const ControlProblem &problem,
                                   const ContinuationMode &mode,
                                   const std::vector<int> &schedule, int s,
                                   const ContinuationConfig &cfg = {});

/// Cauchy-window test over the last `window` successful horizons: a series
/// converges when its last successive difference is within tol and the
/// differences do not grow. The candidate is the window average.
LimitResult detect_limit(const ContinuationTrace &trace, int window, double tol);

/// Steady state (x, u) with x = f(x,u) and the current-value stationarity
/// conditions of the tail stage, found by damped Newton. Empty on failure.
std::optional<SteadyState> find_steady_state(const ControlProblem &problem,
                                             double tol = 1e-12,
                                             int max_iter = 100);

struct HorizonAudit {
  int T = 0;
  bool bound_ok = false;
  double min_slack = 0.0;
  bool cone_ok = false;
  double cone_worst = 0.0;
  std::string error;
};

struct DegeneracyReport {
  bool normalization_ok = false;
  double worst_normalization = 0.0;
  bool bounds_ok = false;
  bool cone_ok = false;
  std::vector<HorizonAudit> audits;
  LimitResult limit;
  bool abnormal = false;
  double limit_margin = 0.0; ///< lambda0 + |p_s| of the limit pair
  bool margin_ok = false;
  std::vector<int> unconverged_stages;
  std::vector<int> failed_horizons; ///< records without a usable path
};

/// Checks the premises along the trace (normalization, linear bounds, cone
/// bounds) and the nontriviality of the limit pair. When `reference` is set
/// the audits use it instead of each horizon's own primal.
DegeneracyReport degeneracy_monitor(const ContinuationTrace &trace,
                                    const ControlProblem &problem,
                                    const std::optional<Process> &reference = {},
                                    double tol = 1e-6, int cone_samples = 32,
                                    std::uint64_t seed = 0);

} // namespace ihoc
