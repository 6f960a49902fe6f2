#pragma once

#include "ihoc/model.hpp"
#include "ihoc/multipliers.hpp"

#include <cstdint>
#include <limits>
#include <map>

namespace ihoc {

/// p_t = D_1 f_t' p_{t+1} + lambda0 D_1 phi_t at (x_t, u_t), t >= 1.
Vec adjoint_step(const ControlProblem &problem, const Process &proc, int t,
                 const Vec &p_next, double lambda0);

/// Runs adjoint_step for t = T..1 starting from p_{T+1} = p_terminal.
MultiplierPath adjoint_sweep(const ControlProblem &problem, const Process &proc,
                             const Vec &p_terminal, double lambda0, int T);

/// sup_{u in U} <q, u - u_hat> for q = lambda0 D_2 phi_t + D_2 f_t' p_{t+1}.
/// Zero means the variational inequality holds with equality somewhere.
double vi_residual(const ControlProblem &problem, const Process &proc, int t,
                   const Vec &p_next, double lambda0);
double vi_residual(const ConvexControlSet &set, const Vec &u_hat, const Vec &q);

/// Per-stage residuals for the four conditions of the maximum principle on
/// a window 0..T. Residual verdicts are taken relative to the path scale
/// lambda0 + max_t |p_t|, which makes every verdict invariant under positive
/// rescaling of the multipliers.
struct Certificate {
  int horizon = 0;
  int anchor_s = 1;
  double tol = 1e-6;
  Mode mode = Mode::equation;
  double lambda0 = 0.0;
  double scale = 0.0;

  std::vector<double> adjoint;    ///< index i is t = i + 1, t = 1..T
  std::vector<double> vi;         ///< index i is t = i, t = 0..T
  std::vector<double> margin;     ///< index i is t = i + 1, t = 1..T+1
  std::vector<double> positivity; ///< index i is t = i + 1; inequation only

  bool adjoint_ok = false;
  bool vi_ok = false;
  bool nontrivial_ok = false;
  bool sign_ok = false;
  bool pass = false;

  std::vector<int> adjoint_failures;
  std::vector<int> vi_failures;
  std::vector<int> nontrivial_failures;
  std::vector<int> sign_failures;

  double worst_adjoint() const;
  double worst_vi() const;
};

/// Checks the four conditions: nontriviality for t >= s, signs, the adjoint
/// recursion for t = 1..T and the variational inequality for t = 0..T.
Certificate verify_certificate(const ControlProblem &problem,
                               const Process &proc, const MultiplierPath &path,
                               int s, double tol = 1e-6);

/// Constants (a_t, b_t) of the linear costate bounds and the slacks they
/// leave on each horizon.
struct BoundAudit {
  int anchor_s = 1;
  std::vector<double> margins;  ///< r_t, index t (entry 0 unused)
  std::vector<double> a;        ///< index t, t = 1..T_max+1
  std::vector<double> b;
  /// horizon -> slacks a_t l0 + b_t |p_s| - |p_t| for t = 1..T+1 (index t-1)
  std::map<int, std::vector<double>> slack;
  double min_slack = std::numeric_limits<double>::infinity();
  bool ok(double tol = 1e-8) const { return min_slack >= -tol; }
};

/// Composes the forward bound |p_{t+1}| <= (|p_t| + l0 |D phi_t|) / r_t for
/// t >= s and the backward bound |p_t| <= |p_{t+1}| |D_1 f_t| + l0 |D_1 phi_t|
/// for t < s. Throws MarginZero when some needed r_t vanishes.
BoundAudit bound_audit(const ControlProblem &problem, const Process &proc,
                       const std::map<int, MultiplierPath> &paths_by_horizon,
                       int s, int direction_samples = 64,
                       std::uint64_t seed = 0);

struct ConeBoundReport {
  int anchor_s = 1;
  std::vector<double> c_z;        ///< -<D_2 phi_{s-1}, y> per generator
  std::vector<double> violation;  ///< <p_s, z> - lambda0 c_z per generator
  double worst = -std::numeric_limits<double>::infinity();
  bool ok(double tol) const { return worst <= tol; }
};

/// For each tangent direction y at stage s-1 with z = D_2 f_{s-1} y, checks
/// <p_s, z> <= -lambda0 <D_2 phi_{s-1}, y>. Throws TangentConeViolation when
/// a generator leaves T_{U_{s-1}}(u_{s-1}).
ConeBoundReport cone_bound_check(const ControlProblem &problem,
                                 const Process &proc,
                                 const MultiplierPath &path, int s,
                                 const VecSeq &generators, double tol = 1e-6);

/// Unit vectors of T_U(u_hat) obtained by projecting Gaussian samples.
VecSeq sample_cone_generators(const ConvexControlSet &set, const Vec &u_hat,
                              int count, std::uint64_t seed);

} // namespace ihoc
