#pragma once

#include "ihoc/model.hpp"
#include "ihoc/multipliers.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ihoc {

struct RiccatiSolution {
  Mat p;     ///< stationary value matrix
  Mat gain;  ///< u = -K x
  int iterations = 0;
};

/// Fixed point of P = Q + b A'PA - b^2 A'PB (R + b B'PB)^{-1} B'PA by damped
/// iteration. Throws NoConvergence after `max_iter` sweeps.
RiccatiSolution riccati_stationary(const Mat &a, const Mat &b, const Mat &q,
                                   const Mat &r, double discount,
                                   double tol = 1e-12, int max_iter = 200000);

struct LqParams {
  Mat a, b, q, r;
  double discount = 0.95;
  Vec sigma;
  double control_bound = 10.0;
};

/// Default LQ block of dimension n (1..4) used throughout the tests.
LqParams lq_default(int n);
ControlProblem lq_problem(const LqParams &params, int anchor_s = 1);
/// Closed-loop process x_{t+1} = (A - BK) x_t over 0..T with zero tail.
Process lq_reference(const LqParams &params, const RiccatiSolution &ric, int T);
/// lambda0 = 1, p_t = -2 b^t P x_t for t = 1..T+1.
MultiplierPath lq_multipliers(const LqParams &params, const RiccatiSolution &ric,
                              const Process &proc);

struct RamseyParams {
  double alpha = 0.3;
  double discount = 0.95;
  double k0 = 0.1;
  double c_lo = 1e-8;
  double c_hi = 10.0;
};

double ramsey_steady_capital(const RamseyParams &params);
ControlProblem ramsey_problem(const RamseyParams &params, Mode mode = Mode::equation,
                              int anchor_s = 1);
/// Closed-form policy k_{t+1} = a b k_t^a, c_t = (1 - a b) k_t^a over 0..T.
/// Throws DomainViolation if some k_t <= 0.
Process ramsey_reference(const RamseyParams &params, int T);
/// lambda0 = 1, p_{t+1} = b^t / c_t.
MultiplierPath ramsey_multipliers(const RamseyParams &params, const Process &proc);
/// Sum_{t<=T} b^t ln c_t along the process.
double ramsey_objective(const RamseyParams &params, const Process &proc);

/// f(x,u) = x with reward -b^t |u|^2 and U = [-1,1]^n; the candidate stays at
/// sigma with zero controls.
ControlProblem abnormal_problem(int n, int anchor_s = 1);
Process abnormal_reference(int n, int T);
/// lambda0 = 0 and p_t = p for all t.
MultiplierPath abnormal_multipliers(const Vec &p, int T);

/// f(x,u) = x + u with zero reward on [-1,1]^n.
ControlProblem zero_reward_problem(int n, int anchor_s = 1);
Process zero_reward_reference(int n, int T);

/// Named entry with its reference generators.
struct CatalogEntry {
  std::string name;
  std::string note;
  ControlProblem problem;
  std::function<Process(int)> reference;
  std::function<MultiplierPath(const Process &)> multipliers;
};

std::vector<std::string> catalog_names();
/// Resolves a catalog name with default parameters; throws ConfigError.
CatalogEntry catalog_entry(const std::string &name, int n = 1);
CatalogEntry lq_entry(const LqParams &params, int anchor_s = 1);
CatalogEntry ramsey_entry(const RamseyParams &params, Mode mode = Mode::equation,
                          int anchor_s = 1);
CatalogEntry abnormal_entry(int n, int anchor_s = 1);
CatalogEntry zero_reward_entry(int n, int anchor_s = 1);

} // namespace ihoc
