#pragma once

#include "ihoc/model.hpp"

#include <cstdint>

namespace ihoc {

/// Max relative deviation between analytic and central-difference
/// derivatives for one stage, per block.
struct StageDerivativeError {
  int t = 0;
  double dyn_x = 0.0;
  double dyn_u = 0.0;
  double reward_x = 0.0;
  double reward_u = 0.0;
  double worst() const {
    return std::max(std::max(dyn_x, dyn_u), std::max(reward_x, reward_u));
  }
};

struct DerivativeReport {
  double step = 0.0;
  std::vector<StageDerivativeError> stages;
  double worst() const;
  bool ok(double tol = 1e-5) const { return worst() <= tol; }
};

/// Relative error convention: |analytic - fd|_inf / max(1, |analytic|_inf).
double relative_error(const Mat &analytic, const Mat &numeric);

/// Central-difference derivatives over the stages 0..T of `proc`.
/// Throws NonFiniteValue on non-finite evaluations.
DerivativeReport check_derivatives(const ControlProblem &problem,
                                   const Process &proc, double h = 1e-5);

/// Lower estimate of the largest r with B(0, r) inside
/// Df((X x T_U(u_hat)) cap B_{X x U}).
///
/// With a full tangent cone this is the smallest singular value of [fx fu].
/// Otherwise the radius along each unit direction d is 1 / N(d), where N(d)
/// is the least norm of (h, k) with fx h + fu k = d and k in the cone; the
/// estimate is the minimum over the sampled directions (0 if one of them is
/// unreachable).
double interiority_margin(const Mat &fx, const Mat &fu,
                          const ConvexControlSet &set, const Vec &u_hat,
                          const VecSeq &directions);

double interiority_margin(const Mat &fx, const Mat &fu,
                          const ConvexControlSet &set, const Vec &u_hat,
                          int direction_samples = 64, std::uint64_t seed = 0);

double interiority_margin(const ControlProblem &problem, const Process &proc,
                          int t, int direction_samples = 64,
                          std::uint64_t seed = 0);

/// Sampled unit directions in R^n: the signed axes plus `count` Gaussian
/// draws, normalized.
VecSeq unit_directions(int n, int count, std::uint64_t seed);

struct RankCodim {
  int rank = 0;
  int codim = 0;
};

/// Rank and codimension of the range of D_2 f_t at (x_t, u_t).
RankCodim rank_codim(const ControlProblem &problem, const Process &proc, int t);
RankCodim rank_codim(const Mat &fu);

struct AnchorReport {
  int stage = 0;
  int span_dim = 0;
  int affine_codim = 0;
  bool relative_interior_nonempty = true;
};

/// Codimension of span(D_2 f_s T_{U_s}(u_s)). The image of a nonempty cone
/// always contains 0, so its relative interior is nonempty in finite
/// dimension.
AnchorReport anchor_check(const ControlProblem &problem, const Process &proc,
                          int s);
AnchorReport anchor_check(const Mat &fu, const ConvexControlSet &set,
                          const Vec &u_hat);

/// Orthonormal basis of the linear span of T_U(u_hat).
Mat tangent_cone_span(const ConvexControlSet &set, const Vec &u_hat);

} // namespace ihoc
