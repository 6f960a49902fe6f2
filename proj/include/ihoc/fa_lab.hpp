#pragma once

#include "ihoc/control_set.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ihoc {

/// Finite family of subadditive functionals p_n with companion scalars
/// lambda_n >= 0.
struct SubadditiveFamily {
  using Functional = std::function<double(const Vec &)>;

  int dim = 0;
  std::vector<Functional> members;
  std::vector<double> lambda;
  bool sublinear = false;

  int size() const { return static_cast<int>(members.size()); }
  double eval(int n, const Vec &z) const {
    return members.at(static_cast<std::size_t>(n))(z);
  }
  /// Throws Error when sizes disagree or some lambda_n is negative.
  void validate() const;
};

/// Worst p(x+y) - p(x) - p(y) over random Gaussian pairs (scaled by `scale`).
double subadditivity_defect(const SubadditiveFamily &family, int pairs,
                            std::uint64_t seed, double scale = 1.0);
/// Worst |p(a z) - a p(z)| over random z and a in [0, 5].
double homogeneity_defect(const SubadditiveFamily &family, int samples,
                          std::uint64_t seed);

/// The set K with a distinguished point a in K and a finite probe set B.
struct ConvexBody {
  ConvexControlSet set;
  Vec a;
  VecSeq probes;
  double probe_radius = 0.0; ///< max |h| over B

  /// Throws PointNotInSet if a is not in K and Error if B is empty.
  ConvexBody(ConvexControlSet k, Vec a, VecSeq probes);
};

/// Sample of a set including its extreme points, used as a probe set.
VecSeq probe_points(const ConvexControlSet &set, int count, std::uint64_t seed);

struct UniformBound {
  double estimate = 0.0;
  int member = -1;
  Vec probe;
};

/// max_n max_{h in B} p_n(h - a). Throws NonFiniteValue.
UniformBound uniform_bound_estimate(const SubadditiveFamily &family,
                                    const ConvexBody &body);

struct OperatorNormAudit {
  std::vector<double> pointwise; ///< sup_n |T_n x| per probe x
  double uniform = 0.0;          ///< sup_n |T_n| (2-norm)
  int argmax = -1;
  bool consistent = false;       ///< uniform >= pointwise / |x| everywhere
};

OperatorNormAudit operator_norm_audit(const std::vector<Mat> &operators,
                                      const VecSeq &probes);

struct Lemma33Result {
  Vec witness;                 ///< b_a
  double constant = 0.0;       ///< R_B
  std::vector<double> margins; ///< R (lambda_n + p_n(b - a)) - sup_B p_n(h - a)
  std::vector<double> sup_over_probes;
  int candidates = 0;
  bool premise_ok = true;      ///< p_n <= 0 on sampled K wherever lambda_n = 0
};

/// Grid search for the smallest R in {0} u {2^k : 0 <= k <= ladder_max} and,
/// among the witnesses achieving it, the one closest to a, such that
/// sup_{h in B} p_n(h - a) <= R (lambda_n + p_n(b - a)) for every n.
/// Candidates b come from a `resolution`-per-axis grid over the bounding box
/// of K projected onto Aff(K). Throws NoWitnessFound.
Lemma33Result lemma33_constant_search(const SubadditiveFamily &family,
                                      const ConvexBody &body,
                                      int resolution = 33, int ladder_max = 20);

} // namespace ihoc
