#pragma once

#include "ihoc/types.hpp"

#include <optional>

namespace ihoc::linalg {

/// Default relative threshold for numerical rank decisions.
inline constexpr double kRankRelTol = 1e-10;

/// Rank by singular-value thresholding at `rel_tol` times the largest value.
int numerical_rank(const Mat &m, double rel_tol = kRankRelTol);

/// Orthonormal basis (as columns) of the kernel of `m`.
Mat null_space(const Mat &m, double rel_tol = kRankRelTol);

/// Induced 2-norm.
double op_norm(const Mat &m);

/// Radius of the largest ball centred at 0 contained in the image of the
/// closed unit ball under `m`; zero when `m` is not onto.
double inscribed_radius(const Mat &m);

/// Euclidean projection of `v` onto {z : aeq z = beq, ain z <= bin}.
///
/// Exact for small systems: every facet combination of size at most the
/// ambient dimension is tried, and the closest feasible candidate wins.
/// Returns nullopt when the set is empty.
std::optional<Vec> project_polyhedron(const Vec &v, const Mat &aeq,
                                      const Vec &beq, const Mat &ain,
                                      const Vec &bin);

/// Projection onto the polyhedral cone {k : rows k <= 0}.
Vec project_cone(const Vec &v, const Mat &rows);

/// Calls `fn(indices)` for every subset of {0..count-1} with at most
/// `max_size` elements, smallest subsets first.
template <typename Fn>
void for_each_subset(int count, int max_size, Fn &&fn) {
  std::vector<int> idx;
  for (int k = 0; k <= std::min(count, max_size); ++k) {
    idx.resize(k);
    for (int i = 0; i < k; ++i)
      idx[i] = i;
    while (true) {
      fn(static_cast<const std::vector<int> &>(idx));
      int i = k - 1;
      while (i >= 0 && idx[i] == count - k + i)
        --i;
      if (i < 0)
        break;
      ++idx[i];
      for (int j = i + 1; j < k; ++j)
        idx[j] = idx[j - 1] + 1;
    }
  }
}

} // namespace ihoc::linalg
