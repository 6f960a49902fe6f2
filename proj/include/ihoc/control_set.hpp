#pragma once

#include "ihoc/types.hpp"

#include <random>
#include <string>

namespace ihoc {

/// Affine hull described as base point plus orthonormal direction columns.
struct AffineHull {
  Vec point;
  Mat directions;
  int codimension() const {
    return static_cast<int>(point.size() - directions.cols());
  }
};

/// A closed convex control set U_t. Three primitives are supported: boxes
/// [lo, hi], Euclidean balls B(c, r) and polyhedra {u : A u <= b}. Polyhedra
/// must be pointed (A of full column rank) so that support values are
/// attained at vertices.
class ConvexControlSet {
public:
  enum class Kind { box, ball, polytope };

  static ConvexControlSet box(Vec lo, Vec hi);
  static ConvexControlSet ball(Vec center, double radius);
  static ConvexControlSet polytope(Mat a, Vec b);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  std::string describe() const;

  const Vec &lo() const { return lo_; }
  const Vec &hi() const { return hi_; }
  const Vec &center() const { return center_; }
  double radius() const { return radius_; }
  const Mat &halfspace_normals() const { return a_; }
  const Vec &halfspace_offsets() const { return b_; }
  const VecSeq &vertices() const { return vertices_; }
  bool bounded() const { return bounded_; }

  bool contains(const Vec &u, double tol = 1e-9) const;
  Vec project(const Vec &v) const;
  double distance(const Vec &v) const { return (project(v) - v).norm(); }

  /// sup_{u in U} <q, u>. Throws Unbounded for polyhedra unbounded along q.
  double support(const Vec &q) const;

  /// Tangent cone at u_hat written as {k : rows k <= 0}, built from the
  /// constraints active at u_hat within `active_tol`.
  Mat tangent_cone_rows(const Vec &u_hat, double active_tol = 1e-9) const;

  /// Euclidean distance from y to T_U(u_hat), computed exactly.
  double tangent_cone_distance(const Vec &u_hat, const Vec &y) const;

  Vec project_tangent_cone(const Vec &u_hat, const Vec &y) const;

  /// Membership y in T_U(u_hat). Boxes and balls use the scaling test
  /// dist(u_hat + eps y, U) / eps <= tol over eps in {1, 1e-1, ..., 1e-8};
  /// polyhedra use the exact conic description. Throws PointNotInSet.
  bool tangent_cone_contains(const Vec &u_hat, const Vec &y,
                             double tol = 1e-6) const;

  /// Scaling-and-projection membership test, available for every kind.
  bool tangent_cone_contains_by_scaling(const Vec &u_hat, const Vec &y,
                                        double tol = 1e-6) const;

  /// Distance from u to the complement, 0 on the boundary or outside.
  double boundary_distance(const Vec &u) const;

  AffineHull affine_hull() const;

  /// Deterministic sample of points of U, including extreme points.
  VecSeq sample(int count, std::mt19937_64 &rng) const;

private:
  ConvexControlSet() = default;

  Kind kind_ = Kind::box;
  int dim_ = 0;
  Vec lo_, hi_;
  Vec center_;
  double radius_ = 0.0;
  Mat a_;
  Vec b_;
  VecSeq vertices_;
  bool bounded_ = true;
};

/// Free-function forms of the set queries used by the certificate layer.
inline double support_function(const ConvexControlSet &set, const Vec &q) {
  return set.support(q);
}

inline bool tangent_cone_contains(const ConvexControlSet &set,
                                  const Vec &u_hat, const Vec &y,
                                  double tol = 1e-6) {
  return set.tangent_cone_contains(u_hat, y, tol);
}

} // namespace ihoc
