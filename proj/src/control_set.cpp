#include "ihoc/control_set.hpp"

#include "ihoc/errors.hpp"
#include "ihoc/linalg.hpp"

#include <fmt/core.h>

#include <cmath>
#include <limits>

namespace ihoc {

namespace {

void require_finite(const Vec &v, const char *what) {
  if (!v.allFinite())
    throw NonFiniteValue(fmt::format("{} has non-finite entries", what));
}

} // namespace

ConvexControlSet ConvexControlSet::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.size() == 0)
    throw DimensionMismatch("box bounds must be non-empty and of equal size");
  require_finite(lo, "box lower bound");
  require_finite(hi, "box upper bound");
  if ((hi - lo).minCoeff() < 0.0)
    throw Error("box lower bound exceeds upper bound");
  ConvexControlSet s;
  s.kind_ = Kind::box;
  s.dim_ = static_cast<int>(lo.size());
  s.lo_ = std::move(lo);
  s.hi_ = std::move(hi);
  return s;
}

ConvexControlSet ConvexControlSet::ball(Vec center, double radius) {
  if (center.size() == 0)
    throw DimensionMismatch("ball center must be non-empty");
  require_finite(center, "ball center");
  if (!(radius >= 0.0) || !std::isfinite(radius))
    throw Error("ball radius must be finite and non-negative");
  ConvexControlSet s;
  s.kind_ = Kind::ball;
  s.dim_ = static_cast<int>(center.size());
  s.center_ = std::move(center);
  s.radius_ = radius;
  return s;
}

ConvexControlSet ConvexControlSet::polytope(Mat a, Vec b) {
  if (a.rows() != b.size() || a.cols() == 0 || a.rows() == 0)
    throw DimensionMismatch("polytope needs a non-empty system A u <= b");
  if (!a.allFinite() || !b.allFinite())
    throw NonFiniteValue("polytope data has non-finite entries");
  const int m = static_cast<int>(a.cols());
  if (linalg::numerical_rank(a) < m)
    throw Error("polytope must be pointed: A needs full column rank");

  ConvexControlSet s;
  s.kind_ = Kind::polytope;
  s.dim_ = m;
  s.a_ = std::move(a);
  s.b_ = std::move(b);

  // vertices: feasible intersections of m independent facets
  linalg::for_each_subset(
      static_cast<int>(s.a_.rows()), m, [&](const std::vector<int> &idx) {
        if (static_cast<int>(idx.size()) != m)
          return;
        Mat c(m, m);
        Vec d(m);
        for (int k = 0; k < m; ++k) {
          c.row(k) = s.a_.row(idx[k]);
          d(k) = s.b_(idx[k]);
        }
        Eigen::FullPivLU<Mat> lu(c);
        if (lu.rank() < m)
          return;
        Vec v = lu.solve(d);
        if (!s.contains(v, 1e-9))
          return;
        for (const auto &w : s.vertices_)
          if ((w - v).lpNorm<Eigen::Infinity>() <= 1e-9 * (1.0 + w.norm()))
            return;
        s.vertices_.push_back(std::move(v));
      });
  if (s.vertices_.empty())
    throw Error("polytope is empty");

  for (int i = 0; i < m && s.bounded_; ++i)
    for (double sign : {1.0, -1.0}) {
      Vec e = Vec::Zero(m);
      e(i) = sign;
      if (linalg::project_cone(e, s.a_).norm() > 1e-12) {
        s.bounded_ = false;
        break;
      }
    }
  return s;
}

std::string ConvexControlSet::describe() const {
  switch (kind_) {
  case Kind::box:
    return fmt::format("box(dim={})", dim_);
  case Kind::ball:
    return fmt::format("ball(dim={}, radius={})", dim_, radius_);
  case Kind::polytope:
    return fmt::format("polytope(dim={}, halfspaces={})", dim_, a_.rows());
  }
  return "unknown";
}

bool ConvexControlSet::contains(const Vec &u, double tol) const {
  if (u.size() != dim_)
    throw DimensionMismatch("control vector has the wrong dimension");
  switch (kind_) {
  case Kind::box:
    return ((u - lo_).array() >= -tol).all() && ((hi_ - u).array() >= -tol).all();
  case Kind::ball:
    return (u - center_).norm() <= radius_ + tol;
  case Kind::polytope:
    for (Eigen::Index i = 0; i < a_.rows(); ++i)
      if (a_.row(i).dot(u) - b_(i) > tol * std::max(1.0, a_.row(i).norm()))
        return false;
    return true;
  }
  return false;
}

Vec ConvexControlSet::project(const Vec &v) const {
  if (v.size() != dim_)
    throw DimensionMismatch("control vector has the wrong dimension");
  switch (kind_) {
  case Kind::box:
    return v.cwiseMax(lo_).cwiseMin(hi_);
  case Kind::ball: {
    const Vec d = v - center_;
    const double nd = d.norm();
    if (nd <= radius_)
      return v;
    return center_ + d * (radius_ / nd);
  }
  case Kind::polytope: {
    auto p = linalg::project_polyhedron(v, Mat(0, dim_), Vec(0), a_, b_);
    if (!p)
      throw Error("projection onto an empty polytope");
    return *p;
  }
  }
  return v;
}

double ConvexControlSet::support(const Vec &q) const {
  if (q.size() != dim_)
    throw DimensionMismatch("functional has the wrong dimension");
  switch (kind_) {
  case Kind::box: {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i)
      s += std::max(q(i) * lo_(i), q(i) * hi_(i));
    return s;
  }
  case Kind::ball:
    return q.dot(center_) + radius_ * q.norm();
  case Kind::polytope: {
    if (!bounded_ && linalg::project_cone(q, a_).norm() > 1e-12 * (1.0 + q.norm()))
      throw Unbounded("polytope is unbounded along the requested direction");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto &v : vertices_)
      best = std::max(best, q.dot(v));
    return best;
  }
  }
  return 0.0;
}

Mat ConvexControlSet::tangent_cone_rows(const Vec &u_hat,
                                        double active_tol) const {
  if (!contains(u_hat, std::max(active_tol, 1e-9)))
    throw PointNotInSet("base point of the tangent cone lies outside U");
  std::vector<Vec> rows;
  switch (kind_) {
  case Kind::box:
    for (int i = 0; i < dim_; ++i) {
      if (u_hat(i) >= hi_(i) - active_tol) {
        Vec r = Vec::Zero(dim_);
        r(i) = 1.0;
        rows.push_back(r);
      }
      if (u_hat(i) <= lo_(i) + active_tol) {
        Vec r = Vec::Zero(dim_);
        r(i) = -1.0;
        rows.push_back(r);
      }
    }
    break;
  case Kind::ball: {
    const Vec d = u_hat - center_;
    if (radius_ == 0.0) {
      for (int i = 0; i < dim_; ++i)
        for (double sign : {1.0, -1.0}) {
          Vec r = Vec::Zero(dim_);
          r(i) = sign;
          rows.push_back(r);
        }
    } else if (d.norm() >= radius_ - active_tol) {
      rows.push_back(d / d.norm());
    }
    break;
  }
  case Kind::polytope:
    for (Eigen::Index i = 0; i < a_.rows(); ++i) {
      const double nrm = a_.row(i).norm();
      if (b_(i) - a_.row(i).dot(u_hat) <= active_tol * std::max(1.0, nrm))
        rows.push_back(a_.row(i).transpose() / nrm);
    }
    break;
  }
  Mat out(static_cast<Eigen::Index>(rows.size()), dim_);
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return out;
}

Vec ConvexControlSet::project_tangent_cone(const Vec &u_hat,
                                           const Vec &y) const {
  return linalg::project_cone(y, tangent_cone_rows(u_hat));
}

double ConvexControlSet::tangent_cone_distance(const Vec &u_hat,
                                               const Vec &y) const {
  return (y - project_tangent_cone(u_hat, y)).norm();
}

bool ConvexControlSet::tangent_cone_contains_by_scaling(const Vec &u_hat,
                                                        const Vec &y,
                                                        double tol) const {
  if (!contains(u_hat))
    throw PointNotInSet("base point of the tangent cone lies outside U");
  double eps = 1.0;
  for (int k = 0; k <= 8; ++k, eps *= 0.1) {
    const Vec trial = u_hat + eps * y;
    if (distance(trial) / eps <= tol)
      return true;
  }
  return false;
}

bool ConvexControlSet::tangent_cone_contains(const Vec &u_hat, const Vec &y,
                                             double tol) const {
  if (y.size() != dim_)
    throw DimensionMismatch("direction has the wrong dimension");
  if (kind_ == Kind::polytope) {
    if (!contains(u_hat))
      throw PointNotInSet("base point of the tangent cone lies outside U");
    return tangent_cone_distance(u_hat, y) <= tol;
  }
  return tangent_cone_contains_by_scaling(u_hat, y, tol);
}

double ConvexControlSet::boundary_distance(const Vec &u) const {
  double d = 0.0;
  switch (kind_) {
  case Kind::box:
    d = std::min((u - lo_).minCoeff(), (hi_ - u).minCoeff());
    break;
  case Kind::ball:
    d = radius_ - (u - center_).norm();
    break;
  case Kind::polytope:
    d = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < a_.rows(); ++i)
      d = std::min(d, (b_(i) - a_.row(i).dot(u)) / a_.row(i).norm());
    break;
  }
  return std::max(d, 0.0);
}

AffineHull ConvexControlSet::affine_hull() const {
  switch (kind_) {
  case Kind::box: {
    std::vector<int> free;
    for (int i = 0; i < dim_; ++i)
      if (hi_(i) - lo_(i) > 1e-12)
        free.push_back(i);
    Mat dirs = Mat::Zero(dim_, static_cast<Eigen::Index>(free.size()));
    for (std::size_t k = 0; k < free.size(); ++k)
      dirs(free[k], static_cast<Eigen::Index>(k)) = 1.0;
    return {lo_, dirs};
  }
  case Kind::ball:
    if (radius_ > 0.0)
      return {center_, Mat::Identity(dim_, dim_)};
    return {center_, Mat(dim_, 0)};
  case Kind::polytope: {
    std::vector<Eigen::Index> implicit;
    for (Eigen::Index i = 0; i < a_.rows(); ++i) {
      try {
        const double width = b_(i) + support(Vec(-a_.row(i).transpose()));
        if (width <= 1e-9 * (1.0 + std::abs(b_(i))))
          implicit.push_back(i);
      } catch (const Unbounded &) {
      }
    }
    Mat eq(static_cast<Eigen::Index>(implicit.size()), dim_);
    for (std::size_t k = 0; k < implicit.size(); ++k)
      eq.row(static_cast<Eigen::Index>(k)) = a_.row(implicit[k]);
    return {vertices_.front(), linalg::null_space(eq)};
  }
  }
  return {};
}

VecSeq ConvexControlSet::sample(int count, std::mt19937_64 &rng) const {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  VecSeq out;
  switch (kind_) {
  case Kind::box: {
    if (dim_ <= 10) {
      for (long mask = 0; mask < (1L << dim_); ++mask) {
        Vec v(dim_);
        for (int i = 0; i < dim_; ++i)
          v(i) = (mask >> i) & 1 ? hi_(i) : lo_(i);
        out.push_back(v);
      }
    }
    for (int k = 0; k < count; ++k) {
      Vec v(dim_);
      for (int i = 0; i < dim_; ++i)
        v(i) = lo_(i) + (hi_(i) - lo_(i)) * unif(rng);
      out.push_back(v);
    }
    break;
  }
  case Kind::ball:
    for (int k = 0; k < count; ++k) {
      Vec d(dim_);
      for (int i = 0; i < dim_; ++i)
        d(i) = gauss(rng);
      const double nd = d.norm();
      if (nd == 0.0)
        continue;
      // even samples on the sphere, odd samples uniform in the ball
      const double rho =
          k % 2 == 0 ? 1.0 : std::pow(unif(rng), 1.0 / dim_);
      out.push_back(center_ + (radius_ * rho / nd) * d);
    }
    break;
  case Kind::polytope:
    out = vertices_;
    for (int k = 0; k < count; ++k) {
      Vec w(static_cast<Eigen::Index>(vertices_.size()));
      for (Eigen::Index i = 0; i < w.size(); ++i)
        w(i) = -std::log(1.0 - unif(rng));
      w /= w.sum();
      Vec v = Vec::Zero(dim_);
      for (Eigen::Index i = 0; i < w.size(); ++i)
        v += w(i) * vertices_[static_cast<std::size_t>(i)];
      out.push_back(v);
    }
    break;
  }
  return out;
}

} // namespace ihoc
