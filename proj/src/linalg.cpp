#include "ihoc/linalg.hpp"

#include <cmath>
#include <limits>

namespace ihoc::linalg {

int numerical_rank(const Mat &m, double rel_tol) {
  if (m.size() == 0)
    return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto &s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0)
    return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0))
      ++r;
  return r;
}

Mat null_space(const Mat &m, double rel_tol) {
  const auto cols = m.cols();
  if (m.rows() == 0)
    return Mat::Identity(cols, cols);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const int r = numerical_rank(m, rel_tol);
  return svd.matrixV().rightCols(cols - r);
}

double op_norm(const Mat &m) {
  if (m.size() == 0)
    return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double inscribed_radius(const Mat &m) {
  if (m.rows() == 0)
    return std::numeric_limits<double>::infinity();
  if (m.cols() < m.rows())
    return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto &s = svd.singularValues();
  return s(m.rows() - 1);
}

namespace {

double feasibility_slack(const Mat &ain, const Vec &bin, const Vec &z) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < ain.rows(); ++i) {
    const double scale =
        1.0 + std::abs(bin(i)) + ain.row(i).norm() * z.lpNorm<Eigen::Infinity>();
    worst = std::max(worst, (ain.row(i).dot(z) - bin(i)) / scale);
  }
  return worst;
}

} // namespace

std::optional<Vec> project_polyhedron(const Vec &v, const Mat &aeq,
                                      const Vec &beq, const Mat &ain,
                                      const Vec &bin) {
  const auto dim = v.size();
  constexpr double tol = 1e-10;
  std::optional<Vec> best;
  double best_dist = std::numeric_limits<double>::infinity();

  linalg::for_each_subset(
      static_cast<int>(ain.rows()), static_cast<int>(dim),
      [&](const std::vector<int> &active) {
        const auto rows = aeq.rows() + static_cast<Eigen::Index>(active.size());
        Vec z = v;
        if (rows > 0) {
          Mat c(rows, dim);
          Vec d(rows);
          if (aeq.rows() > 0) {
            c.topRows(aeq.rows()) = aeq;
            d.head(aeq.rows()) = beq;
          }
          for (std::size_t k = 0; k < active.size(); ++k) {
            c.row(aeq.rows() + k) = ain.row(active[k]);
            d(aeq.rows() + k) = bin(active[k]);
          }
          Eigen::CompleteOrthogonalDecomposition<Mat> cod(c);
          z = v + cod.solve(Vec(d - c * v));
          const double consistency = (c * z - d).lpNorm<Eigen::Infinity>();
          if (consistency > tol * (1.0 + d.lpNorm<Eigen::Infinity>() +
                                   c.norm() * z.lpNorm<Eigen::Infinity>()))
            return;
        }
        if (ain.rows() > 0 && feasibility_slack(ain, bin, z) > tol)
          return;
        const double dist = (z - v).squaredNorm();
        if (dist < best_dist) {
          best_dist = dist;
          best = std::move(z);
        }
      });
  return best;
}

Vec project_cone(const Vec &v, const Mat &rows) {
  if (rows.rows() == 0)
    return v;
  auto p = project_polyhedron(v, Mat(0, v.size()), Vec(0), rows,
                              Vec::Zero(rows.rows()));
  // a cone always contains the origin, so the projection exists
  return *p;
}

} // namespace ihoc::linalg
