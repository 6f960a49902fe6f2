#pragma once

#include "ihoc/types.hpp"

#include <optional>

namespace ihoc {

/// Scalar lambda_0 >= 0 together with costates p_1..p_{K}.
struct MultiplierPath {
  double lambda0 = 0.0;
  /// p[i] holds p_{i+1}.
  VecSeq p;
  /// Stage s at which lambda0 + |p_s| = 1 was imposed, if any.
  std::optional<int> normalized_at;

  int last_index() const { return static_cast<int>(p.size()); }
  const Vec &at(int t) const { return p.at(static_cast<std::size_t>(t - 1)); }
  Vec &at(int t) { return p.at(static_cast<std::size_t>(t - 1)); }

  /// lambda0 + max_t |p_t|; zero exactly for the zero path.
  double scale() const;
  MultiplierPath scaled(double c) const;
};

/// Rescale so that lambda0 + |p_s| = 1. Throws Error when (lambda0, p_s) = 0.
MultiplierPath normalize(const MultiplierPath &path, int s);

} // namespace ihoc
