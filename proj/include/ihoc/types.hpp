#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ihoc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecSeq = std::vector<Vec>;

/// Dynamics are either difference equations x_{t+1} = f_t(x_t,u_t) or
/// difference inequations x_{t+1} <= f_t(x_t,u_t) for the orthant order.
enum class Mode { equation, inequation };

inline const char *to_string(Mode m) {
  return m == Mode::equation ? "equation" : "inequation";
}

} // namespace ihoc
