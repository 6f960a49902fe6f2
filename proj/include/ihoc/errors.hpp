#pragma once

#include <stdexcept>
#include <string>

namespace ihoc {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define IHOC_DEFINE_ERROR(Name)                                                \
  class Name : public Error {                                                  \
  public:                                                                      \
    using Error::Error;                                                        \
  }

IHOC_DEFINE_ERROR(NonFiniteValue);
IHOC_DEFINE_ERROR(PointNotInSet);
IHOC_DEFINE_ERROR(Unbounded);
IHOC_DEFINE_ERROR(DimensionMismatch);
IHOC_DEFINE_ERROR(IndexMismatch);
IHOC_DEFINE_ERROR(TangentConeViolation);
IHOC_DEFINE_ERROR(NoConvergence);
IHOC_DEFINE_ERROR(DomainViolation);
IHOC_DEFINE_ERROR(NoWitnessFound);
IHOC_DEFINE_ERROR(ConfigError);

#undef IHOC_DEFINE_ERROR

/// A multiplier condition failed its re-check; carries the worst stage.
class ConditionViolation : public Error {
public:
  ConditionViolation(const std::string &what, int stage, double residual)
      : Error(what), stage_(stage), residual_(residual) {}
  int stage() const { return stage_; }
  double residual() const { return residual_; }

private:
  int stage_;
  double residual_;
};

/// Interiority margin r_t vanished, so the forward costate bound is undefined.
class MarginZero : public Error {
public:
  MarginZero(const std::string &what, int stage) : Error(what), stage_(stage) {}
  int stage() const { return stage_; }

private:
  int stage_;
};

} // namespace ihoc
