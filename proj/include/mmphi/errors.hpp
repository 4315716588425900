#pragma once

#include <stdexcept>
#include <string>

namespace mmphi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Stable machine-readable identifier, used in CLI error JSON.
  virtual const char* code() const noexcept { return "Error"; }
};

#define MMPHI_DEFINE_ERROR(Name)                                    \
  class Name : public Error {                                       \
   public:                                                          \
    using Error::Error;                                             \
    const char* code() const noexcept override { return #Name; }    \
  }

MMPHI_DEFINE_ERROR(NotPositiveDefinite);
MMPHI_DEFINE_ERROR(NumericOverflow);
MMPHI_DEFINE_ERROR(NonPositiveCriterion);
MMPHI_DEFINE_ERROR(InvalidArgument);
MMPHI_DEFINE_ERROR(SingularStart);
MMPHI_DEFINE_ERROR(PoolTooLarge);
MMPHI_DEFINE_ERROR(UnsupportedDimension);
MMPHI_DEFINE_ERROR(ConfigError);
MMPHI_DEFINE_ERROR(DimensionMismatch);

#undef MMPHI_DEFINE_ERROR

}  // namespace mmphi
