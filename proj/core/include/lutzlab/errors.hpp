#pragma once

#include <stdexcept>
#include <string>

namespace lutzlab {

// Every failure raised by the library carries a stable kind() tag so the CLI
// can map it onto exit codes and diagnostics without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept = 0;
};

#define LUTZLAB_ERROR(Name)                                              \
  class Name : public Error {                                            \
   public:                                                               \
    using Error::Error;                                                  \
    const char* kind() const noexcept override { return #Name; }         \
  }

LUTZLAB_ERROR(InvalidGeometry);
LUTZLAB_ERROR(SingularLocus);
LUTZLAB_ERROR(QuadratureFailure);
LUTZLAB_ERROR(PreconditionFailed);
LUTZLAB_ERROR(DomainViolation);
LUTZLAB_ERROR(InfeasibleCompensation);
LUTZLAB_ERROR(NotSymplectic);
LUTZLAB_ERROR(BasisOverflow);
LUTZLAB_ERROR(InputError);

#undef LUTZLAB_ERROR

}  // namespace lutzlab
