#pragma once

#include <stdexcept>
#include <string>

namespace obfbench {

/// Base of every error raised by the library. The concrete type names the
/// failure class; what() carries the diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define OBFBENCH_DEFINE_ERROR(Name)      \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

OBFBENCH_DEFINE_ERROR(ParseError);
OBFBENCH_DEFINE_ERROR(ValidationError);
OBFBENCH_DEFINE_ERROR(IoError);
OBFBENCH_DEFINE_ERROR(ParamError);
OBFBENCH_DEFINE_ERROR(SpecError);
OBFBENCH_DEFINE_ERROR(UnknownNameError);
OBFBENCH_DEFINE_ERROR(DegenerateTrainingError);
OBFBENCH_DEFINE_ERROR(ConfigMismatchError);
OBFBENCH_DEFINE_ERROR(EmptyInputError);
OBFBENCH_DEFINE_ERROR(IdMismatchError);
OBFBENCH_DEFINE_ERROR(RankDeficientError);

#undef OBFBENCH_DEFINE_ERROR

}  // namespace obfbench
