#pragma once

#include <stdexcept>
#include <string>

namespace spoofbench {

// Base class for everything the library throws on purpose. CLI maps these
// to exit code 2; anything else is a bug.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define SPOOFBENCH_DEFINE_ERROR(NAME)                      \
  class NAME : public Error {                              \
  public:                                                  \
    explicit NAME(const std::string& msg)                  \
        : Error(std::string(#NAME) + ": " + msg) {}        \
  }

SPOOFBENCH_DEFINE_ERROR(ParseError);
SPOOFBENCH_DEFINE_ERROR(IntegrityError);
SPOOFBENCH_DEFINE_ERROR(UnsupportedError);
SPOOFBENCH_DEFINE_ERROR(InvariantError);
SPOOFBENCH_DEFINE_ERROR(ForbiddenLocationError);
SPOOFBENCH_DEFINE_ERROR(DegenerateInputError);
SPOOFBENCH_DEFINE_ERROR(ConfigError);
SPOOFBENCH_DEFINE_ERROR(RepackError);
SPOOFBENCH_DEFINE_ERROR(ScanError);
SPOOFBENCH_DEFINE_ERROR(ExtractionError);
SPOOFBENCH_DEFINE_ERROR(ShapeError);
SPOOFBENCH_DEFINE_ERROR(TrainError);
SPOOFBENCH_DEFINE_ERROR(DivergenceError);
SPOOFBENCH_DEFINE_ERROR(KindError);
SPOOFBENCH_DEFINE_ERROR(AttackError);
SPOOFBENCH_DEFINE_ERROR(SplitError);
SPOOFBENCH_DEFINE_ERROR(MetricError);
SPOOFBENCH_DEFINE_ERROR(DefenseError);
SPOOFBENCH_DEFINE_ERROR(IoError);

#undef SPOOFBENCH_DEFINE_ERROR

}  // namespace spoofbench
