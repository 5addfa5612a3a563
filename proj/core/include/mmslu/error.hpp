#pragma once

#include <stdexcept>
#include <string>

namespace mmslu {

/// Coarse grouping used by the command-line tool to pick an exit code.
enum class ErrorCategory { Config, Data, Numeric, Io };

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ErrorCategory category() const noexcept = 0;
};

#define MMSLU_DEFINE_ERROR(Name, Category)                                  \
  class Name : public Error {                                               \
   public:                                                                  \
    using Error::Error;                                                     \
    ErrorCategory category() const noexcept override { return Category; }   \
  }

MMSLU_DEFINE_ERROR(ShapeError, ErrorCategory::Numeric);
MMSLU_DEFINE_ERROR(IndexError, ErrorCategory::Numeric);
MMSLU_DEFINE_ERROR(NumericError, ErrorCategory::Numeric);
MMSLU_DEFINE_ERROR(EmptyInputError, ErrorCategory::Data);
MMSLU_DEFINE_ERROR(TooShortError, ErrorCategory::Data);
MMSLU_DEFINE_ERROR(FormatError, ErrorCategory::Data);
MMSLU_DEFINE_ERROR(ValidationError, ErrorCategory::Data);
MMSLU_DEFINE_ERROR(DataError, ErrorCategory::Data);
MMSLU_DEFINE_ERROR(ConfigError, ErrorCategory::Config);
MMSLU_DEFINE_ERROR(InvalidArgument, ErrorCategory::Config);
MMSLU_DEFINE_ERROR(IoError, ErrorCategory::Io);

#undef MMSLU_DEFINE_ERROR

}  // namespace mmslu
