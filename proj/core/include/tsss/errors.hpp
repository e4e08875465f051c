#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tsss {

/// Machine-readable failure category carried by every tsss exception.
enum class ErrorCode {
  Geometry,
  Patch,
  Location,
  Config,
  Fit,
  Prediction,
  Evaluation,
  Model,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define TSSS_DEFINE_ERROR(Name, Code)                                  \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& message) : Error(Code, message) {} \
  };

TSSS_DEFINE_ERROR(GeometryError, ErrorCode::Geometry)
TSSS_DEFINE_ERROR(PatchError, ErrorCode::Patch)
TSSS_DEFINE_ERROR(LocationError, ErrorCode::Location)
TSSS_DEFINE_ERROR(ConfigError, ErrorCode::Config)
TSSS_DEFINE_ERROR(FitError, ErrorCode::Fit)
TSSS_DEFINE_ERROR(PredictionError, ErrorCode::Prediction)
TSSS_DEFINE_ERROR(EvaluationError, ErrorCode::Evaluation)
TSSS_DEFINE_ERROR(ModelError, ErrorCode::Model)
TSSS_DEFINE_ERROR(IoError, ErrorCode::Io)

#undef TSSS_DEFINE_ERROR

}  // namespace tsss
