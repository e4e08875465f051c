#include "tsss/errors.hpp"

namespace tsss {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Geometry: return "GEOMETRY";
    case ErrorCode::Patch: return "PATCH";
    case ErrorCode::Location: return "LOCATION";
    case ErrorCode::Config: return "CONFIG";
    case ErrorCode::Fit: return "FIT";
    case ErrorCode::Prediction: return "PREDICTION";
    case ErrorCode::Evaluation: return "EVALUATION";
    case ErrorCode::Model: return "MODEL";
    case ErrorCode::Io: return "IO";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

}  // namespace tsss
