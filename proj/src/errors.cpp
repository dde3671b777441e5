#include "pseudocal/errors.hpp"

namespace pseudocal {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_angle: return "INVALID_ANGLE";
    case ErrorCode::invalid_rotation: return "INVALID_ROTATION";
    case ErrorCode::dimension_mismatch: return "DIMENSION_ERROR";
    case ErrorCode::parse_error: return "PARSE_ERROR";
    case ErrorCode::calib_error: return "CALIB_ERROR";
    case ErrorCode::format_error: return "FORMAT_ERROR";
    case ErrorCode::empty_sample: return "EMPTY_SAMPLE";
    case ErrorCode::empty_cloud: return "EMPTY_CLOUD";
    case ErrorCode::empty_dataset: return "EMPTY_DATASET";
    case ErrorCode::config_error: return "CONFIG_ERROR";
    case ErrorCode::no_overlap: return "NO_OVERLAP";
    case ErrorCode::input_error: return "INPUT_ERROR";
    case ErrorCode::io_error: return "IO_ERROR";
  }
  return "UNKNOWN";
}

}  // namespace pseudocal
