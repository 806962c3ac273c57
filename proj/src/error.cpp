#include "radsurvey/error.hpp"

namespace radsurvey {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Extent: return "extent";
    case ErrorCode::Geometry: return "geometry";
    case ErrorCode::Validity: return "validity";
    case ErrorCode::Config: return "config";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Unreachable: return "unreachable";
    case ErrorCode::RankDeficient: return "rank_deficient";
    case ErrorCode::Numeric: return "numeric";
    case ErrorCode::Estimation: return "estimation";
    case ErrorCode::Data: return "data";
    case ErrorCode::Sequencing: return "sequencing";
    case ErrorCode::StaleConfig: return "stale_config";
    case ErrorCode::Conflict: return "conflict";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace radsurvey
