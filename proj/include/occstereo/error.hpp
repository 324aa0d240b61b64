#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace occstereo {

enum class Errc {
  InvalidArgument,
  AllOneSign,
  EllipseOutOfFrame,
  RankDeficient,
  GridTooSmall,
  IllPosed,
  UnsupportedFormat,
  CorruptFile,
  BadHeader,
  TruncatedPayload,
  IoError,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::AllOneSign: return "AllOneSign";
    case Errc::EllipseOutOfFrame: return "EllipseOutOfFrame";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::GridTooSmall: return "GridTooSmall";
    case Errc::IllPosed: return "IllPosed";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::CorruptFile: return "CorruptFile";
    case Errc::BadHeader: return "BadHeader";
    case Errc::TruncatedPayload: return "TruncatedPayload";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace occstereo
