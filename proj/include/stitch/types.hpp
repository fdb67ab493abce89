#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stitch {

enum class ErrorCode {
  EmptyRegion,
  EmptyHistogram,
  RankDeficient,
  RegionTooSmall,
  InsufficientMatches,
  NoConsensus,
  ShapeMismatch,
  NoOverlap,
  SingularHomography,
  DegeneratePose,
  EmptyProjection,
  MissingState,
  TooSmall,
  ConfigError,
  ConfigurationError,
  InputMismatch,
  IoError,
};

const char* error_code_name(ErrorCode code);

/// All recoverable failures surface as this exception; `code()` identifies
/// the contract that was violated.
class StitchError : public std::runtime_error {
 public:
  StitchError(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}
  explicit StitchError(ErrorCode code)
      : std::runtime_error(error_code_name(code)), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct Region {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  long long area() const { return static_cast<long long>(width()) * height(); }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
  bool contains(int x, int y) const {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  }

  friend bool operator==(const Region&, const Region&) = default;
};

}  // namespace stitch
