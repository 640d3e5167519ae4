#pragma once

#include <stdexcept>
#include <string>

namespace crowdcount {

// Invalid or out-of-range configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing, malformed, or inconsistent input data (CLI exit code 3).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Geometric precondition failures: points behind the camera, rays parallel
// to the ground, degenerate homographies, non-convergent distortion.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace crowdcount
