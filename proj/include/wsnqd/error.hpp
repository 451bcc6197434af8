#pragma once

#include <stdexcept>
#include <string>

namespace wsnqd {

// Invalid user input: bad config values, malformed deployments.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A sampled ROI point that no sensor detection-covers.
class CoverageError : public ConfigError {
 public:
  CoverageError(double x, double y);
  double x() const { return x_; }
  double y() const { return y_; }

 private:
  double x_;
  double y_;
};

class UnsupportedModelError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Monte Carlo estimation could not produce a usable value.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wsnqd
