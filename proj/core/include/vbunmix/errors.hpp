#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vbunmix {

// Dimension disagreement between paired objects (spectrum vs. matrix, map vs. cube).
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed text input (ENVI header, CSV matrix, exclusion list, fixture file).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A non-finite value surfaced during inference. Carries where it happened.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::size_t sweep, std::string parameter, const std::string& detail)
      : std::runtime_error("numerical failure at sweep " + std::to_string(sweep) + " in " +
                           parameter + ": " + detail),
        sweep_(sweep),
        parameter_(std::move(parameter)) {}

  std::size_t sweep() const noexcept { return sweep_; }
  const std::string& parameter() const noexcept { return parameter_; }

 private:
  std::size_t sweep_;
  std::string parameter_;
};

// Active-set solver gave up before reaching the stationarity tolerance.
class NnlsError : public std::runtime_error {
 public:
  NnlsError(double kkt_residual, const std::string& detail)
      : std::runtime_error(detail + " (KKT residual " + std::to_string(kkt_residual) + ")"),
        kkt_residual_(kkt_residual) {}

  double kkt_residual() const noexcept { return kkt_residual_; }

 private:
  double kkt_residual_;
};

}  // namespace vbunmix
