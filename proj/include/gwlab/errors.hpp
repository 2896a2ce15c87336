#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gwlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed model or band configuration. `line` is 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, std::size_t line, const std::string& what)
      : Error(format(field, line, what)), field_(std::move(field)), reason_(what), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  static std::string format(const std::string& field, std::size_t line, const std::string& what) {
    std::string out = "config error";
    if (line > 0) out += " at line " + std::to_string(line);
    if (!field.empty()) out += " in field '" + field + "'";
    return out + ": " + what;
  }

  std::string field_;
  std::string reason_;
  std::size_t line_;
};

class InvalidMoments : public Error {
 public:
  using Error::Error;
};

/// A finite-n quantity fell below what 64-bit arithmetic can resolve.
class PrecisionLoss : public Error {
 public:
  PrecisionLoss(long long step, const std::string& what)
      : Error("precision loss at n=" + std::to_string(step) + ": " + what), step_(step) {}
  long long step() const noexcept { return step_; }

 private:
  long long step_;
};

class UnreachableEvent : public Error {
 public:
  using Error::Error;
};

class SlowConvergence : public Error {
 public:
  SlowConvergence(std::size_t iterations, double residual)
      : Error("fixed point not reached after " + std::to_string(iterations) +
              " iterations (residual " + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}
  std::size_t iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  std::size_t iterations_;
  double residual_;
};

class AcceptanceTooLow : public Error {
 public:
  AcceptanceTooLow(double rate, std::size_t hits)
      : Error("conditioning event too rare: acceptance rate " + std::to_string(rate) + " (" +
              std::to_string(hits) + " hits)"),
        rate_(rate) {}
  double rate() const noexcept { return rate_; }

 private:
  double rate_;
};

}  // namespace gwlab
