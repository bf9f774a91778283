#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sgmlab {

// Base of every error raised by the library. The CLI maps these to exit
// status 1 (domain failure); usage errors are handled separately.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class PersistenceError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  TrainingError(std::int64_t step, const std::string& what)
      : Error("training step " + std::to_string(step) + ": " + what), step_(step) {}
  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t step_;
};

class SamplingError : public Error {
 public:
  SamplingError(int level, int iteration, const std::string& what)
      : Error("sampling level " + std::to_string(level) + " iteration " +
              std::to_string(iteration) + ": " + what),
        level_(level),
        iteration_(iteration) {}
  int level() const noexcept { return level_; }
  int iteration() const noexcept { return iteration_; }

 private:
  int level_;
  int iteration_;
};

}  // namespace sgmlab
