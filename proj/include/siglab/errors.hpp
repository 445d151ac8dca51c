#pragma once

#include <stdexcept>
#include <string>

namespace siglab {

// Common base so callers can catch everything thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeMismatch : Error {
  explicit ShapeMismatch(const std::string& msg) : Error("shape mismatch: " + msg) {}
};

struct ZeroRow : Error {
  explicit ZeroRow(const std::string& msg) : Error("zero row: " + msg) {}
};

struct NotNormalized : Error {
  explicit NotNormalized(const std::string& msg) : Error("not normalized: " + msg) {}
};

struct InvalidRatio : Error {
  explicit InvalidRatio(const std::string& msg) : Error("invalid ratio: " + msg) {}
};

struct IndivisibleBatch : Error {
  explicit IndivisibleBatch(const std::string& msg) : Error("indivisible batch: " + msg) {}
};

struct OutOfVocab : Error {
  explicit OutOfVocab(const std::string& msg) : Error("token out of vocabulary: " + msg) {}
};

struct StaleCache : Error {
  explicit StaleCache(const std::string& msg) : Error("stale cache: " + msg) {}
};

struct StepOutOfRange : Error {
  explicit StepOutOfRange(const std::string& msg) : Error("step out of range: " + msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error("config error: " + msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error("io error: " + msg) {}
};

}  // namespace siglab
