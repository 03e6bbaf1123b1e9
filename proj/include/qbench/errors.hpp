#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>

namespace qbench {

// Input violates a type invariant or an operation precondition.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A generator/encoder/solver configuration is unusable.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Problem exceeds a hard size cap (exhaustive search, statevector width).
struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TimeoutError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cooperative wall-clock budget. Long loops call check() periodically.
class Deadline {
 public:
  using clock = std::chrono::steady_clock;

  Deadline() = default;
  static Deadline after(double seconds) {
    Deadline d;
    if (seconds > 0)
      d.at_ = clock::now() + std::chrono::duration_cast<clock::duration>(
                                 std::chrono::duration<double>(seconds));
    return d;
  }

  bool expired() const { return at_ && clock::now() >= *at_; }
  void check() const {
    if (expired()) throw TimeoutError("time budget exhausted");
  }

 private:
  std::optional<clock::time_point> at_;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace qbench
