#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qtag {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unusable input data (CLI exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Caller violated an operation's precondition (bad sizes, bad parameters).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An iterative solver ran out of budget before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Seeded random source whose output is identical across standard library
/// implementations. The mt19937_64 engine sequence is fixed by the standard
/// but the std distributions are not, so draws are derived from raw output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform on [0, 1) with 53 bits of mantissa.
  double uniform();
  /// Standard normal (Box-Muller, cached second value).
  double normal();
  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Round-trippable text form of a double (17 significant digits).
std::string format_real(double value);

/// Parses a double written by format_real (or any strtod-compatible text).
double parse_real(std::string_view text);
std::int64_t parse_int(std::string_view text);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::string to_lower_ascii(std::string_view s);

}  // namespace qtag
