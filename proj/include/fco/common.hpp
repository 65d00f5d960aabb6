#pragma once

#include <compare>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace fco {

using Vec2 = Eigen::Vector2d;

/// Opaque vehicle identifier. Ordered so id sets iterate deterministically.
enum class VehicleId : std::uint64_t {};

constexpr std::uint64_t to_underlying(VehicleId id) { return static_cast<std::uint64_t>(id); }

using IdSet = std::set<VehicleId>;

// Error taxonomy. The CLI maps ConfigError to exit code 2 and IoError to 3.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class WindowError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file content. Carries the 1-based line number of the offending row.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Mixes a base seed with a stream index so independent consumers never share a sequence.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace fco
