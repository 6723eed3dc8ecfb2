#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kehsim {

/// Rate at which excitation, transducer and circuit are co-stepped.
inline constexpr double kInternalRate = 10000.0;

/// Raised for bad user input: configs, labels, malformed files. CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when a computation cannot proceed (non-finite state, degenerate data). CLI exit code 2.
class RuntimeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Mode : int { ferry = 0, train, bus, car, tricycle, pedestrian, unlabeled };

/// The six transport modes that appear as class labels.
inline constexpr int kNumClasses = 6;
inline constexpr std::array<Mode, kNumClasses> kClassModes = {
    Mode::ferry, Mode::train, Mode::bus, Mode::car, Mode::tricycle, Mode::pedestrian};

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view label);

inline int class_index(Mode mode) {
  if (mode == Mode::unlabeled)
    throw ValidationError("mode 'unlabeled' has no class index");
  return static_cast<int>(mode);
}
inline Mode class_mode(int index) {
  if (index < 0 || index >= kNumClasses)
    throw ValidationError("class index out of range: " + std::to_string(index));
  return static_cast<Mode>(index);
}

/// "1 (train)" for class indices of the six modes, the bare index otherwise.
inline std::string describe_class(std::size_t index) {
  std::string out = std::to_string(index);
  if (index < static_cast<std::size_t>(kNumClasses))
    out += " (" + std::string(to_string(static_cast<Mode>(index))) + ")";
  return out;
}

/// Derives an independent stage seed from a global seed.
///
/// seed = splitmix64(global ^ fnv1a64(stage) ^ splitmix64(index)). Every stage
/// (trace generation, SMOTE, forest bootstrap, fold assignment) draws its seed
/// through this function so any stage can be rerun in isolation.
std::uint64_t derive_seed(std::uint64_t global, std::string_view stage, std::uint64_t index = 0);

std::uint64_t splitmix64(std::uint64_t x);

} // namespace kehsim
