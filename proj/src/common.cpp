#include "kehsim/common.hpp"

namespace kehsim {

namespace {
constexpr std::array<std::string_view, 7> kModeNames = {
    "ferry", "train", "bus", "car", "tricycle", "pedestrian", "unlabeled"};
}

std::string_view to_string(Mode mode) { return kModeNames.at(static_cast<std::size_t>(mode)); }

Mode parse_mode(std::string_view label) {
  for (std::size_t i = 0; i < kModeNames.size(); ++i)
    if (kModeNames[i] == label) return static_cast<Mode>(i);
  std::string valid;
  for (auto name : kModeNames) {
    if (!valid.empty()) valid += "|";
    valid += name;
  }
  throw ValidationError("unknown mode label '" + std::string(label) + "' (valid: " + valid + ")");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t global, std::string_view stage, std::uint64_t index) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stage) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(global ^ h ^ splitmix64(index));
}

} // namespace kehsim
