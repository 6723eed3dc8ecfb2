#pragma once

#include "kehsim/common.hpp"
#include "kehsim/config.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace kehsim {

struct BandNoise {
  double low_hz = 0.0;
  double high_hz = 0.0;
  double rms = 0.0; ///< m/s²
};

struct Harmonic {
  double frequency_hz = 0.0;
  double amplitude = 0.0; ///< m/s², peak
};

/// Synthetic excitation recipe for one transport mode. These are stand-ins for
/// field recordings, calibrated only to qualitative orderings between modes.
struct ModeProfile {
  std::vector<BandNoise> band_noise;
  std::vector<Harmonic> harmonics;
  double impulse_rate = 0.0;      ///< events/s
  double impulse_amplitude = 0.0; ///< m/s²
  double stop_fraction = 0.0;     ///< fraction of duration spent stationary

  void validate() const;
  /// Multiplies every amplitude (noise, harmonic, impulse) by `factor`.
  ModeProfile scaled(double factor) const;
};

struct VibrationTrace {
  Mode mode = Mode::unlabeled;
  double sample_rate = kInternalRate;
  Eigen::VectorXd samples; ///< base acceleration, m/s²
  std::uint64_t seed = 0;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
  void validate() const;
};

/// Built-in default profile for a class mode (same values as config/default.conf).
ModeProfile default_profile(Mode mode);

/// Default profile overridden by `profile.<mode>.*` keys of `cfg`.
ModeProfile profile_from_config(const KeyValueConfig& cfg, Mode mode);

/// Sum of band-limited Gaussian noise, sinusoids and Poisson-timed half-sine
/// impulses, with stop segments of exactly zero excitation. Deterministic per seed;
/// the random draws never depend on the amplitudes, so scaling a profile scales
/// the non-impulse part of the output linearly.
VibrationTrace gen_mode_trace(Mode mode, double duration_s, std::uint64_t seed,
                              const ModeProfile& profile, double sample_rate = kInternalRate);

/// Boolean mask (1 = moving) of where gen_mode_trace places excitation.
std::vector<std::uint8_t> motion_mask(std::size_t n_samples, double sample_rate, std::uint64_t seed,
                                      double stop_fraction);

/// One value per line (m/s²), optional `accel_ms2` header.
VibrationTrace load_trace_csv(const std::filesystem::path& path, double sample_rate, Mode mode);
void save_trace_csv(const std::filesystem::path& path, const VibrationTrace& trace);

/// Parses "low:high:rms, low:high:rms".
std::vector<BandNoise> parse_band_list(const std::string& text);
/// Parses "freq:amp, freq:amp".
std::vector<Harmonic> parse_harmonic_list(const std::string& text);

} // namespace kehsim
