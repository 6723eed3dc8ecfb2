#include "kehsim/excitation.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace kehsim {

namespace {

constexpr double kImpulseWidth = 0.02; // s
constexpr double kImpulseDecay = 0.01; // s
constexpr double kStopSlot = 20.0;     // s of trace per stop segment

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

// Unit-RMS Gaussian noise restricted to [low, high] Hz. Always consumes exactly
// `padded` normal draws from rng.
Eigen::VectorXd band_limited_noise(std::size_t n, double fs, double low, double high,
                                   std::mt19937_64& rng) {
  const std::size_t padded = next_pow2(std::max<std::size_t>(n, 2));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> white(padded);
  for (auto& w : white) w = normal(rng);

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, white);
  for (std::size_t k = 0; k < padded; ++k) {
    const double f = static_cast<double>(std::min(k, padded - k)) * fs / static_cast<double>(padded);
    if (f < low || f > high) spectrum[k] = 0.0;
  }
  std::vector<double> shaped;
  fft.inv(shaped, spectrum);

  Eigen::VectorXd out = Eigen::Map<const Eigen::VectorXd>(shaped.data(), static_cast<Eigen::Index>(n));
  const double rms = std::sqrt(out.squaredNorm() / static_cast<double>(n));
  if (rms > 0.0) out /= rms;
  return out;
}

void check_finite_positive(double v, const char* what) {
  if (!std::isfinite(v) || v <= 0.0)
    throw ValidationError(std::string(what) + " must be finite and > 0");
}

} // namespace

void ModeProfile::validate() const {
  for (const auto& b : band_noise) {
    if (!(b.low_hz < b.high_hz) || b.low_hz < 0.0)
      throw ValidationError("band noise requires 0 <= low < high");
    if (!(b.rms >= 0.0)) throw ValidationError("band noise rms must be >= 0");
  }
  for (const auto& h : harmonics) {
    if (!(h.frequency_hz > 0.0)) throw ValidationError("harmonic frequency must be > 0");
    if (!(h.amplitude >= 0.0)) throw ValidationError("harmonic amplitude must be >= 0");
  }
  if (!(impulse_rate >= 0.0) || !(impulse_amplitude >= 0.0))
    throw ValidationError("impulse rate and amplitude must be >= 0");
  if (!(stop_fraction >= 0.0 && stop_fraction < 1.0))
    throw ValidationError("stop_fraction must lie in [0, 1)");
}

ModeProfile ModeProfile::scaled(double factor) const {
  ModeProfile out = *this;
  for (auto& b : out.band_noise) b.rms *= factor;
  for (auto& h : out.harmonics) h.amplitude *= factor;
  out.impulse_amplitude *= factor;
  return out;
}

void VibrationTrace::validate() const {
  check_finite_positive(sample_rate, "sample_rate");
  if (samples.size() == 0) throw ValidationError("trace has no samples");
  if (!samples.allFinite()) throw ValidationError("trace contains non-finite samples");
}

ModeProfile default_profile(Mode mode) {
  ModeProfile p;
  switch (mode) {
  case Mode::ferry:
    // Slow hull sway plus a steady engine line just below resonance.
    p.band_noise = {{0.1, 1.0, 0.3}, {22.0, 28.0, 0.03}};
    p.harmonics = {{24.5, 0.5}};
    p.stop_fraction = 0.15;
    break;
  case Mode::train:
    // Weak traction line above resonance, frequent light rail-joint impulses.
    p.band_noise = {{0.5, 5.0, 0.4}, {10.0, 40.0, 0.1}};
    p.harmonics = {{27.5, 0.7}};
    p.impulse_rate = 4.0;
    p.impulse_amplitude = 3.0;
    p.stop_fraction = 0.15;
    break;
  case Mode::bus:
    p.band_noise = {{1.0, 10.0, 0.6}, {10.0, 45.0, 0.5}};
    p.harmonics = {{18.0, 1.5}, {23.0, 1.2}};
    p.impulse_rate = 0.5;
    p.impulse_amplitude = 6.0;
    p.stop_fraction = 0.2;
    break;
  case Mode::car:
    // Engine line on the transducer resonance.
    p.band_noise = {{1.0, 10.0, 0.8}, {15.0, 35.0, 0.3}};
    p.harmonics = {{25.0, 0.55}};
    p.impulse_rate = 0.3;
    p.impulse_amplitude = 2.0;
    p.stop_fraction = 0.1;
    break;
  case Mode::tricycle:
    // Two lines either side of resonance beat at 6 Hz.
    p.band_noise = {{2.0, 15.0, 1.5}, {20.0, 30.0, 0.15}};
    p.harmonics = {{22.0, 1.25}, {28.0, 1.25}};
    p.impulse_rate = 1.0;
    p.impulse_amplitude = 6.0;
    p.stop_fraction = 0.1;
    break;
  case Mode::pedestrian:
    // 2 Hz gait and its harmonics near resonance, plus heel strikes.
    p.band_noise = {{20.0, 40.0, 0.05}};
    p.harmonics = {{2.0, 2.5}, {4.0, 1.0}, {22.0, 0.45}, {24.0, 0.5}, {26.0, 0.45}};
    p.impulse_rate = 1.8;
    p.impulse_amplitude = 8.0;
    p.stop_fraction = 0.3;
    break;
  case Mode::unlabeled:
    break;
  }
  return p;
}

std::vector<BandNoise> parse_band_list(const std::string& text) {
  std::vector<BandNoise> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) continue;
    const auto parts = split(item, ':');
    if (parts.size() != 3) throw ValidationError("band noise entry must be low:high:rms, got '" + item + "'");
    const auto lo = parse_double(parts[0]), hi = parse_double(parts[1]), rms = parse_double(parts[2]);
    if (!lo || !hi || !rms) throw ValidationError("band noise entry is not numeric: '" + item + "'");
    out.push_back({*lo, *hi, *rms});
  }
  return out;
}

std::vector<Harmonic> parse_harmonic_list(const std::string& text) {
  std::vector<Harmonic> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) continue;
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw ValidationError("harmonic entry must be freq:amp, got '" + item + "'");
    const auto f = parse_double(parts[0]), a = parse_double(parts[1]);
    if (!f || !a) throw ValidationError("harmonic entry is not numeric: '" + item + "'");
    out.push_back({*f, *a});
  }
  return out;
}

ModeProfile profile_from_config(const KeyValueConfig& cfg, Mode mode) {
  ModeProfile p = default_profile(mode);
  const std::string prefix = "profile." + std::string(to_string(mode)) + ".";
  if (auto v = cfg.get(prefix + "band_noise")) p.band_noise = parse_band_list(*v);
  if (auto v = cfg.get(prefix + "harmonics")) p.harmonics = parse_harmonic_list(*v);
  p.impulse_rate = cfg.get_double(prefix + "impulse_rate", p.impulse_rate);
  p.impulse_amplitude = cfg.get_double(prefix + "impulse_amplitude", p.impulse_amplitude);
  p.stop_fraction = cfg.get_double(prefix + "stop_fraction", p.stop_fraction);
  p.validate();
  return p;
}

std::vector<std::uint8_t> motion_mask(std::size_t n, double fs, std::uint64_t seed, double stop_fraction) {
  std::vector<std::uint8_t> mask(n, 1);
  std::mt19937_64 rng(derive_seed(seed, "stops"));
  const double duration = static_cast<double>(n) / fs;
  const auto n_stops = static_cast<std::size_t>(std::max(1.0, std::round(duration / kStopSlot)));
  const auto stop_len = static_cast<std::size_t>(std::floor(stop_fraction * static_cast<double>(n) /
                                                            static_cast<double>(n_stops)));
  const std::size_t slot = n / n_stops;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t s = 0; s < n_stops; ++s) {
    const double u = unit(rng);
    if (stop_len == 0 || stop_len > slot) continue;
    const auto offset = static_cast<std::size_t>(u * static_cast<double>(slot - stop_len));
    const std::size_t begin = s * slot + offset;
    std::fill(mask.begin() + static_cast<std::ptrdiff_t>(begin),
              mask.begin() + static_cast<std::ptrdiff_t>(begin + stop_len), 0);
  }
  return mask;
}

VibrationTrace gen_mode_trace(Mode mode, double duration_s, std::uint64_t seed, const ModeProfile& profile,
                              double sample_rate) {
  check_finite_positive(duration_s, "duration");
  check_finite_positive(sample_rate, "sample_rate");
  profile.validate();
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  if (n == 0) throw ValidationError("duration shorter than one sample");

  VibrationTrace trace;
  trace.mode = mode;
  trace.sample_rate = sample_rate;
  trace.seed = seed;
  trace.samples = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));

  std::mt19937_64 rng(derive_seed(seed, "excitation"));
  for (const auto& band : profile.band_noise)
    trace.samples += band.rms * band_limited_noise(n, sample_rate, band.low_hz, band.high_hz, rng);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(static_cast<Eigen::Index>(n), 0.0,
                                                     static_cast<double>(n - 1)) / sample_rate;
  for (const auto& h : profile.harmonics) {
    const double phase = 2.0 * std::numbers::pi * unit(rng);
    trace.samples.array() += h.amplitude * (2.0 * std::numbers::pi * h.frequency_hz * t + phase).sin();
  }

  if (profile.impulse_rate > 0.0) {
    std::exponential_distribution<double> gap(profile.impulse_rate);
    const auto width = static_cast<std::size_t>(std::llround(kImpulseWidth * sample_rate));
    double when = gap(rng);
    while (when < duration_s) {
      const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
      const double amp = sign * profile.impulse_amplitude * (0.5 + unit(rng));
      const auto start = static_cast<std::size_t>(when * sample_rate);
      for (std::size_t j = 0; j < width && start + j < n; ++j) {
        const double tau = static_cast<double>(j) / sample_rate;
        trace.samples[static_cast<Eigen::Index>(start + j)] +=
            amp * std::sin(std::numbers::pi * tau / kImpulseWidth) * std::exp(-tau / kImpulseDecay);
      }
      when += gap(rng);
    }
  }

  const auto mask = motion_mask(n, sample_rate, seed, profile.stop_fraction);
  for (std::size_t i = 0; i < n; ++i)
    if (!mask[i]) trace.samples[static_cast<Eigen::Index>(i)] = 0.0;
  return trace;
}

VibrationTrace load_trace_csv(const std::filesystem::path& path, double sample_rate, Mode mode) {
  check_finite_positive(sample_rate, "sample_rate");
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trace file: " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string cell = trim(line);
    if (cell.empty()) continue;
    if (row == 1 && cell == "accel_ms2") continue;
    const auto v = parse_double(cell);
    if (!v || !std::isfinite(*v))
      throw ValidationError(path.string() + ": malformed value at row " + std::to_string(row) + ": '" +
                            cell + "'");
    values.push_back(*v);
  }
  if (values.empty()) throw ValidationError(path.string() + ": no samples");
  VibrationTrace trace;
  trace.mode = mode;
  trace.sample_rate = sample_rate;
  trace.seed = 0;
  trace.samples = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return trace;
}

void save_trace_csv(const std::filesystem::path& path, const VibrationTrace& trace) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write trace file: " + path.string());
  out << "accel_ms2\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < trace.samples.size(); ++i) out << trace.samples[i] << '\n';
}

} // namespace kehsim
