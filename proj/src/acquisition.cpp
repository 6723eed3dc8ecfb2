#include "kehsim/acquisition.hpp"

#include "kehsim/csv.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>

namespace kehsim {

namespace {

enum class TapKind { ac_voltage, rect_voltage, current };

Eigen::Index decimation_factor(double internal_rate, const AdcConfig& adc) {
  adc.validate(internal_rate);
  return static_cast<Eigen::Index>(std::llround(internal_rate / adc.sample_rate));
}

SensingRecord quantize(const std::string& id, const Eigen::VectorXd& channel, Eigen::Index factor, TapKind kind,
                       Mode mode, const AdcConfig& adc, const ShuntConfig& shunt) {
  const Eigen::Index count = channel.size() / factor;
  SensingRecord rec;
  rec.signal_id = id;
  rec.mode = mode;
  rec.sample_rate = adc.sample_rate;
  rec.codes.resize(count);
  rec.engineering_values.resize(count);
  const double bias = adc.full_scale / 2.0;
  for (Eigen::Index k = 0; k < count; ++k) {
    const double x = channel[k * factor];
    int code = 0;
    double value = 0.0;
    switch (kind) {
    case TapKind::ac_voltage:
      code = adc_sample(x * adc.divider_ratio + bias, adc);
      value = (adc_volts(code, adc) - bias) / adc.divider_ratio;
      break;
    case TapKind::rect_voltage:
      code = adc_sample(x * adc.divider_ratio, adc);
      value = adc_volts(code, adc) / adc.divider_ratio;
      break;
    case TapKind::current:
      code = adc_sample(shunt_sense(x, shunt), adc);
      value = adc_volts(code, adc) / (shunt.shunt_resistance * shunt.amplifier_gain);
      break;
    }
    rec.codes[k] = code;
    rec.engineering_values[k] = value;
  }
  return rec;
}

SensingRecord quantize_accel(const std::string& id, const Eigen::VectorXd& channel, Eigen::Index factor, Mode mode,
                             const AdcConfig& adc) {
  const Eigen::Index count = channel.size() / factor;
  SensingRecord rec;
  rec.signal_id = id;
  rec.mode = mode;
  rec.sample_rate = adc.sample_rate;
  rec.codes.resize(count);
  rec.engineering_values.resize(count);
  const double bias = adc.full_scale / 2.0;
  const double volts_per_unit = bias / adc.accel_range;
  for (Eigen::Index k = 0; k < count; ++k) {
    const int code = adc_sample(channel[k * factor] * volts_per_unit + bias, adc);
    rec.codes[k] = code;
    rec.engineering_values[k] = (adc_volts(code, adc) - bias) / volts_per_unit;
  }
  return rec;
}

Eigen::VectorXd hilbert(const Eigen::VectorXd& x) {
  std::size_t m = 1;
  while (m < static_cast<std::size_t>(x.size())) m <<= 1;
  std::vector<double> padded(m, 0.0);
  std::copy(x.data(), x.data() + x.size(), padded.begin());
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, padded);
  const std::complex<double> j(0.0, 1.0);
  for (std::size_t k = 0; k < m; ++k) {
    if (k == 0 || 2 * k == m) spec[k] = 0.0;
    else if (2 * k < m) spec[k] *= -j;
    else spec[k] *= j;
  }
  std::vector<double> out;
  fft.inv(out, spec);
  return Eigen::Map<const Eigen::VectorXd>(out.data(), x.size());
}

} // namespace

std::vector<std::string> signals_for(Topology topology) {
  switch (topology) {
  case Topology::open_circuit: return {signal::kOcAcV, signal::kOcRecV};
  case Topology::converterless: return {signal::kClAcV, signal::kClRecV, signal::kClC};
  case Topology::converter_based: return {signal::kCbC};
  }
  return {};
}

void AdcConfig::validate(double internal_rate) const {
  if (resolution_bits < 1 || resolution_bits > 30) throw ValidationError("adc.resolution_bits must lie in [1, 30]");
  if (!(full_scale > 0.0) || !std::isfinite(full_scale)) throw ValidationError("adc.full_scale must be > 0");
  if (!(divider_ratio > 0.0) || !(accel_range > 0.0))
    throw ValidationError("adc.divider_ratio and adc.accel_range must be > 0");
  if (!(sample_rate > 0.0) || sample_rate > internal_rate)
    throw ValidationError("adc.sample_rate must lie in (0, internal rate]");
  const double ratio = internal_rate / sample_rate;
  if (std::abs(ratio - std::round(ratio)) > 1e-9)
    throw ValidationError("adc.sample_rate must divide the internal simulation rate");
}

AdcConfig AdcConfig::from_config(const KeyValueConfig& cfg) {
  AdcConfig a;
  a.resolution_bits = static_cast<int>(cfg.get_int("adc.resolution_bits", a.resolution_bits));
  a.full_scale = cfg.get_double("adc.full_scale", a.full_scale);
  a.sample_rate = cfg.get_double("adc.sample_rate", a.sample_rate);
  a.divider_ratio = cfg.get_double("adc.divider_ratio", a.divider_ratio);
  a.accel_range = cfg.get_double("adc.accel_range", a.accel_range);
  a.validate(kInternalRate);
  return a;
}

void ShuntConfig::validate() const {
  if (!(shunt_resistance > 0.0) || !(amplifier_gain > 0.0) || !(rail > 0.0))
    throw ValidationError("shunt resistance, gain and rail must be > 0");
}

ShuntConfig ShuntConfig::from_config(const KeyValueConfig& cfg) {
  ShuntConfig s;
  s.shunt_resistance = cfg.get_double("shunt.shunt_resistance", s.shunt_resistance);
  s.amplifier_gain = cfg.get_double("shunt.amplifier_gain", s.amplifier_gain);
  s.rail = cfg.get_double("shunt.rail", s.rail);
  s.validate();
  return s;
}

double shunt_sense(double current, const ShuntConfig& cfg) {
  return std::clamp(current * cfg.shunt_resistance * cfg.amplifier_gain, 0.0, cfg.rail);
}

int adc_sample(double volts, const AdcConfig& cfg) {
  const double clamped = std::clamp(volts, 0.0, cfg.full_scale);
  return static_cast<int>(std::lround(clamped / cfg.full_scale * cfg.max_code()));
}

double adc_volts(int code, const AdcConfig& cfg) { return static_cast<double>(code) * cfg.lsb(); }

std::vector<SensingRecord> sample_signals(const SimRecord& sim, Mode mode, const AdcConfig& adc,
                                          const ShuntConfig& shunt) {
  shunt.validate();
  const Eigen::Index factor = decimation_factor(sim.sample_rate, adc);
  std::vector<SensingRecord> out;
  switch (sim.topology) {
  case Topology::open_circuit:
    out.push_back(quantize(signal::kOcAcV, sim.v_ac, factor, TapKind::ac_voltage, mode, adc, shunt));
    out.push_back(quantize(signal::kOcRecV, sim.v_rect, factor, TapKind::rect_voltage, mode, adc, shunt));
    break;
  case Topology::converterless:
    out.push_back(quantize(signal::kClAcV, sim.v_ac, factor, TapKind::ac_voltage, mode, adc, shunt));
    out.push_back(quantize(signal::kClRecV, sim.v_rect, factor, TapKind::rect_voltage, mode, adc, shunt));
    out.push_back(quantize(signal::kClC, sim.i_rect, factor, TapKind::current, mode, adc, shunt));
    break;
  case Topology::converter_based:
    out.push_back(quantize(signal::kCbC, sim.i_rect, factor, TapKind::current, mode, adc, shunt));
    break;
  }
  return out;
}

std::vector<SensingRecord> sample_accelerometer(const VibrationTrace& trace, const AdcConfig& adc) {
  trace.validate();
  const Eigen::Index factor = decimation_factor(trace.sample_rate, adc);
  const Eigen::VectorXd& x = trace.samples;
  const Eigen::VectorXd y = hilbert(x);
  const auto delay = static_cast<Eigen::Index>(std::llround(0.005 * trace.sample_rate));
  Eigen::VectorXd z = Eigen::VectorXd::Zero(x.size());
  if (x.size() > delay) z.tail(x.size() - delay) = 0.5 * x.head(x.size() - delay);
  return {quantize_accel(signal::kAccX, x, factor, trace.mode, adc),
          quantize_accel(signal::kAccY, y, factor, trace.mode, adc),
          quantize_accel(signal::kAccZ, z, factor, trace.mode, adc)};
}

double acquisition_power(const std::string& id, const PowerModel& model) {
  if (id == signal::kClC || id == signal::kCbC) return model.keh_current();
  if (id == signal::kOcAcV || id == signal::kOcRecV || id == signal::kClAcV || id == signal::kClRecV)
    return model.keh_voltage();
  if (id == signal::kAcc) return model.accel_digital;
  if (id == signal::kAccX || id == signal::kAccY || id == signal::kAccZ) return model.accel_digital / 3.0;
  throw ValidationError("unknown signal id '" + id + "'");
}

void write_sensing_csv(const std::filesystem::path& path, const SensingRecord& rec) {
  CsvWriter w(path, {"time_s", "code", "value", "signal_id", "mode"});
  const std::string mode(to_string(rec.mode));
  for (Eigen::Index k = 0; k < rec.size(); ++k) {
    w.cell(static_cast<double>(k) / rec.sample_rate)
        .cell(rec.codes[k])
        .cell(rec.engineering_values[k])
        .cell(rec.signal_id)
        .cell(mode);
    w.end_row();
  }
}

SensingRecord read_sensing_csv(const std::filesystem::path& path) {
  validate_csv(path, {"time_s", "code", "value", "signal_id", "mode"});
  const CsvTable table = read_csv(path);
  if (table.rows.empty()) throw ValidationError(path.string() + ": no samples");
  SensingRecord rec;
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  rec.codes.resize(n);
  rec.engineering_values.resize(n);
  rec.signal_id = table.rows.front()[3];
  rec.mode = parse_mode(table.rows.front()[4]);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& row = table.rows[static_cast<std::size_t>(k)];
    const auto code = parse_double(row[1]);
    const auto value = parse_double(row[2]);
    if (!code || !value)
      throw ValidationError(path.string() + ": malformed row " + std::to_string(k + 2));
    rec.codes[k] = static_cast<int>(*code);
    rec.engineering_values[k] = *value;
  }
  if (n >= 2) {
    const auto t1 = parse_double(table.rows[1][0]);
    if (t1 && *t1 > 0.0) rec.sample_rate = std::round(1e6 / *t1) / 1e6;
  }
  return rec;
}

} // namespace kehsim
