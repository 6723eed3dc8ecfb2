#include "kehsim/features.hpp"

#include "kehsim/common.hpp"

namespace kehsim {

const std::vector<std::string>& channel_feature_names() {
  static const std::vector<std::string> names = {
      // time domain
      "mean", "median", "max", "min", "range", "std", "variance", "coefficient_of_variation", "skewness",
      "kurtosis", "rms", "iqr", "mean_abs_deviation", "abs_area", "energy", "zero_crossing_rate",
      "mean_crossing_rate", "peak_count", "mean_peak_spacing", "autocorr_lag1", "hjorth_mobility",
      "hjorth_complexity", "mean_abs_diff", "max_abs_diff",
      // frequency domain
      "dc_magnitude", "dominant_freq", "dominant_magnitude", "second_freq", "second_magnitude",
      "dominant_energy_ratio", "spectral_energy", "spectral_entropy", "spectral_centroid", "spectral_spread",
      "spectral_skewness", "spectral_kurtosis", "rolloff_85", "band_energy_0_5", "band_energy_5_10",
      "band_energy_10_20", "band_energy_20_35", "band_energy_35_50"};
  return names;
}

std::vector<std::string> feature_names(int channels) {
  const auto& base = channel_feature_names();
  if (channels == 1) return base;
  if (channels != 3) throw ValidationError("feature extraction supports 1 or 3 channels");
  std::vector<std::string> out;
  for (const char* axis : {"x_", "y_", "z_"})
    for (const auto& name : base) out.push_back(axis + name);
  out.push_back("magnitude_mean");
  out.push_back("magnitude_std");
  return out;
}

} // namespace kehsim
