#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace kehsim {

/// Number of features per single channel: 24 time domain + 18 frequency domain.
inline constexpr int kTimeFeatures = 24;
inline constexpr int kFrequencyFeatures = 18;
inline constexpr int kChannelFeatures = kTimeFeatures + kFrequencyFeatures;
/// Three axes plus mean and standard deviation of the magnitude signal.
inline constexpr int kTriaxialFeatures = 3 * kChannelFeatures + 2;

/// Canonical ordered single-channel names. Version 1 of the feature contract.
const std::vector<std::string>& channel_feature_names();
/// 42 names for one channel, 128 for three (x_, y_, z_ prefixes + magnitude_mean, magnitude_std).
std::vector<std::string> feature_names(int channels);

/// Band edges (Hz) used for the five band-energy features; the last band is closed.
inline constexpr double kBandEdges[] = {0.0, 5.0, 10.0, 20.0, 35.0, 50.0};

namespace detail {

template <typename Scalar>
Scalar quantile_sorted(const std::vector<Scalar>& sorted, Scalar q) {
  const Scalar pos = q * static_cast<Scalar>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const Scalar frac = pos - static_cast<Scalar>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

template <typename Scalar>
Scalar population_variance(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& v) {
  if (v.size() == 0) return Scalar(0);
  return (v - v.mean()).square().mean();
}

/// Prominence of the strict local maximum at i (same definition as the
/// common scientific-computing peak finders).
template <typename Scalar>
Scalar prominence(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& x, Eigen::Index i) {
  const Scalar peak = x[i];
  Scalar left_min = peak;
  for (Eigen::Index j = i - 1; j >= 0 && x[j] <= peak; --j) left_min = std::min(left_min, x[j]);
  Scalar right_min = peak;
  for (Eigen::Index j = i + 1; j < x.size() && x[j] <= peak; ++j) right_min = std::min(right_min, x[j]);
  return peak - std::max(left_min, right_min);
}

} // namespace detail

/// Strict interior local maxima whose prominence is at least 0.1·(max − min).
template <typename Derived>
std::vector<Eigen::Index> find_peaks(const Eigen::DenseBase<Derived>& signal) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> x = signal.derived().array();
  std::vector<Eigen::Index> peaks;
  if (x.size() < 3) return peaks;
  const Scalar min_prominence = Scalar(0.1) * (x.maxCoeff() - x.minCoeff());
  if (!(min_prominence > Scalar(0))) return peaks;
  for (Eigen::Index i = 1; i + 1 < x.size(); ++i)
    if (x[i] > x[i - 1] && x[i] > x[i + 1] && detail::prominence(x, i) >= min_prominence) peaks.push_back(i);
  return peaks;
}

/// Time-domain features of one channel, in canonical order.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
time_features(const Eigen::DenseBase<Derived>& signal, typename Derived::Scalar sample_rate) {
  using Scalar = typename Derived::Scalar;
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  const Array x = signal.derived().array();
  const Eigen::Index n = x.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> f = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(kTimeFeatures);
  if (n == 0) return f;

  const Scalar mean = x.mean();
  const Scalar max = x.maxCoeff();
  const Scalar min = x.minCoeff();
  std::vector<Scalar> sorted(x.data(), x.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const Array d = x - mean;
  const Scalar m2 = d.square().mean();
  const Scalar scale = x.abs().maxCoeff();
  // A constant window (up to rounding in the mean) has no shape statistics.
  const bool degenerate = !(m2 > Scalar(1e-24) * scale * scale) || max == min;
  const Scalar sd = std::sqrt(m2);

  f[0] = mean;
  f[1] = detail::quantile_sorted(sorted, Scalar(0.5));
  f[2] = max;
  f[3] = min;
  f[4] = max - min;
  f[5] = degenerate ? Scalar(0) : sd;
  f[6] = degenerate ? Scalar(0) : m2;
  f[7] = (degenerate || std::abs(mean) < Scalar(1e-12)) ? Scalar(0) : sd / std::abs(mean);
  f[8] = degenerate ? Scalar(0) : d.cube().mean() / (m2 * sd);
  f[9] = degenerate ? Scalar(0) : d.square().square().mean() / (m2 * m2) - Scalar(3);
  f[10] = std::sqrt(x.square().mean());
  f[11] = detail::quantile_sorted(sorted, Scalar(0.75)) - detail::quantile_sorted(sorted, Scalar(0.25));
  f[12] = degenerate ? Scalar(0) : d.abs().mean();
  f[13] = x.abs().sum() / sample_rate;
  f[14] = x.square().sum();

  if (n >= 2) {
    Eigen::Index zero_cross = 0, mean_cross = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if ((x[i - 1] < 0) != (x[i] < 0)) ++zero_cross;
      if ((d[i - 1] < 0) != (d[i] < 0)) ++mean_cross;
    }
    f[15] = static_cast<Scalar>(zero_cross) / static_cast<Scalar>(n - 1);
    f[16] = degenerate ? Scalar(0) : static_cast<Scalar>(mean_cross) / static_cast<Scalar>(n - 1);
  }

  const auto peaks = find_peaks(x);
  f[17] = static_cast<Scalar>(peaks.size());
  if (peaks.size() >= 2)
    f[18] = static_cast<Scalar>(peaks.back() - peaks.front()) / static_cast<Scalar>(peaks.size() - 1) / sample_rate;

  if (!degenerate && n >= 2)
    f[19] = (d.head(n - 1) * d.tail(n - 1)).sum() / d.square().sum();

  if (n >= 2) {
    const Array diff = x.tail(n - 1) - x.head(n - 1);
    if (!degenerate) {
      const Scalar var_diff = detail::population_variance(diff);
      const Scalar mobility = std::sqrt(var_diff / m2);
      f[20] = mobility;
      if (n >= 3 && var_diff > Scalar(0) && mobility > Scalar(0)) {
        const Array diff2 = diff.tail(n - 2) - diff.head(n - 2);
        f[21] = std::sqrt(detail::population_variance(diff2) / var_diff) / mobility;
      }
    }
    f[22] = diff.abs().mean();
    f[23] = diff.abs().maxCoeff();
  }
  return f;
}

/// Frequency-domain features from the one-sided DFT magnitude spectrum |X_k|/N.
/// All spectral statistics exclude the DC bin, which is reported on its own.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
frequency_features(const Eigen::DenseBase<Derived>& signal, typename Derived::Scalar sample_rate) {
  using Scalar = typename Derived::Scalar;
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> f = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(kFrequencyFeatures);
  const Eigen::Index n = signal.size();
  if (n == 0) return f;

  if (n == 1) {
    f[0] = std::abs(signal.derived()(0));
    return f;
  }
  std::vector<Scalar> samples(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) samples[static_cast<std::size_t>(i)] = signal.derived()(i);
  std::vector<std::complex<Scalar>> spectrum;
  Eigen::FFT<Scalar> fft;
  fft.fwd(spectrum, samples);

  const Eigen::Index bins = n / 2 + 1;
  Array mag(bins), freq(bins);
  for (Eigen::Index k = 0; k < bins; ++k) {
    mag[k] = std::abs(spectrum[static_cast<std::size_t>(k)]) / static_cast<Scalar>(n);
    freq[k] = static_cast<Scalar>(k) * sample_rate / static_cast<Scalar>(n);
  }
  f[0] = mag[0];
  if (bins < 2) return f;

  const Array ac_mag = mag.tail(bins - 1);
  const Array ac_freq = freq.tail(bins - 1);
  const Array power = ac_mag.square();
  const Scalar total = power.sum();

  f[6] = total;
  // A flat spectrum has no dominant component; its frequencies stay 0.
  if (total > Scalar(0)) {
    Eigen::Index dominant = 0;
    ac_mag.maxCoeff(&dominant);
    f[1] = ac_freq[dominant];
    f[2] = ac_mag[dominant];
    if (ac_mag.size() >= 2) {
      Eigen::Index second = -1;
      for (Eigen::Index k = 0; k < ac_mag.size(); ++k)
        if (k != dominant && (second < 0 || ac_mag[k] > ac_mag[second])) second = k;
      f[3] = ac_freq[second];
      f[4] = ac_mag[second];
    }
    const Array p = power / total;
    f[5] = p[dominant];
    Scalar entropy = 0;
    for (Eigen::Index k = 0; k < p.size(); ++k)
      if (p[k] > Scalar(0)) entropy -= p[k] * std::log(p[k]);
    f[7] = entropy;
    const Scalar centroid = (ac_freq * p).sum();
    const Array dev = ac_freq - centroid;
    const Scalar var = (dev.square() * p).sum();
    f[8] = centroid;
    if (var > Scalar(0)) {
      const Scalar spread = std::sqrt(var);
      f[9] = spread;
      f[10] = (dev.cube() * p).sum() / (var * spread);
      f[11] = (dev.square().square() * p).sum() / (var * var) - Scalar(3);
    }
    Scalar cumulative = 0;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      cumulative += p[k];
      if (cumulative >= Scalar(0.85)) {
        f[12] = ac_freq[k];
        break;
      }
    }
  }
  for (int b = 0; b < 5; ++b) {
    const Scalar lo = static_cast<Scalar>(kBandEdges[b]);
    const Scalar hi = static_cast<Scalar>(kBandEdges[b + 1]);
    Scalar energy = 0;
    for (Eigen::Index k = 0; k < ac_freq.size(); ++k)
      if (ac_freq[k] >= lo && (ac_freq[k] < hi || (b == 4 && ac_freq[k] <= hi))) energy += power[k];
    f[13 + b] = energy;
  }
  return f;
}

/// All 42 features of one channel.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
channel_features(const Eigen::DenseBase<Derived>& signal, typename Derived::Scalar sample_rate) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> f(kChannelFeatures);
  f << time_features(signal, sample_rate), frequency_features(signal, sample_rate);
  return f;
}

/// Features of a (samples × channels) block: 42 per channel, plus magnitude
/// mean/std when there are three channels.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
window_features(const Eigen::DenseBase<Derived>& block, typename Derived::Scalar sample_rate) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index channels = block.cols();
  const Eigen::Index extra = channels == 3 ? 2 : 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> f(channels * kChannelFeatures + extra);
  for (Eigen::Index c = 0; c < channels; ++c)
    f.segment(c * kChannelFeatures, kChannelFeatures) = channel_features(block.col(c), sample_rate);
  if (extra) {
    const Eigen::Array<Scalar, Eigen::Dynamic, 1> magnitude = block.derived().rowwise().norm().array();
    const Scalar mean = magnitude.mean();
    f[channels * kChannelFeatures] = mean;
    f[channels * kChannelFeatures + 1] = std::sqrt((magnitude - mean).square().mean());
  }
  return f;
}

} // namespace kehsim
