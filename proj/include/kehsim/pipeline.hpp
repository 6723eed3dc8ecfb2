#pragma once

#include "kehsim/acquisition.hpp"
#include "kehsim/classify.hpp"
#include "kehsim/dataset.hpp"
#include "kehsim/features.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace kehsim {

/// One or more time-aligned channels of a sensed signal (samples × channels).
/// Single KEH taps have one channel; the accelerometer stand-in has three.
struct SignalTrace {
  std::string signal_id;
  Mode mode = Mode::unlabeled;
  double sample_rate = 100.0;
  Eigen::MatrixXd values;

  Eigen::Index size() const { return values.rows(); }
  Eigen::Index channels() const { return values.cols(); }
};

SignalTrace to_signal_trace(const SensingRecord& record);
/// Joins ACC-X/Y/Z into the three-channel "ACC" signal.
SignalTrace combine_axes(const SensingRecord& x, const SensingRecord& y, const SensingRecord& z);

/// Per one-second segment: true when the segment is kept. A segment is dropped when
/// its mean absolute value (row norm for multi-channel) is below
/// threshold_fraction × the 95th percentile of the whole record's absolute values.
std::vector<bool> moving_segments(const SignalTrace& trace, double threshold_fraction = 0.1);

SignalTrace remove_stops(const SignalTrace& trace, double threshold_fraction = 0.1);
SensingRecord remove_stops(const SensingRecord& record, double threshold_fraction = 0.1);

struct Window {
  Eigen::MatrixXd values;
  Mode mode = Mode::unlabeled;
  std::string signal_id;
  double window_s = 1.0;
  double sample_rate = 100.0;
};

/// Equal windows of window_s with 50% overlap: floor((N − W)/(W/2)) + 1 windows.
std::vector<Window> make_windows(const SignalTrace& trace, double window_s);

struct FeatureVector {
  Eigen::VectorXd values;
  std::vector<std::string> names;
  Mode label = Mode::unlabeled;
  /// Some channel is constant, so its shape statistics were defined as 0.
  bool degenerate = false;
};

FeatureVector extract_features(const Window& window);

/// Stacks feature vectors into a dataset; every label must be one of the six modes.
Dataset build_dataset(const std::vector<FeatureVector>& vectors);

struct RfeOptions {
  int folds = 10;
  std::uint64_t seed = 0;
  int trees = 25;           ///< forest size for ranking and scoring
  double tolerance = 0.005; ///< accept the smallest subset within this of the best score
  int smote_k = 5;
};

struct RfeResult {
  std::vector<int> selected;                       ///< ascending column indices
  std::vector<int> elimination_order;              ///< columns in the order they were removed
  std::vector<std::pair<int, double>> cv_scores;   ///< (subset size, CV accuracy), descending size
  double selected_score = 0.0;
};

/// Recursive feature elimination: score the current subset with stratified k-fold
/// CV of a random forest, drop the column with the lowest forest impurity
/// importance, repeat down to one feature. Returns the smallest subset scoring at
/// least (best − tolerance).
RfeResult rfe(const Dataset& data, const RfeOptions& options);

} // namespace kehsim
