#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kehsim {

/// Per-feature z-score parameters fitted on a training set.
struct NormalizationParams {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd std;      ///< population std; 1 where the column is constant
  std::vector<int> flagged;    ///< zero-variance columns

  Eigen::MatrixXd apply(const Eigen::MatrixXd& features) const;
};

/// Rectangular feature matrix (rows = windows) with class-index labels.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::vector<std::string> names;
  std::optional<NormalizationParams> normalization;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }
  void validate() const;
  /// Count per class index, sized to max(label) + 1 (at least `min_classes`).
  std::vector<int> class_counts(int min_classes = 0) const;
  Dataset select_rows(std::span<const Eigen::Index> rows) const;
  Dataset select_columns(std::span<const int> columns) const;
};

NormalizationParams fit_normalization(const Eigen::MatrixXd& features);

/// Z-scores every column with statistics of `data` itself; the fitted parameters
/// are stored on the result for reuse on held-out rows.
Dataset normalize(const Dataset& data);

/// Upsamples every class to the majority count with x + u·(x_nn − x), x_nn drawn
/// from the k nearest same-class neighbours. Synthetic rows are appended after
/// the originals, grouped by class. Deterministic per seed.
Dataset smote(const Dataset& data, int k, std::uint64_t seed);

} // namespace kehsim
