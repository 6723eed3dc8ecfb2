#include "kehsim/pipeline.hpp"

#include "kehsim/csv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kehsim {

SignalTrace to_signal_trace(const SensingRecord& record) {
  SignalTrace t;
  t.signal_id = record.signal_id;
  t.mode = record.mode;
  t.sample_rate = record.sample_rate;
  t.values = record.engineering_values;
  return t;
}

SignalTrace combine_axes(const SensingRecord& x, const SensingRecord& y, const SensingRecord& z) {
  const Eigen::Index n = std::min({x.size(), y.size(), z.size()});
  if (x.sample_rate != y.sample_rate || x.sample_rate != z.sample_rate)
    throw ValidationError("accelerometer axes have different sample rates");
  SignalTrace t;
  t.signal_id = signal::kAcc;
  t.mode = x.mode;
  t.sample_rate = x.sample_rate;
  t.values.resize(n, 3);
  t.values.col(0) = x.engineering_values.head(n);
  t.values.col(1) = y.engineering_values.head(n);
  t.values.col(2) = z.engineering_values.head(n);
  return t;
}

std::vector<bool> moving_segments(const SignalTrace& trace, double threshold_fraction) {
  if (trace.size() == 0) throw ValidationError("stop removal: empty record");
  const Eigen::VectorXd magnitude = trace.values.rowwise().norm();
  std::vector<double> sorted(magnitude.data(), magnitude.data() + magnitude.size());
  std::sort(sorted.begin(), sorted.end());
  const double pos = 0.95 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double p95 = sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  const double threshold = threshold_fraction * p95;

  const auto seg = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(trace.sample_rate)));
  std::vector<bool> keep;
  for (Eigen::Index start = 0; start < trace.size(); start += seg) {
    const Eigen::Index len = std::min(seg, trace.size() - start);
    // An all-zero segment is stationary even when the threshold itself is zero.
    const auto segment = magnitude.segment(start, len);
    keep.push_back(!(segment.mean() < threshold) && segment.maxCoeff() > 0.0);
  }
  return keep;
}

SignalTrace remove_stops(const SignalTrace& trace, double threshold_fraction) {
  const auto keep = moving_segments(trace, threshold_fraction);
  const auto seg = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(trace.sample_rate)));
  Eigen::Index kept = 0;
  for (std::size_t s = 0; s < keep.size(); ++s)
    if (keep[s]) kept += std::min(seg, trace.size() - static_cast<Eigen::Index>(s) * seg);
  if (kept == 0) throw RuntimeError("stop removal: trace entirely stationary (" + trace.signal_id + ")");

  SignalTrace out = trace;
  out.values.resize(kept, trace.channels());
  Eigen::Index row = 0;
  for (std::size_t s = 0; s < keep.size(); ++s) {
    if (!keep[s]) continue;
    const Eigen::Index start = static_cast<Eigen::Index>(s) * seg;
    const Eigen::Index len = std::min(seg, trace.size() - start);
    out.values.middleRows(row, len) = trace.values.middleRows(start, len);
    row += len;
  }
  return out;
}

SensingRecord remove_stops(const SensingRecord& record, double threshold_fraction) {
  const SignalTrace trace = to_signal_trace(record);
  const auto keep = moving_segments(trace, threshold_fraction);
  const auto seg = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(record.sample_rate)));
  std::vector<Eigen::Index> rows;
  for (std::size_t s = 0; s < keep.size(); ++s) {
    if (!keep[s]) continue;
    const Eigen::Index start = static_cast<Eigen::Index>(s) * seg;
    for (Eigen::Index i = start; i < std::min(start + seg, record.size()); ++i) rows.push_back(i);
  }
  if (rows.empty()) throw RuntimeError("stop removal: trace entirely stationary (" + record.signal_id + ")");
  SensingRecord out;
  out.signal_id = record.signal_id;
  out.mode = record.mode;
  out.sample_rate = record.sample_rate;
  out.codes.resize(static_cast<Eigen::Index>(rows.size()));
  out.engineering_values.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.codes[static_cast<Eigen::Index>(i)] = record.codes[rows[i]];
    out.engineering_values[static_cast<Eigen::Index>(i)] = record.engineering_values[rows[i]];
  }
  return out;
}

std::vector<Window> make_windows(const SignalTrace& trace, double window_s) {
  if (!(window_s > 0.0)) throw ValidationError("window length must be > 0");
  const auto width = static_cast<Eigen::Index>(std::llround(window_s * trace.sample_rate));
  if (width < 2) throw ValidationError("window must span at least 2 samples");
  if (trace.size() < width)
    throw ValidationError(trace.signal_id + " (" + std::string(to_string(trace.mode)) + "): record of " +
                          std::to_string(trace.size()) + " samples is shorter than one " +
                          format_double(window_s) + " s window");
  const Eigen::Index step = width / 2;
  const Eigen::Index count = (trace.size() - width) / step + 1;
  std::vector<Window> windows;
  windows.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index w = 0; w < count; ++w) {
    Window win;
    win.values = trace.values.middleRows(w * step, width);
    win.mode = trace.mode;
    win.signal_id = trace.signal_id;
    win.window_s = window_s;
    win.sample_rate = trace.sample_rate;
    windows.push_back(std::move(win));
  }
  return windows;
}

FeatureVector extract_features(const Window& window) {
  FeatureVector fv;
  fv.values = window_features(window.values, window.sample_rate);
  fv.names = feature_names(static_cast<int>(window.values.cols()));
  fv.label = window.mode;
  for (Eigen::Index c = 0; c < window.values.cols(); ++c)
    fv.degenerate = fv.degenerate || window.values.col(c).maxCoeff() == window.values.col(c).minCoeff();
  return fv;
}

Dataset build_dataset(const std::vector<FeatureVector>& vectors) {
  if (vectors.empty()) throw ValidationError("dataset: no feature vectors");
  Dataset data;
  data.names = vectors.front().names;
  const auto d = vectors.front().values.size();
  data.features.resize(static_cast<Eigen::Index>(vectors.size()), d);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].values.size() != d) throw ValidationError("dataset: feature vectors differ in length");
    data.features.row(static_cast<Eigen::Index>(i)) = vectors[i].values.transpose();
    data.labels.push_back(class_index(vectors[i].label));
  }
  data.validate();
  return data;
}

RfeResult rfe(const Dataset& data, const RfeOptions& options) {
  data.validate();
  if (data.cols() == 0) throw ValidationError("rfe: dataset has no features");
  int present = 0;
  for (int c : data.class_counts())
    if (c > 0) ++present;
  if (present < 2) throw ValidationError("rfe: dataset needs at least two classes");

  std::vector<int> active(static_cast<std::size_t>(data.cols()));
  std::iota(active.begin(), active.end(), 0);
  RfeResult result;
  std::vector<std::vector<int>> subsets;

  ClassifierSpec forest{Algorithm::random_forest, {{"trees", static_cast<double>(options.trees)}},
                        derive_seed(options.seed, "rfe-forest")};
  CvOptions cv{options.folds, derive_seed(options.seed, "rfe-cv"), true, options.smote_k, true};
  const auto fold_of = stratified_folds(data.labels, options.folds, derive_seed(options.seed, "rfe-folds"));
  const ModelFactory factory = factory_for(forest);

  while (true) {
    const Dataset subset = data.select_columns(active);
    const CvResult scored = cross_validate(subset, factory, fold_of, cv);
    result.cv_scores.emplace_back(static_cast<int>(active.size()), scored.mean_accuracy);
    subsets.push_back(active);
    if (active.size() == 1) break;

    RandomForest ranker({options.trees, 0, 0, 1, derive_seed(options.seed, "rfe-rank", active.size())});
    ranker.fit(subset.features, subset.labels);
    const Eigen::VectorXd& importance = ranker.feature_importances();
    Eigen::Index weakest = 0;
    for (Eigen::Index j = 1; j < importance.size(); ++j)
      if (importance[j] < importance[weakest]) weakest = j;
    result.elimination_order.push_back(active[static_cast<std::size_t>(weakest)]);
    active.erase(active.begin() + weakest);
  }

  double best = 0.0;
  for (const auto& [size, score] : result.cv_scores) best = std::max(best, score);
  for (std::size_t i = result.cv_scores.size(); i-- > 0;) {
    if (result.cv_scores[i].second >= best - options.tolerance) {
      result.selected = subsets[i];
      result.selected_score = result.cv_scores[i].second;
      break;
    }
  }
  std::sort(result.selected.begin(), result.selected.end());
  return result;
}

} // namespace kehsim
