#include "kehsim/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace kehsim {

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
  case Algorithm::random_forest: return "random_forest";
  case Algorithm::decision_tree: return "decision_tree";
  case Algorithm::svm_linear: return "svm_linear";
  case Algorithm::knn: return "knn";
  case Algorithm::naive_bayes: return "naive_bayes";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  for (auto a : kAllAlgorithms)
    if (to_string(a) == name) return a;
  throw ValidationError("unknown classifier '" + std::string(name) +
                        "' (valid: random_forest|decision_tree|svm_linear|knn|naive_bayes)");
}

double ClassifierSpec::param(const std::string& key, double fallback) const {
  if (auto it = hyperparams.find(key); it != hyperparams.end()) return it->second;
  return fallback;
}

void ClassifierSpec::validate() const {
  auto at_least = [this](const char* key, double fallback, double lo) {
    const double v = param(key, fallback);
    if (!std::isfinite(v) || v < lo)
      throw ValidationError(std::string(to_string(algorithm)) + "." + key + " must be >= " + std::to_string(lo));
  };
  switch (algorithm) {
  case Algorithm::random_forest:
    at_least("trees", 100, 1);
    at_least("max_features", 0, 0);
    at_least("max_depth", 0, 0);
    at_least("min_leaf", 1, 1);
    break;
  case Algorithm::decision_tree:
    at_least("max_features", 0, 0);
    at_least("max_depth", 0, 0);
    at_least("min_leaf", 1, 1);
    break;
  case Algorithm::svm_linear:
    at_least("epochs", 200, 1);
    at_least("learning_rate", 0.01, 1e-12);
    at_least("lambda", 1e-4, 0);
    break;
  case Algorithm::knn:
    at_least("k", 5, 1);
    break;
  case Algorithm::naive_bayes:
    at_least("var_smoothing", 1e-9, 0);
    break;
  }
}

int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& scores) {
  int best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = static_cast<int>(i);
  return best;
}

// ---------------------------------------------------------------------------
// Model

void Model::fit(const Eigen::MatrixXd& features, std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != features.rows())
    throw ValidationError("fit: feature rows and labels differ in length");
  if (features.rows() == 0 || features.cols() == 0) throw ValidationError("fit: empty training set");
  if (!features.allFinite()) throw ValidationError("fit: non-finite features");
  int max_label = -1;
  bool distinct = false;
  for (int l : labels) {
    if (l < 0) throw ValidationError("fit: labels must be non-negative class indices");
    if (l != labels.front()) distinct = true;
    max_label = std::max(max_label, l);
  }
  if (!distinct) throw ValidationError("fit: training data contains a single class");
  n_features_ = features.cols();
  n_classes_ = max_label + 1;
  fit_impl(features, labels);
}

int Model::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != n_features_)
    throw ValidationError("predict: expected " + std::to_string(n_features_) + " features, got " +
                          std::to_string(x.size()));
  return predict_impl(x);
}

std::vector<int> Model::predict_rows(const Eigen::MatrixXd& features) const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(features.rows()));
  Eigen::VectorXd row(features.cols());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    row = features.row(i).transpose();
    out.push_back(predict(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trees

FeatureBins FeatureBins::fit(const Eigen::MatrixXd& features) {
  FeatureBins bins;
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  bins.thresholds.resize(static_cast<std::size_t>(d));
  bins.lower.resize(static_cast<std::size_t>(d));
  bins.upper.resize(static_cast<std::size_t>(d));
  bins.codes.resize(n, d);
  std::vector<double> sorted(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) sorted[static_cast<std::size_t>(i)] = features(i, j);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> unique = sorted;
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    auto& t = bins.thresholds[static_cast<std::size_t>(j)];
    if (unique.size() <= static_cast<std::size_t>(kMaxBins)) {
      for (std::size_t u = 1; u < unique.size(); ++u) t.push_back(0.5 * (unique[u - 1] + unique[u]));
    } else {
      for (int q = 1; q < kMaxBins; ++q) {
        const auto p = static_cast<std::size_t>(q) * sorted.size() / kMaxBins;
        if (p == 0 || sorted[p - 1] == sorted[p]) continue;
        const double cut = 0.5 * (sorted[p - 1] + sorted[p]);
        if (t.empty() || cut > t.back()) t.push_back(cut);
      }
    }
    auto& lo = bins.lower[static_cast<std::size_t>(j)];
    auto& hi = bins.upper[static_cast<std::size_t>(j)];
    lo.assign(t.size() + 1, std::numeric_limits<double>::infinity());
    hi.assign(t.size() + 1, -std::numeric_limits<double>::infinity());
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto code = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), features(i, j)) - t.begin());
      bins.codes(i, j) = static_cast<std::uint8_t>(code);
      lo[code] = std::min(lo[code], features(i, j));
      hi[code] = std::max(hi[code], features(i, j));
    }
  }
  return bins;
}

void DecisionTree::grow(const FeatureBins& bins, std::span<const int> labels, std::vector<Eigen::Index> rows,
                        int n_classes, Eigen::Index n_features, std::span<const int> weights) {
  nodes_.clear();
  n_features_ = n_features;
  n_classes_ = n_classes;
  importance_ = Eigen::VectorXd::Zero(n_features);
  std::mt19937_64 rng(options_.seed);
  const auto d = static_cast<int>(n_features);
  const int mtry = options_.max_features <= 0 ? d : std::min(options_.max_features, d);
  const int min_leaf = std::max(1, options_.min_leaf);
  const auto C = static_cast<std::size_t>(n_classes);

  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> hist(static_cast<std::size_t>(FeatureBins::kMaxBins) * C, 0);
  std::vector<int> counts(C), left(C), small_bin(C);
  struct Entry {
    int code, label, weight;
    bool operator<(const Entry& o) const { return code < o.code || (code == o.code && label < o.label); }
  };
  std::vector<Entry> small;
  auto weight = [&](Eigen::Index r) { return weights.empty() ? 1 : weights[static_cast<std::size_t>(r)]; };
  constexpr int kSmallNode = 64;

  struct Task {
    int node;
    std::size_t begin, end;
    int depth;
  };
  std::vector<Task> stack{{0, 0, rows.size(), 0}};
  nodes_.emplace_back();

  while (!stack.empty()) {
    const Task task = stack.back();
    stack.pop_back();
    std::fill(counts.begin(), counts.end(), 0);
    int n = 0; // weighted row count
    for (std::size_t r = task.begin; r < task.end; ++r) {
      const int w = weight(rows[r]);
      counts[static_cast<std::size_t>(labels[rows[r]])] += w;
      n += w;
    }
    int majority = 0, nonzero = 0;
    for (std::size_t c = 0; c < C; ++c) {
      if (counts[c] > counts[static_cast<std::size_t>(majority)]) majority = static_cast<int>(c);
      if (counts[c] > 0) ++nonzero;
    }
    nodes_[static_cast<std::size_t>(task.node)].label = majority;
    if (nonzero <= 1 || n < 2 * min_leaf || (options_.max_depth > 0 && task.depth >= options_.max_depth)) continue;

    double parent_score = 0.0;
    for (auto c : counts) parent_score += static_cast<double>(c) * c;
    parent_score /= n;

    double best_gain = -std::numeric_limits<double>::infinity();
    int best_feature = -1, best_bin = -1;
    double best_threshold = 0.0;
    int visited = 0;
    for (int i = 0; i < d && visited < mtry; ++i) {
      std::uniform_int_distribution<int> pick(i, d - 1);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
      const int f = order[static_cast<std::size_t>(i)];

      const std::uint8_t* column = bins.codes.col(f).data();
      std::fill(left.begin(), left.end(), 0);
      int n_left = 0, prev = -1;
      bool splittable = false;
      // Sweeps bins in ascending order; `bin` holds the class counts of bin b.
      auto sweep = [&](int b, const int* bin, int total) {
        if (prev >= 0 && n_left >= min_leaf && n - n_left >= min_leaf) {
          double sl = 0.0, sr = 0.0;
          for (std::size_t c = 0; c < C; ++c) {
            sl += static_cast<double>(left[c]) * left[c];
            const double rc = counts[c] - left[c];
            sr += rc * rc;
          }
          const double gain = sl / n_left + sr / (n - n_left) - parent_score;
          if (gain > best_gain + 1e-12) {
            best_gain = gain;
            best_feature = f;
            best_bin = prev;
            // Halfway between the node's neighbouring values, not the global bin edge.
            best_threshold = 0.5 * (bins.upper[static_cast<std::size_t>(f)][static_cast<std::size_t>(prev)] +
                                    bins.lower[static_cast<std::size_t>(f)][static_cast<std::size_t>(b)]);
          }
        }
        if (prev >= 0) splittable = true;
        for (std::size_t c = 0; c < C; ++c) left[c] += bin[c];
        n_left += total;
        prev = b;
      };

      if (task.end - task.begin <= kSmallNode) {
        // Few rows: sort (bin, label) pairs instead of scanning the bin range.
        small.clear();
        for (std::size_t r = task.begin; r < task.end; ++r)
          small.push_back({column[rows[r]], labels[rows[r]], weight(rows[r])});
        std::sort(small.begin(), small.end());
        std::vector<int>& bin = small_bin;
        for (std::size_t i = 0; i < small.size();) {
          std::fill(bin.begin(), bin.end(), 0);
          const int b = small[i].code;
          int total = 0;
          for (; i < small.size() && small[i].code == b; ++i) {
            bin[static_cast<std::size_t>(small[i].label)] += small[i].weight;
            total += small[i].weight;
          }
          sweep(b, bin.data(), total);
        }
      } else {
        int lo = FeatureBins::kMaxBins, hi = -1;
        for (std::size_t r = task.begin; r < task.end; ++r) {
          const int b = column[rows[r]];
          hist[static_cast<std::size_t>(b) * C + static_cast<std::size_t>(labels[rows[r]])] += weight(rows[r]);
          lo = std::min(lo, b);
          hi = std::max(hi, b);
        }
        for (int b = lo; b <= hi; ++b) {
          const int* bin = &hist[static_cast<std::size_t>(b) * C];
          int total = 0;
          for (std::size_t c = 0; c < C; ++c) total += bin[c];
          if (total > 0) sweep(b, bin, total);
        }
        std::fill(hist.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(lo) * C),
                  hist.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(hi + 1) * C), 0);
      }
      if (splittable) ++visited;
    }
    if (best_feature < 0) continue;

    importance_[best_feature] += std::max(0.0, best_gain);
    const auto mid_it = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(task.begin),
                                       rows.begin() + static_cast<std::ptrdiff_t>(task.end),
                                       [&](Eigen::Index r) { return bins.codes(r, best_feature) <= best_bin; });
    const auto mid = static_cast<std::size_t>(mid_it - rows.begin());
    const int left_id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_.emplace_back();
    Node& node = nodes_[static_cast<std::size_t>(task.node)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left_id;
    node.right = left_id + 1;
    stack.push_back({left_id + 1, mid, task.end, task.depth + 1});
    stack.push_back({left_id, task.begin, mid, task.depth + 1});
  }
}

void DecisionTree::fit_impl(const Eigen::MatrixXd& features, std::span<const int> labels) {
  const FeatureBins bins = FeatureBins::fit(features);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(features.rows()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  grow(bins, labels, std::move(rows), n_classes_, features.cols());
}

int DecisionTree::predict_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  std::size_t id = 0;
  while (nodes_[id].feature >= 0)
    id = static_cast<std::size_t>(x[nodes_[id].feature] <= nodes_[id].threshold ? nodes_[id].left : nodes_[id].right);
  return nodes_[id].label;
}

void RandomForest::fit_impl(const Eigen::MatrixXd& features, std::span<const int> labels) {
  const FeatureBins bins = FeatureBins::fit(features);
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  const int mtry = options_.max_features > 0
                       ? options_.max_features
                       : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
  trees_.clear();
  trees_.reserve(static_cast<std::size_t>(options_.trees));
  importance_ = Eigen::VectorXd::Zero(d);
  std::vector<int> multiplicity(static_cast<std::size_t>(n));
  for (int t = 0; t < options_.trees; ++t) {
    const std::uint64_t tree_seed = derive_seed(options_.seed, "tree", static_cast<std::uint64_t>(t));
    std::mt19937_64 rng(derive_seed(tree_seed, "bootstrap"));
    std::uniform_int_distribution<Eigen::Index> draw(0, n - 1);
    // Bootstrap as multiplicities: a row drawn k times weighs k.
    std::fill(multiplicity.begin(), multiplicity.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) ++multiplicity[static_cast<std::size_t>(draw(rng))];
    std::vector<Eigen::Index> rows;
    for (Eigen::Index r = 0; r < n; ++r)
      if (multiplicity[static_cast<std::size_t>(r)] > 0) rows.push_back(r);
    DecisionTree tree({mtry, options_.max_depth, options_.min_leaf, tree_seed});
    tree.grow(bins, labels, std::move(rows), n_classes_, d, multiplicity);
    const double total = tree.importances().sum();
    if (total > 0.0) importance_ += tree.importances() / total;
    trees_.push_back(std::move(tree));
  }
  importance_ /= static_cast<double>(options_.trees);
}

int RandomForest::predict_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd votes = Eigen::VectorXd::Zero(n_classes_);
  for (const auto& tree : trees_) votes[tree.predict(x)] += 1.0;
  return argmax_lowest(votes);
}

// ---------------------------------------------------------------------------
// Linear SVM

void LinearSvm::fit_impl(const Eigen::MatrixXd& features, std::span<const int> labels) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> X = features;
  weights_ = Eigen::MatrixXd::Zero(n_classes_, d);
  bias_ = Eigen::VectorXd::Zero(n_classes_);
  present_.assign(static_cast<std::size_t>(n_classes_), false);
  for (int l : labels) present_[static_cast<std::size_t>(l)] = true;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(options_.seed);
  const double eta = options_.learning_rate;
  const double shrink = 1.0 - eta * options_.lambda;
  Eigen::RowVectorXd w(d);
  for (int c = 0; c < n_classes_; ++c) {
    if (!present_[static_cast<std::size_t>(c)]) continue;
    w = weights_.row(c);
    double b = 0.0;
    for (int epoch = 0; epoch < options_.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (auto i : order) {
        const double y = labels[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
        const double margin = y * (w.dot(X.row(i)) + b);
        w *= shrink;
        if (margin < 1.0) {
          w.noalias() += (eta * y) * X.row(i);
          b += eta * y;
        }
      }
    }
    weights_.row(c) = w;
    bias_[c] = b;
  }
}

Eigen::VectorXd LinearSvm::decision_scores(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd scores = weights_ * x + bias_;
  for (int c = 0; c < n_classes_; ++c)
    if (!present_[static_cast<std::size_t>(c)]) scores[c] = -std::numeric_limits<double>::infinity();
  return scores;
}

int LinearSvm::predict_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return argmax_lowest(decision_scores(x));
}

// ---------------------------------------------------------------------------
// k nearest neighbours

void KNearestNeighbors::fit_impl(const Eigen::MatrixXd& features, std::span<const int> labels) {
  if (k_ < 1) throw ValidationError("knn: k must be >= 1");
  train_ = features;
  labels_.assign(labels.begin(), labels.end());
}

int KNearestNeighbors::predict_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd dist = (train_.rowwise() - x.transpose()).rowwise().squaredNorm();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(dist.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(k_), idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](Eigen::Index a, Eigen::Index b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
  Eigen::VectorXd votes = Eigen::VectorXd::Zero(n_classes_);
  for (std::size_t i = 0; i < k; ++i) votes[labels_[static_cast<std::size_t>(idx[i])]] += 1.0;
  return argmax_lowest(votes);
}

// ---------------------------------------------------------------------------
// Gaussian naive Bayes

void GaussianNaiveBayes::fit_impl(const Eigen::MatrixXd& features, std::span<const int> labels) {
  const Eigen::Index d = features.cols();
  means_ = Eigen::MatrixXd::Zero(n_classes_, d);
  variances_ = Eigen::MatrixXd::Zero(n_classes_, d);
  priors_ = Eigen::VectorXd::Zero(n_classes_);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    means_.row(labels[i]) += features.row(static_cast<Eigen::Index>(i));
    priors_[labels[i]] += 1.0;
  }
  for (int c = 0; c < n_classes_; ++c)
    if (priors_[c] > 0) means_.row(c) /= priors_[c];
  for (std::size_t i = 0; i < labels.size(); ++i)
    variances_.row(labels[i]) += (features.row(static_cast<Eigen::Index>(i)) - means_.row(labels[i])).array().square().matrix();
  for (int c = 0; c < n_classes_; ++c)
    if (priors_[c] > 0) variances_.row(c) /= priors_[c];

  const Eigen::RowVectorXd overall_mean = features.colwise().mean();
  const double max_var = (features.rowwise() - overall_mean).array().square().colwise().mean().maxCoeff();
  const double epsilon = std::max(var_smoothing_ * max_var, 1e-12);
  variances_.array() += epsilon;
  priors_ /= static_cast<double>(labels.size());
}

void GaussianNaiveBayes::set_priors(const Eigen::VectorXd& priors) {
  if (priors.size() != priors_.size()) throw ValidationError("naive_bayes: prior vector has wrong length");
  priors_ = priors;
}

Eigen::VectorXd GaussianNaiveBayes::log_posterior(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd out(n_classes_);
  for (int c = 0; c < n_classes_; ++c) {
    if (!(priors_[c] > 0.0)) {
      out[c] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const Eigen::ArrayXd var = variances_.row(c).transpose().array();
    const Eigen::ArrayXd diff = x.array() - means_.row(c).transpose().array();
    out[c] = std::log(priors_[c]) - 0.5 * ((2.0 * std::numbers::pi * var).log() + diff.square() / var).sum();
  }
  return out;
}

int GaussianNaiveBayes::predict_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return argmax_lowest(log_posterior(x));
}

// ---------------------------------------------------------------------------

std::unique_ptr<Model> make_model(const ClassifierSpec& spec) {
  spec.validate();
  auto as_int = [&spec](const char* key, double fallback) { return static_cast<int>(spec.param(key, fallback)); };
  switch (spec.algorithm) {
  case Algorithm::random_forest:
    return std::make_unique<RandomForest>(RandomForest::Options{
        as_int("trees", 100), as_int("max_features", 0), as_int("max_depth", 0), as_int("min_leaf", 1), spec.seed});
  case Algorithm::decision_tree:
    return std::make_unique<DecisionTree>(DecisionTree::Options{
        as_int("max_features", 0), as_int("max_depth", 0), as_int("min_leaf", 1), spec.seed});
  case Algorithm::svm_linear:
    return std::make_unique<LinearSvm>(LinearSvm::Options{
        as_int("epochs", 200), spec.param("learning_rate", 0.01), spec.param("lambda", 1e-4), spec.seed});
  case Algorithm::knn:
    return std::make_unique<KNearestNeighbors>(as_int("k", 5));
  case Algorithm::naive_bayes:
    return std::make_unique<GaussianNaiveBayes>(spec.param("var_smoothing", 1e-9));
  }
  throw ValidationError("unknown classifier");
}

std::unique_ptr<Model> fit(const ClassifierSpec& spec, const Dataset& train) {
  train.validate();
  auto model = make_model(spec);
  model->fit(train.features, train.labels);
  return model;
}

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> truth, int n_classes) {
  if (predictions.size() != truth.size()) throw ValidationError("confusion: predictions and truth differ in length");
  ConfusionMatrix cm;
  cm.counts = Eigen::MatrixXi::Zero(n_classes, n_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i], p = predictions[i];
    if (t < 0 || t >= n_classes || p < 0 || p >= n_classes)
      throw ValidationError("confusion: label outside the class set (index " + std::to_string(i) + ")");
    ++cm.counts(t, p);
  }
  cm.recall = Eigen::VectorXd::Zero(n_classes);
  for (int c = 0; c < n_classes; ++c) {
    const int row = cm.counts.row(c).sum();
    if (row > 0) cm.recall[c] = static_cast<double>(cm.counts(c, c)) / row;
  }
  const long long total = cm.total();
  cm.accuracy = total > 0 ? static_cast<double>(cm.counts.trace()) / static_cast<double>(total) : 0.0;
  return cm;
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("cross-validation needs at least 2 folds");
  int n_classes = 0;
  for (int l : labels) n_classes = std::max(n_classes, l + 1);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) members[static_cast<std::size_t>(labels[i])].push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<int> fold_of(labels.size(), 0);
  std::size_t next = 0;
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& rows = members[c];
    if (rows.empty()) continue;
    if (rows.size() < static_cast<std::size_t>(folds))
      throw ValidationError("class " + describe_class(c) + " has " + std::to_string(rows.size()) +
                            " rows; stratified " + std::to_string(folds) + "-fold CV needs at least " +
                            std::to_string(folds));
    std::shuffle(rows.begin(), rows.end(), rng);
    for (auto r : rows) fold_of[r] = static_cast<int>(next++ % static_cast<std::size_t>(folds));
  }
  return fold_of;
}

std::unique_ptr<Model> fit_fold(const Dataset& data, std::span<const int> fold_of, int fold,
                                const ModelFactory& factory, const CvOptions& options,
                                NormalizationParams* normalization) {
  std::vector<Eigen::Index> train_rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] != fold) train_rows.push_back(static_cast<Eigen::Index>(i));
  Dataset train = data.select_rows(train_rows);
  if (options.smote)
    train = smote(train, options.smote_k, derive_seed(options.seed, "smote", static_cast<std::uint64_t>(fold)));
  NormalizationParams params;
  if (options.normalize) {
    params = fit_normalization(train.features);
    train.features = params.apply(train.features);
  } else {
    params.mean = Eigen::RowVectorXd::Zero(train.cols());
    params.std = Eigen::RowVectorXd::Ones(train.cols());
  }
  auto model = factory(derive_seed(options.seed, "fold", static_cast<std::uint64_t>(fold)));
  model->fit(train.features, train.labels);
  if (normalization) *normalization = std::move(params);
  return model;
}

CvResult cross_validate(const Dataset& data, const ModelFactory& factory, std::span<const int> fold_of,
                        const CvOptions& options) {
  data.validate();
  if (fold_of.size() != data.labels.size()) throw ValidationError("fold assignment length mismatch");
  CvResult result;
  std::vector<int> all_pred, all_truth;
  for (int f = 0; f < options.folds; ++f) {
    std::vector<Eigen::Index> test_rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
      if (fold_of[i] == f) test_rows.push_back(static_cast<Eigen::Index>(i));
    if (test_rows.empty()) continue;
    NormalizationParams params;
    const auto model = fit_fold(data, fold_of, f, factory, options, &params);
    const Dataset test = data.select_rows(test_rows);
    Eigen::MatrixXd X = params.apply(test.features);
    const auto pred = model->predict_rows(X);
    int correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == test.labels[i];
    result.fold_accuracies.push_back(static_cast<double>(correct) / static_cast<double>(pred.size()));
    all_pred.insert(all_pred.end(), pred.begin(), pred.end());
    all_truth.insert(all_truth.end(), test.labels.begin(), test.labels.end());
  }
  const auto k = static_cast<double>(result.fold_accuracies.size());
  if (k == 0) throw RuntimeError("cross-validation produced no folds");
  result.mean_accuracy = std::accumulate(result.fold_accuracies.begin(), result.fold_accuracies.end(), 0.0) / k;
  if (k > 1) {
    double ss = 0.0;
    for (double a : result.fold_accuracies) ss += (a - result.mean_accuracy) * (a - result.mean_accuracy);
    result.ci95 = 1.96 * std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
  }
  int n_classes = kNumClasses;
  for (int l : data.labels) n_classes = std::max(n_classes, l + 1);
  result.confusion = confusion(all_pred, all_truth, n_classes);
  result.confusion.ci95 = result.ci95;
  return result;
}

CvResult cross_validate(const Dataset& data, const ModelFactory& factory, const CvOptions& options) {
  data.validate();
  const auto fold_of = stratified_folds(data.labels, options.folds, derive_seed(options.seed, "folds"));
  return cross_validate(data, factory, fold_of, options);
}

ModelFactory factory_for(const ClassifierSpec& spec) {
  spec.validate();
  return [spec](std::uint64_t fold_seed) {
    ClassifierSpec s = spec;
    s.seed = derive_seed(spec.seed ^ fold_seed, "model");
    return make_model(s);
  };
}

CvResult cross_validate(const Dataset& data, const ClassifierSpec& spec, const CvOptions& options) {
  return cross_validate(data, factory_for(spec), options);
}

} // namespace kehsim
