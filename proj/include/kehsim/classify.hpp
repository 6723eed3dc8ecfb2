#pragma once

#include "kehsim/common.hpp"
#include "kehsim/dataset.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kehsim {

enum class Algorithm { random_forest, decision_tree, svm_linear, knn, naive_bayes };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::random_forest, Algorithm::decision_tree,
                                               Algorithm::svm_linear, Algorithm::knn, Algorithm::naive_bayes};

std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);

/// Algorithm plus hyperparameters. Recognised keys (defaults):
///   random_forest: trees (100), max_features (0 = floor(sqrt(d))), max_depth (0 = unlimited), min_leaf (1)
///   decision_tree: max_features (0 = all), max_depth (0), min_leaf (1)
///   svm_linear:    epochs (200), learning_rate (0.01), lambda (1e-4)
///   knn:           k (5)
///   naive_bayes:   var_smoothing (1e-9)
struct ClassifierSpec {
  Algorithm algorithm = Algorithm::random_forest;
  std::map<std::string, double> hyperparams;
  std::uint64_t seed = 0;

  double param(const std::string& key, double fallback) const;
  void validate() const;
};

/// Trained classifier. Ties are always broken towards the lowest class index.
class Model {
public:
  virtual ~Model() = default;

  /// Labels are class indices >= 0; at least two distinct classes required.
  void fit(const Eigen::MatrixXd& features, std::span<const int> labels);
  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// One prediction per row.
  std::vector<int> predict_rows(const Eigen::MatrixXd& features) const;

  Eigen::Index n_features() const { return n_features_; }
  int n_classes() const { return n_classes_; }

protected:
  virtual void fit_impl(const Eigen::MatrixXd& features, std::span<const int> labels) = 0;
  virtual int predict_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;

  Eigen::Index n_features_ = 0;
  int n_classes_ = 0;
};

/// Index of the largest score, lowest index on ties.
int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& scores);

/// Quantile bin edges used by the tree learners. Features with at most 256
/// distinct training values split exactly between neighbouring values.
struct FeatureBins {
  static constexpr int kMaxBins = 256;
  std::vector<std::vector<double>> thresholds; ///< per feature, ascending
  /// Smallest and largest training value in each bin, per feature.
  std::vector<std::vector<double>> lower, upper;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> codes;

  static FeatureBins fit(const Eigen::MatrixXd& features);
};

class DecisionTree : public Model {
public:
  struct Options {
    int max_features = 0; ///< 0 = all
    int max_depth = 0;    ///< 0 = unlimited
    int min_leaf = 1;
    std::uint64_t seed = 0;
  };
  explicit DecisionTree(Options options) : options_(options) {}

  /// Grows on the given rows of pre-binned data. `weights` (indexed by row, empty
  /// = all ones) counts each row that many times, as a bootstrap multiplicity.
  void grow(const FeatureBins& bins, std::span<const int> labels, std::vector<Eigen::Index> rows, int n_classes,
            Eigen::Index n_features, std::span<const int> weights = {});
  /// Total Gini impurity decrease per feature, weighted by node size.
  const Eigen::VectorXd& importances() const { return importance_; }
  std::size_t node_count() const { return nodes_.size(); }

protected:
  void fit_impl(const Eigen::MatrixXd& features, std::span<const int> labels) override;
  int predict_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;

private:
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;
  };
  Options options_;
  std::vector<Node> nodes_;
  Eigen::VectorXd importance_;
};

class RandomForest : public Model {
public:
  struct Options {
    int trees = 100;
    int max_features = 0; ///< 0 = floor(sqrt(d))
    int max_depth = 0;
    int min_leaf = 1;
    std::uint64_t seed = 0;
  };
  explicit RandomForest(Options options) : options_(options) {}

  /// Mean over trees of per-tree normalised impurity decrease.
  const Eigen::VectorXd& feature_importances() const { return importance_; }

protected:
  void fit_impl(const Eigen::MatrixXd& features, std::span<const int> labels) override;
  int predict_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;

private:
  Options options_;
  std::vector<DecisionTree> trees_;
  Eigen::VectorXd importance_;
};

/// One-vs-rest linear SVM, hinge loss, L2 penalty, fixed-step stochastic subgradient descent.
class LinearSvm : public Model {
public:
  struct Options {
    int epochs = 200;
    double learning_rate = 0.01;
    double lambda = 1e-4;
    std::uint64_t seed = 0;
  };
  explicit LinearSvm(Options options) : options_(options) {}
  Eigen::VectorXd decision_scores(const Eigen::Ref<const Eigen::VectorXd>& x) const;

protected:
  void fit_impl(const Eigen::MatrixXd& features, std::span<const int> labels) override;
  int predict_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;

private:
  Options options_;
  Eigen::MatrixXd weights_; ///< classes × features
  Eigen::VectorXd bias_;
  std::vector<bool> present_;
};

class KNearestNeighbors : public Model {
public:
  explicit KNearestNeighbors(int k) : k_(k) {}

protected:
  void fit_impl(const Eigen::MatrixXd& features, std::span<const int> labels) override;
  int predict_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;

private:
  int k_;
  Eigen::MatrixXd train_;
  std::vector<int> labels_;
};

class GaussianNaiveBayes : public Model {
public:
  explicit GaussianNaiveBayes(double var_smoothing = 1e-9) : var_smoothing_(var_smoothing) {}

  const Eigen::VectorXd& priors() const { return priors_; }
  /// Replaces the fitted class priors (need not sum to one).
  void set_priors(const Eigen::VectorXd& priors);
  Eigen::VectorXd log_posterior(const Eigen::Ref<const Eigen::VectorXd>& x) const;

protected:
  void fit_impl(const Eigen::MatrixXd& features, std::span<const int> labels) override;
  int predict_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;

private:
  double var_smoothing_;
  Eigen::MatrixXd means_;     ///< classes × features
  Eigen::MatrixXd variances_; ///< classes × features
  Eigen::VectorXd priors_;
};

std::unique_ptr<Model> make_model(const ClassifierSpec& spec);
std::unique_ptr<Model> fit(const ClassifierSpec& spec, const Dataset& train);

/// Rows = truth, columns = predicted.
struct ConfusionMatrix {
  Eigen::MatrixXi counts;
  Eigen::VectorXd recall; ///< per class; 0 for classes absent from truth
  double accuracy = 0.0;
  double ci95 = 0.0;      ///< half-width across folds, when aggregated by cross-validation

  long long total() const { return counts.sum(); }
};

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> truth,
                          int n_classes = kNumClasses);

struct CvOptions {
  int folds = 10;
  std::uint64_t seed = 0;
  bool smote = true;
  int smote_k = 5;
  bool normalize = true;
};

struct CvResult {
  double mean_accuracy = 0.0;
  double ci95 = 0.0; ///< 1.96 · sample std of fold accuracies / sqrt(folds)
  std::vector<double> fold_accuracies;
  ConfusionMatrix confusion;
};

using ModelFactory = std::function<std::unique_ptr<Model>(std::uint64_t fold_seed)>;

/// Stratified fold index per row: each class is shuffled and dealt round-robin.
std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

/// Fits on every row whose fold differs from `fold`. SMOTE and normalization are
/// fitted on those rows only; `normalization` receives the fitted parameters.
std::unique_ptr<Model> fit_fold(const Dataset& data, std::span<const int> fold_of, int fold,
                                const ModelFactory& factory, const CvOptions& options,
                                NormalizationParams* normalization = nullptr);

CvResult cross_validate(const Dataset& data, const ModelFactory& factory, std::span<const int> fold_of,
                        const CvOptions& options);
CvResult cross_validate(const Dataset& data, const ModelFactory& factory, const CvOptions& options);
CvResult cross_validate(const Dataset& data, const ClassifierSpec& spec, const CvOptions& options);

ModelFactory factory_for(const ClassifierSpec& spec);

} // namespace kehsim
