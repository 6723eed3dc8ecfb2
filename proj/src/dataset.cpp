#include "kehsim/dataset.hpp"

#include "kehsim/common.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

namespace kehsim {

Eigen::MatrixXd NormalizationParams::apply(const Eigen::MatrixXd& features) const {
  if (features.cols() != mean.size())
    throw ValidationError("normalization expects " + std::to_string(mean.size()) + " columns, got " +
                          std::to_string(features.cols()));
  Eigen::MatrixXd out = (features.rowwise() - mean).array().rowwise() / std.array();
  // Constant training columns carry nothing; held-out rows must not leak an offset through them.
  for (int j : flagged) out.col(j).setZero();
  return out;
}

void Dataset::validate() const {
  if (static_cast<Eigen::Index>(labels.size()) != features.rows())
    throw ValidationError("dataset has " + std::to_string(features.rows()) + " rows but " +
                          std::to_string(labels.size()) + " labels");
  if (!names.empty() && static_cast<Eigen::Index>(names.size()) != features.cols())
    throw ValidationError("dataset feature-name count does not match column count");
  for (int l : labels)
    if (l < 0) throw ValidationError("dataset labels must be non-negative class indices");
  if (!features.allFinite()) throw ValidationError("dataset contains non-finite features");
}

std::vector<int> Dataset::class_counts(int min_classes) const {
  int n = min_classes;
  for (int l : labels) n = std::max(n, l + 1);
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

Dataset Dataset::select_rows(std::span<const Eigen::Index> rows) const {
  Dataset out;
  out.names = names;
  out.normalization = normalization;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
    out.labels.push_back(labels[static_cast<std::size_t>(rows[i])]);
  }
  return out;
}

Dataset Dataset::select_columns(std::span<const int> columns) const {
  Dataset out;
  out.labels = labels;
  out.features.resize(rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.features.col(static_cast<Eigen::Index>(j)) = features.col(columns[j]);
    if (!names.empty()) out.names.push_back(names[static_cast<std::size_t>(columns[j])]);
  }
  return out;
}

NormalizationParams fit_normalization(const Eigen::MatrixXd& features) {
  if (features.rows() < 2) throw ValidationError("normalization needs at least 2 rows");
  NormalizationParams p;
  p.mean = features.colwise().mean();
  p.std.resize(features.cols());
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const double var = (features.col(j).array() - p.mean[j]).square().mean();
    const double sd = std::sqrt(var);
    const double scale = features.col(j).cwiseAbs().maxCoeff();
    if (!(sd > 1e-12 * std::max(scale, 1e-300))) {
      p.std[j] = 1.0;
      p.flagged.push_back(static_cast<int>(j));
    } else {
      p.std[j] = sd;
    }
  }
  return p;
}

Dataset normalize(const Dataset& data) {
  data.validate();
  Dataset out = data;
  NormalizationParams params = fit_normalization(data.features);
  out.features = params.apply(data.features);
  // Flagged columns are exactly zero rather than rounding residue.
  for (int j : params.flagged) out.features.col(j).setZero();
  out.normalization = std::move(params);
  return out;
}

Dataset smote(const Dataset& data, int k, std::uint64_t seed) {
  data.validate();
  if (k < 1) throw ValidationError("SMOTE k must be >= 1");
  const auto counts = data.class_counts();
  const int majority = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());

  std::vector<std::vector<Eigen::Index>> members(counts.size());
  for (Eigen::Index i = 0; i < data.rows(); ++i) members[static_cast<std::size_t>(data.labels[i])].push_back(i);

  Dataset out = data;
  std::vector<Eigen::VectorXd> synthetic;
  std::vector<int> synthetic_labels;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t c = 0; c < counts.size(); ++c) {
    const int have = counts[c];
    if (have == 0 || have == majority) continue;
    if (have < 2) throw ValidationError("SMOTE: class " + describe_class(c) + " has a single sample; need at least 2");
    const auto& rows = members[c];
    const int kk = std::min<int>(k, have - 1);
    std::map<Eigen::Index, std::vector<Eigen::Index>> neighbours; // lazily filled

    for (int s = 0; s < majority - have; ++s) {
      const auto base = rows[static_cast<std::size_t>(unit(rng) * have) % rows.size()];
      auto it = neighbours.find(base);
      if (it == neighbours.end()) {
        std::vector<std::pair<double, Eigen::Index>> dist;
        dist.reserve(rows.size());
        for (auto r : rows)
          if (r != base) dist.emplace_back((data.features.row(r) - data.features.row(base)).squaredNorm(), r);
        std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
        std::vector<Eigen::Index> nn;
        for (int j = 0; j < kk; ++j) nn.push_back(dist[static_cast<std::size_t>(j)].second);
        it = neighbours.emplace(base, std::move(nn)).first;
      }
      const auto& nn = it->second;
      const auto pick = nn[static_cast<std::size_t>(unit(rng) * kk) % nn.size()];
      const double u = unit(rng);
      const Eigen::VectorXd x = data.features.row(base).transpose();
      synthetic.push_back(x + u * (data.features.row(pick).transpose() - x));
      synthetic_labels.push_back(static_cast<int>(c));
    }
  }

  if (!synthetic.empty()) {
    const Eigen::Index start = out.rows();
    out.features.conservativeResize(start + static_cast<Eigen::Index>(synthetic.size()), Eigen::NoChange);
    for (std::size_t i = 0; i < synthetic.size(); ++i)
      out.features.row(start + static_cast<Eigen::Index>(i)) = synthetic[i].transpose();
    out.labels.insert(out.labels.end(), synthetic_labels.begin(), synthetic_labels.end());
  }
  return out;
}

} // namespace kehsim
