#include <doctest.h>

#include "kehsim/pipeline.hpp"

#include <cmath>
#include <random>
#include <set>

using namespace kehsim;

namespace {

SignalTrace trace_of(const Eigen::VectorXd& x, double rate = 100.0) {
  SignalTrace t;
  t.signal_id = "TEST";
  t.mode = Mode::bus;
  t.sample_rate = rate;
  t.values = x;
  return t;
}

Dataset labeled(const Eigen::MatrixXd& x, std::vector<int> labels) {
  Dataset d;
  d.features = x;
  d.labels = std::move(labels);
  for (Eigen::Index j = 0; j < x.cols(); ++j) d.names.push_back("f" + std::to_string(j));
  return d;
}

// Classes separable along `informative` columns; the rest is noise of the same spread.
Dataset planted(int per_class, int classes, int informative, int noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  const int d = informative + noise;
  Eigen::MatrixXd x(per_class * classes, d);
  std::vector<int> labels;
  for (int c = 0; c < classes; ++c)
    for (int i = 0; i < per_class; ++i) {
      const int r = c * per_class + i;
      for (int j = 0; j < d; ++j) x(r, j) = 2.0 * n01(rng);
      for (int j = 0; j < informative; ++j) x(r, j) = 3.0 * ((c >> j) & 1) + 0.3 * n01(rng);
      labels.push_back(c);
    }
  return labeled(x, labels);
}

} // namespace

TEST_CASE("normalization") {
  Eigen::MatrixXd x(3, 2);
  x << 1, 5, 2, 5, 3, 5;
  const Dataset n = normalize(labeled(x, {0, 1, 0}));
  CHECK(n.features(0, 0) == doctest::Approx(-1.2247).epsilon(1e-4));
  CHECK(n.features(1, 0) == doctest::Approx(0.0));
  CHECK(n.features(2, 0) == doctest::Approx(1.2247).epsilon(1e-4));
  CHECK(n.features.col(1).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(n.normalization);
  CHECK(n.normalization->flagged == std::vector<int>{1});

  const Dataset twice = normalize(n);
  CHECK((twice.features - n.features).cwiseAbs().maxCoeff() <= 1e-9);

  // Stored parameters apply to held-out rows without refitting.
  Eigen::MatrixXd held(1, 2);
  held << 4, 7;
  const Eigen::MatrixXd applied = n.normalization->apply(held);
  CHECK(applied(0, 0) == doctest::Approx((4.0 - 2.0) / std::sqrt(2.0 / 3.0)));
  CHECK(applied(0, 1) == 0.0);
  CHECK_THROWS_AS(normalize(labeled(Eigen::MatrixXd::Ones(1, 2), {0})), ValidationError);
}

TEST_CASE("smote balances classes with convex combinations") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::MatrixXd x(14, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n01(rng);
  std::vector<int> labels(10, 0);
  labels.insert(labels.end(), 4, 1);
  const Dataset in = labeled(x, labels);
  const Dataset out = smote(in, 5, 9);
  CHECK(out.class_counts() == std::vector<int>{10, 10});
  CHECK(out.features.topRows(14) == in.features);

  // Each synthetic row lies on a segment between two class-1 originals.
  for (Eigen::Index r = 14; r < out.rows(); ++r) {
    CHECK(out.labels[static_cast<std::size_t>(r)] == 1);
    bool on_segment = false;
    for (Eigen::Index a = 10; a < 14 && !on_segment; ++a)
      for (Eigen::Index b = 10; b < 14 && !on_segment; ++b) {
        if (a == b) continue;
        const Eigen::RowVectorXd ab = in.features.row(b) - in.features.row(a);
        const double u = (out.features.row(r) - in.features.row(a)).dot(ab) / ab.squaredNorm();
        on_segment = u >= -1e-12 && u <= 1.0 + 1e-12 &&
                     (in.features.row(a) + u * ab - out.features.row(r)).norm() <= 1e-9;
      }
    CHECK(on_segment);
  }
  CHECK(smote(in, 5, 9).features == out.features);
}

TEST_CASE("smote on a two-point minority stays on the diagonal") {
  Eigen::MatrixXd x(7, 2);
  x << 5, 0, 6, 0, 7, 0, 8, 0, 9, 0, 0, 0, 1, 1;
  const Dataset out = smote(labeled(x, {0, 0, 0, 0, 0, 1, 1}), 1, 3);
  CHECK(out.class_counts() == std::vector<int>{5, 5});
  for (Eigen::Index r = 7; r < out.rows(); ++r) {
    CHECK(out.features(r, 0) == doctest::Approx(out.features(r, 1)));
    CHECK(out.features(r, 0) >= 0.0);
    CHECK(out.features(r, 0) <= 1.0);
  }
}

TEST_CASE("smote edge cases") {
  Eigen::MatrixXd x(4, 1);
  x << 0, 1, 2, 3;
  const Dataset balanced = labeled(x, {0, 0, 1, 1});
  CHECK(smote(balanced, 5, 1).features == balanced.features);
  try {
    smote(labeled(x, {0, 0, 0, 1}), 5, 1);
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("train") != std::string::npos);
  }
}

TEST_CASE("stop removal") {
  SUBCASE("a silent gap shrinks the record by the gap") {
    Eigen::VectorXd x(4000);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::sin(0.7 * static_cast<double>(i)) + 2.0;
    x.segment(1500, 1000).setZero(); // 10 s gap
    const auto out = remove_stops(trace_of(x));
    CHECK(std::abs(out.size() - 3000) <= 100);
  }
  SUBCASE("a constant-zero record is entirely stationary") {
    try {
      remove_stops(trace_of(Eigen::VectorXd::Zero(1000)));
      FAIL("expected an error");
    } catch (const RuntimeError& e) {
      CHECK(std::string(e.what()).find("entirely stationary") != std::string::npos);
    }
  }
  SUBCASE("no quiet segment: identity") {
    Eigen::VectorXd x(1000);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = 1.0 + 0.1 * std::sin(0.3 * static_cast<double>(i));
    CHECK(remove_stops(trace_of(x)).values == x);
  }
  SUBCASE("sensing records keep codes and values together") {
    SensingRecord rec;
    rec.signal_id = "CB-C";
    rec.codes = Eigen::VectorXi::LinSpaced(300, 1, 300);
    rec.engineering_values = rec.codes.cast<double>();
    rec.engineering_values.segment(100, 100).setZero();
    rec.codes.segment(100, 100).setZero();
    const auto out = remove_stops(rec);
    CHECK(out.size() == 200);
    CHECK((out.codes.cast<double>() - out.engineering_values).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("window counts") {
  CHECK(make_windows(trace_of(Eigen::VectorXd::Ones(6000)), 1.0).size() == 119);
  CHECK(make_windows(trace_of(Eigen::VectorXd::Ones(1000)), 10.0).size() == 1);
  CHECK_THROWS_AS(make_windows(trace_of(Eigen::VectorXd::Ones(990)), 10.0), ValidationError);
  for (int n : {250, 777, 6000})
    for (double w : {1.0, 2.0, 3.0, 5.0})
      if (n >= w * 100)
        CHECK(static_cast<long>(make_windows(trace_of(Eigen::VectorXd::Ones(n)), w).size()) ==
              (n - static_cast<long>(w * 100)) / static_cast<long>(w * 50) + 1);
}

TEST_CASE("window coverage when the record is aligned to the hop") {
  for (int windows_s : {1, 2, 4, 10}) {
    const int w = windows_s * 100;
    const int n = w + 7 * (w / 2);
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, 0, n - 1);
    std::vector<int> hits(static_cast<std::size_t>(n), 0);
    for (const auto& win : make_windows(trace_of(x), windows_s)) {
      CHECK(win.values.rows() == w);
      for (Eigen::Index i = 0; i < win.values.rows(); ++i) ++hits[static_cast<std::size_t>(win.values(i, 0))];
    }
    CHECK(*std::min_element(hits.begin(), hits.end()) >= 1);
    CHECK(*std::max_element(hits.begin(), hits.end()) <= 2);
  }
}

TEST_CASE("rfe recovers planted features") {
  const Dataset data = planted(30, 4, 2, 8, 17);
  RfeOptions o;
  o.seed = 5;
  const auto r = rfe(data, o);
  int noise = 0;
  for (int c : r.selected)
    if (c >= 2) ++noise;
  CHECK(noise <= 2);
  CHECK(std::count(r.selected.begin(), r.selected.end(), 0) == 1);
  CHECK(std::count(r.selected.begin(), r.selected.end(), 1) == 1);
  CHECK(r.cv_scores.size() == 10);
  CHECK(r.cv_scores.front().first == 10);
  CHECK(r.cv_scores.back().first == 1);
  CHECK(r.elimination_order.size() == 9);

  // Brute-force check with an independently seeded forest.
  const ClassifierSpec spec{Algorithm::random_forest, {{"trees", 50}}, 77};
  const CvOptions cv{10, 3};
  const double full = cross_validate(data, spec, cv).mean_accuracy;
  const double chosen = cross_validate(data.select_columns(r.selected), spec, cv).mean_accuracy;
  CHECK(chosen >= full - 0.02);
}

TEST_CASE("rfe on one feature returns it") {
  const Dataset data = planted(12, 2, 1, 0, 3);
  const auto r = rfe(data, {});
  CHECK(r.selected == std::vector<int>{0});
  REQUIRE(r.cv_scores.size() == 1);
  CHECK(r.cv_scores.front().first == 1);
}

TEST_CASE("rfe keeps at most one of each duplicate pair") {
  int clean = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Dataset base = planted(15, 4, 2, 3, 100 + seed);
    // Columns: x0, x0', x1, x1', noise×3.
    Eigen::MatrixXd x(base.rows(), 7);
    x << base.features.col(0), base.features.col(0), base.features.col(1), base.features.col(1),
        base.features.rightCols(3);
    const Dataset data = labeled(x, base.labels);
    RfeOptions o;
    o.seed = seed;
    const auto r = rfe(data, o);
    const std::set<int> s(r.selected.begin(), r.selected.end());
    if (!(s.count(0) && s.count(1)) && !(s.count(2) && s.count(3))) ++clean;
  }
  CHECK(clean >= 18);
}

TEST_CASE("rfe rejects degenerate data") {
  CHECK_THROWS_AS(rfe(labeled(Eigen::MatrixXd::Random(20, 3), std::vector<int>(20, 0)), {}), ValidationError);
  CHECK_THROWS_AS(rfe(labeled(Eigen::MatrixXd(20, 0), std::vector<int>(20, 0)), {}), ValidationError);
}

TEST_CASE("dataset assembly") {
  Window w;
  w.values = Eigen::MatrixXd::Random(100, 1);
  w.mode = Mode::ferry;
  auto fv = extract_features(w);
  CHECK(fv.label == Mode::ferry);
  const Dataset d = build_dataset({fv, fv});
  CHECK(d.rows() == 2);
  CHECK(d.cols() == 42);
  CHECK(d.labels == std::vector<int>{0, 0});
  fv.label = Mode::unlabeled;
  CHECK_THROWS_AS(build_dataset({fv}), ValidationError);
}
