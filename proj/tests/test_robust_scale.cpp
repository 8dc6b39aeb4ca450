#include <doctest.h>

#include <random>
#include <vector>

#include "oracles.hpp"
#include "twoblock/error.hpp"
#include "twoblock/robust_scale.hpp"

using namespace twoblock;

namespace {

Matrix column(std::initializer_list<double> values) {
  Matrix X(static_cast<Index>(values.size()), 1);
  Index i = 0;
  for (double v : values) X(i++, 0) = v;
  return X;
}

Matrix random_matrix(Index n, Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix X(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) X(i, j) = normal(rng);
  return X;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("column_location median and mean") {
  CHECK(column_location(column({1, 2, 3}), CenterKind::median)(0) == 2.0);
  CHECK(column_location(column({1, 2, 3, 100}), CenterKind::median)(0) == 2.5);
  CHECK(column_location(column({1, 2, 3, 100}), CenterKind::mean)(0) == 26.5);
  CHECK_THROWS_AS(column_location(Matrix(0, 2), CenterKind::median), Error);
}

TEST_CASE("column_mad raw and consistent") {
  CHECK(column_mad(column({1, 2, 3, 4, 5}), false)(0) == 1.0);
  CHECK(column_mad(column({1, 2, 3, 4, 5}), true)(0) == doctest::Approx(1.4826).epsilon(1e-15));
}

TEST_CASE("zero MAD names the column") {
  Matrix X(3, 2);
  X << 1, 7, 2, 7, 3, 7;
  try {
    column_mad(X);
    FAIL("expected ZeroScaleError");
  } catch (const ZeroScaleError& e) {
    CHECK(e.column() == 1);
    CHECK(std::string(e.what()).find("zero scale") != std::string::npos);
  }
}

TEST_CASE("column_mad shift invariance and scale equivariance") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Matrix X = random_matrix(15, 3, seed);
    const Vector base = column_mad(X);
    Matrix shifted = X;
    shifted.col(1).array() += 123.0;
    CHECK((column_mad(shifted) - base).cwiseAbs().maxCoeff() < 1e-12);
    Matrix scaled = X;
    scaled.col(2) *= 4.0;
    CHECK(column_mad(scaled)(2) == doctest::Approx(4.0 * base(2)).epsilon(1e-14));
  }
}

TEST_CASE("MAD after replacing one value") {
  // Largest value pushed further out: exactly unchanged.
  CHECK(column_mad(column({1, 2, 3, 4, 1000}))(0) == column_mad(column({1, 2, 3, 4, 5}))(0));

  // Any single replacement keeps the raw MAD bounded by the original range.
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 5 + trial % 30;
    Matrix X = random_matrix(n, 1, 100 + trial);
    const double range = X.maxCoeff() - X.minCoeff();
    X(static_cast<Index>(rng() % n), 0) = 1e12;
    CHECK(column_mad(X, false)(0) <= range);
  }
}

TEST_CASE("l1_median examples") {
  Matrix one(1, 2);
  one << 3, -1;
  CHECK(l1_median(one) == Vector{{3.0, -1.0}});

  Matrix cross(4, 2);
  cross << 1, 0, -1, 0, 0, 1, 0, -1;
  CHECK(l1_median(cross).norm() < 1e-8);

  const std::vector<double> values{1, 2, 3, 100};
  const double scanned = oracle::l1_grid_scan(values, 0.0, 10.0, 100000);
  const double got = l1_median(column({1, 2, 3, 100}))(0);
  // Any point in [2, 3] minimises the 1-D objective; both land on the midpoint side.
  CHECK(got == doctest::Approx(2.5).epsilon(1e-8));
  CHECK(oracle::l1_objective(column({1, 2, 3, 100}), Vector::Constant(1, got)) ==
        doctest::Approx(oracle::l1_objective(column({1, 2, 3, 100}), Vector::Constant(1, scanned))));
}

TEST_CASE("l1_median minimises the objective and is translation equivariant") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const Matrix X = random_matrix(30, 3, seed);
    const Vector m = l1_median(X);
    const double best = oracle::l1_objective(X, m);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1e-3);
    for (int k = 0; k < 20; ++k) {
      Vector probe = m;
      for (Index j = 0; j < 3; ++j) probe(j) += normal(rng);
      CHECK(oracle::l1_objective(X, probe) >= best - 1e-9);
    }
    const Vector shift{{5.0, -2.0, 0.25}};
    const Matrix moved = X.rowwise() + shift.transpose();
    CHECK((l1_median(moved) - (m + shift)).norm() < 1e-6);
  }
}

TEST_CASE("l1_median at a data point") {
  // The centre row is the spatial median; the iteration must not stall on it.
  Matrix X(5, 2);
  X << 0, 0, 1, 0, -1, 0, 0, 1, 0, -1;
  CHECK(l1_median(X).norm() < 1e-8);
}

TEST_CASE("l1_median reports non-convergence with the last iterate") {
  const Matrix X = random_matrix(40, 4, 3);
  try {
    l1_median(X, 1e-15, 2);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_iterate().size() == 4);
  }
}

TEST_CASE("tau2 matches the straight transcription") {
  const Vector x{{1.0, 2.0, 3.0, 4.0, 5.0}};
  CHECK(tau2_scale(x) == doctest::Approx(oracle::tau2_scale(to_std(x))).epsilon(1e-9));
  // Frozen from the oracle.
  CHECK(tau2_scale(x) == doctest::Approx(1.4177572248573451).epsilon(1e-9));

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Matrix X = random_matrix(12 + static_cast<Index>(seed), 1, seed);
    CHECK(tau2_scale(X.col(0)) == doctest::Approx(oracle::tau2_scale(to_std(X.col(0)))).epsilon(1e-9));
  }
}

TEST_CASE("tau2 is consistent at the normal") {
  std::mt19937_64 rng(20240517);
  const double sigma = 2.5;
  std::normal_distribution<double> normal(0.0, sigma);
  Vector x(10000);
  for (Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
  const double s = tau2_scale(x);
  CHECK(s >= 0.95 * sigma);
  CHECK(s <= 1.05 * sigma);
}

TEST_CASE("tau2 with one gross outlier") {
  const double clean = tau2_scale(Vector{{1.0, 2.0, 3.0, 4.0, 5.0}});
  const double dirty = tau2_scale(Vector{{1.0, 2.0, 3.0, 4.0, 1000.0}});
  const Matrix c = column({1, 2, 3, 4, 5});
  const Matrix d = column({1, 2, 3, 4, 1000});
  const double std_ratio = column_std(d)(0) / column_std(c)(0);
  CHECK(std_ratio > 100.0);
  // Frozen from the oracle: the clipped rho caps the outlier's contribution.
  CHECK(dirty / clean == doctest::Approx(oracle::tau2_scale({1, 2, 3, 4, 1000}) /
                                         oracle::tau2_scale({1, 2, 3, 4, 5})));
  CHECK(dirty / clean < 2.0);
}

TEST_CASE("tau2 changes by less than half under one replacement, n >= 30") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const Index n = 30 + trial % 40;
    Matrix X = random_matrix(n, 1, 500 + trial);
    const double before = tau2_scale(X.col(0));
    X(static_cast<Index>(rng() % n), 0) = 1e9;
    const double after = tau2_scale(X.col(0));
    CHECK(std::abs(after / before - 1.0) < 0.5);
  }
}

TEST_CASE("tau2 rejects constant input") {
  CHECK_THROWS_AS(tau2_scale(Vector::Constant(6, 3.0)), ZeroScaleError);
  CHECK_THROWS_AS(tau2_scale(Vector::Constant(1, 3.0)), Error);
}

TEST_CASE("fit_preprocess examples") {
  Matrix X(3, 2);
  X << 1, 10, 2, 20, 3, 30;
  const PreprocessParams p = fit_preprocess(X, CenterKind::mean, ScaleKind::std);
  CHECK(p.centers == Vector{{2.0, 20.0}});

  const PreprocessParams none = fit_preprocess(X, CenterKind::mean, ScaleKind::none);
  CHECK(none.scales == Vector::Ones(2));
}

TEST_CASE("median/mad centres resist 20% shifted rows") {
  const Matrix clean = random_matrix(160, 4, 42);
  Matrix dirty(200, 4);
  dirty.topRows(160) = clean;
  dirty.middleRows(160, 20) = random_matrix(20, 4, 43).array() + 10.0;
  dirty.bottomRows(20) = random_matrix(20, 4, 44).array() - 10.0;
  const PreprocessParams p = fit_preprocess(dirty, CenterKind::median, ScaleKind::mad);
  const Vector clean_medians = column_location(clean, CenterKind::median);
  CHECK((p.centers - clean_medians).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("apply and invert round trip for every estimator pair") {
  const CenterKind centers[] = {CenterKind::mean, CenterKind::median, CenterKind::l1median};
  const ScaleKind scales[] = {ScaleKind::none, ScaleKind::std, ScaleKind::mad, ScaleKind::tau2};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix X = random_matrix(9, 3, seed) * 7.0;
    for (CenterKind c : centers) {
      for (ScaleKind s : scales) {
        const PreprocessParams p = fit_preprocess(X, c, s);
        const Matrix back = invert_preprocess(apply_preprocess(X, p), p);
        CHECK((back - X).norm() <= 1e-10 * X.norm());
      }
    }
  }
}

TEST_CASE("apply_preprocess plumbing") {
  PreprocessParams identity;
  identity.centers = Vector::Zero(3);
  identity.scales = Vector::Ones(3);
  const Matrix X = random_matrix(4, 3, 5);
  CHECK(apply_preprocess(X, identity) == X);

  const Matrix row = X.topRows(1);
  const Matrix out = apply_preprocess(row, fit_preprocess(X, CenterKind::mean, ScaleKind::std));
  CHECK(out.rows() == 1);
  CHECK(out.cols() == 3);

  CHECK_THROWS_AS(apply_preprocess(random_matrix(4, 2, 1), identity), Error);
  CHECK_THROWS_AS(invert_preprocess(random_matrix(4, 2, 1), identity), Error);
}

TEST_CASE("estimator names round trip") {
  for (auto c : {CenterKind::mean, CenterKind::median, CenterKind::l1median})
    CHECK(parse_center_kind(to_string(c)) == c);
  for (auto s : {ScaleKind::none, ScaleKind::std, ScaleKind::mad, ScaleKind::tau2})
    CHECK(parse_scale_kind(to_string(s)) == s);
  CHECK_THROWS_AS(parse_center_kind("mode"), Error);
}
