#include "twoblock/robust_scale.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "twoblock/error.hpp"

namespace twoblock {

std::string to_string(CenterKind kind) {
  switch (kind) {
    case CenterKind::mean: return "mean";
    case CenterKind::median: return "median";
    case CenterKind::l1median: return "l1median";
  }
  return "unknown";
}

std::string to_string(ScaleKind kind) {
  switch (kind) {
    case ScaleKind::none: return "none";
    case ScaleKind::std: return "std";
    case ScaleKind::mad: return "mad";
    case ScaleKind::tau2: return "tau2";
  }
  return "unknown";
}

CenterKind parse_center_kind(std::string_view name) {
  if (name == "mean") return CenterKind::mean;
  if (name == "median") return CenterKind::median;
  if (name == "l1median") return CenterKind::l1median;
  throw Error("unknown center kind '" + std::string(name) + "'");
}

ScaleKind parse_scale_kind(std::string_view name) {
  if (name == "none") return ScaleKind::none;
  if (name == "std") return ScaleKind::std;
  if (name == "mad") return ScaleKind::mad;
  if (name == "tau2") return ScaleKind::tau2;
  throw Error("unknown scale kind '" + std::string(name) + "'");
}

double median(const Vector& x) {
  if (x.size() == 0) throw Error("median of an empty vector");
  std::vector<double> v(x.data(), x.data() + x.size());
  const auto n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

namespace {

void require_rows(const Matrix& X, Index min_rows, const char* what) {
  if (X.rows() < min_rows || X.cols() == 0) {
    throw Error(std::string(what) + ": need at least " + std::to_string(min_rows) +
                " row(s) and one column, got " + std::to_string(X.rows()) + "x" +
                std::to_string(X.cols()));
  }
}

[[noreturn]] void zero_scale(const char* estimator, Index column) {
  throw ZeroScaleError(std::string("zero scale: ") + estimator + " of column " +
                           std::to_string(column) + " is 0",
                       column);
}

}  // namespace

Vector column_location(const Matrix& X, CenterKind kind) {
  require_rows(X, 1, "column_location");
  switch (kind) {
    case CenterKind::mean:
      return X.colwise().mean().transpose();
    case CenterKind::median: {
      Vector out(X.cols());
      for (Index j = 0; j < X.cols(); ++j) out(j) = median(X.col(j));
      return out;
    }
    case CenterKind::l1median:
      return l1_median(X);
  }
  throw Error("column_location: unknown center kind");
}

Vector column_mad(const Matrix& X, bool consistent) {
  require_rows(X, 2, "column_mad");
  Vector out(X.cols());
  for (Index j = 0; j < X.cols(); ++j) {
    const double med = median(X.col(j));
    const double mad = median((X.col(j).array() - med).abs().matrix());
    if (!(mad > 0.0)) zero_scale("MAD", j);
    out(j) = consistent ? kMadConsistency * mad : mad;
  }
  return out;
}

Vector column_std(const Matrix& X) {
  require_rows(X, 2, "column_std");
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const double denom = static_cast<double>(X.rows() - 1);
  Vector out = ((X.rowwise() - mean).colwise().squaredNorm() / denom).cwiseSqrt().transpose();
  for (Index j = 0; j < out.size(); ++j) {
    if (!(out(j) > 0.0)) zero_scale("standard deviation", j);
  }
  return out;
}

Vector l1_median(const Matrix& X, double tol, int max_iter) {
  require_rows(X, 1, "l1_median");
  if (!(tol > 0.0)) throw Error("l1_median: tol must be positive");
  if (X.rows() == 1) return X.row(0).transpose();

  Vector y = column_location(X, CenterKind::median);
  const double coincide = 1e-14 * std::max(1.0, X.cwiseAbs().maxCoeff());

  for (int iter = 0; iter < max_iter; ++iter) {
    Vector numerator = Vector::Zero(X.cols());
    Vector pull = Vector::Zero(X.cols());
    double inverse_sum = 0.0;
    int coincident = 0;
    for (Index i = 0; i < X.rows(); ++i) {
      const Vector diff = X.row(i).transpose() - y;
      const double dist = diff.norm();
      if (dist <= coincide) {
        ++coincident;
        continue;
      }
      numerator += X.row(i).transpose() / dist;
      pull += diff / dist;
      inverse_sum += 1.0 / dist;
    }
    if (inverse_sum == 0.0) return y;  // all rows coincide with y

    const Vector weiszfeld = numerator / inverse_sum;
    Vector next;
    if (coincident == 0) {
      next = weiszfeld;
    } else {
      const double r = pull.norm();
      if (r <= coincident) return y;  // the data point is the median
      const double eta_over_r = coincident / r;
      next = (1.0 - eta_over_r) * weiszfeld + eta_over_r * y;
    }
    const double step = (next - y).norm();
    y = std::move(next);
    if (step < tol) return y;
  }
  throw ConvergenceError("l1_median: no convergence within " + std::to_string(max_iter) +
                             " iterations",
                         y);
}

double tau2_scale(const Vector& x) {
  constexpr double c1 = 4.5;
  constexpr double c2 = 3.0;
  if (x.size() < 2) throw Error("tau2_scale: need at least 2 values");

  const double med = median(x);
  const double s0 = kMadConsistency * median((x.array() - med).abs().matrix());
  if (!(s0 > 0.0)) zero_scale("MAD", 0);

  const Eigen::ArrayXd u = (x.array() - med) / (c1 * s0);
  const Eigen::ArrayXd w = (u.abs() <= 1.0).select((1.0 - u.square()).square(), 0.0);
  const double mu = (w * x.array()).sum() / w.sum();

  const Eigen::ArrayXd r = ((x.array() - mu) / s0).square().min(c2 * c2);
  // E[min(Z^2, c^2)] for Z ~ N(0, 1).
  const double phi = std::exp(-0.5 * c2 * c2) / std::sqrt(2.0 * std::numbers::pi);
  const double upper_tail = 0.5 * std::erfc(c2 / std::numbers::sqrt2);
  const double expected_rho = (1.0 - 2.0 * upper_tail) - 2.0 * c2 * phi + 2.0 * c2 * c2 * upper_tail;

  return s0 * std::sqrt(r.mean() / expected_rho);
}

PreprocessParams fit_preprocess(const Matrix& X, CenterKind center_kind, ScaleKind scale_kind) {
  require_rows(X, 1, "fit_preprocess");
  PreprocessParams params;
  params.center_kind = center_kind;
  params.scale_kind = scale_kind;
  params.centers = column_location(X, center_kind);
  switch (scale_kind) {
    case ScaleKind::none:
      params.scales = Vector::Ones(X.cols());
      break;
    case ScaleKind::std:
      params.scales = column_std(X);
      break;
    case ScaleKind::mad:
      params.scales = column_mad(X, true);
      break;
    case ScaleKind::tau2:
      params.scales.resize(X.cols());
      for (Index j = 0; j < X.cols(); ++j) {
        try {
          params.scales(j) = tau2_scale(X.col(j));
        } catch (const ZeroScaleError&) {
          zero_scale("tau2 scale", j);
        }
      }
      break;
  }
  return params;
}

namespace {

void check_width(Index cols, const PreprocessParams& params) {
  if (cols != params.centers.size() || cols != params.scales.size()) {
    throw Error("preprocess width mismatch: data has " + std::to_string(cols) +
                " columns, parameters have " + std::to_string(params.centers.size()));
  }
}

}  // namespace

Matrix apply_preprocess(const Matrix& X, const PreprocessParams& params) {
  check_width(X.cols(), params);
  return ((X.rowwise() - params.centers.transpose()).array().rowwise() /
          params.scales.transpose().array())
      .matrix();
}

Matrix invert_preprocess(const Matrix& Z, const PreprocessParams& params) {
  check_width(Z.cols(), params);
  return ((Z.array().rowwise() * params.scales.transpose().array()).matrix().rowwise() +
          params.centers.transpose());
}

}  // namespace twoblock
