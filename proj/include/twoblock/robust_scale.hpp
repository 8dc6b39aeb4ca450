#pragma once

#include "twoblock/types.hpp"

namespace twoblock {

/// Normal-consistency factor for the median absolute deviation, 1/Phi^-1(3/4).
inline constexpr double kMadConsistency = 1.4826;

/// Fitted per-column centring and scaling of one data block.
///
/// `scales` is strictly positive; a zero scale estimate is reported as a
/// ZeroScaleError when fitting and never replaced.
struct PreprocessParams {
  CenterKind center_kind = CenterKind::mean;
  ScaleKind scale_kind = ScaleKind::std;
  Vector centers;
  Vector scales;

  Index width() const { return centers.size(); }
};

/// Median of a vector, midpoint of the two middle values for even length.
double median(const Vector& x);

/// Per-column location. `l1median` delegates to l1_median with default tolerances.
Vector column_location(const Matrix& X, CenterKind kind);

/// Per-column median absolute deviation from the column median, multiplied by
/// kMadConsistency when `consistent`. A zero column MAD throws ZeroScaleError.
Vector column_mad(const Matrix& X, bool consistent = true);

/// Sample standard deviation (n - 1 denominator) of each column.
Vector column_std(const Matrix& X);

/// Spatial (l1) median of the rows of X by the modified Weiszfeld iteration.
///
/// An iterate that lands on a data row takes the Vardi-Zhang step so the
/// iteration cannot stall there. Converged when successive iterates move less
/// than `tol` in Euclidean norm; otherwise throws ConvergenceError holding the
/// last iterate.
Vector l1_median(const Matrix& X, double tol = 1e-8, int max_iter = 500);

/// Tau-scale of Maronna and Zamar (2002) with c1 = 4.5, c2 = 3, normalised to
/// be consistent for the standard deviation at the normal model.
double tau2_scale(const Vector& x);

PreprocessParams fit_preprocess(const Matrix& X, CenterKind center_kind, ScaleKind scale_kind);

/// (x - center) / scale, column by column.
Matrix apply_preprocess(const Matrix& X, const PreprocessParams& params);

/// z * scale + center, column by column.
Matrix invert_preprocess(const Matrix& Z, const PreprocessParams& params);

}  // namespace twoblock
