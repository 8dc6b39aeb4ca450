#pragma once

#include <vector>

#include "twoblock/twoblock.hpp"
#include "twoblock/weighting.hpp"

namespace twoblock {

struct RtbConfig {
  ModelHyperparams hyper{.center = CenterKind::median, .scale = ScaleKind::mad};
  WeightFunctionSpec weights = WeightFunctionSpec::aggressive();
  double conv_tol = 1e-4;
  int max_iter = 100;
  double weight_floor = 1e-6;

  void validate() const;
};

struct RtbFit {
  TwoblockModel model;
  Vector wX;
  Vector wY;
  Vector w_combined;  ///< wX .* wY
  int iterations = 0;
  bool converged = false;
  std::vector<double> coef_norm_trace;  ///< ||B_scaled||_F^2 per iteration
};

/// Row i multiplied by sqrt(w_i); weights must be positive.
Matrix reweight_rows(const Matrix& Z, const Vector& w);

/// Row i divided by sqrt(w_i); inverse of reweight_rows.
Matrix unweight_scores(const Matrix& S, const Vector& w);

/// Relative change test on squared coefficient norms. A zero previous norm
/// converges only if the current one is below 1e-12.
bool coefficient_norm_converged(double previous, double current, double tol);

/// Robust two-block fit by iterative reweighting.
///
/// Blocks are robustly centred and scaled once; starting case weights come
/// from median-standardized row norms. Each iteration centres the scaled data
/// on its weighted mean, fits the two-block decomposition to the row-weighted
/// blocks (no further scaling), unweights the scores and recomputes each
/// block's weights from robust score distances. Stops when the squared norm of
/// the scaled coefficients changes by less than conv_tol (relative), or after
/// max_iter iterations with converged = false.
RtbFit fit_rtb(const Matrix& X, const Matrix& Y, const RtbConfig& cfg);

}  // namespace twoblock
