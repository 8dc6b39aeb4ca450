#include "twoblock/rtb.hpp"

#include <cmath>
#include <string>

#include "twoblock/error.hpp"

namespace twoblock {

void RtbConfig::validate() const {
  weights.validate();
  if (!(conv_tol > 0.0)) throw Error("conv_tol must be positive");
  if (max_iter < 1) throw Error("max_iter must be >= 1");
  if (!(weight_floor > 0.0 && weight_floor < 1.0)) throw Error("weight_floor must lie in (0, 1)");
}

Matrix reweight_rows(const Matrix& Z, const Vector& w) {
  if (w.size() != Z.rows()) throw Error("reweight_rows: weight length does not match rows");
  if (!(w.array() > 0.0).all()) throw Error("reweight_rows: weights must be positive");
  return w.cwiseSqrt().asDiagonal() * Z;
}

Matrix unweight_scores(const Matrix& S, const Vector& w) {
  if (w.size() != S.rows()) throw Error("unweight_scores: weight length does not match rows");
  if (!(w.array() > 0.0).all()) throw Error("unweight_scores: weights must be positive");
  return w.cwiseSqrt().cwiseInverse().asDiagonal() * S;
}

bool coefficient_norm_converged(double previous, double current, double tol) {
  if (previous == 0.0) return current < 1e-12;
  return std::abs(current - previous) / std::max(previous, 1e-12) < tol;
}

namespace {

Vector weighted_column_mean(const Matrix& Z, const Vector& w) {
  return Z.transpose() * w / w.sum();
}

void check_not_degenerate(const Vector& w, double floor, const char* block) {
  if ((w.array() <= floor).all()) {
    throw Error(std::string("degenerate weights: every case in the ") + block +
                " block is floored");
  }
}

}  // namespace

RtbFit fit_rtb(const Matrix& X, const Matrix& Y, const RtbConfig& cfg) {
  cfg.validate();
  if (X.rows() != Y.rows()) throw Error("X and Y must have the same number of rows");
  const Index n = X.rows();
  if (n < 4) throw Error("fit_rtb needs at least 4 cases");
  cfg.hyper.validate(n, X.cols(), Y.cols());

  const PreprocessParams x_robust = fit_preprocess(X, cfg.hyper.center, cfg.hyper.scale);
  const PreprocessParams y_robust = fit_preprocess(Y, cfg.hyper.center, cfg.hyper.scale);
  const Matrix Xs = apply_preprocess(X, x_robust);
  const Matrix Ys = apply_preprocess(Y, y_robust);

  Vector wX = starting_weights(Xs, cfg.weights, cfg.weight_floor);
  Vector wY = starting_weights(Ys, cfg.weights, cfg.weight_floor);
  check_not_degenerate(wX, cfg.weight_floor, "X");
  check_not_degenerate(wY, cfg.weight_floor, "Y");

  ModelHyperparams inner = cfg.hyper;
  inner.center = CenterKind::mean;
  inner.scale = ScaleKind::none;

  RtbFit fit;
  Vector mu_x;
  Vector mu_y;
  double previous_norm = 0.0;
  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    mu_x = weighted_column_mean(Xs, wX);
    mu_y = weighted_column_mean(Ys, wY);
    const Matrix Xw = reweight_rows(Xs.rowwise() - mu_x.transpose(), wX);
    const Matrix Yw = reweight_rows(Ys.rowwise() - mu_y.transpose(), wY);

    LatentDecomposition latent = decompose_twoblock(Xw, Yw, inner);
    latent.T = unweight_scores(latent.T, wX);
    latent.U = unweight_scores(latent.U, wY);

    Vector next_wX = standardized_distance_weights(score_distances(latent.T), cfg.weights,
                                                   cfg.hyper.h_x, cfg.weight_floor);
    Vector next_wY = standardized_distance_weights(score_distances(latent.U), cfg.weights,
                                                   cfg.hyper.h_y, cfg.weight_floor);
    check_not_degenerate(next_wX, cfg.weight_floor, "X");
    check_not_degenerate(next_wY, cfg.weight_floor, "Y");

    const double norm = latent.B_scaled.squaredNorm();
    fit.coef_norm_trace.push_back(norm);
    fit.model.latent = std::move(latent);
    fit.iterations = iter;
    wX = std::move(next_wX);
    wY = std::move(next_wY);

    if (iter > 1 && coefficient_norm_converged(previous_norm, norm, cfg.conv_tol)) {
      fit.converged = true;
      break;
    }
    previous_norm = norm;
  }

  // Effective preprocessing: robust centre shifted by the weighted mean used
  // in the final inner fit, robust scales unchanged.
  fit.model.hyper = cfg.hyper;
  fit.model.x_params = x_robust;
  fit.model.x_params.centers += x_robust.scales.cwiseProduct(mu_x);
  fit.model.y_params = y_robust;
  fit.model.y_params.centers += y_robust.scales.cwiseProduct(mu_y);
  rescale_coefficients(fit.model);

  fit.wX = std::move(wX);
  fit.wY = std::move(wY);
  fit.w_combined = fit.wX.cwiseProduct(fit.wY);
  return fit;
}

}  // namespace twoblock
