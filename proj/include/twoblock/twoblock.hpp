#pragma once

#include "twoblock/robust_scale.hpp"
#include "twoblock/types.hpp"

namespace twoblock {

/// Component counts and sparsity levels for each block, plus preprocessing.
struct ModelHyperparams {
  int h_x = 1;
  int h_y = 1;
  double eta_x = 0.0;  ///< in [0, 1); 0 is the dense fit
  double eta_y = 0.0;
  CenterKind center = CenterKind::mean;
  ScaleKind scale = ScaleKind::std;

  bool sparse() const { return eta_x > 0.0 || eta_y > 0.0; }

  /// Throws unless 1 <= h_x <= min(n-1, p), 1 <= h_y <= min(n-1, q) and both
  /// eta values lie in [0, 1).
  void validate(Index n, Index p, Index q) const;
};

/// Weights, scores and loadings of both blocks, on the preprocessed scale.
struct LatentDecomposition {
  Matrix W;  ///< p x h_x, unit-norm columns
  Matrix V;  ///< q x h_y, unit-norm columns
  Matrix T;  ///< n x h_x X-scores
  Matrix U;  ///< n x h_y Y-scores
  Matrix P;  ///< p x h_x X-loadings
  Matrix Q;  ///< q x h_y Y-loadings
  Matrix R;  ///< p x h_x rotation with X0 * R == T
  Matrix E;  ///< X residual after h_x deflations
  Matrix F;  ///< Y residual after h_y deflations
  Matrix B_scaled;
};

struct TwoblockModel {
  LatentDecomposition latent;
  Matrix B;          ///< p x q coefficients on the original data scale
  Vector intercept;  ///< q
  PreprocessParams x_params;
  PreprocessParams y_params;
  ModelHyperparams hyper;

  Index n_features() const { return B.rows(); }
  Index n_targets() const { return B.cols(); }
};

struct SingularVector {
  Vector vector;
  bool tied = false;  ///< top two singular values within 1e-12 (relative)
  int iterations = 0;
};

/// Unit vector u maximising ||M^T u||, signed so its largest-magnitude entry
/// is positive. Power iteration on M M^T started from the largest column of M;
/// falls back to a symmetric eigensolver on the smaller Gram matrix when the
/// iteration stalls (near-tied singular values).
SingularVector leading_left_singular_vector(const Matrix& M);

/// sign(w) * max(|w| - eta * max|w|, 0), renormalised to unit length.
/// eta == 0 returns w untouched.
Vector soft_threshold(const Vector& w, double eta);

/// Deflation steps of the two-block algorithm on already centred/scaled blocks.
/// X-weights come from cross-products with the undeflated Y0 and vice versa.
LatentDecomposition decompose_twoblock(const Matrix& X0, const Matrix& Y0,
                                       const ModelHyperparams& hyper);

/// W (W^T Sxx W)^-1 (W^T Sxy V) V^T with Sxx = X0^T X0 / n, Sxy = X0^T Y0 / n.
Matrix coefficients_from_weights(const Matrix& W, const Matrix& V, const Matrix& X0,
                                 const Matrix& Y0);

/// Preprocess, decompose, and rescale coefficients to the original scale.
TwoblockModel fit_twoblock(const Matrix& X, const Matrix& Y, const ModelHyperparams& hyper);

/// Back-transform scaled coefficients: B = Dx^-1 B_scaled Dy, b0 = mu_y - B^T mu_x.
void rescale_coefficients(TwoblockModel& model);

Matrix predict(const TwoblockModel& model, const Matrix& Xnew);

/// X-scores of new rows; transform(model, X_train) reproduces model.latent.T.
Matrix transform(const TwoblockModel& model, const Matrix& Xnew);

}  // namespace twoblock
