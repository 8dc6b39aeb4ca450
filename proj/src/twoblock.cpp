#include "twoblock/twoblock.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "twoblock/error.hpp"

namespace twoblock {

namespace {

constexpr double kPowerTol = 1e-12;
constexpr int kPowerMaxIter = 1000;
constexpr double kDegenerate = 1e-12;

void fix_sign(Vector& u) {
  Index arg = 0;
  u.cwiseAbs().maxCoeff(&arg);
  if (u(arg) < 0.0) u = -u;
}

// Top two singular values within 1e-12 (relative), read off the smaller Gram matrix.
bool top_pair_tied(const Matrix& M) {
  const Matrix gram = M.cols() <= M.rows() ? Matrix(M.transpose() * M) : Matrix(M * M.transpose());
  if (gram.rows() < 2) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const Index k = eig.eigenvalues().size() - 1;
  const double s1 = std::sqrt(std::max(0.0, eig.eigenvalues()(k)));
  const double s2 = std::sqrt(std::max(0.0, eig.eigenvalues()(k - 1)));
  return s1 - s2 <= 1e-12 * s1;
}

SingularVector eigen_fallback(const Matrix& M, int iterations) {
  SingularVector out;
  out.iterations = iterations;
  if (M.cols() <= M.rows()) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(M.transpose() * M);
    out.vector = (M * eig.eigenvectors().rightCols(1)).normalized();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(M * M.transpose());
    out.vector = eig.eigenvectors().rightCols(1);
  }
  out.tied = top_pair_tied(M);
  fix_sign(out.vector);
  return out;
}

std::string dims(const Matrix& M) {
  return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

}  // namespace

void ModelHyperparams::validate(Index n, Index p, Index q) const {
  if (n < 2) throw Error("twoblock needs at least 2 cases");
  if (h_x < 1 || h_x > std::min(n - 1, p)) {
    throw Error("h_x = " + std::to_string(h_x) + " outside [1, min(n-1, p) = " +
                std::to_string(std::min(n - 1, p)) + "]");
  }
  if (h_y < 1 || h_y > std::min(n - 1, q)) {
    throw Error("h_y = " + std::to_string(h_y) + " outside [1, min(n-1, q) = " +
                std::to_string(std::min(n - 1, q)) + "]");
  }
  if (!(eta_x >= 0.0 && eta_x < 1.0) || !(eta_y >= 0.0 && eta_y < 1.0)) {
    throw Error("sparsity parameters must lie in [0, 1)");
  }
}

SingularVector leading_left_singular_vector(const Matrix& M) {
  if (M.size() == 0 || !M.allFinite()) throw Error("leading_left_singular_vector: empty or non-finite matrix");
  Index start = 0;
  const double largest = M.colwise().norm().maxCoeff(&start);
  if (!(largest > 0.0)) throw Error("leading_left_singular_vector: zero matrix");

  if (M.cols() == 1) {
    SingularVector out{M.col(0) / largest, false, 0};
    fix_sign(out.vector);
    return out;
  }

  Vector u = M.col(start) / largest;
  for (int iter = 1; iter <= kPowerMaxIter; ++iter) {
    Vector next = M * (M.transpose() * u);
    next.normalize();
    const double step = (next - u).norm();
    u = std::move(next);
    if (step < kPowerTol) {
      fix_sign(u);
      return {u, top_pair_tied(M), iter};
    }
  }
  return eigen_fallback(M, kPowerMaxIter);
}

Vector soft_threshold(const Vector& w, double eta) {
  if (!(eta >= 0.0 && eta < 1.0)) throw Error("soft_threshold: eta must lie in [0, 1)");
  if (eta == 0.0) return w;
  const double threshold = eta * w.cwiseAbs().maxCoeff();
  Vector out = w.unaryExpr([threshold](double x) {
    const double shrunk = std::max(std::abs(x) - threshold, 0.0);
    return x < 0.0 ? -shrunk : shrunk;
  });
  const double norm = out.norm();
  if (!(norm > 0.0)) throw Error("soft_threshold: all entries thresholded away");
  return out / norm;
}

LatentDecomposition decompose_twoblock(const Matrix& X0, const Matrix& Y0,
                                       const ModelHyperparams& hyper) {
  if (X0.rows() != Y0.rows()) {
    throw Error("X and Y must have the same number of rows (" + dims(X0) + " vs " + dims(Y0) + ")");
  }
  const Index n = X0.rows();
  const Index p = X0.cols();
  const Index q = Y0.cols();
  hyper.validate(n, p, q);
  const double inv_n = 1.0 / static_cast<double>(n);

  LatentDecomposition d;
  d.W.resize(p, hyper.h_x);
  d.T.resize(n, hyper.h_x);
  d.P.resize(p, hyper.h_x);
  d.V.resize(q, hyper.h_y);
  d.U.resize(n, hyper.h_y);
  d.Q.resize(q, hyper.h_y);

  const double x_norm = X0.norm();
  Matrix Xt = X0;
  for (int i = 0; i < hyper.h_x; ++i) {
    if (Xt.norm() <= kDegenerate * std::max(1.0, x_norm)) {
      throw Error("degenerate deflation: X residual vanished before component " + std::to_string(i + 1));
    }
    const Matrix S = Xt.transpose() * Y0 * inv_n;
    Vector w = leading_left_singular_vector(S).vector;
    if (hyper.eta_x > 0.0) w = soft_threshold(w, hyper.eta_x);
    const Vector t = Xt * w;
    const double tt = t.squaredNorm();
    if (tt <= std::pow(kDegenerate * std::max(1.0, x_norm), 2)) {
      throw Error("degenerate deflation: X score " + std::to_string(i + 1) + " has zero norm");
    }
    const Vector loading = Xt.transpose() * t / tt;
    Xt.noalias() -= t * loading.transpose();
    d.W.col(i) = w;
    d.T.col(i) = t;
    d.P.col(i) = loading;
  }
  d.E = std::move(Xt);

  const double y_norm = Y0.norm();
  Matrix Yt = Y0;
  for (int j = 0; j < hyper.h_y; ++j) {
    if (Yt.norm() <= kDegenerate * std::max(1.0, y_norm)) {
      throw Error("degenerate deflation: Y residual vanished before component " + std::to_string(j + 1));
    }
    const Matrix S = Yt.transpose() * X0 * inv_n;
    Vector v = leading_left_singular_vector(S).vector;
    if (hyper.eta_y > 0.0) v = soft_threshold(v, hyper.eta_y);
    const Vector u = Yt * v;
    const double uu = u.squaredNorm();
    if (uu <= std::pow(kDegenerate * std::max(1.0, y_norm), 2)) {
      throw Error("degenerate deflation: Y score " + std::to_string(j + 1) + " has zero norm");
    }
    const Vector loading = Yt.transpose() * u / uu;
    Yt.noalias() -= u * loading.transpose();
    d.V.col(j) = v;
    d.U.col(j) = u;
    d.Q.col(j) = loading;
  }
  d.F = std::move(Yt);

  // P^T W is unit upper triangular, so the rotation always exists.
  const Matrix PtW = d.P.transpose() * d.W;
  d.R = PtW.transpose().partialPivLu().solve(d.W.transpose()).transpose();
  d.B_scaled = coefficients_from_weights(d.W, d.V, X0, Y0);
  return d;
}

Matrix coefficients_from_weights(const Matrix& W, const Matrix& V, const Matrix& X0,
                                 const Matrix& Y0) {
  if (X0.rows() != Y0.rows() || W.rows() != X0.cols() || V.rows() != Y0.cols()) {
    throw Error("coefficients_from_weights: shape mismatch");
  }
  const double inv_n = 1.0 / static_cast<double>(X0.rows());
  const Matrix XW = X0 * W;
  const Matrix A = XW.transpose() * XW * inv_n;
  const Matrix C = XW.transpose() * (Y0 * V) * inv_n;
  Eigen::FullPivLU<Matrix> lu(A);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    throw Error("coefficients_from_weights: W^T Sxx W is singular (h_x too large?)");
  }
  return W * lu.solve(C) * V.transpose();
}

void rescale_coefficients(TwoblockModel& model) {
  const auto& xs = model.x_params;
  const auto& ys = model.y_params;
  model.B = xs.scales.cwiseInverse().asDiagonal() * model.latent.B_scaled * ys.scales.asDiagonal();
  model.intercept = ys.centers - model.B.transpose() * xs.centers;
}

TwoblockModel fit_twoblock(const Matrix& X, const Matrix& Y, const ModelHyperparams& hyper) {
  if (X.rows() != Y.rows()) {
    throw Error("X and Y must have the same number of rows (" + dims(X) + " vs " + dims(Y) + ")");
  }
  hyper.validate(X.rows(), X.cols(), Y.cols());
  TwoblockModel model;
  model.hyper = hyper;
  model.x_params = fit_preprocess(X, hyper.center, hyper.scale);
  model.y_params = fit_preprocess(Y, hyper.center, hyper.scale);
  model.latent = decompose_twoblock(apply_preprocess(X, model.x_params),
                                    apply_preprocess(Y, model.y_params), hyper);
  rescale_coefficients(model);
  return model;
}

Matrix predict(const TwoblockModel& model, const Matrix& Xnew) {
  if (Xnew.cols() != model.n_features()) {
    throw Error("predict: expected " + std::to_string(model.n_features()) + " columns, got " +
                std::to_string(Xnew.cols()));
  }
  return (Xnew * model.B).rowwise() + model.intercept.transpose();
}

Matrix transform(const TwoblockModel& model, const Matrix& Xnew) {
  if (Xnew.cols() != model.n_features()) {
    throw Error("transform: expected " + std::to_string(model.n_features()) + " columns, got " +
                std::to_string(Xnew.cols()));
  }
  return apply_preprocess(Xnew, model.x_params) * model.latent.R;
}

}  // namespace twoblock
