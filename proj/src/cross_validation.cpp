#include "twoblock/cross_validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "twoblock/error.hpp"
#include "twoblock/io.hpp"

namespace twoblock {

std::vector<int> fold_assignment(Index n, int folds, std::uint64_t seed) {
  if (folds < 2) throw Error("cross-validation needs at least 2 folds");
  if (n < folds) throw Error("cross-validation needs at least as many cases as folds");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size(); ++i) {
    fold[static_cast<std::size_t>(order[i])] = static_cast<int>(i % static_cast<std::size_t>(folds));
  }
  return fold;
}

double upper_trimmed_mean(std::vector<double> values, double trim) {
  if (values.empty()) throw Error("trimmed mean of an empty sample");
  std::sort(values.begin(), values.end());
  const auto keep = static_cast<std::size_t>(
      std::max(1.0, std::ceil((1.0 - trim) * static_cast<double>(values.size()) - 1e-9)));
  double sum = 0.0;
  for (std::size_t i = 0; i < keep; ++i) sum += values[i];
  return sum / static_cast<double>(keep);
}

namespace {

Matrix select_rows(const Matrix& M, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), M.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = M.row(rows[i]);
  return out;
}

// Returns true when a is preferred over b on equal scores.
bool tie_preferred(const ModelHyperparams& a, const ModelHyperparams& b) {
  if (a.h_x != b.h_x) return a.h_x < b.h_x;
  if (a.h_y != b.h_y) return a.h_y < b.h_y;
  return a.eta_x > b.eta_x;
}

}  // namespace

CvResult cross_validate(const Matrix& X, const Matrix& Y, const std::vector<ModelHyperparams>& grid,
                        const CvOptions& options) {
  if (grid.empty()) throw Error("cross_validate: empty grid");
  if (X.rows() != Y.rows()) throw Error("cross_validate: X and Y row counts differ");
  const std::vector<int> fold = fold_assignment(X.rows(), options.folds, options.seed);

  std::vector<std::vector<Index>> train(static_cast<std::size_t>(options.folds));
  std::vector<std::vector<Index>> test(static_cast<std::size_t>(options.folds));
  for (Index i = 0; i < X.rows(); ++i) {
    for (int f = 0; f < options.folds; ++f) {
      (fold[static_cast<std::size_t>(i)] == f ? test : train)[static_cast<std::size_t>(f)].push_back(i);
    }
  }

  MethodSettings settings;
  settings.rtb = options.rtb;

  CvResult result;
  for (const auto& hyper : grid) {
    CvRow row{hyper, 0.0, {}};
    std::vector<double> casewise;
    for (int f = 0; f < options.folds && row.message.empty(); ++f) {
      const Matrix Xtr = select_rows(X, train[static_cast<std::size_t>(f)]);
      const Matrix Ytr = select_rows(Y, train[static_cast<std::size_t>(f)]);
      const Matrix Xte = select_rows(X, test[static_cast<std::size_t>(f)]);
      const Matrix Yte = select_rows(Y, test[static_cast<std::size_t>(f)]);
      try {
        const Method method = options.use_rtb ? (hyper.sparse() ? Method::rtb_sparse : Method::rtb_dense)
                                              : (hyper.sparse() ? Method::tb_sparse : Method::tb_dense);
        const MethodFit fit = fit_method(method, Xtr, Ytr, hyper, settings);
        const Vector scale = options.robust ? column_mad(Ytr, true) : column_std(Ytr);
        const Matrix err = (predict(fit.model, Xte) - Yte).array().rowwise() / scale.transpose().array();
        for (Index i = 0; i < err.rows(); ++i) casewise.push_back(err.row(i).squaredNorm() / err.cols());
      } catch (const Error& e) {
        row.message = "fold " + std::to_string(f + 1) + ": " + e.what();
      }
    }
    if (!row.message.empty()) {
      row.score = std::numeric_limits<double>::infinity();
    } else if (options.robust) {
      row.score = upper_trimmed_mean(casewise);
    } else {
      row.score = std::accumulate(casewise.begin(), casewise.end(), 0.0) /
                  static_cast<double>(casewise.size());
    }
    result.table.push_back(std::move(row));
  }

  const CvRow* best = &result.table.front();
  for (const auto& row : result.table) {
    if (row.score < best->score || (row.score == best->score && tie_preferred(row.hyper, best->hyper))) {
      best = &row;
    }
  }
  result.best = best->hyper;
  return result;
}

void write_cv_table(std::ostream& os, const CvResult& result) {
  os << "h_x,h_y,eta_x,eta_y,center,scale,score\n";
  for (const auto& row : result.table) {
    const auto& h = row.hyper;
    os << h.h_x << ',' << h.h_y << ',' << format_double(h.eta_x) << ',' << format_double(h.eta_y)
       << ',' << to_string(h.center) << ',' << to_string(h.scale) << ',' << format_double(row.score)
       << '\n';
  }
}

}  // namespace twoblock
