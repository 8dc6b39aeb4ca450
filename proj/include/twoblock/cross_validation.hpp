#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "twoblock/simulation.hpp"

namespace twoblock {

struct CvOptions {
  int folds = 5;
  /// Use a 10% upper-trimmed mean of casewise errors, and MAD response scales.
  bool robust = false;
  std::uint64_t seed = 0;
  /// Fit classical two-block models, or RTB with `rtb` as the loop settings.
  bool use_rtb = false;
  RtbConfig rtb;
};

struct CvRow {
  ModelHyperparams hyper;
  double score = 0.0;  ///< +inf when some fold failed
  std::string message;  ///< first failure message, if any
};

struct CvResult {
  ModelHyperparams best;
  std::vector<CvRow> table;  ///< in grid order
};

/// Assigns each row to a fold after a seeded shuffle (fold sizes differ by at most one).
std::vector<int> fold_assignment(Index n, int folds, std::uint64_t seed);

/// Mean of the smallest ceil(0.9 n) values.
double upper_trimmed_mean(std::vector<double> values, double trim = 0.10);

/// K-fold grid search. Each held-out case contributes the mean over responses
/// of its squared prediction error divided by the training fold's squared
/// response scale; a grid point's score pools these over all folds. Ties go to
/// smaller h_x, then smaller h_y, then larger eta_x.
CvResult cross_validate(const Matrix& X, const Matrix& Y, const std::vector<ModelHyperparams>& grid,
                        const CvOptions& options);

/// Columns: h_x, h_y, eta_x, eta_y, center, scale, score.
void write_cv_table(std::ostream& os, const CvResult& result);

}  // namespace twoblock
