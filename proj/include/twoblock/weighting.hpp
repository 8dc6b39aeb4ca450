#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "twoblock/types.hpp"

namespace twoblock {

enum class WeightFamily { hampel, huber, fair, identity };

std::string to_string(WeightFamily family);
WeightFamily parse_weight_family(std::string_view name);

struct Cutoffs {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

/// Downweighting function plus the quantile probabilities its cutoffs derive from.
///
/// Hampel uses all three probabilities, Huber only the first, Fair a fixed
/// tuning constant. `cutoffs` is empty until resolved against a distance
/// distribution (see resolve_standardized).
struct WeightFunctionSpec {
  WeightFamily family = WeightFamily::hampel;
  std::array<double, 3> probs{0.75, 0.90, 0.95};
  double fair_constant = 1.3998;
  std::optional<Cutoffs> cutoffs;

  /// Hampel with the (0.75, 0.90, 0.95) cutoff probabilities; the default.
  static WeightFunctionSpec aggressive();
  /// Hampel with the lenient (0.95, 0.975, 0.999) cutoff probabilities.
  static WeightFunctionSpec standard();
  static WeightFunctionSpec identity();

  /// Throws twoblock::Error unless 0 < p1 < p2 < p3 < 1 (and any resolved
  /// cutoffs are positive and increasing).
  void validate() const;

  /// Copy with cutoffs for median-standardized distances of a chi(df) population:
  /// c_j = sqrt(q_{p_j} / q_{0.5}) with q the chi-square(df) quantile.
  WeightFunctionSpec resolve_standardized(int df) const;
};

/// Hampel three-part redescending weight. Requires 0 < c1 < c2 < c3 and d >= 0.
double hampel_psi(double d, double c1, double c2, double c3);

/// Elementwise weights in [0, 1]. Identity returns ones; the other families
/// need resolved cutoffs (Fair only uses fair_constant).
Vector weight_function(const WeightFunctionSpec& spec, const Vector& d);

double chi_square_quantile(double p, double df);

/// c_j = sqrt(chi-square(df) quantile at p_j), strictly increasing.
Cutoffs chi_cutoffs(const std::array<double, 3>& probs, int df);

/// d / median(d) through the weight function with cutoffs resolved for `df`,
/// then floored at `floor`.
Vector standardized_distance_weights(const Vector& d, const WeightFunctionSpec& spec, int df,
                                     double floor = 1e-6);

/// Starting case weights for a robustly centred and scaled block: row norms
/// standardized by their median, weighted, floored. Cutoff df is the block
/// width capped at n - 1.
Vector starting_weights(const Matrix& Zs, const WeightFunctionSpec& spec, double floor = 1e-6);

/// Diagonal robust Mahalanobis-type distance of each score row:
/// || (s_i - colmedian(S)) / colMAD(S) ||, MAD normal-consistent.
Vector score_distances(const Matrix& S);

}  // namespace twoblock
