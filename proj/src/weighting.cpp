#include "twoblock/weighting.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "twoblock/error.hpp"
#include "twoblock/robust_scale.hpp"

namespace twoblock {

std::string to_string(WeightFamily family) {
  switch (family) {
    case WeightFamily::hampel: return "hampel";
    case WeightFamily::huber: return "huber";
    case WeightFamily::fair: return "fair";
    case WeightFamily::identity: return "identity";
  }
  return "unknown";
}

WeightFamily parse_weight_family(std::string_view name) {
  if (name == "hampel") return WeightFamily::hampel;
  if (name == "huber") return WeightFamily::huber;
  if (name == "fair") return WeightFamily::fair;
  if (name == "identity") return WeightFamily::identity;
  throw Error("unknown weight function '" + std::string(name) + "'");
}

WeightFunctionSpec WeightFunctionSpec::aggressive() { return {}; }

WeightFunctionSpec WeightFunctionSpec::standard() {
  WeightFunctionSpec spec;
  spec.probs = {0.95, 0.975, 0.999};
  return spec;
}

WeightFunctionSpec WeightFunctionSpec::identity() {
  WeightFunctionSpec spec;
  spec.family = WeightFamily::identity;
  return spec;
}

void WeightFunctionSpec::validate() const {
  const auto [p1, p2, p3] = probs;
  if (!(0.0 < p1 && p1 < p2 && p2 < p3 && p3 < 1.0)) {
    throw Error("cutoff probabilities must satisfy 0 < p1 < p2 < p3 < 1");
  }
  if (family == WeightFamily::fair && !(fair_constant > 0.0)) {
    throw Error("fair tuning constant must be positive");
  }
  if (cutoffs) {
    const auto& c = *cutoffs;
    if (!(0.0 < c.c1 && c.c1 < c.c2 && c.c2 < c.c3)) {
      throw Error("cutoffs must satisfy 0 < c1 < c2 < c3");
    }
  }
}

WeightFunctionSpec WeightFunctionSpec::resolve_standardized(int df) const {
  validate();
  if (df < 1) throw Error("cutoff degrees of freedom must be >= 1");
  const double q_median = chi_square_quantile(0.5, df);
  WeightFunctionSpec out = *this;
  out.cutoffs = Cutoffs{std::sqrt(chi_square_quantile(probs[0], df) / q_median),
                        std::sqrt(chi_square_quantile(probs[1], df) / q_median),
                        std::sqrt(chi_square_quantile(probs[2], df) / q_median)};
  return out;
}

double hampel_psi(double d, double c1, double c2, double c3) {
  if (!(0.0 < c1 && c1 < c2 && c2 < c3)) throw Error("hampel_psi: need 0 < c1 < c2 < c3");
  if (!(d >= 0.0)) throw Error("hampel_psi: distance must be nonnegative");
  if (d <= c1) return 1.0;
  if (d <= c2) return c1 / d;
  if (d <= c3) return c1 * (c3 - d) / (d * (c3 - c2));
  return 0.0;
}

Vector weight_function(const WeightFunctionSpec& spec, const Vector& d) {
  if ((d.array() < 0.0).any() || d.hasNaN()) {
    throw Error("weight_function: distances must be nonnegative");
  }
  spec.validate();
  if (spec.family == WeightFamily::identity) return Vector::Ones(d.size());
  if (spec.family == WeightFamily::fair) {
    return (1.0 + d.array() / spec.fair_constant).square().inverse().matrix();
  }
  if (!spec.cutoffs) throw Error("weight_function: cutoffs have not been resolved");
  const auto& c = *spec.cutoffs;
  Vector w(d.size());
  for (Index i = 0; i < d.size(); ++i) {
    if (spec.family == WeightFamily::hampel) {
      w(i) = hampel_psi(d(i), c.c1, c.c2, c.c3);
    } else {
      w(i) = d(i) <= c.c1 ? 1.0 : c.c1 / d(i);
    }
  }
  return w;
}

double chi_square_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw Error("chi_square_quantile: p must lie in (0, 1)");
  if (!(df > 0.0)) throw Error("chi_square_quantile: df must be positive");
  try {
    return boost::math::quantile(boost::math::chi_squared_distribution<double>(df), p);
  } catch (const std::exception& e) {
    throw Error(std::string("chi_square_quantile: ") + e.what());
  }
}

Cutoffs chi_cutoffs(const std::array<double, 3>& probs, int df) {
  if (df < 1) throw Error("chi_cutoffs: df must be >= 1");
  WeightFunctionSpec spec;
  spec.probs = probs;
  spec.validate();
  return {std::sqrt(chi_square_quantile(probs[0], df)),
          std::sqrt(chi_square_quantile(probs[1], df)),
          std::sqrt(chi_square_quantile(probs[2], df))};
}

Vector standardized_distance_weights(const Vector& d, const WeightFunctionSpec& spec, int df,
                                     double floor) {
  if (d.size() < 2) throw Error("distance weights: need at least 2 cases");
  const double med = median(d);
  if (!(med > 0.0)) throw Error("distance weights: median distance is 0");
  const WeightFunctionSpec resolved =
      spec.family == WeightFamily::identity ? spec : spec.resolve_standardized(df);
  return weight_function(resolved, d / med).cwiseMax(floor);
}

Vector starting_weights(const Matrix& Zs, const WeightFunctionSpec& spec, double floor) {
  if (Zs.rows() < 2) throw Error("starting_weights: need at least 2 rows");
  const Vector norms = Zs.rowwise().norm();
  if (!(median(norms) > 0.0)) throw Error("starting_weights: median row norm is 0");
  const Index df = std::max<Index>(1, std::min<Index>(Zs.cols(), Zs.rows() - 1));
  return standardized_distance_weights(norms, spec, static_cast<int>(df), floor);
}

Vector score_distances(const Matrix& S) {
  if (S.rows() < 2 || S.cols() == 0) throw Error("score_distances: need at least 2 score rows");
  Vector center(S.cols());
  for (Index j = 0; j < S.cols(); ++j) center(j) = median(S.col(j));
  const Vector scale = column_mad(S, true);
  return ((S.rowwise() - center.transpose()).array().rowwise() / scale.transpose().array())
      .matrix()
      .rowwise()
      .norm();
}

}  // namespace twoblock
