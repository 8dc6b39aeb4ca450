#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twoblock/rtb.hpp"
#include "twoblock/types.hpp"

namespace twoblock {

enum class ContaminationTarget { none, x_only, y_only, both };

std::string to_string(ContaminationTarget target);
ContaminationTarget parse_contamination_target(std::string_view name);

/// Latent variable model X = T P^T + E, Y = T C + F with uninformative noise
/// columns appended to X, plus additive-shift contamination.
struct SimulationConfig {
  int n = 100;
  int k = 3;
  int q = 4;
  int p_signal = 20;
  int p_noise = 0;
  double sigma_e = 0.5;
  double sigma_f = 0.5;
  double contamination_fraction = 0.0;
  ContaminationTarget contamination_target = ContaminationTarget::none;
  double shift_magnitude = 10.0;
  std::uint64_t seed = 0;

  int p() const { return p_signal + p_noise; }
  /// Number of contaminated rows, ceil(fraction * n) with a 1e-9 slack.
  int contaminated_rows() const;
  void validate() const;
};

struct SimulatedData {
  Matrix X;       ///< n x (p_signal + p_noise)
  Matrix Y;       ///< n x q
  Matrix B_true;  ///< [P C; 0]
  std::vector<bool> signal_mask;
  Matrix T;  ///< n x k latent scores
  Matrix P;  ///< p_signal x k, orthonormal columns
  Matrix C;  ///< k x q
};

SimulatedData generate_latent_data(const SimulationConfig& cfg, std::uint64_t seed);

struct ContaminatedData {
  Matrix X;
  Matrix Y;
  std::vector<Index> outlier_indices;  ///< sorted ascending
};

/// Adds shift_magnitude to every entry of the targeted block(s) in
/// contaminated_rows() rows picked by a shuffle seeded from cfg.seed.
ContaminatedData contaminate(const Matrix& X, const Matrix& Y, const SimulationConfig& cfg);

/// ||B_hat - B_true||_F^2 / (p q)
double mse_coefficients(const Matrix& B_hat, const Matrix& B_true);

/// F1 of variable selection; variable j is selected iff some |W(j, .)| > 1e-12.
/// Zero when nothing is selected.
double f1_selection(const Matrix& W, const std::vector<bool>& signal_mask);

enum class Method { tb_dense, tb_sparse, rtb_dense, rtb_sparse };

std::string to_string(Method method);
Method parse_method(std::string_view name);
bool is_sparse(Method method);
bool is_robust(Method method);

/// Fitting settings shared by the methods in a scenario run. Zero component
/// counts mean "derive from the config": h_x = k, h_y = min(k, q).
struct MethodSettings {
  int h_x = 0;
  int h_y = 0;
  double eta_x = 0.5;  ///< sparse methods only
  double eta_y = 0.0;  ///< sparse methods only
  RtbConfig rtb;       ///< weighting, robust preprocessing and loop control
};

/// Hyperparameters a method uses for a given config (classical methods use
/// mean/std preprocessing, robust ones the RtbConfig preprocessing).
ModelHyperparams method_hyperparams(Method method, const MethodSettings& settings,
                                    const SimulationConfig& cfg);

/// Fit one method; returns the fitted model (and the weights for RTB methods).
struct MethodFit {
  TwoblockModel model;
  std::optional<RtbFit> rtb;
};
MethodFit fit_method(Method method, const Matrix& X, const Matrix& Y, const ModelHyperparams& hyper,
                     const MethodSettings& settings);

struct MethodSummary {
  Method method = Method::tb_dense;
  double mean_mse = 0.0;
  double sd_mse = 0.0;
  std::optional<double> mean_f1;  ///< sparse methods only
  int failures = 0;
  /// Per-repeat values; NaN marks a failed repeat.
  std::vector<double> mse;
  std::vector<double> f1;
};

struct ScenarioResult {
  std::string scenario_id;
  SimulationConfig config;
  int repeats = 0;
  std::vector<MethodSummary> methods;

  const MethodSummary& at(Method method) const;
};

/// For every config and method, fits freshly generated and contaminated data
/// per repeat (seed = base_seed + repeat index, shared across methods) and
/// aggregates. Failed fits are excluded and counted. `threads` > 1 runs
/// repeats concurrently; results do not depend on it.
std::vector<ScenarioResult> run_scenario_grid(const std::vector<SimulationConfig>& configs,
                                              const std::vector<Method>& methods, int repeats,
                                              std::uint64_t base_seed,
                                              const MethodSettings& settings = {},
                                              unsigned threads = 1);

/// Recompute a summary's aggregates from its per-repeat values.
void summarize(MethodSummary& summary);

/// The full 42-scenario study: six dimensionality settings crossed with clean
/// data and 10%/20% contamination in X, Y or both.
std::vector<SimulationConfig> full_scenario_grid();

/// Columns: scenario_id, dimensionality, contamination_fraction,
/// contamination_target, method, mean_mse, sd_mse, mean_f1, failures, repeats.
void write_scenario_csv(std::ostream& os, const std::vector<ScenarioResult>& results);

}  // namespace twoblock
