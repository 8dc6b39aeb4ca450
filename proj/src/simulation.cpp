#include "twoblock/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include <Eigen/QR>

#include "twoblock/error.hpp"
#include "twoblock/io.hpp"

namespace twoblock {

std::string to_string(ContaminationTarget target) {
  switch (target) {
    case ContaminationTarget::none: return "none";
    case ContaminationTarget::x_only: return "x_only";
    case ContaminationTarget::y_only: return "y_only";
    case ContaminationTarget::both: return "both";
  }
  return "unknown";
}

ContaminationTarget parse_contamination_target(std::string_view name) {
  if (name == "none") return ContaminationTarget::none;
  if (name == "x_only" || name == "x") return ContaminationTarget::x_only;
  if (name == "y_only" || name == "y") return ContaminationTarget::y_only;
  if (name == "both" || name == "xy") return ContaminationTarget::both;
  throw Error("unknown contamination target '" + std::string(name) + "'");
}

int SimulationConfig::contaminated_rows() const {
  if (contamination_fraction <= 0.0) return 0;
  return static_cast<int>(std::ceil(contamination_fraction * n - 1e-9));
}

void SimulationConfig::validate() const {
  if (n < 2 || k < 1 || q < 1 || p_signal < 1 || p_noise < 0) {
    throw Error("simulation config: sizes must be positive");
  }
  if (k > p_signal || k > n) throw Error("simulation config: need k <= min(p_signal, n)");
  if (!(sigma_e >= 0.0 && sigma_f >= 0.0)) throw Error("simulation config: noise sd must be >= 0");
  if (!(contamination_fraction >= 0.0 && contamination_fraction <= 1.0)) {
    throw Error("simulation config: contamination fraction must lie in [0, 1]");
  }
}

SimulatedData generate_latent_data(const SimulationConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](Index rows, Index cols, double sd) {
    Matrix M(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) M(i, j) = sd * normal(rng);
    return M;
  };

  SimulatedData d;
  d.T = draw(cfg.n, cfg.k, 1.0);
  const Matrix raw = draw(cfg.p_signal, cfg.k, 1.0);
  Eigen::HouseholderQR<Matrix> qr(raw);
  d.P = qr.householderQ() * Matrix::Identity(cfg.p_signal, cfg.k);
  d.C = draw(cfg.k, cfg.q, 1.0);
  const Matrix E = draw(cfg.n, cfg.p_signal, cfg.sigma_e);
  const Matrix noise = draw(cfg.n, cfg.p_noise, cfg.sigma_e);
  const Matrix F = draw(cfg.n, cfg.q, cfg.sigma_f);

  d.X.resize(cfg.n, cfg.p());
  d.X.leftCols(cfg.p_signal) = d.T * d.P.transpose() + E;
  d.X.rightCols(cfg.p_noise) = noise;
  d.Y = d.T * d.C + F;

  d.B_true = Matrix::Zero(cfg.p(), cfg.q);
  d.B_true.topRows(cfg.p_signal) = d.P * d.C;
  d.signal_mask.assign(static_cast<std::size_t>(cfg.p()), false);
  std::fill_n(d.signal_mask.begin(), cfg.p_signal, true);
  return d;
}

ContaminatedData contaminate(const Matrix& X, const Matrix& Y, const SimulationConfig& cfg) {
  if (X.rows() != Y.rows()) throw Error("contaminate: X and Y row counts differ");
  ContaminatedData out{X, Y, {}};
  if (cfg.contamination_fraction <= 0.0) return out;
  if (cfg.contamination_target == ContaminationTarget::none) {
    throw Error("contaminate: positive fraction with target 'none'");
  }
  SimulationConfig sized = cfg;
  sized.n = static_cast<int>(X.rows());
  const int count = sized.contaminated_rows();
  if (count < 1) throw Error("contaminate: fraction * n rounds to zero rows");
  if (count > X.rows()) throw Error("contaminate: more contaminated rows than cases");

  std::vector<Index> order(static_cast<std::size_t>(X.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::shuffle(order.begin(), order.end(), rng);
  out.outlier_indices.assign(order.begin(), order.begin() + count);
  std::sort(out.outlier_indices.begin(), out.outlier_indices.end());

  const bool hit_x = cfg.contamination_target == ContaminationTarget::x_only ||
                     cfg.contamination_target == ContaminationTarget::both;
  const bool hit_y = cfg.contamination_target == ContaminationTarget::y_only ||
                     cfg.contamination_target == ContaminationTarget::both;
  for (Index i : out.outlier_indices) {
    if (hit_x) out.X.row(i).array() += cfg.shift_magnitude;
    if (hit_y) out.Y.row(i).array() += cfg.shift_magnitude;
  }
  return out;
}

double mse_coefficients(const Matrix& B_hat, const Matrix& B_true) {
  if (B_hat.rows() != B_true.rows() || B_hat.cols() != B_true.cols()) {
    throw Error("mse_coefficients: shape mismatch");
  }
  if (B_hat.size() == 0) throw Error("mse_coefficients: empty coefficients");
  return (B_hat - B_true).squaredNorm() / static_cast<double>(B_hat.size());
}

double f1_selection(const Matrix& W, const std::vector<bool>& signal_mask) {
  if (static_cast<std::size_t>(W.rows()) != signal_mask.size()) {
    throw Error("f1_selection: mask length does not match the number of variables");
  }
  int true_pos = 0, selected = 0, actual = 0;
  for (Index j = 0; j < W.rows(); ++j) {
    const bool picked = W.row(j).cwiseAbs().maxCoeff() > 1e-12;
    const bool signal = signal_mask[static_cast<std::size_t>(j)];
    selected += picked;
    actual += signal;
    true_pos += picked && signal;
  }
  if (selected == 0 || true_pos == 0) return 0.0;
  const double precision = static_cast<double>(true_pos) / selected;
  const double recall = static_cast<double>(true_pos) / actual;
  return 2.0 * precision * recall / (precision + recall);
}

std::string to_string(Method method) {
  switch (method) {
    case Method::tb_dense: return "tb";
    case Method::tb_sparse: return "tb-sparse";
    case Method::rtb_dense: return "rtb";
    case Method::rtb_sparse: return "rtb-sparse";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "tb" || name == "tb-dense") return Method::tb_dense;
  if (name == "tb-sparse") return Method::tb_sparse;
  if (name == "rtb" || name == "rtb-dense") return Method::rtb_dense;
  if (name == "rtb-sparse") return Method::rtb_sparse;
  throw Error("unknown method '" + std::string(name) + "'");
}

bool is_sparse(Method method) {
  return method == Method::tb_sparse || method == Method::rtb_sparse;
}

bool is_robust(Method method) {
  return method == Method::rtb_dense || method == Method::rtb_sparse;
}

ModelHyperparams method_hyperparams(Method method, const MethodSettings& settings,
                                    const SimulationConfig& cfg) {
  ModelHyperparams hyper;
  hyper.h_x = settings.h_x > 0 ? settings.h_x : cfg.k;
  hyper.h_y = settings.h_y > 0 ? settings.h_y : std::min(cfg.k, cfg.q);
  if (is_sparse(method)) {
    hyper.eta_x = settings.eta_x;
    hyper.eta_y = settings.eta_y;
  }
  if (is_robust(method)) {
    hyper.center = settings.rtb.hyper.center;
    hyper.scale = settings.rtb.hyper.scale;
  } else {
    hyper.center = CenterKind::mean;
    hyper.scale = ScaleKind::std;
  }
  return hyper;
}

MethodFit fit_method(Method method, const Matrix& X, const Matrix& Y, const ModelHyperparams& hyper,
                     const MethodSettings& settings) {
  if (!is_robust(method)) return {fit_twoblock(X, Y, hyper), std::nullopt};
  RtbConfig cfg = settings.rtb;
  cfg.hyper = hyper;
  RtbFit fit = fit_rtb(X, Y, cfg);
  TwoblockModel model = fit.model;
  return {std::move(model), std::move(fit)};
}

const MethodSummary& ScenarioResult::at(Method method) const {
  for (const auto& m : methods)
    if (m.method == method) return m;
  throw Error("scenario result has no entry for method " + to_string(method));
}

void summarize(MethodSummary& summary) {
  std::vector<double> ok;
  for (double v : summary.mse)
    if (!std::isnan(v)) ok.push_back(v);
  summary.failures = static_cast<int>(summary.mse.size() - ok.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (ok.empty()) {
    summary.mean_mse = nan;
    summary.sd_mse = nan;
  } else {
    double sum = 0.0;
    for (double v : ok) sum += v;
    summary.mean_mse = sum / static_cast<double>(ok.size());
    double ss = 0.0;
    for (double v : ok) ss += (v - summary.mean_mse) * (v - summary.mean_mse);
    summary.sd_mse = ok.size() > 1 ? std::sqrt(ss / static_cast<double>(ok.size() - 1)) : 0.0;
  }
  if (is_sparse(summary.method)) {
    double sum = 0.0;
    int count = 0;
    for (double v : summary.f1) {
      if (std::isnan(v)) continue;
      sum += v;
      ++count;
    }
    summary.mean_f1 = count > 0 ? sum / count : nan;
  } else {
    summary.mean_f1.reset();
  }
}

std::vector<ScenarioResult> run_scenario_grid(const std::vector<SimulationConfig>& configs,
                                              const std::vector<Method>& methods, int repeats,
                                              std::uint64_t base_seed,
                                              const MethodSettings& settings, unsigned threads) {
  if (repeats < 1) throw Error("run_scenario_grid: repeats must be >= 1");
  if (methods.empty()) throw Error("run_scenario_grid: no methods given");
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<ScenarioResult> results;
  results.reserve(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    configs[c].validate();
    ScenarioResult res;
    res.scenario_id = "s" + std::to_string(c + 1);
    res.config = configs[c];
    res.repeats = repeats;
    for (Method m : methods) {
      MethodSummary s;
      s.method = m;
      s.mse.assign(static_cast<std::size_t>(repeats), nan);
      s.f1.assign(static_cast<std::size_t>(repeats), nan);
      res.methods.push_back(std::move(s));
    }
    results.push_back(std::move(res));
  }

  const std::size_t total = configs.size() * static_cast<std::size_t>(repeats);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < total; task = next++) {
      ScenarioResult& res = results[task / static_cast<std::size_t>(repeats)];
      const auto r = task % static_cast<std::size_t>(repeats);
      SimulationConfig cfg = res.config;
      cfg.seed = base_seed + r;
      const SimulatedData data = generate_latent_data(cfg, cfg.seed);
      const ContaminatedData cont = contaminate(data.X, data.Y, cfg);
      for (auto& summary : res.methods) {
        try {
          const ModelHyperparams hyper = method_hyperparams(summary.method, settings, cfg);
          const MethodFit fit = fit_method(summary.method, cont.X, cont.Y, hyper, settings);
          summary.mse[r] = mse_coefficients(fit.model.B, data.B_true);
          if (is_sparse(summary.method)) {
            summary.f1[r] = f1_selection(fit.model.latent.W, data.signal_mask);
          }
        } catch (const Error&) {
          // recorded as NaN and counted as a failure
        }
      }
    }
  };

  threads = std::max(1u, threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (auto& res : results)
    for (auto& summary : res.methods) summarize(summary);
  return results;
}

std::vector<SimulationConfig> full_scenario_grid() {
  const std::pair<int, int> dims[] = {{20, 0}, {20, 10}, {20, 80}, {150, 0}, {150, 50}, {150, 250}};
  const std::pair<double, ContaminationTarget> contamination[] = {
      {0.0, ContaminationTarget::none},    {0.1, ContaminationTarget::x_only},
      {0.1, ContaminationTarget::y_only},  {0.1, ContaminationTarget::both},
      {0.2, ContaminationTarget::x_only},  {0.2, ContaminationTarget::y_only},
      {0.2, ContaminationTarget::both}};
  std::vector<SimulationConfig> out;
  for (const auto& [signal, noise] : dims) {
    for (const auto& [fraction, target] : contamination) {
      SimulationConfig cfg;
      cfg.p_signal = signal;
      cfg.p_noise = noise;
      cfg.contamination_fraction = fraction;
      cfg.contamination_target = target;
      out.push_back(cfg);
    }
  }
  return out;
}

void write_scenario_csv(std::ostream& os, const std::vector<ScenarioResult>& results) {
  os << "scenario_id,dimensionality,contamination_fraction,contamination_target,method,"
        "mean_mse,sd_mse,mean_f1,failures,repeats\n";
  for (const auto& res : results) {
    const auto& cfg = res.config;
    for (const auto& s : res.methods) {
      os << res.scenario_id << ',' << cfg.p_signal << '+' << cfg.p_noise << ','
         << format_double(cfg.contamination_fraction) << ',' << to_string(cfg.contamination_target)
         << ',' << to_string(s.method) << ',' << format_double(s.mean_mse) << ','
         << format_double(s.sd_mse) << ',' << (s.mean_f1 ? format_double(*s.mean_f1) : "") << ','
         << s.failures << ',' << res.repeats << '\n';
    }
  }
}

}  // namespace twoblock
