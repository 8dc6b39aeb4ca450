#include "twoblock/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "twoblock/cross_validation.hpp"
#include "twoblock/error.hpp"
#include "twoblock/io.hpp"
#include "twoblock/rtb.hpp"
#include "twoblock/simulation.hpp"

namespace twoblock::cli {

namespace {

constexpr double kFlagThreshold = 0.5;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flags shared by every subcommand that fits a model.
struct ModelFlags {
  std::string x_path;
  std::string y_path;
  bool no_header = false;
  std::string method = "tb";
  int h_x = 1;
  int h_y = 1;
  std::optional<double> eta_x;  // unset: 0.5 for sparse methods
  double eta_y = 0.0;
  std::string center;  // empty: method default
  std::string scale;
  std::string weight_fn = "hampel";
  std::string cutoffs = "aggressive";
  double conv_tol = 1e-4;
  int max_iter = 100;
};

const std::vector<std::string> kMethods{"tb", "tb-sparse", "rtb", "rtb-sparse"};

void add_data_flags(CLI::App* sub, ModelFlags& f, bool required) {
  auto* x = sub->add_option("--x", f.x_path, "Predictor block CSV");
  auto* y = sub->add_option("--y", f.y_path, "Response block CSV");
  if (required) {
    x->required();
    y->required();
  }
  sub->add_flag("--no-header", f.no_header, "Treat the first CSV row as data");
}

void add_weighting_flags(CLI::App* sub, ModelFlags& f) {
  sub->add_option("--weight-fn", f.weight_fn, "RTB weight function")
      ->check(CLI::IsMember({"hampel", "huber", "fair", "identity"}));
  sub->add_option("--cutoffs", f.cutoffs, "Cutoff probabilities: aggressive (0.75,0.90,0.95) or standard (0.95,0.975,0.999)")
      ->check(CLI::IsMember({"aggressive", "standard"}));
  sub->add_option("--conv-tol", f.conv_tol, "RTB relative convergence tolerance")
      ->check(CLI::PositiveNumber);
  sub->add_option("--max-iter", f.max_iter, "RTB iteration limit")->check(CLI::PositiveNumber);
}

void add_model_flags(CLI::App* sub, ModelFlags& f) {
  sub->add_option("--method", f.method, "tb, tb-sparse, rtb or rtb-sparse")
      ->check(CLI::IsMember(kMethods));
  sub->add_option("--hx", f.h_x, "X-block components")->check(CLI::PositiveNumber);
  sub->add_option("--hy", f.h_y, "Y-block components")->check(CLI::PositiveNumber);
  sub->add_option("--eta-x", f.eta_x, "X-block sparsity in [0, 1)")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--eta-y", f.eta_y, "Y-block sparsity in [0, 1)")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--center", f.center, "mean, median or l1median")
      ->check(CLI::IsMember({"mean", "median", "l1median"}));
  sub->add_option("--scale", f.scale, "none, std, mad or tau2")
      ->check(CLI::IsMember({"none", "std", "mad", "tau2"}));
  add_weighting_flags(sub, f);
}

WeightFunctionSpec weight_spec(const ModelFlags& f) {
  WeightFunctionSpec spec =
      f.cutoffs == "standard" ? WeightFunctionSpec::standard() : WeightFunctionSpec::aggressive();
  spec.family = parse_weight_family(f.weight_fn);
  return spec;
}

ModelHyperparams hyperparams(const ModelFlags& f, Method method) {
  const double eta_x = f.eta_x.value_or(is_sparse(method) ? 0.5 : 0.0);
  if (!is_sparse(method) && (eta_x != 0.0 || f.eta_y != 0.0)) {
    throw UsageError("--eta-x/--eta-y need a sparse method (tb-sparse or rtb-sparse)");
  }
  if (eta_x >= 1.0 || f.eta_y >= 1.0) throw UsageError("sparsity parameters must be below 1");
  ModelHyperparams h;
  h.h_x = f.h_x;
  h.h_y = f.h_y;
  h.eta_x = eta_x;
  h.eta_y = f.eta_y;
  const bool robust = is_robust(method);
  h.center = f.center.empty() ? (robust ? CenterKind::median : CenterKind::mean)
                              : parse_center_kind(f.center);
  h.scale = f.scale.empty() ? (robust ? ScaleKind::mad : ScaleKind::std) : parse_scale_kind(f.scale);
  return h;
}

RtbConfig rtb_config(const ModelFlags& f, const ModelHyperparams& h) {
  RtbConfig cfg;
  cfg.hyper = h;
  cfg.weights = weight_spec(f);
  cfg.conv_tol = f.conv_tol;
  cfg.max_iter = f.max_iter;
  return cfg;
}

HeaderMode header_mode(bool no_header) { return no_header ? HeaderMode::none : HeaderMode::detect; }

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

void warn_if_unconverged(const RtbFit& fit, int max_iter, std::ostream& err) {
  if (!fit.converged) {
    err << "WARNING: RTB did not converge within " << max_iter << " iterations\n";
  }
}

void write_summary(std::ostream& os, const ModelDocument& doc) {
  const auto& m = doc.model;
  const auto& L = m.latent;
  os << "method: " << doc.method << '\n';
  os << "samples: " << L.T.rows() << "  features: " << m.n_features()
     << "  targets: " << m.n_targets() << '\n';
  os << "components: h_x=" << m.hyper.h_x << " h_y=" << m.hyper.h_y
     << "  eta_x=" << format_double(m.hyper.eta_x) << " eta_y=" << format_double(m.hyper.eta_y)
     << '\n';
  os << "preprocessing: center=" << to_string(m.hyper.center) << " scale=" << to_string(m.hyper.scale)
     << '\n';
  os << "X-weight nonzeros per component:";
  for (Index c = 0; c < L.W.cols(); ++c) os << ' ' << (L.W.col(c).array().abs() > 1e-12).count();
  os << '\n';
  os << "Y-weight nonzeros per component:";
  for (Index c = 0; c < L.V.cols(); ++c) os << ' ' << (L.V.col(c).array().abs() > 1e-12).count();
  os << '\n';
  Index kept = 0;
  for (Index j = 0; j < L.W.rows(); ++j) kept += L.W.row(j).cwiseAbs().maxCoeff() > 1e-12;
  os << "selected X variables: " << kept << '/' << L.W.rows() << '\n';
  if (doc.rtb) {
    const auto& r = *doc.rtb;
    os << "converged: " << (r.converged ? "yes" : "no") << "  iterations: " << r.iterations << '\n';
    os << "cases with combined weight < " << kFlagThreshold << ": "
       << (r.w_combined.array() < kFlagThreshold).count() << '/' << r.w_combined.size() << '\n';
  }
}

ModelDocument fit_document(const ModelFlags& f, std::ostream& err) {
  const Method method = parse_method(f.method);
  const ModelHyperparams h = hyperparams(f, method);
  const CsvMatrix X = read_matrix_csv(f.x_path, header_mode(f.no_header));
  const CsvMatrix Y = read_matrix_csv(f.y_path, header_mode(f.no_header));

  ModelDocument doc;
  doc.method = to_string(method);
  doc.x_names = X.names;
  doc.y_names = Y.names;
  if (is_robust(method)) {
    const RtbConfig cfg = rtb_config(f, h);
    const RtbFit fit = fit_rtb(X.values, Y.values, cfg);
    warn_if_unconverged(fit, cfg.max_iter, err);
    doc.model = fit.model;
    doc.rtb = RtbDiagnostics::from_fit(fit);
  } else {
    doc.model = fit_twoblock(X.values, Y.values, h);
  }
  return doc;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = parse_double(item);
    if (!v) throw UsageError(std::string(flag) + ": cannot parse '" + item + "'");
    out.push_back(static_cast<T>(*v));
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

std::string trim_copy(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Pulls --config FILE out of the argument list and splices its key=value
// lines in right after the subcommand, ahead of the explicit flags.
std::vector<std::string> splice_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file path");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return args;
  if (args.empty()) throw UsageError("--config given without a subcommand");

  std::ifstream in(*path);
  if (!in) throw UsageError("cannot open config file '" + *path + "'");
  std::vector<std::string> injected;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim_copy(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim_copy(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    injected.push_back("--" + key + "=" + trim_copy(line.substr(eq + 1)));
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust two-block dimension reduction and regression", "twoblock"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  // fit
  ModelFlags fit_flags;
  std::string fit_out, fit_summary;
  auto* fit = app.add_subcommand("fit", "Fit a model and write it as JSON");
  add_data_flags(fit, fit_flags, true);
  add_model_flags(fit, fit_flags);
  fit->add_option("--out", fit_out, "Model JSON output")->required();
  fit->add_option("--summary", fit_summary, "Write the summary here instead of stdout");

  // predict
  std::string predict_model, predict_x, predict_out;
  bool predict_no_header = false;
  auto* predict_cmd = app.add_subcommand("predict", "Predict responses with a saved model");
  predict_cmd->add_option("--model", predict_model, "Model JSON")->required();
  predict_cmd->add_option("--x", predict_x, "Predictor CSV")->required();
  predict_cmd->add_option("--out", predict_out, "Prediction CSV output")->required();
  predict_cmd->add_flag("--no-header", predict_no_header, "Treat the first CSV row as data");

  // simulate
  SimulationConfig sim;
  ModelFlags sim_flags;
  std::string sim_methods = "tb,tb-sparse,rtb,rtb-sparse", sim_target = "none", sim_out;
  int sim_repeats = 50, sim_hx = 0, sim_hy = 0;
  double sim_eta_x = 0.5, sim_eta_y = 0.0;
  std::uint64_t sim_seed = 1;
  unsigned sim_threads = 1;
  bool sim_full_grid = false;
  auto* simulate = app.add_subcommand("simulate", "Run the latent-variable simulation study");
  simulate->add_option("--n", sim.n, "Cases")->check(CLI::PositiveNumber);
  simulate->add_option("--k", sim.k, "Latent dimension")->check(CLI::PositiveNumber);
  simulate->add_option("--q", sim.q, "Responses")->check(CLI::PositiveNumber);
  simulate->add_option("--p-signal", sim.p_signal, "Informative X variables")->check(CLI::PositiveNumber);
  simulate->add_option("--p-noise", sim.p_noise, "Uninformative X variables")->check(CLI::NonNegativeNumber);
  simulate->add_option("--sigma-e", sim.sigma_e, "X noise sd")->check(CLI::NonNegativeNumber);
  simulate->add_option("--sigma-f", sim.sigma_f, "Y noise sd")->check(CLI::NonNegativeNumber);
  simulate->add_option("--fraction", sim.contamination_fraction, "Contaminated fraction")
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--target", sim_target, "none, x_only, y_only or both")
      ->check(CLI::IsMember({"none", "x_only", "y_only", "both"}));
  simulate->add_option("--shift", sim.shift_magnitude, "Additive outlier shift");
  simulate->add_option("--repeats", sim_repeats, "Repeats per scenario")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_seed, "Base seed; repeat r uses seed + r");
  simulate->add_option("--methods", sim_methods, "Comma-separated methods");
  simulate->add_option("--hx", sim_hx, "X components (0: k)")->check(CLI::NonNegativeNumber);
  simulate->add_option("--hy", sim_hy, "Y components (0: min(k, q))")->check(CLI::NonNegativeNumber);
  simulate->add_option("--eta-x", sim_eta_x, "Sparse-method X sparsity")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--eta-y", sim_eta_y, "Sparse-method Y sparsity")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--threads", sim_threads, "Worker threads")->check(CLI::PositiveNumber);
  simulate->add_flag("--full-grid", sim_full_grid, "Run the full 42-scenario grid");
  add_weighting_flags(simulate, sim_flags);
  simulate->add_option("--out", sim_out, "Scenario CSV output")->required();

  // cv
  ModelFlags cv_flags;
  std::string cv_hx = "1,2,3", cv_hy = "1", cv_eta_x, cv_eta_y = "0", cv_out, cv_best;
  int cv_folds = 5;
  bool cv_robust = false;
  std::uint64_t cv_seed = 1;
  auto* cv = app.add_subcommand("cv", "Cross-validate a hyperparameter grid");
  add_data_flags(cv, cv_flags, true);
  cv->add_option("--method", cv_flags.method, "tb, tb-sparse, rtb or rtb-sparse")
      ->check(CLI::IsMember(kMethods));
  cv->add_option("--center", cv_flags.center, "mean, median or l1median")
      ->check(CLI::IsMember({"mean", "median", "l1median"}));
  cv->add_option("--scale", cv_flags.scale, "none, std, mad or tau2")
      ->check(CLI::IsMember({"none", "std", "mad", "tau2"}));
  add_weighting_flags(cv, cv_flags);
  cv->add_option("--hx-grid", cv_hx, "Comma-separated h_x values");
  cv->add_option("--hy-grid", cv_hy, "Comma-separated h_y values");
  cv->add_option("--eta-x-grid", cv_eta_x, "Comma-separated eta_x values (sparse methods)");
  cv->add_option("--eta-y-grid", cv_eta_y, "Comma-separated eta_y values (sparse methods)");
  cv->add_option("--folds", cv_folds, "Number of folds")->check(CLI::Range(2, 1000000));
  cv->add_flag("--robust", cv_robust, "Trimmed, MAD-scaled prediction error criterion");
  cv->add_option("--seed", cv_seed, "Fold shuffle seed");
  cv->add_option("--out", cv_out, "Grid table CSV output")->required();
  cv->add_option("--best", cv_best, "Best-parameter JSON output")->required();

  // weights
  ModelFlags w_flags;
  w_flags.method = "rtb";
  std::string w_model, w_out, w_flagged;
  auto* weights = app.add_subcommand("weights", "Export RTB case weights and flagged cases");
  add_data_flags(weights, w_flags, false);
  add_model_flags(weights, w_flags);
  weights->add_option("--model", w_model, "Saved RTB model JSON (instead of --x/--y)");
  weights->add_option("--out", w_out, "Case-weight CSV output")->required();
  weights->add_option("--flagged", w_flagged, "Flagged-case CSV output (default: stdout)");

  try {
    std::vector<std::string> args = splice_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "ERROR: usage: " << e.what() << '\n';
    err << "Run with --help for more information.\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "ERROR: usage: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*fit) {
      const ModelDocument doc = fit_document(fit_flags, err);
      save_model(fit_out, doc);
      if (fit_summary.empty()) {
        write_summary(out, doc);
      } else {
        auto os = open_output(fit_summary);
        write_summary(os, doc);
      }
    } else if (*predict_cmd) {
      const ModelDocument doc = load_model(predict_model);
      const CsvMatrix X = read_matrix_csv(predict_x, header_mode(predict_no_header));
      write_matrix_csv(predict_out, twoblock::predict(doc.model, X.values), doc.y_names);
    } else if (*simulate) {
      sim.contamination_target = parse_contamination_target(sim_target);
      std::vector<Method> methods;
      std::stringstream ss(sim_methods);
      for (std::string item; std::getline(ss, item, ',');) {
        try {
          methods.push_back(parse_method(trim_copy(item)));
        } catch (const Error& e) {
          throw UsageError(e.what());
        }
      }
      if (sim.contamination_fraction > 0.0 && sim.contamination_target == ContaminationTarget::none) {
        throw UsageError("--fraction > 0 needs --target");
      }
      MethodSettings settings;
      settings.h_x = sim_hx;
      settings.h_y = sim_hy;
      settings.eta_x = sim_eta_x;
      settings.eta_y = sim_eta_y;
      settings.rtb.weights = weight_spec(sim_flags);
      settings.rtb.conv_tol = sim_flags.conv_tol;
      settings.rtb.max_iter = sim_flags.max_iter;
      std::vector<SimulationConfig> configs;
      if (sim_full_grid) {
        configs = full_scenario_grid();
        for (auto& c : configs) {
          c.n = sim.n;
          c.k = sim.k;
          c.q = sim.q;
          c.sigma_e = sim.sigma_e;
          c.sigma_f = sim.sigma_f;
          c.shift_magnitude = sim.shift_magnitude;
        }
      } else {
        configs.push_back(sim);
      }
      const auto results = run_scenario_grid(configs, methods, sim_repeats, sim_seed, settings, sim_threads);
      auto os = open_output(sim_out);
      write_scenario_csv(os, results);
      for (const auto& r : results)
        for (const auto& m : r.methods)
          if (m.failures > 0)
            err << "WARNING: " << r.scenario_id << ' ' << to_string(m.method) << ": " << m.failures
                << " failed repeat(s)\n";
    } else if (*cv) {
      const Method method = parse_method(cv_flags.method);
      const CsvMatrix X = read_matrix_csv(cv_flags.x_path, header_mode(cv_flags.no_header));
      const CsvMatrix Y = read_matrix_csv(cv_flags.y_path, header_mode(cv_flags.no_header));
      if (cv_eta_x.empty()) cv_eta_x = is_sparse(method) ? "0.5" : "0";
      const auto hx = parse_list<int>(cv_hx, "--hx-grid");
      const auto hy = parse_list<int>(cv_hy, "--hy-grid");
      const auto ex = parse_list<double>(cv_eta_x, "--eta-x-grid");
      const auto ey = parse_list<double>(cv_eta_y, "--eta-y-grid");
      std::vector<ModelHyperparams> grid;
      for (int a : hx)
        for (int b : hy)
          for (double c : ex)
            for (double d : ey) {
              ModelFlags point = cv_flags;
              point.h_x = a;
              point.h_y = b;
              point.eta_x = c;
              point.eta_y = d;
              grid.push_back(hyperparams(point, method));
            }
      CvOptions options;
      options.folds = cv_folds;
      options.robust = cv_robust;
      options.seed = cv_seed;
      options.use_rtb = is_robust(method);
      options.rtb = rtb_config(cv_flags, grid.front());
      const CvResult result = cross_validate(X.values, Y.values, grid, options);
      for (const auto& row : result.table)
        if (!row.message.empty())
          err << "WARNING: grid point h_x=" << row.hyper.h_x << " h_y=" << row.hyper.h_y
              << " eta_x=" << format_double(row.hyper.eta_x) << " failed (" << row.message << ")\n";
      {
        auto os = open_output(cv_out);
        write_cv_table(os, result);
      }
      double best_score = 0.0;
      for (const auto& row : result.table)
        if (row.hyper.h_x == result.best.h_x && row.hyper.h_y == result.best.h_y &&
            row.hyper.eta_x == result.best.eta_x && row.hyper.eta_y == result.best.eta_y)
          best_score = row.score;
      const nlohmann::json best = {{"method", to_string(method)},
                                   {"h_x", result.best.h_x},
                                   {"h_y", result.best.h_y},
                                   {"eta_x", result.best.eta_x},
                                   {"eta_y", result.best.eta_y},
                                   {"center", to_string(result.best.center)},
                                   {"scale", to_string(result.best.scale)},
                                   {"score", best_score},
                                   {"folds", cv_folds},
                                   {"robust", cv_robust}};
      auto os = open_output(cv_best);
      os << best.dump(1) << '\n';
    } else if (*weights) {
      RtbDiagnostics diag;
      if (!w_model.empty()) {
        const ModelDocument doc = load_model(w_model);
        if (!doc.rtb) throw Error("model '" + w_model + "' carries no RTB case weights");
        diag = *doc.rtb;
      } else {
        if (w_flags.x_path.empty() || w_flags.y_path.empty()) {
          throw UsageError("weights needs --model or both --x and --y");
        }
        const Method method = parse_method(w_flags.method);
        if (!is_robust(method)) throw UsageError("weights needs an RTB method (rtb or rtb-sparse)");
        const ModelDocument doc = fit_document(w_flags, err);
        diag = *doc.rtb;
      }
      {
        auto os = open_output(w_out);
        write_case_weights_csv(os, diag);
      }
      std::ofstream file;
      if (!w_flagged.empty()) file = open_output(w_flagged);
      std::ostream& flagged = w_flagged.empty() ? out : file;
      flagged << "index,w_combined\n";
      for (Index i = 0; i < diag.w_combined.size(); ++i)
        if (diag.w_combined(i) < kFlagThreshold) flagged << i << ',' << format_double(diag.w_combined(i)) << '\n';
    }
  } catch (const UsageError& e) {
    err << "ERROR: usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "ERROR: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace twoblock::cli
