#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "twoblock/cross_validation.hpp"
#include "twoblock/error.hpp"
#include "twoblock/io.hpp"
#include "twoblock/rtb.hpp"
#include "twoblock/simulation.hpp"
#include "twoblock/twoblock.hpp"
#include "twoblock/weighting.hpp"

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using namespace twoblock;

namespace {

ModelHyperparams make_hyper(int h_x, int h_y, double eta_x, double eta_y, const std::string& center,
                            const std::string& scale) {
  ModelHyperparams h;
  h.h_x = h_x;
  h.h_y = h_y;
  h.eta_x = eta_x;
  h.eta_y = eta_y;
  h.center = parse_center_kind(center);
  h.scale = parse_scale_kind(scale);
  return h;
}

WeightFunctionSpec make_weights(const std::string& family, const std::string& cutoffs) {
  WeightFunctionSpec spec =
      cutoffs == "standard" ? WeightFunctionSpec::standard() : WeightFunctionSpec::aggressive();
  if (cutoffs != "standard" && cutoffs != "aggressive") throw Error("unknown cutoff preset '" + cutoffs + "'");
  spec.family = parse_weight_family(family);
  return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dense, sparse and robust two-block dimension reduction";

  py::register_exception<Error>(m, "TwoblockError", PyExc_ValueError);

  py::class_<ModelHyperparams>(m, "ModelHyperparams")
      .def(py::init(&make_hyper), py::arg("h_x") = 1, py::arg("h_y") = 1, py::arg("eta_x") = 0.0,
           py::arg("eta_y") = 0.0, py::arg("center") = "mean", py::arg("scale") = "std")
      .def_readwrite("h_x", &ModelHyperparams::h_x)
      .def_readwrite("h_y", &ModelHyperparams::h_y)
      .def_readwrite("eta_x", &ModelHyperparams::eta_x)
      .def_readwrite("eta_y", &ModelHyperparams::eta_y)
      .def_property_readonly("center", [](const ModelHyperparams& h) { return to_string(h.center); })
      .def_property_readonly("scale", [](const ModelHyperparams& h) { return to_string(h.scale); });

  py::class_<TwoblockModel>(m, "TwoblockModel")
      .def_property_readonly("W", [](const TwoblockModel& t) { return t.latent.W; })
      .def_property_readonly("V", [](const TwoblockModel& t) { return t.latent.V; })
      .def_property_readonly("T", [](const TwoblockModel& t) { return t.latent.T; })
      .def_property_readonly("U", [](const TwoblockModel& t) { return t.latent.U; })
      .def_property_readonly("P", [](const TwoblockModel& t) { return t.latent.P; })
      .def_property_readonly("Q", [](const TwoblockModel& t) { return t.latent.Q; })
      .def_readonly("B", &TwoblockModel::B)
      .def_readonly("intercept", &TwoblockModel::intercept)
      .def_readonly("hyperparams", &TwoblockModel::hyper)
      .def("predict", [](const TwoblockModel& t, const Matrix& X) { return predict(t, X); })
      .def("transform", [](const TwoblockModel& t, const Matrix& X) { return transform(t, X); });

  py::class_<RtbFit>(m, "RtbFit")
      .def_readonly("model", &RtbFit::model)
      .def_readonly("wX", &RtbFit::wX)
      .def_readonly("wY", &RtbFit::wY)
      .def_readonly("w_combined", &RtbFit::w_combined)
      .def_readonly("iterations", &RtbFit::iterations)
      .def_readonly("converged", &RtbFit::converged)
      .def_readonly("coef_norm_trace", &RtbFit::coef_norm_trace);

  m.def("fit_twoblock", &fit_twoblock, py::arg("X"), py::arg("Y"), py::arg("hyperparams"),
        "Fit dense (eta = 0) or sparse two-block dimension reduction.");

  m.def(
      "fit_rtb",
      [](const Matrix& X, const Matrix& Y, int h_x, int h_y, double eta_x, double eta_y,
         const std::string& center, const std::string& scale, const std::string& weight_fn,
         const std::string& cutoffs, double conv_tol, int max_iter) {
        RtbConfig cfg;
        cfg.hyper = make_hyper(h_x, h_y, eta_x, eta_y, center, scale);
        cfg.weights = make_weights(weight_fn, cutoffs);
        cfg.conv_tol = conv_tol;
        cfg.max_iter = max_iter;
        return fit_rtb(X, Y, cfg);
      },
      py::arg("X"), py::arg("Y"), py::arg("h_x") = 1, py::arg("h_y") = 1, py::arg("eta_x") = 0.0,
      py::arg("eta_y") = 0.0, py::arg("center") = "median", py::arg("scale") = "mad",
      py::arg("weight_fn") = "hampel", py::arg("cutoffs") = "aggressive", py::arg("conv_tol") = 1e-4,
      py::arg("max_iter") = 100, "Robust two-block fit by iterative reweighting.");

  m.def("predict", &predict, py::arg("model"), py::arg("X"));
  m.def("transform", &transform, py::arg("model"), py::arg("X"));

  m.def("hampel_psi", &hampel_psi, py::arg("d"), py::arg("c1"), py::arg("c2"), py::arg("c3"));
  m.def("chi_square_quantile", &chi_square_quantile, py::arg("p"), py::arg("df"));
  m.def("soft_threshold", &soft_threshold, py::arg("w"), py::arg("eta"));
  m.def("l1_median", &l1_median, py::arg("X"), py::arg("tol") = 1e-8, py::arg("max_iter") = 500);
  m.def("tau2_scale", &tau2_scale, py::arg("x"));

  m.def(
      "generate_latent_data",
      [](int n, int k, int q, int p_signal, int p_noise, double sigma_e, double sigma_f,
         std::uint64_t seed) {
        SimulationConfig cfg;
        cfg.n = n;
        cfg.k = k;
        cfg.q = q;
        cfg.p_signal = p_signal;
        cfg.p_noise = p_noise;
        cfg.sigma_e = sigma_e;
        cfg.sigma_f = sigma_f;
        const SimulatedData d = generate_latent_data(cfg, seed);
        py::dict out;
        out["X"] = d.X;
        out["Y"] = d.Y;
        out["B_true"] = d.B_true;
        out["signal_mask"] = d.signal_mask;
        return out;
      },
      py::arg("n") = 100, py::arg("k") = 3, py::arg("q") = 4, py::arg("p_signal") = 20,
      py::arg("p_noise") = 0, py::arg("sigma_e") = 0.5, py::arg("sigma_f") = 0.5, py::arg("seed") = 0);

  m.def(
      "contaminate",
      [](const Matrix& X, const Matrix& Y, double fraction, const std::string& target, double shift,
         std::uint64_t seed) {
        SimulationConfig cfg;
        cfg.contamination_fraction = fraction;
        cfg.contamination_target = parse_contamination_target(target);
        cfg.shift_magnitude = shift;
        cfg.seed = seed;
        const ContaminatedData c = contaminate(X, Y, cfg);
        return py::make_tuple(c.X, c.Y, c.outlier_indices);
      },
      py::arg("X"), py::arg("Y"), py::arg("fraction"), py::arg("target"), py::arg("shift") = 10.0,
      py::arg("seed") = 0);

  m.def("mse_coefficients", &mse_coefficients, py::arg("B_hat"), py::arg("B_true"));
  m.def("f1_selection", &f1_selection, py::arg("W"), py::arg("signal_mask"));

  m.def(
      "cross_validate",
      [](const Matrix& X, const Matrix& Y, const std::vector<ModelHyperparams>& grid, int folds,
         bool robust, bool use_rtb, std::uint64_t seed) {
        CvOptions options;
        options.folds = folds;
        options.robust = robust;
        options.use_rtb = use_rtb;
        options.seed = seed;
        const CvResult res = cross_validate(X, Y, grid, options);
        std::vector<double> scores;
        for (const auto& row : res.table) scores.push_back(row.score);
        return py::make_tuple(res.best, scores);
      },
      py::arg("X"), py::arg("Y"), py::arg("grid"), py::arg("folds") = 5, py::arg("robust") = false,
      py::arg("use_rtb") = false, py::arg("seed") = 0,
      "Returns (best hyperparameters, per-grid-point scores).");

  m.def(
      "model_to_json",
      [](const TwoblockModel& model, const std::string& method) {
        ModelDocument doc;
        doc.method = method;
        doc.model = model;
        return model_to_json(doc);
      },
      py::arg("model"), py::arg("method") = "tb");
  m.def(
      "model_from_json", [](const std::string& text) { return model_from_json(text).model; },
      py::arg("text"));

#ifdef VERSION_INFO
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
