#include "twoblock/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "twoblock/error.hpp"

namespace twoblock {

using nlohmann::json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto blank = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && blank(s.front())) s.remove_prefix(1);
  while (!s.empty() && blank(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

[[noreturn]] void csv_error(const std::string& what, std::size_t line) {
  throw Error("CSV line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

CsvMatrix parse_matrix_csv(std::istream& in, HeaderMode mode) {
  CsvMatrix out;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_cells(line);
    if (first) {
      first = false;
      width = cells.size();
      if (mode == HeaderMode::detect) {
        bool numeric = true;
        for (auto c : cells) numeric = numeric && parse_double(c).has_value();
        if (!numeric) {
          for (auto c : cells) out.names.push_back(unquote(c));
          continue;
        }
      }
    }
    if (cells.size() != width) {
      csv_error("expected " + std::to_string(width) + " fields, found " + std::to_string(cells.size()),
                line_no);
    }
    std::vector<double> row;
    row.reserve(width);
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto v = parse_double(cells[j]);
      if (!v) csv_error("non-numeric value '" + std::string(cells[j]) + "' in column " + std::to_string(j + 1), line_no);
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error("CSV line " + std::to_string(line_no) + ": no numeric rows");

  out.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) out.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return out;
}

CsvMatrix read_matrix_csv(const std::string& path, HeaderMode mode) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return parse_matrix_csv(in, mode);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_matrix_csv(std::ostream& os, const Matrix& M, const std::vector<std::string>& names) {
  if (!names.empty()) {
    for (std::size_t j = 0; j < names.size(); ++j) os << (j ? "," : "") << names[j];
    os << '\n';
  }
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) os << (j ? "," : "") << format_double(M(i, j));
    os << '\n';
  }
}

void write_matrix_csv(const std::string& path, const Matrix& M, const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write_matrix_csv(out, M, names);
}

RtbDiagnostics RtbDiagnostics::from_fit(const RtbFit& fit) {
  return {fit.wX, fit.wY, fit.w_combined, fit.iterations, fit.converged, fit.coef_norm_trace};
}

namespace {

json matrix_json(const Matrix& M) {
  json data = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    data.push_back(std::move(row));
  }
  return {{"rows", M.rows()}, {"cols", M.cols()}, {"data", std::move(data)}};
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Matrix matrix_from(const json& j) {
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  const auto& data = j.at("data");
  if (static_cast<Index>(data.size()) != rows) throw Error("model JSON: matrix row count mismatch");
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = data.at(static_cast<std::size_t>(i));
    if (static_cast<Index>(row.size()) != cols) throw Error("model JSON: matrix column count mismatch");
    for (Index k = 0; k < cols; ++k) M(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  return M;
}

Vector vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

json preprocess_json(const PreprocessParams& p) {
  return {{"center_kind", to_string(p.center_kind)},
          {"scale_kind", to_string(p.scale_kind)},
          {"centers", vector_json(p.centers)},
          {"scales", vector_json(p.scales)}};
}

PreprocessParams preprocess_from(const json& j) {
  PreprocessParams p;
  p.center_kind = parse_center_kind(j.at("center_kind").get<std::string>());
  p.scale_kind = parse_scale_kind(j.at("scale_kind").get<std::string>());
  p.centers = vector_from(j.at("centers"));
  p.scales = vector_from(j.at("scales"));
  return p;
}

}  // namespace

std::string model_to_json(const ModelDocument& doc, int indent) {
  const auto& m = doc.model;
  const auto& h = m.hyper;
  json j;
  j["format_version"] = kModelFormatVersion;
  j["method"] = doc.method;
  j["n_samples"] = m.latent.T.rows();
  j["n_features"] = m.n_features();
  j["n_targets"] = m.n_targets();
  j["hyperparams"] = {{"h_x", h.h_x},         {"h_y", h.h_y},
                      {"eta_x", h.eta_x},     {"eta_y", h.eta_y},
                      {"center", to_string(h.center)}, {"scale", to_string(h.scale)}};
  j["x_preprocess"] = preprocess_json(m.x_params);
  j["y_preprocess"] = preprocess_json(m.y_params);
  j["x_names"] = doc.x_names;
  j["y_names"] = doc.y_names;
  j["W"] = matrix_json(m.latent.W);
  j["V"] = matrix_json(m.latent.V);
  j["T"] = matrix_json(m.latent.T);
  j["U"] = matrix_json(m.latent.U);
  j["P"] = matrix_json(m.latent.P);
  j["Q"] = matrix_json(m.latent.Q);
  j["R"] = matrix_json(m.latent.R);
  j["B_scaled"] = matrix_json(m.latent.B_scaled);
  j["B"] = matrix_json(m.B);
  j["intercept"] = vector_json(m.intercept);
  if (doc.rtb) {
    const auto& r = *doc.rtb;
    j["rtb"] = {{"wX", vector_json(r.wX)},
                {"wY", vector_json(r.wY)},
                {"w_combined", vector_json(r.w_combined)},
                {"iterations", r.iterations},
                {"converged", r.converged},
                {"coef_norm_trace", r.coef_norm_trace}};
  }
  return j.dump(indent);
}

ModelDocument model_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error("unsupported model format_version " + std::to_string(version));
    }
    ModelDocument doc;
    doc.method = j.at("method").get<std::string>();
    const auto& h = j.at("hyperparams");
    auto& m = doc.model;
    m.hyper.h_x = h.at("h_x").get<int>();
    m.hyper.h_y = h.at("h_y").get<int>();
    m.hyper.eta_x = h.at("eta_x").get<double>();
    m.hyper.eta_y = h.at("eta_y").get<double>();
    m.hyper.center = parse_center_kind(h.at("center").get<std::string>());
    m.hyper.scale = parse_scale_kind(h.at("scale").get<std::string>());
    m.x_params = preprocess_from(j.at("x_preprocess"));
    m.y_params = preprocess_from(j.at("y_preprocess"));
    doc.x_names = j.value("x_names", std::vector<std::string>{});
    doc.y_names = j.value("y_names", std::vector<std::string>{});
    m.latent.W = matrix_from(j.at("W"));
    m.latent.V = matrix_from(j.at("V"));
    m.latent.T = matrix_from(j.at("T"));
    m.latent.U = matrix_from(j.at("U"));
    m.latent.P = matrix_from(j.at("P"));
    m.latent.Q = matrix_from(j.at("Q"));
    m.latent.R = matrix_from(j.at("R"));
    m.latent.B_scaled = matrix_from(j.at("B_scaled"));
    m.B = matrix_from(j.at("B"));
    m.intercept = vector_from(j.at("intercept"));
    if (m.intercept.size() != m.B.cols() || m.x_params.width() != m.B.rows() ||
        m.y_params.width() != m.B.cols()) {
      throw Error("model JSON: inconsistent shapes");
    }
    if (j.contains("rtb")) {
      const auto& r = j.at("rtb");
      doc.rtb = RtbDiagnostics{vector_from(r.at("wX")),
                               vector_from(r.at("wY")),
                               vector_from(r.at("w_combined")),
                               r.at("iterations").get<int>(),
                               r.at("converged").get<bool>(),
                               r.at("coef_norm_trace").get<std::vector<double>>()};
    }
    return doc;
  } catch (const json::exception& e) {
    throw Error(std::string("model JSON: ") + e.what());
  }
}

void save_model(const std::string& path, const ModelDocument& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << model_to_json(doc) << '\n';
}

ModelDocument load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

void write_case_weights_csv(std::ostream& os, const RtbDiagnostics& diag) {
  os << "index,wX,wY,w_combined\n";
  for (Index i = 0; i < diag.w_combined.size(); ++i) {
    os << i << ',' << format_double(diag.wX(i)) << ',' << format_double(diag.wY(i)) << ','
       << format_double(diag.w_combined(i)) << '\n';
  }
}

}  // namespace twoblock
