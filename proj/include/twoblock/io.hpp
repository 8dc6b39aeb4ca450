#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twoblock/rtb.hpp"
#include "twoblock/twoblock.hpp"

namespace twoblock {

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

/// Full-string parse of a decimal number (surrounding blanks allowed).
std::optional<double> parse_double(std::string_view text);

struct CsvMatrix {
  Matrix values;
  std::vector<std::string> names;  ///< empty when the file had no header
};

enum class HeaderMode { detect, none };

/// Numeric matrix from comma-separated text. With HeaderMode::detect a first
/// row containing any non-numeric cell is taken as column names. Ragged rows,
/// non-numeric body cells and empty input throw twoblock::Error quoting the
/// 1-based line number.
CsvMatrix parse_matrix_csv(std::istream& in, HeaderMode mode = HeaderMode::detect);
CsvMatrix read_matrix_csv(const std::string& path, HeaderMode mode = HeaderMode::detect);

void write_matrix_csv(std::ostream& os, const Matrix& M, const std::vector<std::string>& names = {});
void write_matrix_csv(const std::string& path, const Matrix& M,
                      const std::vector<std::string>& names = {});

/// Diagnostics carried alongside an RTB model.
struct RtbDiagnostics {
  Vector wX;
  Vector wY;
  Vector w_combined;
  int iterations = 0;
  bool converged = false;
  std::vector<double> coef_norm_trace;

  static RtbDiagnostics from_fit(const RtbFit& fit);
};

/// Everything persisted for a fitted model (JSON, "format_version": 1).
struct ModelDocument {
  std::string method = "tb";
  TwoblockModel model;
  std::optional<RtbDiagnostics> rtb;
  std::vector<std::string> x_names;
  std::vector<std::string> y_names;
};

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const ModelDocument& doc, int indent = 1);
ModelDocument model_from_json(std::string_view text);
void save_model(const std::string& path, const ModelDocument& doc);
ModelDocument load_model(const std::string& path);

/// Columns: index, wX, wY, w_combined (0-based case index).
void write_case_weights_csv(std::ostream& os, const RtbDiagnostics& diag);

}  // namespace twoblock
