#pragma once

#include <string>
#include <string_view>

#include <Eigen/Core>

namespace twoblock {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class CenterKind { mean, median, l1median };
enum class ScaleKind { none, std, mad, tau2 };

std::string to_string(CenterKind kind);
std::string to_string(ScaleKind kind);

// Throw twoblock::Error on unknown names.
CenterKind parse_center_kind(std::string_view name);
ScaleKind parse_scale_kind(std::string_view name);

}  // namespace twoblock
