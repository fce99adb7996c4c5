#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "quadvp/diagram.hpp"
#include "quadvp/error.hpp"
#include "quadvp/dynamics.hpp"
#include "quadvp/manifold.hpp"
#include "quadvp/normalform.hpp"
#include "quadvp/polymap.hpp"
#include "quadvp/shear.hpp"

namespace quadvp {

inline constexpr const char* kVersion = "0.1.0";

/// Parse failure with 1-based line and column.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column);
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// { "dim": n, "const": [n], "linear": [n][n], "quad": [n][n][n] }.
QuadMap map_from_json(const nlohmann::json& j);
nlohmann::json map_to_json(const QuadMap& m);
nlohmann::json parse_json_text(const std::string& text);
QuadMap read_map_file(const std::filesystem::path& path);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

nlohmann::json shear_to_json(const ShearData& d);
nlohmann::json certificate_to_json(const Certificate& c);
nlohmann::json normal_form_to_json(const NormalForm& nf, const std::optional<GenericReduction>& generic);
nlohmann::json generic_params_to_json(const GenericMapParams& p);
nlohmann::json fixed_point_to_json(const FixedPointReport& fp);

/// Generic parameters from a normal-form file: its "generic" block (sigma = 0)
/// or, failing that, case I "params".
GenericMapParams generic_params_from_json(const nlohmann::json& j);

/// Round-trip exact decimal text of a double.
std::string format_double(double x);

/// CSV with a leading "# " metadata line and a header row.
std::string csv_text(const std::string& metadata, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);

std::string diagram_csv(const StabilityDiagram& d, const std::string& metadata);
std::string diagram_svg(const StabilityDiagram& d, const std::string& metadata);
std::string orbit_csv(const OrbitRecord& orbit, const std::string& metadata);
std::string mesh_obj(const ManifoldMesh& mesh, const std::string& metadata);
nlohmann::json mesh_sidecar(const ManifoldMesh& mesh);
std::string curves_csv(const std::vector<HeteroclinicCurve>& curves, const std::string& metadata);

/// Write via a temporary file in the same directory and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace quadvp
