#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quadvp/dynamics.hpp"
#include "quadvp/generic_map.hpp"

namespace quadvp {

enum class DiagramPlane { TauAlpha, TS };

struct DiagramSpec {
    DiagramPlane plane = DiagramPlane::TauAlpha;
    double x_min = -4.0;
    double x_max = 4.0;
    double y_min = -4.0;
    double y_max = 4.0;
    int nx = 200;
    int ny = 200;
    /// Used in the (tau, alpha) plane; a + b + c must be 1.
    QuadraticForm2 quad{0.5, 0.0, 0.5};
    double sigma = 0.0;
};

struct DiagramCell {
    int i = 0;
    int j = 0;
    /// Cell center: (tau, alpha) or (t, s).
    double x = 0.0;
    double y = 0.0;
    int fixed_point_count = 0;
    std::optional<StabilityClass> plus;
    std::optional<StabilityClass> minus;
    bool plus_complex = false;
    bool minus_complex = false;
    std::optional<double> plus_phase;

    /// Region identity; with `with_complex` the double-root curves also separate regions.
    std::string region_key(bool with_complex = false) const;
};

struct DiagramCurve {
    std::string name;
    /// Polylines clipped to the diagram window.
    std::vector<std::vector<Eigen::Vector2d>> segments;
};

struct StabilityDiagram {
    DiagramSpec spec;
    /// Row-major: index j * nx + i, j along y.
    std::vector<DiagramCell> cells;
    std::vector<DiagramCurve> curves;

    const DiagramCell& cell(int i, int j) const {
        return cells[static_cast<std::size_t>(j) * static_cast<std::size_t>(spec.nx) + static_cast<std::size_t>(i)];
    }
    double dx() const { return (spec.x_max - spec.x_min) / spec.nx; }
    double dy() const { return (spec.y_max - spec.y_min) / spec.ny; }
};

StabilityDiagram stability_diagram(const DiagramSpec& spec, int curve_samples = 2000);

/// Boundary curves only, in the plane of `spec`.
std::vector<DiagramCurve> diagram_curves(const DiagramSpec& spec, int curve_samples = 2000);

}  // namespace quadvp
