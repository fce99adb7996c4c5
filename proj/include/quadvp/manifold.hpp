#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quadvp/dynamics.hpp"
#include "quadvp/generic_map.hpp"

namespace quadvp {

enum class ManifoldKind { Stable, Unstable };

/// Real invariant subspace E with Df B = B A, B having unit (or, for a complex
/// pair, real/imaginary) eigenvector columns.
struct InvariantSubspace {
    Eigen::MatrixXd basis;
    Eigen::MatrixXd action;
    /// Rotation form [[a, b], [-b, a]] of a complex pair.
    bool complex_pair = false;
};

struct LinearData {
    Eigen::Vector3d point = Eigen::Vector3d::Zero();
    Eigen::Matrix3d jacobian = Eigen::Matrix3d::Identity();
    InvariantSubspace stable;
    InvariantSubspace unstable;

    const InvariantSubspace& subspace(ManifoldKind k) const {
        return k == ManifoldKind::Stable ? stable : unstable;
    }
};

/// Throws PreconditionError when an eigenvalue has modulus 1 within 1e-9.
LinearData linear_data(const GenericMapParams& p, const FixedPointReport& fp);

/// Axis-aligned box with center and half-width.
struct Box {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double half_width = 0.0;
    bool contains(const Eigen::Vector3d& x) const {
        return x.allFinite() && (x - center).cwiseAbs().maxCoeff() <= half_width;
    }
};

/// The escape cube scaled by 1.5, widened and centered on the diagonal point
/// fixed by the reversor so that the box is h-invariant. Needs positive definite Q.
Box default_box(const GenericMapParams& p);

struct GrowOptions {
    /// Seed radius; <= 0 selects 1e-4 (1 + |x*|).
    double epsilon = 0.0;
    /// Map iterations per generation; <= 0 selects the smallest count giving
    /// at least `growth_per_generation` expansion.
    int steps_per_generation = 0;
    double growth_per_generation = 3.0;
    /// Target maximum edge length inside the box.
    double refine = 0.05;
    int seed_points = 64;
    int initial_radial = 2;
    std::optional<Box> box;
    std::size_t max_vertices = 4000000;
};

struct ManifoldMesh {
    ManifoldKind kind = ManifoldKind::Unstable;
    FixedPointReport fixed_point;
    GenericMapParams params;
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<int> generation;
    double epsilon = 0.0;
    int steps_per_generation = 1;
    int depth = 0;
    double refine = 0.0;
    Box box;
    /// Triangles were dropped at the box, or refinement hit the vertex cap.
    bool truncated = false;
    bool refinement_capped = false;
    /// Angular and radial resolution of each generation's strip.
    std::vector<int> ring_points;
    std::vector<int> radial_points;
    /// Longest triangle edge with both ends inside the box.
    double max_edge = 0.0;
};

/// A generation is `steps_per_generation` iterates of f (unstable) or f^{-1} (stable).
ManifoldMesh grow_2d(const GenericMapParams& p, const FixedPointReport& fp, ManifoldKind kind, int depth,
                     const GrowOptions& options = {});

struct ManifoldBranches {
    ManifoldKind kind = ManifoldKind::Unstable;
    std::array<std::vector<Eigen::Vector3d>, 2> branches;
    std::array<std::vector<int>, 2> generation;
    int steps_per_generation = 1;
    double epsilon = 0.0;
    bool truncated = false;
};

ManifoldBranches grow_1d(const GenericMapParams& p, const FixedPointReport& fp, ManifoldKind kind, int depth,
                         const GrowOptions& options = {});

struct FixCrossing {
    Eigen::Vector3d point;
    std::size_t segment = 0;
    double distance = 0.0;
    /// n x Dh n with n the normal of the first mesh at the crossing.
    Eigen::Vector3d predicted_tangent = Eigen::Vector3d::Zero();
    double angle_deg = 0.0;
};

struct HeteroclinicCurve {
    std::vector<Eigen::Vector3d> polyline;
    /// Triangle pair (first mesh, second mesh) that produced each segment.
    std::vector<std::array<int, 2>> segment_triangles;
    bool closed = false;
    /// "interior" or "open" per end, first end nearer the first mesh's fixed point.
    std::array<std::string, 2> endpoints{"open", "open"};
    std::vector<FixCrossing> fix_crossings;
};

struct IntersectOptions {
    double merge_tol = 1e-9;
    /// Distance below which a polyline counts as crossing Fix(h); <= 0 uses the larger mesh refine.
    double fix_tol = 0.0;
};

std::vector<HeteroclinicCurve> intersect_meshes(const ManifoldMesh& a, const ManifoldMesh& b,
                                                const std::optional<Reversor>& reversor = std::nullopt,
                                                const IntersectOptions& options = {});

struct HeteroclinicPoint {
    double s = 0.0;
    Eigen::Vector3d point = Eigen::Vector3d::Zero();
    /// Closest approach of the forward orbit to the type-A point and of the
    /// backward orbit to the type-B point.
    double forward_distance = 0.0;
    double backward_distance = 0.0;
    FixedPointSide forward_limit = FixedPointSide::Plus;
};

struct HeteroclinicSearchOptions {
    int samples = 2000;
    int max_steps = 4000;
    double certify_tol = 1e-6;
};

/// Points of Fix(h) on the 2D stable manifold of the type-A fixed point, with
/// s in [lo, hi]; each is certified heteroclinic in quad precision.
std::vector<HeteroclinicPoint> heteroclinic_from_symmetry(const GenericMapParams& p, const Reversor& r,
                                                          double lo, double hi,
                                                          const HeteroclinicSearchOptions& options = {});

/// Symmetric Hausdorff distance between two point clouds.
double hausdorff_distance(const std::vector<Eigen::Vector3d>& a, const std::vector<Eigen::Vector3d>& b);

/// Distance from a point to the nearest segment of any curve.
double distance_to_curves(const Eigen::Vector3d& x, const std::vector<HeteroclinicCurve>& curves);

const char* to_string(ManifoldKind k);

}  // namespace quadvp
