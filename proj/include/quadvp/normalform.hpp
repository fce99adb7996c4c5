#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "quadvp/generic_map.hpp"
#include "quadvp/polymap.hpp"
#include "quadvp/shear.hpp"

namespace quadvp {

/// Relative singular-value threshold for rank decisions on [v | Lv | L^2 v].
inline constexpr double kRankThreshold = 1e-8;

/// (x0 + alpha x + y + Q(x, z), y0 - beta x, z0 + z / beta).
struct CaseIIParams {
    Eigen::Vector3d shift = Eigen::Vector3d::Zero();
    double alpha = 0.0;
    double beta = 1.0;
    QuadraticForm2 quad;
};

/// (x0 + alpha x + Q(y, z), y0 - z / alpha, z0 + y + beta z).
struct CaseIIIParams {
    Eigen::Vector3d shift = Eigen::Vector3d::Zero();
    double alpha = 1.0;
    double beta = 0.0;
    QuadraticForm2 quad;
};

enum class NormalCase { I, II, III, Affine };

struct NormalFormDiagnostics {
    std::vector<double> z_singular_values;
    bool near_degenerate = false;
    /// Trace and second trace of L = Df(0) of the input map.
    double trace_linear = 0.0;
    double second_trace_linear = 0.0;
    /// max over the sample points of |C^{-1}(f(C(x))) - nf(x)|.
    double conjugacy_residual = 0.0;
    std::vector<std::string> notes;
};

/// Result of the affine normal-form reduction of a quadratic volume-preserving
/// diffeomorphism of R^3. `conjugacy` is the change of coordinates C with
/// nf = C^{-1} o f o C.
struct NormalForm {
    NormalCase kind = NormalCase::Affine;
    std::variant<std::monostate, GenericMapParams, CaseIIParams, CaseIIIParams> params;
    AffineMap conjugacy = AffineMap::identity(3);
    NormalFormDiagnostics diagnostics;

    /// The closed normal-form map. Throws for the Affine case.
    Eigen::Vector3d apply(const Eigen::Vector3d& x) const;
    const GenericMapParams& generic() const { return std::get<GenericMapParams>(params); }
};

struct Decomposition {
    AffineMap affine;
    ShearExtraction shear;
};

/// f = T o S with T(x) = Df(0) x + f(0) and S a (v, P) shear.
Decomposition decompose(const QuadMap& map, double tol = kCoefficientTolerance);

struct ZDimension {
    int dim = 0;
    std::vector<double> singular_values;
    bool near_degenerate = false;
};

/// Numerical rank of [v | Lv | L^2 v]. Throws PreconditionError for v = 0.
ZDimension z_dimension(const Eigen::Vector3d& v, const Eigen::Matrix3d& l);

/// Sum of the principal 2x2 minors.
double second_trace(const Eigen::Matrix3d& l);

NormalForm to_normal_form(const QuadMap& map, double tol = kCoefficientTolerance);

enum class NonGenericReason { SumZero, Translation };

struct GenericReduction {
    NormalForm form;
    std::optional<NonGenericReason> non_generic;
    /// Applied scaling x -> lambda x and diagonal translation x -> x + gamma (1,1,1).
    double scale = 1.0;
    double shift = 0.0;
};

/// Reduce a case I normal form to a + b + c = 1 and sigma = 0.
GenericReduction reduce_generic(const NormalForm& nf, double tol = kCoefficientTolerance);

/// max over `samples` deterministic points in [-1, 1]^3 of |C^{-1}(f(C(x))) - nf(x)|_inf.
double conjugacy_residual(const QuadMap& map, const NormalForm& nf, int samples = 20);

const char* to_string(NormalCase c);
const char* to_string(NonGenericReason r);

}  // namespace quadvp
