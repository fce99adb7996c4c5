#pragma once

#include <array>
#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "quadvp/generic_map.hpp"

namespace quadvp {

enum class StabilityClass { TypeA, TypeB, SaddleNode, PeriodDoubling, EllipticPair };

struct StabilityReport {
    /// Roots of l^3 - t l^2 + s l - 1, real roots first in increasing order.
    std::array<std::complex<double>, 3> eigenvalues;
    StabilityClass classification = StabilityClass::TypeA;
    /// Argument in [0, pi] of the complex eigenvalue with positive imaginary part.
    std::optional<double> complex_phase;
};

/// Eigenvalues via the companion matrix, Newton-polished, with multiple roots
/// snapped onto the critical points of the cubic.
StabilityReport classify_stability(double t, double s, double boundary_tol = 1e-9);

enum class FixedPointSide { Plus, Minus };

struct FixedPointReport {
    FixedPointSide which = FixedPointSide::Plus;
    Eigen::Vector3d location = Eigen::Vector3d::Zero();
    double t = 0.0;
    double s = 0.0;
    StabilityReport stability;
};

/// Fixed points (x, x, x) of the generic map with a + b + c = 1; plus first.
/// A double root is reported once, as Plus.
std::vector<FixedPointReport> fixed_points(const GenericMapParams& p);

/// Half-width of the cube containing every bounded orbit; Q must be positive definite.
double escape_bound(const QuadraticForm2& q, double alpha, double tau, double sigma);
inline double escape_bound(const GenericMapParams& p) {
    return escape_bound(p.quad, p.alpha, p.tau, p.sigma);
}

enum class Direction { Forward, Backward };
enum class OrbitVerdict { BoundedSoFar, EscapedForward, EscapedBackward };

struct OrbitRecord {
    Direction direction = Direction::Forward;
    /// states[k] = f^k(x0) (forward) or f^{-k}(x0) (backward).
    std::vector<Eigen::Vector3d> states;
    OrbitVerdict verdict = OrbitVerdict::BoundedSoFar;
    /// Step index at which the escape criterion fired.
    std::optional<int> escape_time;
    /// 1: |x| dominant, 2: |z| dominant, 3: |y| dominant.
    int trigger_case = 0;
    /// Iteration stopped because values left the representable range.
    bool overflow = false;

    /// The scalar sequence x_t in increasing time order.
    std::vector<double> scalars() const;
};

struct IterateOptions {
    /// Steps run after an escape trigger so that the asymptotic direction settles.
    int tail_steps = 40;
    /// Magnitude beyond which iteration stops to avoid overflow.
    double overflow_limit = 1e100;
};

/// Escape is only declared when Q is positive definite.
OrbitRecord iterate(const GenericMapParams& p, const Eigen::Vector3d& x0, int n_steps,
                    Direction direction, const IterateOptions& options = {});

enum class AsymptoticAxis { PlusX, MinusZ };

struct AsymptoticReport {
    AsymptoticAxis axis = AsymptoticAxis::PlusX;
    /// Forward: |y/x| and |z/y|. Backward: |y/z| and |x/y|. Taken at the last state.
    double ratio_near = 0.0;
    double ratio_far = 0.0;
    bool settled = false;
};

/// Throws PreconditionError for orbits that have not escaped.
AsymptoticReport asymptotic_direction(const OrbitRecord& orbit);

/// h(x, y, z) = -(z + eta, y + eta, x + eta), with h o f = f^{-1} o h.
struct Reversor {
    double eta = 0.0;

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
        return {-(p[2] + eta), -(p[1] + eta), -(p[0] + eta)};
    }
    Eigen::Matrix3d jacobian() const;
    /// h as an affine map, so h o h can be composed exactly in coefficients.
    Eigen::Matrix3d linear() const { return jacobian(); }
    Eigen::Vector3d constant() const { return Eigen::Vector3d::Constant(-eta); }
    /// max residual of h o f - f^{-1} o h at `samples` seeded points in [-1, 1]^3.
    double functional_residual(const GenericMapParams& p, int samples = 20) const;
};

/// nullopt when Q(x, y) != Q(y, x). Throws NonGeneric when a + b + c = 0 and
/// NumericalFailure when the functional equation does not hold to 1e-10.
std::optional<Reversor> reversor_for(const GenericMapParams& p, double tol = 1e-12);

/// Fix(h): s -> (s, -eta/2, -eta - s).
struct FixLine {
    double eta = 0.0;
    Eigen::Vector3d point(double s) const { return {s, -0.5 * eta, -eta - s}; }
    Eigen::Vector3d direction() const { return Eigen::Vector3d(1.0, 0.0, -1.0) / std::sqrt(2.0); }
};

inline FixLine fix_set(const Reversor& r) { return FixLine{r.eta}; }

struct SymmetricOrbitOptions {
    int samples = 10000;
    double root_tol = 1e-12;
    double accept_tol = 1e-9;
};

/// Points x on Fix(h) with s in [lo, hi] lying on a symmetric orbit of the given
/// period: f^k(x) in Fix(h) for period 2k, f^k(x) in Fix(h o f) for period 2k + 1.
std::vector<Eigen::Vector3d> symmetric_orbit_search(const GenericMapParams& p, const Reversor& r,
                                                    int period, double lo, double hi,
                                                    const SymmetricOrbitOptions& options = {});

/// Period-2 lines (x, delta - x, x) when a = c = b/2 and tau + sigma + 2 = 0;
/// delta solves alpha - (1 + sigma) delta + a delta^2 = 0.
struct Period2Line {
    std::vector<double> deltas;
    static Eigen::Vector3d point(double delta, double x) { return {x, delta - x, x}; }
};

/// nullopt when the parameter conditions fail.
std::optional<Period2Line> period2_line(const GenericMapParams& p, double tol = 1e-12);

struct PeriodicCountBound {
    std::complex<double> mu_plus;
    /// Absent when a = 0 (the second root is at infinity).
    std::optional<std::complex<double>> mu_minus;
    /// |mu_+^k mu_-^(n-k) - 1| for k = 0..n (infinite when undefined).
    std::vector<double> distance_to_one;
    std::vector<int> violating_k;
    /// True only when no k gives a product equal to 1.
    bool bound_2n = false;
};

/// Throws PreconditionError when a = c = 0.
PeriodicCountBound periodic_count_bound(const QuadraticForm2& q, int n, double tol = 1e-9);

const char* to_string(StabilityClass c);
const char* to_string(FixedPointSide s);
const char* to_string(OrbitVerdict v);
const char* to_string(AsymptoticAxis a);

}  // namespace quadvp
