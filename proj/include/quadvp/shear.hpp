#pragma once

#include <optional>

#include <Eigen/Dense>

#include "quadvp/polymap.hpp"

namespace quadvp {

/// A quadratic shear S(x) = x + 1/2 (x^T P x) v of R^3 with P symmetric and P v = 0.
///
/// Stored normalized: |v| = 1 with its first nonzero component positive; the
/// magnitude and sign of the original v are absorbed into P.
class ShearData {
public:
    /// Normalizes (v, P) and rejects P v != 0 beyond `tol` (relative to |P| |v|).
    ShearData(const Eigen::Vector3d& v, const Eigen::Matrix3d& p, double tol = kCoefficientTolerance);

    const Eigen::Vector3d& v() const { return v_; }
    const Eigen::Matrix3d& p() const { return p_; }

private:
    Eigen::Vector3d v_;
    Eigen::Matrix3d p_;
};

QuadMap build_shear(const ShearData& data);

struct ShearExtraction {
    enum class Kind { Shear, Affine, NotAShear };
    Kind kind = Kind::NotAShear;
    std::optional<ShearData> data;
    /// max_i |A_i - v_i P| relative to the pivot matrix, and |P v|.
    double proportionality_residual = 0.0;
    double kernel_residual = 0.0;
};

/// Recognize a standard-form map of R^3 as a (v, P) shear. Maps whose quadratic
/// coefficient matrices are not pairwise proportional, or whose P does not
/// annihilate v, are reported as NotAShear.
ShearExtraction extract_shear(const QuadMap& map, double tol = kCoefficientTolerance);

/// S^k(x) = x + (k/2)(x^T P x) v, valid for every integer k.
QuadMap power(const ShearData& data, int k);

const char* to_string(ShearExtraction::Kind kind);

}  // namespace quadvp
