#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quadvp/polynomial.hpp"

namespace quadvp {

/// Absolute tolerance used when deciding that a coefficient vanishes.
inline constexpr double kCoefficientTolerance = 1e-10;

/// Affine map T(x) = L x + b.
class AffineMap {
public:
    AffineMap() = default;
    AffineMap(Eigen::MatrixXd linear, Eigen::VectorXd constant);

    static AffineMap identity(Eigen::Index n);

    Eigen::Index dim() const { return linear_.rows(); }
    const Eigen::MatrixXd& linear() const { return linear_; }
    const Eigen::VectorXd& constant() const { return constant_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return linear_ * x + constant_; }
    double determinant() const { return linear_.determinant(); }
    bool is_volume_preserving(double tol = kCoefficientTolerance) const;

    AffineMap inverse() const;
    /// (*this) o inner.
    AffineMap compose(const AffineMap& inner) const;

    PolyMap to_polymap() const;

private:
    Eigen::MatrixXd linear_;
    Eigen::VectorXd constant_;
};

/// Polynomial map of degree <= 2 on R^n,
///   f(x) = b + L x + 1/2 (x^T A_1 x, ..., x^T A_n x),
/// with every A_i symmetric.
///
/// The matrix-valued linear function M(x) has entries M(x)[i][j] = sum_k A_i[j][k] x_k,
/// so that M(x) x collects the quadratic part and Df(x) = L + M(x).
class QuadMap {
public:
    QuadMap() = default;
    /// Non-symmetric A_i are replaced by (A_i + A_i^T)/2 and a warning is recorded.
    QuadMap(Eigen::VectorXd constant, Eigen::MatrixXd linear, std::vector<Eigen::MatrixXd> quad);

    static QuadMap identity(Eigen::Index n);
    /// x + 1/2 (x^T A_i x)_i.
    static QuadMap standard(std::vector<Eigen::MatrixXd> quad);
    static QuadMap from_affine(const AffineMap& t);

    Eigen::Index dim() const { return linear_.rows(); }
    const Eigen::VectorXd& constant() const { return constant_; }
    const Eigen::MatrixXd& linear() const { return linear_; }
    const std::vector<Eigen::MatrixXd>& quad() const { return quad_; }
    const Eigen::MatrixXd& quad(Eigen::Index i) const { return quad_[static_cast<std::size_t>(i)]; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    bool is_standard_form(double tol = kCoefficientTolerance) const;
    bool has_zero_quadratic_part(double tol = kCoefficientTolerance) const;

    Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const;
    /// (x^T A_i x)_i, i.e. M(x) x.
    Eigen::VectorXd quadratic_part(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd m_of(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;

    AffineMap affine_part() const { return AffineMap(linear_, constant_); }
    /// The standard-form factor S = T^{-1} o f where T(x) = L x + b. Requires det L != 0.
    QuadMap standard_part() const;

    /// Conjugate by an affine change of coordinates: C^{-1} o f o C.
    QuadMap conjugate(const AffineMap& c) const;

    PolyMap to_polymap() const;
    /// Degree <= 2 view of a polynomial map; nullopt when higher-degree
    /// coefficients exceed `tol`.
    static std::optional<QuadMap> from_polymap(const PolyMap& p, double tol = kCoefficientTolerance);

    /// max |coefficient difference| against another map of the same dimension.
    double max_coefficient_difference(const QuadMap& other) const;

private:
    Eigen::VectorXd constant_;
    Eigen::MatrixXd linear_;
    std::vector<Eigen::MatrixXd> quad_;
    std::vector<std::string> warnings_;
};

/// Which equivalent condition certified a predicate, and how far from exact it is.
struct Certificate {
    std::string condition;
    double max_residual = 0.0;
    double det_linear = 1.0;
    /// Residual of the alternative (polarized) form of the condition, when computed.
    std::optional<double> alternative_residual;
};

struct PredicateResult {
    bool value = false;
    Certificate certificate;
};

/// The coefficient tensor of M(x) expanded as a matrix of linear polynomials.
PolyMatrix m_polynomial(const QuadMap& map);

Eigen::VectorXd evaluate(const QuadMap& map, const Eigen::VectorXd& x);
Eigen::MatrixXd m_of(const QuadMap& map, const Eigen::VectorXd& x);

/// det Df == 1 identically: det L == 1 and [M_S(x)]^n == 0 as a polynomial
/// identity for the standard-form part S.
PredicateResult is_volume_preserving(const QuadMap& map, double tol = kCoefficientTolerance);

/// M_S(x)^2 x == 0 identically for the standard-form part. Throws
/// PreconditionError on maps that are not volume preserving.
PredicateResult has_quadratic_inverse(const QuadMap& map, double tol = kCoefficientTolerance);

/// Inverse of a map with quadratic inverse, f^{-1} = S^{-1} o T^{-1} with
/// S^{-1}(x) = x - 1/2 M_S(x) x.
QuadMap invert_quadratic(const QuadMap& map, double tol = kCoefficientTolerance);

/// Exact polynomial composition f o g (degree <= 4).
PolyMap compose(const QuadMap& f, const QuadMap& g);
/// f o g when the result is again quadratic.
std::optional<QuadMap> compose_quadratic(const QuadMap& f, const QuadMap& g,
                                         double tol = kCoefficientTolerance);

}  // namespace quadvp
