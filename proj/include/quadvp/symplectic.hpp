#pragma once

#include <vector>

#include <Eigen/Dense>

#include "quadvp/polymap.hpp"

namespace quadvp {

/// R^{2n} with coordinates (q, p) and J = [[0, I], [-I, 0]], omega(u, w) = u^T J w.
class SymplecticContext {
public:
    explicit SymplecticContext(Eigen::Index half_dim);

    Eigen::Index half_dim() const { return n_; }
    Eigen::Index dim() const { return 2 * n_; }
    const Eigen::MatrixXd& j() const { return j_; }
    double omega(const Eigen::VectorXd& u, const Eigen::VectorXd& w) const { return u.dot(j_ * w); }
    bool is_symplectic_matrix(const Eigen::MatrixXd& m, double tol = kCoefficientTolerance) const;

private:
    Eigen::Index n_;
    Eigen::MatrixXd j_;
};

/// Df(x)^T J Df(x) == J identically: L^T J L = J together with
/// M(x)^T J = J^T M(x) and M(x)^T J M(x) = 0 for the standard-form part.
/// Throws DimensionMismatch for odd dimension.
PredicateResult is_symplectic(const QuadMap& map, const SymplecticContext& ctx,
                              double tol = kCoefficientTolerance);

struct SymplecticDecomposition {
    AffineMap affine;
    QuadMap shear;
    /// max coefficient of M_S(x)^2 as a polynomial matrix.
    double m_squared_residual = 0.0;
};

/// f = T o S with T affine symplectic and S a symplectic quadratic shear.
/// Throws PreconditionError when the map is not symplectic.
SymplecticDecomposition symplectic_decompose(const QuadMap& map, const SymplecticContext& ctx,
                                             double tol = kCoefficientTolerance);

/// lambda o S o lambda^{-1}(q, p) = (q + B(p) p, p), with B(p) = sum_k p_k B_k.
struct ShearNormalFormSymp {
    Eigen::MatrixXd lambda;
    /// (B_k)_{ij} = T_{ijk}; T is symmetric in every pair of indices.
    std::vector<Eigen::MatrixXd> b;

    Eigen::MatrixXd b_of(const Eigen::VectorXd& p) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& p) const { return b_of(p) * p; }
    /// V(p) = 1/3 p^T B(p) p, so that grad V = B(p) p.
    double potential(const Eigen::VectorXd& p) const { return p.dot(gradient(p)) / 3.0; }

    Eigen::Index null_dim = 0;
    /// Distance of the symplectic complement of N from N.
    double isotropy_violation = 0.0;
    /// max |omega(f_i, f_j)| over the Lagrangian basis.
    double lagrangian_residual = 0.0;
    /// Coefficients of the conjugated shear outside the (q + B(p)p, p) pattern.
    double form_residual = 0.0;
    /// max |T_ijk - T_jik|.
    double symmetry_residual = 0.0;
};

/// Moser's normal form of a symplectic quadratic shear in standard form.
/// Throws NumericalFailure when the isotropy certificate fails.
ShearNormalFormSymp shear_to_gradient_form(const QuadMap& shear, const SymplecticContext& ctx,
                                           double tol = 1e-8);

}  // namespace quadvp
