#include "quadvp/symplectic.hpp"

#include <algorithm>
#include <cmath>

#include "quadvp/error.hpp"

namespace quadvp {

namespace {

double max_abs(const std::vector<Eigen::MatrixXd>& ms) {
    double m = 0.0;
    for (const auto& a : ms) {
        m = std::max(m, a.cwiseAbs().maxCoeff());
    }
    return m;
}

std::vector<Eigen::MatrixXd> basis_m(const QuadMap& s) {
    const Eigen::Index n = s.dim();
    std::vector<Eigen::MatrixXd> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        out.push_back(s.m_of(Eigen::VectorXd::Unit(n, k)));
    }
    return out;
}

/// Orthonormal basis of the null space of m (columns), relative threshold `rel`.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& m, double rel) {
    const Eigen::Index cols = m.cols();
    if (m.rows() == 0) {
        return Eigen::MatrixXd::Identity(cols, cols);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    const Eigen::VectorXd s = svd.singularValues();
    const double smax = s.size() > 0 ? s[0] : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] > rel * std::max(1.0, smax)) {
            ++rank;
        }
    }
    return svd.matrixV().rightCols(cols - rank);
}

}  // namespace

SymplecticContext::SymplecticContext(Eigen::Index half_dim)
    : n_(half_dim), j_(Eigen::MatrixXd::Zero(2 * half_dim, 2 * half_dim)) {
    if (half_dim < 1) {
        throw DimensionMismatch("symplectic half dimension must be positive");
    }
    j_.topRightCorner(n_, n_) = Eigen::MatrixXd::Identity(n_, n_);
    j_.bottomLeftCorner(n_, n_) = -Eigen::MatrixXd::Identity(n_, n_);
}

bool SymplecticContext::is_symplectic_matrix(const Eigen::MatrixXd& m, double tol) const {
    if (m.rows() != dim() || m.cols() != dim()) {
        return false;
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff() * m.cwiseAbs().maxCoeff());
    return (m.transpose() * j_ * m - j_).cwiseAbs().maxCoeff() <= tol * scale;
}

PredicateResult is_symplectic(const QuadMap& map, const SymplecticContext& ctx, double tol) {
    if (map.dim() % 2 != 0) {
        throw DimensionMismatch("symplectic maps need even dimension");
    }
    if (map.dim() != ctx.dim()) {
        throw DimensionMismatch("map and symplectic context dimensions differ");
    }
    PredicateResult r;
    const Eigen::MatrixXd& l = map.linear();
    const Eigen::MatrixXd& j = ctx.j();
    r.certificate.det_linear = l.determinant();
    const double lin = (l.transpose() * j * l - j).cwiseAbs().maxCoeff();
    const double lscale = std::max(1.0, l.cwiseAbs().maxCoeff() * l.cwiseAbs().maxCoeff());
    if (lin > tol * lscale) {
        r.certificate.condition = "L^T J L != J";
        r.certificate.max_residual = lin;
        return r;
    }
    const QuadMap s = map.standard_part();
    const auto m = basis_m(s);
    double first = 0.0;
    double second = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        first = std::max(first, (m[i].transpose() * j + j * m[i]).cwiseAbs().maxCoeff());
        for (std::size_t k = i; k < m.size(); ++k) {
            const Eigen::MatrixXd sym = m[i].transpose() * j * m[k] + m[k].transpose() * j * m[i];
            second = std::max(second, sym.cwiseAbs().maxCoeff());
        }
    }
    const double a = max_abs(s.quad());
    r.certificate.condition = "L^T J L = J, M(x)^T J = J^T M(x), M(x)^T J M(x) = 0 (basis)";
    r.certificate.max_residual = std::max(first, second);
    r.certificate.alternative_residual = second;
    r.value = first <= tol * std::max(1.0, a) && second <= tol * std::max(1.0, a * a);
    return r;
}

SymplecticDecomposition symplectic_decompose(const QuadMap& map, const SymplecticContext& ctx, double tol) {
    if (!is_symplectic(map, ctx, tol).value) {
        throw PreconditionError("map is not symplectic");
    }
    SymplecticDecomposition d{map.affine_part(), map.standard_part(), 0.0};
    const PolyMatrix m = m_polynomial(d.shear);
    d.m_squared_residual = (m * m).max_abs_coefficient();
    return d;
}

Eigen::MatrixXd ShearNormalFormSymp::b_of(const Eigen::VectorXd& p) const {
    const Eigen::Index n = p.size();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out += p[k] * b[static_cast<std::size_t>(k)];
    }
    return out;
}

ShearNormalFormSymp shear_to_gradient_form(const QuadMap& shear, const SymplecticContext& ctx, double tol) {
    if (shear.dim() != ctx.dim()) {
        throw DimensionMismatch("map and symplectic context dimensions differ");
    }
    if (!shear.is_standard_form()) {
        throw PreconditionError("gradient form needs a shear in standard form");
    }
    const Eigen::Index n = ctx.half_dim();
    const Eigen::Index d = ctx.dim();
    const Eigen::MatrixXd& j = ctx.j();
    ShearNormalFormSymp out;

    const auto m = basis_m(shear);
    Eigen::MatrixXd stacked(d * d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        stacked.middleRows(k * d, d) = m[static_cast<std::size_t>(k)];
    }
    const Eigen::MatrixXd nn = null_space(stacked, tol);
    out.null_dim = nn.cols();
    if (nn.cols() < n) {
        throw NumericalFailure("null space of M is smaller than half the dimension");
    }

    // Symplectic complement of N and the certificate that it lies in N.
    const Eigen::MatrixXd nperp = null_space(nn.transpose() * j, tol);
    const Eigen::MatrixXd proj = nn * nn.transpose();
    for (Eigen::Index c = 0; c < nperp.cols(); ++c) {
        out.isotropy_violation =
            std::max(out.isotropy_violation, (nperp.col(c) - proj * nperp.col(c)).norm());
    }
    if (out.isotropy_violation > 1e3 * tol) {
        throw NumericalFailure("symplectic complement of N is not contained in N (violation " +
                               std::to_string(out.isotropy_violation) + ")");
    }

    // Greedy isotropic extension inside N.
    Eigen::MatrixXd f = nperp;
    while (f.cols() < n) {
        Eigen::MatrixXd candidates = nn;
        if (f.cols() > 0) {
            candidates = nn * null_space(f.transpose() * j * nn, tol);
            candidates -= f * (f.transpose() * f).ldlt().solve(f.transpose() * candidates);
        }
        Eigen::Index best = -1;
        double best_norm = 0.0;
        for (Eigen::Index c = 0; c < candidates.cols(); ++c) {
            const double nrm = candidates.col(c).norm();
            if (nrm > best_norm) {
                best_norm = nrm;
                best = c;
            }
        }
        if (best < 0 || best_norm <= tol) {
            throw NumericalFailure("could not extend the isotropic subspace to a Lagrangian one");
        }
        f.conservativeResize(Eigen::NoChange, f.cols() + 1);
        f.col(f.cols() - 1) = candidates.col(best) / best_norm;
    }
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(f).householderQ() *
                              Eigen::MatrixXd::Identity(d, n);
    out.lagrangian_residual = (q.transpose() * j * q).cwiseAbs().maxCoeff();

    // Orthonormal Lagrangian basis F = [X; Y]; U = [[X, -Y], [Y, X]] is orthogonal
    // symplectic and maps {p = 0} onto F, so lambda = U^T.
    const Eigen::MatrixXd x = q.topRows(n);
    const Eigen::MatrixXd y = q.bottomRows(n);
    Eigen::MatrixXd u(d, d);
    u << x, -y, y, x;
    out.lambda = u.transpose();

    const QuadMap conj = shear.conjugate(AffineMap(u, Eigen::VectorXd::Zero(d)));
    out.b.assign(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n));
    for (Eigen::Index i = 0; i < d; ++i) {
        const Eigen::MatrixXd& a = conj.quad(i);
        if (i < n) {
            // Only the p-p block may survive in the q-components.
            Eigen::MatrixXd rest = a;
            rest.bottomRightCorner(n, n).setZero();
            out.form_residual = std::max(out.form_residual, rest.cwiseAbs().maxCoeff());
            for (Eigen::Index jj = 0; jj < n; ++jj) {
                for (Eigen::Index k = 0; k < n; ++k) {
                    out.b[static_cast<std::size_t>(k)](i, jj) = 0.5 * a(n + jj, n + k);
                }
            }
        } else {
            out.form_residual = std::max(out.form_residual, a.cwiseAbs().maxCoeff());
        }
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::MatrixXd& bk = out.b[static_cast<std::size_t>(k)];
        out.symmetry_residual = std::max(out.symmetry_residual, (bk - bk.transpose()).cwiseAbs().maxCoeff());
    }
    return out;
}

}  // namespace quadvp
