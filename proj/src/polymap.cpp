#include "quadvp/polymap.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "quadvp/error.hpp"

namespace quadvp {

namespace {

Monomial unit_monomial(std::size_t n, std::size_t i) {
    Monomial m(n, 0);
    m[i] = 1;
    return m;
}

Monomial pair_monomial(std::size_t n, std::size_t i, std::size_t j) {
    Monomial m(n, 0);
    m[i] += 1;
    m[j] += 1;
    return m;
}

double max_abs(const std::vector<Eigen::MatrixXd>& ms) {
    double r = 0.0;
    for (const auto& m : ms) {
        if (m.size() > 0) {
            r = std::max(r, m.cwiseAbs().maxCoeff());
        }
    }
    return r;
}

}  // namespace

AffineMap::AffineMap(Eigen::MatrixXd linear, Eigen::VectorXd constant)
    : linear_(std::move(linear)), constant_(std::move(constant)) {
    if (linear_.rows() != linear_.cols() || linear_.rows() != constant_.size()) {
        throw DimensionMismatch("affine map needs a square linear part matching the constant");
    }
}

AffineMap AffineMap::identity(Eigen::Index n) {
    return AffineMap(Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n));
}

bool AffineMap::is_volume_preserving(double tol) const {
    return std::abs(std::abs(determinant()) - 1.0) <= tol;
}

AffineMap AffineMap::inverse() const {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(linear_);
    if (!lu.isInvertible()) {
        throw PreconditionError("affine map is not invertible");
    }
    Eigen::MatrixXd inv = lu.inverse();
    Eigen::VectorXd c = -(inv * constant_);
    return AffineMap(std::move(inv), std::move(c));
}

AffineMap AffineMap::compose(const AffineMap& inner) const {
    if (inner.dim() != dim()) {
        throw DimensionMismatch("composing affine maps of different dimension");
    }
    return AffineMap(linear_ * inner.linear_, linear_ * inner.constant_ + constant_);
}

PolyMap AffineMap::to_polymap() const {
    return QuadMap::from_affine(*this).to_polymap();
}

QuadMap::QuadMap(Eigen::VectorXd constant, Eigen::MatrixXd linear, std::vector<Eigen::MatrixXd> quad)
    : constant_(std::move(constant)), linear_(std::move(linear)), quad_(std::move(quad)) {
    const Eigen::Index n = linear_.rows();
    if (n <= 0 || linear_.cols() != n || constant_.size() != n ||
        quad_.size() != static_cast<std::size_t>(n)) {
        throw DimensionMismatch("quadratic map parts have inconsistent dimensions");
    }
    for (std::size_t i = 0; i < quad_.size(); ++i) {
        auto& a = quad_[i];
        if (a.rows() != n || a.cols() != n) {
            throw DimensionMismatch("quadratic coefficient matrix has wrong shape");
        }
        const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
        if (asym > 0.0) {
            Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
            a = std::move(sym);
            if (asym > kCoefficientTolerance) {
                std::string msg = "quadratic matrix A_" + std::to_string(i + 1) +
                                  " was not symmetric and has been symmetrized";
                std::clog << "warning: " << msg << '\n';
                warnings_.push_back(std::move(msg));
            }
        }
    }
}

QuadMap QuadMap::identity(Eigen::Index n) {
    return QuadMap(Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, n),
                   std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n)));
}

QuadMap QuadMap::standard(std::vector<Eigen::MatrixXd> quad) {
    const auto n = static_cast<Eigen::Index>(quad.size());
    return QuadMap(Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, n), std::move(quad));
}

QuadMap QuadMap::from_affine(const AffineMap& t) {
    const Eigen::Index n = t.dim();
    return QuadMap(t.constant(), t.linear(),
                   std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n)));
}

bool QuadMap::is_standard_form(double tol) const {
    const Eigen::Index n = dim();
    return constant_.cwiseAbs().maxCoeff() <= tol &&
           (linear_ - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= tol;
}

bool QuadMap::has_zero_quadratic_part(double tol) const {
    return max_abs(quad_) <= tol;
}

Eigen::VectorXd QuadMap::quadratic_part(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) {
        throw DimensionMismatch("point dimension does not match map dimension");
    }
    Eigen::VectorXd q(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) {
        q[i] = x.dot(quad_[static_cast<std::size_t>(i)] * x);
    }
    return q;
}

Eigen::VectorXd QuadMap::evaluate(const Eigen::VectorXd& x) const {
    return constant_ + linear_ * x + 0.5 * quadratic_part(x);
}

Eigen::MatrixXd QuadMap::m_of(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) {
        throw DimensionMismatch("point dimension does not match map dimension");
    }
    Eigen::MatrixXd m(dim(), dim());
    for (Eigen::Index i = 0; i < dim(); ++i) {
        m.row(i) = (quad_[static_cast<std::size_t>(i)] * x).transpose();
    }
    return m;
}

Eigen::MatrixXd QuadMap::jacobian(const Eigen::VectorXd& x) const {
    return linear_ + m_of(x);
}

QuadMap QuadMap::standard_part() const {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(linear_);
    if (!lu.isInvertible()) {
        throw PreconditionError("linear part is singular; no standard-form factor exists");
    }
    const Eigen::MatrixXd inv = lu.inverse();
    const Eigen::Index n = dim();
    std::vector<Eigen::MatrixXd> a(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (inv(i, j) != 0.0) {
                a[static_cast<std::size_t>(i)] += inv(i, j) * quad_[static_cast<std::size_t>(j)];
            }
        }
    }
    return QuadMap::standard(std::move(a));
}

QuadMap QuadMap::conjugate(const AffineMap& c) const {
    if (c.dim() != dim()) {
        throw DimensionMismatch("conjugacy dimension does not match map dimension");
    }
    const Eigen::Index n = dim();
    const Eigen::MatrixXd& k = c.linear();
    const Eigen::VectorXd& s = c.constant();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
    if (!lu.isInvertible()) {
        throw PreconditionError("conjugacy is not invertible");
    }
    const Eigen::MatrixXd kinv = lu.inverse();

    // f(Kx + s) expanded in x.
    Eigen::VectorXd c0 = constant_ + linear_ * s + 0.5 * quadratic_part(s);
    Eigen::MatrixXd c1 = linear_ * k;
    std::vector<Eigen::MatrixXd> c2(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& a = quad_[static_cast<std::size_t>(i)];
        c1.row(i) += (s.transpose() * a * k);
        c2[static_cast<std::size_t>(i)] = k.transpose() * a * k;
    }

    std::vector<Eigen::MatrixXd> q(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n));
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (kinv(j, i) != 0.0) {
                q[static_cast<std::size_t>(j)] += kinv(j, i) * c2[static_cast<std::size_t>(i)];
            }
        }
    }
    return QuadMap(kinv * (c0 - s), kinv * c1, std::move(q));
}

PolyMap QuadMap::to_polymap() const {
    const auto n = static_cast<std::size_t>(dim());
    std::vector<Polynomial> comps;
    comps.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        Polynomial p(n);
        p.add_term(Monomial(n, 0), constant_[ii]);
        for (std::size_t j = 0; j < n; ++j) {
            p.add_term(unit_monomial(n, j), linear_(ii, static_cast<Eigen::Index>(j)));
        }
        const auto& a = quad_[i];
        for (std::size_t j = 0; j < n; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            p.add_term(pair_monomial(n, j, j), 0.5 * a(jj, jj));
            for (std::size_t k = j + 1; k < n; ++k) {
                p.add_term(pair_monomial(n, j, k), a(jj, static_cast<Eigen::Index>(k)));
            }
        }
        comps.push_back(std::move(p));
    }
    return PolyMap(std::move(comps));
}

std::optional<QuadMap> QuadMap::from_polymap(const PolyMap& p, double tol) {
    const std::size_t n = p.dim();
    if (n == 0 || p.nvars() != n) {
        throw DimensionMismatch("only square polynomial maps convert to quadratic maps");
    }
    for (int d = 3; d <= std::max(3, p.degree()); ++d) {
        if (p.max_abs_coefficient_of_degree(d) > tol) {
            return std::nullopt;
        }
    }
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::VectorXd b(nn);
    Eigen::MatrixXd l(nn, nn);
    std::vector<Eigen::MatrixXd> a(n, Eigen::MatrixXd::Zero(nn, nn));
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        b[ii] = p[i].coefficient(Monomial(n, 0));
        for (std::size_t j = 0; j < n; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            l(ii, jj) = p[i].coefficient(unit_monomial(n, j));
            a[i](jj, jj) = 2.0 * p[i].coefficient(pair_monomial(n, j, j));
            for (std::size_t k = j + 1; k < n; ++k) {
                const auto kk = static_cast<Eigen::Index>(k);
                const double c = p[i].coefficient(pair_monomial(n, j, k));
                a[i](jj, kk) = c;
                a[i](kk, jj) = c;
            }
        }
    }
    return QuadMap(std::move(b), std::move(l), std::move(a));
}

double QuadMap::max_coefficient_difference(const QuadMap& other) const {
    if (other.dim() != dim()) {
        throw DimensionMismatch("comparing maps of different dimension");
    }
    double r = std::max((constant_ - other.constant_).cwiseAbs().maxCoeff(),
                        (linear_ - other.linear_).cwiseAbs().maxCoeff());
    for (std::size_t i = 0; i < quad_.size(); ++i) {
        r = std::max(r, (quad_[i] - other.quad_[i]).cwiseAbs().maxCoeff());
    }
    return r;
}

PolyMatrix m_polynomial(const QuadMap& map) {
    const auto n = static_cast<std::size_t>(map.dim());
    PolyMatrix m(n, n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = map.quad(static_cast<Eigen::Index>(i));
        for (std::size_t j = 0; j < n; ++j) {
            Polynomial p(n);
            for (std::size_t k = 0; k < n; ++k) {
                p.add_term(unit_monomial(n, k), a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)));
            }
            m(i, j) = std::move(p);
        }
    }
    return m;
}

Eigen::VectorXd evaluate(const QuadMap& map, const Eigen::VectorXd& x) {
    return map.evaluate(x);
}

Eigen::MatrixXd m_of(const QuadMap& map, const Eigen::VectorXd& x) {
    return map.m_of(x);
}

PredicateResult is_volume_preserving(const QuadMap& map, double tol) {
    PredicateResult r;
    r.certificate.det_linear = map.linear().determinant();
    if (std::abs(r.certificate.det_linear - 1.0) > tol) {
        r.certificate.condition = "det L != 1";
        r.certificate.max_residual = std::abs(r.certificate.det_linear - 1.0);
        return r;
    }
    const QuadMap s = map.standard_part();
    const PolyMatrix m = m_polynomial(s);
    PolyMatrix power = m;
    for (Eigen::Index k = 1; k < map.dim(); ++k) {
        power = power * m;
    }
    const double scale = std::max(1.0, std::pow(max_abs(s.quad()), static_cast<double>(map.dim())));
    r.certificate.condition = "det L = 1 and [M(x)]^n == 0 (symbolic)";
    r.certificate.max_residual = power.max_abs_coefficient();
    r.value = r.certificate.max_residual <= tol * scale;
    return r;
}

PredicateResult has_quadratic_inverse(const QuadMap& map, double tol) {
    if (!is_volume_preserving(map, tol).value) {
        throw PreconditionError("quadratic-inverse test needs a volume-preserving map");
    }
    const QuadMap s = map.standard_part();
    const auto n = static_cast<std::size_t>(map.dim());
    const PolyMatrix m = m_polynomial(s);

    std::vector<Polynomial> x;
    x.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        x.push_back(Polynomial::variable(n, i));
    }
    const std::vector<Polynomial> cubic = m * (m * x);
    double residual = 0.0;
    for (const auto& p : cubic) {
        residual = std::max(residual, p.max_abs_coefficient());
    }

    // Polarized form on basis triples: M_i M_j e_k + M_j M_k e_i + M_k M_i e_j.
    std::vector<Eigen::MatrixXd> basis(n);
    for (std::size_t i = 0; i < n; ++i) {
        basis[i] = s.m_of(Eigen::VectorXd::Unit(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)));
    }
    double polarized = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) {
                const auto e = [n](std::size_t q) {
                    return Eigen::VectorXd::Unit(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(q));
                };
                const Eigen::VectorXd v = basis[i] * basis[j] * e(k) + basis[j] * basis[k] * e(i) +
                                          basis[k] * basis[i] * e(j);
                polarized = std::max(polarized, v.cwiseAbs().maxCoeff());
            }
        }
    }

    const double scale = std::max(1.0, std::pow(max_abs(s.quad()), 2.0));
    PredicateResult r;
    r.certificate.condition = "M(x)^2 x == 0 (symbolic)";
    r.certificate.det_linear = map.linear().determinant();
    r.certificate.max_residual = residual;
    r.certificate.alternative_residual = polarized;
    r.value = residual <= tol * scale;
    return r;
}

QuadMap invert_quadratic(const QuadMap& map, double tol) {
    if (!has_quadratic_inverse(map, tol).value) {
        throw PreconditionError("map has no quadratic inverse");
    }
    const Eigen::Index n = map.dim();
    const QuadMap s = map.standard_part();
    const Eigen::MatrixXd k = map.linear().inverse();
    const Eigen::VectorXd c = -(k * map.constant());

    // f^{-1}(x) = y - 1/2 M_S(y) y with y = K x + c.
    Eigen::VectorXd b = c - 0.5 * s.quadratic_part(c);
    Eigen::MatrixXd l = k;
    std::vector<Eigen::MatrixXd> a(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& ai = s.quad(i);
        l.row(i) -= c.transpose() * ai * k;
        a[static_cast<std::size_t>(i)] = -(k.transpose() * ai * k);
    }
    return QuadMap(std::move(b), std::move(l), std::move(a));
}

PolyMap compose(const QuadMap& f, const QuadMap& g) {
    if (f.dim() != g.dim()) {
        throw DimensionMismatch("composing maps of different dimension");
    }
    return f.to_polymap().compose(g.to_polymap());
}

std::optional<QuadMap> compose_quadratic(const QuadMap& f, const QuadMap& g, double tol) {
    return QuadMap::from_polymap(compose(f, g), tol);
}

}  // namespace quadvp
