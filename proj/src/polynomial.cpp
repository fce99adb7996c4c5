#include "quadvp/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "quadvp/error.hpp"

namespace quadvp {

Polynomial Polynomial::constant(std::size_t nvars, double c) {
    Polynomial p(nvars);
    p.add_term(Monomial(nvars, 0), c);
    return p;
}

Polynomial Polynomial::variable(std::size_t nvars, std::size_t i) {
    Polynomial p(nvars);
    Monomial m(nvars, 0);
    m.at(i) = 1;
    p.add_term(m, 1.0);
    return p;
}

double Polynomial::coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const Monomial& m, double c) {
    if (m.size() != nvars_) {
        throw DimensionMismatch("monomial arity does not match polynomial");
    }
    if (c == 0.0) {
        return;
    }
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0.0) {
            terms_.erase(it);
        }
    }
}

static int total_degree(const Monomial& m) {
    return std::accumulate(m.begin(), m.end(), 0);
}

int Polynomial::degree() const {
    int d = -1;
    for (const auto& [m, c] : terms_) {
        d = std::max(d, total_degree(m));
    }
    return d;
}

bool Polynomial::is_zero(double tol) const {
    return max_abs_coefficient() <= tol;
}

double Polynomial::max_abs_coefficient() const {
    double r = 0.0;
    for (const auto& [m, c] : terms_) {
        r = std::max(r, std::abs(c));
    }
    return r;
}

double Polynomial::max_abs_coefficient_of_degree(int d) const {
    double r = 0.0;
    for (const auto& [m, c] : terms_) {
        if (total_degree(m) == d) {
            r = std::max(r, std::abs(c));
        }
    }
    return r;
}

double Polynomial::evaluate(const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != nvars_) {
        throw DimensionMismatch("polynomial evaluated at point of wrong dimension");
    }
    double sum = 0.0;
    for (const auto& [m, c] : terms_) {
        double t = c;
        for (std::size_t i = 0; i < nvars_; ++i) {
            for (int e = 0; e < m[i]; ++e) {
                t *= x[static_cast<Eigen::Index>(i)];
            }
        }
        sum += t;
    }
    return sum;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
    if (o.nvars_ != nvars_) {
        throw DimensionMismatch("adding polynomials in different variable sets");
    }
    for (const auto& [m, c] : o.terms_) {
        add_term(m, c);
    }
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
    if (o.nvars_ != nvars_) {
        throw DimensionMismatch("subtracting polynomials in different variable sets");
    }
    for (const auto& [m, c] : o.terms_) {
        add_term(m, -c);
    }
    return *this;
}

Polynomial& Polynomial::operator*=(double s) {
    if (s == 0.0) {
        terms_.clear();
        return *this;
    }
    for (auto& [m, c] : terms_) {
        c *= s;
    }
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.nvars_ != b.nvars_) {
        throw DimensionMismatch("multiplying polynomials in different variable sets");
    }
    Polynomial r(a.nvars_);
    Monomial m(a.nvars_);
    for (const auto& [ma, ca] : a.terms_) {
        for (const auto& [mb, cb] : b.terms_) {
            for (std::size_t i = 0; i < a.nvars_; ++i) {
                m[i] = ma[i] + mb[i];
            }
            r.add_term(m, ca * cb);
        }
    }
    return r;
}

PolyMap PolyMap::identity(std::size_t n) {
    std::vector<Polynomial> comps;
    comps.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        comps.push_back(Polynomial::variable(n, i));
    }
    return PolyMap(std::move(comps));
}

int PolyMap::degree() const {
    int d = -1;
    for (const auto& p : comps_) {
        d = std::max(d, p.degree());
    }
    return d;
}

Eigen::VectorXd PolyMap::evaluate(const Eigen::VectorXd& x) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(comps_.size()));
    for (std::size_t i = 0; i < comps_.size(); ++i) {
        r[static_cast<Eigen::Index>(i)] = comps_[i].evaluate(x);
    }
    return r;
}

PolyMap PolyMap::compose(const PolyMap& inner) const {
    if (inner.dim() != nvars()) {
        throw DimensionMismatch("composition of incompatible polynomial maps");
    }
    const std::size_t n = inner.nvars();
    // Powers of the inner components are shared across monomials.
    std::vector<std::vector<Polynomial>> powers(inner.dim());
    auto power = [&](std::size_t i, int e) -> const Polynomial& {
        auto& cache = powers[i];
        if (cache.empty()) {
            cache.push_back(Polynomial::constant(n, 1.0));
        }
        while (static_cast<int>(cache.size()) <= e) {
            cache.push_back(cache.back() * inner[i]);
        }
        return cache[static_cast<std::size_t>(e)];
    };

    std::vector<Polynomial> out;
    out.reserve(comps_.size());
    for (const auto& comp : comps_) {
        Polynomial acc(n);
        for (const auto& [m, c] : comp.terms()) {
            Polynomial term = Polynomial::constant(n, c);
            for (std::size_t i = 0; i < m.size(); ++i) {
                if (m[i] > 0) {
                    term = term * power(i, m[i]);
                }
            }
            acc += term;
        }
        out.push_back(std::move(acc));
    }
    return PolyMap(std::move(out));
}

double PolyMap::max_coefficient_difference(const PolyMap& other) const {
    if (other.dim() != dim()) {
        throw DimensionMismatch("comparing polynomial maps of different dimension");
    }
    double r = 0.0;
    for (std::size_t i = 0; i < comps_.size(); ++i) {
        r = std::max(r, (comps_[i] - other[i]).max_abs_coefficient());
    }
    return r;
}

double PolyMap::max_abs_coefficient_of_degree(int d) const {
    double r = 0.0;
    for (const auto& p : comps_) {
        r = std::max(r, p.max_abs_coefficient_of_degree(d));
    }
    return r;
}

PolyMatrix::PolyMatrix(std::size_t rows, std::size_t cols, std::size_t nvars)
    : rows_(rows), cols_(cols), nvars_(nvars), data_(rows * cols, Polynomial(nvars)) {}

PolyMatrix PolyMatrix::operator*(const PolyMatrix& o) const {
    if (cols_ != o.rows_) {
        throw DimensionMismatch("polynomial matrix product shape mismatch");
    }
    PolyMatrix r(rows_, o.cols_, nvars_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < o.cols_; ++j) {
            Polynomial acc(nvars_);
            for (std::size_t k = 0; k < cols_; ++k) {
                if ((*this)(i, k).terms().empty() || o(k, j).terms().empty()) {
                    continue;
                }
                acc += (*this)(i, k) * o(k, j);
            }
            r(i, j) = std::move(acc);
        }
    }
    return r;
}

std::vector<Polynomial> PolyMatrix::operator*(const std::vector<Polynomial>& v) const {
    if (cols_ != v.size()) {
        throw DimensionMismatch("polynomial matrix-vector shape mismatch");
    }
    std::vector<Polynomial> r(rows_, Polynomial(nvars_));
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            if ((*this)(i, k).terms().empty() || v[k].terms().empty()) {
                continue;
            }
            r[i] += (*this)(i, k) * v[k];
        }
    }
    return r;
}

double PolyMatrix::max_abs_coefficient() const {
    double r = 0.0;
    for (const auto& p : data_) {
        r = std::max(r, p.max_abs_coefficient());
    }
    return r;
}

}  // namespace quadvp
