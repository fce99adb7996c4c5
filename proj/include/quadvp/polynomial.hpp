#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include <Eigen/Dense>

namespace quadvp {

/// Exponent vector of a monomial x_1^e_1 ... x_n^e_n.
using Monomial = std::vector<int>;

/// Sparse real multivariate polynomial. Coefficients are stored per monomial;
/// arithmetic is exact in the stored doubles up to floating-point rounding.
class Polynomial {
public:
    explicit Polynomial(std::size_t nvars = 0) : nvars_(nvars) {}

    static Polynomial constant(std::size_t nvars, double c);
    static Polynomial variable(std::size_t nvars, std::size_t i);

    std::size_t nvars() const { return nvars_; }
    const std::map<Monomial, double>& terms() const { return terms_; }

    double coefficient(const Monomial& m) const;
    void add_term(const Monomial& m, double c);

    int degree() const;
    bool is_zero(double tol = 0.0) const;
    double max_abs_coefficient() const;
    /// Largest |coefficient| among monomials of total degree exactly `d`.
    double max_abs_coefficient_of_degree(int d) const;

    double evaluate(const Eigen::VectorXd& x) const;

    Polynomial& operator+=(const Polynomial& o);
    Polynomial& operator-=(const Polynomial& o);
    Polynomial& operator*=(double s);

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
    friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

private:
    std::size_t nvars_;
    std::map<Monomial, double> terms_;
};

/// Vector of polynomials, i.e. a polynomial map R^n -> R^m.
class PolyMap {
public:
    PolyMap() = default;
    explicit PolyMap(std::vector<Polynomial> comps) : comps_(std::move(comps)) {}

    static PolyMap identity(std::size_t n);

    std::size_t dim() const { return comps_.size(); }
    std::size_t nvars() const { return comps_.empty() ? 0 : comps_.front().nvars(); }
    const Polynomial& operator[](std::size_t i) const { return comps_[i]; }
    Polynomial& operator[](std::size_t i) { return comps_[i]; }
    const std::vector<Polynomial>& components() const { return comps_; }

    int degree() const;
    Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const;

    /// f(g(x)) for f = *this.
    PolyMap compose(const PolyMap& inner) const;

    /// max |coefficient| of (*this - other) over all monomials and components.
    double max_coefficient_difference(const PolyMap& other) const;
    double max_abs_coefficient_of_degree(int d) const;

private:
    std::vector<Polynomial> comps_;
};

/// Matrix with polynomial entries, used for the matrix-valued map M(x).
class PolyMatrix {
public:
    PolyMatrix(std::size_t rows, std::size_t cols, std::size_t nvars);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Polynomial& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Polynomial& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    PolyMatrix operator*(const PolyMatrix& o) const;
    std::vector<Polynomial> operator*(const std::vector<Polynomial>& v) const;

    double max_abs_coefficient() const;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::size_t nvars_;
    std::vector<Polynomial> data_;
};

}  // namespace quadvp
