#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "quadvp/polymap.hpp"

namespace quadvp {

/// Q(u, w) = a u^2 + b u w + c w^2.
struct QuadraticForm2 {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double operator()(double u, double w) const { return a * u * u + b * u * w + c * w * w; }
    /// d = a c - b^2 / 4.
    double discriminant() const { return a * c - 0.25 * b * b; }
    bool is_positive_definite() const { return a > 0.0 && c > 0.0 && discriminant() > 0.0; }
    /// Q(1, 1).
    double sum() const { return a + b + c; }
};

/// Parameters of the three-dimensional quadratic map
///   (x, y, z) -> (alpha + tau x - sigma y + z + Q(x, y), x, y).
struct GenericMapParams {
    double alpha = 0.0;
    double tau = 0.0;
    double sigma = 0.0;
    QuadraticForm2 quad;

    bool is_symmetric_form(double tol = 1e-12) const { return std::abs(quad.a - quad.c) <= tol; }

    template <typename T>
    void step(T& x, T& y, T& z) const;
    template <typename T>
    void step_back(T& x, T& y, T& z) const;

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const;
    Eigen::Vector3d apply_inverse(const Eigen::Vector3d& p) const;
    Eigen::Matrix3d jacobian(const Eigen::Vector3d& p) const;
    Eigen::Matrix3d jacobian_inverse(const Eigen::Vector3d& p) const;

    QuadMap to_quadmap() const;
    QuadMap inverse_quadmap() const;
};

template <typename T>
void GenericMapParams::step(T& x, T& y, T& z) const {
    const T qa = static_cast<T>(quad.a);
    const T qb = static_cast<T>(quad.b);
    const T qc = static_cast<T>(quad.c);
    const T nx = static_cast<T>(alpha) + static_cast<T>(tau) * x - static_cast<T>(sigma) * y + z +
                 qa * x * x + qb * x * y + qc * y * y;
    z = y;
    y = x;
    x = nx;
}

template <typename T>
void GenericMapParams::step_back(T& x, T& y, T& z) const {
    const T qa = static_cast<T>(quad.a);
    const T qb = static_cast<T>(quad.b);
    const T qc = static_cast<T>(quad.c);
    const T nz = x - static_cast<T>(alpha) - static_cast<T>(tau) * y + static_cast<T>(sigma) * z -
                 (qa * y * y + qb * y * z + qc * z * z);
    x = y;
    y = z;
    z = nz;
}

}  // namespace quadvp
