#include "quadvp/generic_map.hpp"

namespace quadvp {

Eigen::Vector3d GenericMapParams::apply(const Eigen::Vector3d& p) const {
    double x = p[0], y = p[1], z = p[2];
    step(x, y, z);
    return {x, y, z};
}

Eigen::Vector3d GenericMapParams::apply_inverse(const Eigen::Vector3d& p) const {
    double x = p[0], y = p[1], z = p[2];
    step_back(x, y, z);
    return {x, y, z};
}

Eigen::Matrix3d GenericMapParams::jacobian(const Eigen::Vector3d& p) const {
    Eigen::Matrix3d j;
    j << tau + 2.0 * quad.a * p[0] + quad.b * p[1], -sigma + quad.b * p[0] + 2.0 * quad.c * p[1], 1.0,
        1.0, 0.0, 0.0,
        0.0, 1.0, 0.0;
    return j;
}

Eigen::Matrix3d GenericMapParams::jacobian_inverse(const Eigen::Vector3d& p) const {
    // Inverse map: (x, y, z) -> (y, z, x - alpha - tau y + sigma z - Q(y, z)).
    Eigen::Matrix3d j;
    j << 0.0, 1.0, 0.0,
        0.0, 0.0, 1.0,
        1.0, -tau - 2.0 * quad.a * p[1] - quad.b * p[2], sigma - quad.b * p[1] - 2.0 * quad.c * p[2];
    return j;
}

QuadMap GenericMapParams::to_quadmap() const {
    Eigen::Vector3d b(alpha, 0.0, 0.0);
    Eigen::Matrix3d l;
    l << tau, -sigma, 1.0,
        1.0, 0.0, 0.0,
        0.0, 1.0, 0.0;
    std::vector<Eigen::MatrixXd> a(3, Eigen::MatrixXd::Zero(3, 3));
    a[0](0, 0) = 2.0 * quad.a;
    a[0](0, 1) = quad.b;
    a[0](1, 0) = quad.b;
    a[0](1, 1) = 2.0 * quad.c;
    return QuadMap(b, l, std::move(a));
}

QuadMap GenericMapParams::inverse_quadmap() const {
    Eigen::Vector3d b(0.0, 0.0, -alpha);
    Eigen::Matrix3d l;
    l << 0.0, 1.0, 0.0,
        0.0, 0.0, 1.0,
        1.0, -tau, sigma;
    std::vector<Eigen::MatrixXd> a(3, Eigen::MatrixXd::Zero(3, 3));
    a[2](1, 1) = -2.0 * quad.a;
    a[2](1, 2) = -quad.b;
    a[2](2, 1) = -quad.b;
    a[2](2, 2) = -2.0 * quad.c;
    return QuadMap(b, l, std::move(a));
}

}  // namespace quadvp
