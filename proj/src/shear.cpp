#include "quadvp/shear.hpp"

#include <array>
#include <cmath>

#include "quadvp/error.hpp"

namespace quadvp {

namespace {

constexpr double kProportionalityTolerance = 1e-8;

void normalize(Eigen::Vector3d& v, Eigen::Matrix3d& p) {
    const double norm = v.norm();
    double sign = 1.0;
    for (int i = 0; i < 3; ++i) {
        if (v[i] != 0.0) {
            sign = v[i] > 0.0 ? 1.0 : -1.0;
            break;
        }
    }
    v *= sign / norm;
    p *= sign * norm;
}

}  // namespace

ShearData::ShearData(const Eigen::Vector3d& v, const Eigen::Matrix3d& p, double tol) : v_(v), p_(p) {
    if (v_.norm() == 0.0) {
        throw PreconditionError("shear direction v must be nonzero");
    }
    p_ = 0.5 * (p_ + p_.transpose());
    const double scale = std::max(1.0, p_.cwiseAbs().maxCoeff() * v_.norm());
    if ((p_ * v_).cwiseAbs().maxCoeff() > tol * scale) {
        throw PreconditionError("shear data violates P v = 0");
    }
    normalize(v_, p_);
}

QuadMap build_shear(const ShearData& data) {
    return power(data, 1);
}

QuadMap power(const ShearData& data, int k) {
    std::vector<Eigen::MatrixXd> a(3);
    for (int i = 0; i < 3; ++i) {
        a[static_cast<std::size_t>(i)] = static_cast<double>(k) * data.v()[i] * data.p();
    }
    return QuadMap::standard(std::move(a));
}

ShearExtraction extract_shear(const QuadMap& map, double tol) {
    if (map.dim() != 3) {
        throw DimensionMismatch("shear extraction is defined for maps of R^3 only");
    }
    if (!map.is_standard_form(tol)) {
        throw PreconditionError("shear extraction needs a map in standard form");
    }
    ShearExtraction out;
    if (map.has_zero_quadratic_part(tol)) {
        out.kind = ShearExtraction::Kind::Affine;
        return out;
    }

    // q(x) is parallel to v for a shear; probe until the quadratic part is visible.
    static const std::array<Eigen::Vector3d, 7> probes = {
        Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(0, 0, 1),
        Eigen::Vector3d(1, 1, 0), Eigen::Vector3d(1, 0, 1), Eigen::Vector3d(0, 1, 1),
        Eigen::Vector3d(1, 1, 1)};
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (const auto& x : probes) {
        const Eigen::Vector3d q = map.quadratic_part(x);
        if (q.norm() > tol) {
            v = q.normalized();
            break;
        }
    }
    if (v.isZero()) {
        // Quadratic part vanishes on every probe but not identically: no shear direction exists.
        out.kind = ShearExtraction::Kind::NotAShear;
        return out;
    }
    for (int i = 0; i < 3; ++i) {
        if (v[i] != 0.0) {
            if (v[i] < 0.0) {
                v = -v;
            }
            break;
        }
    }

    // Pivot on the largest coefficient matrix A_p = v_p P.
    int pivot = 0;
    double best = -1.0;
    for (int i = 0; i < 3; ++i) {
        const double m = map.quad(i).cwiseAbs().maxCoeff();
        if (m > best) {
            best = m;
            pivot = i;
        }
    }
    if (std::abs(v[pivot]) < kProportionalityTolerance) {
        out.kind = ShearExtraction::Kind::NotAShear;
        return out;
    }
    const Eigen::Matrix3d p = map.quad(pivot) / v[pivot];

    double prop = 0.0;
    for (int i = 0; i < 3; ++i) {
        prop = std::max(prop, (map.quad(i) - v[i] * p).cwiseAbs().maxCoeff());
    }
    out.proportionality_residual = prop / best;
    out.kernel_residual = (p * v).cwiseAbs().maxCoeff();
    if (out.proportionality_residual > kProportionalityTolerance ||
        out.kernel_residual > tol * std::max(1.0, p.cwiseAbs().maxCoeff())) {
        out.kind = ShearExtraction::Kind::NotAShear;
        return out;
    }
    out.kind = ShearExtraction::Kind::Shear;
    out.data = ShearData(v, p, std::max(tol, out.kernel_residual));
    return out;
}

const char* to_string(ShearExtraction::Kind kind) {
    switch (kind) {
        case ShearExtraction::Kind::Shear:
            return "shear";
        case ShearExtraction::Kind::Affine:
            return "affine";
        case ShearExtraction::Kind::NotAShear:
            return "not_a_shear";
    }
    return "unknown";
}

}  // namespace quadvp
