#include "quadvp/normalform.hpp"

#include <cmath>
#include <random>

#include "quadvp/error.hpp"

namespace quadvp {

namespace {

// Q(u, w) from the 2x2 block (i, j) of the symmetric matrix m, as 1/2 (u, w) m (u, w)^T.
QuadraticForm2 form_from_block(const Eigen::Matrix3d& m, int i, int j, double factor = 1.0) {
    return {factor * 0.5 * m(i, i), factor * m(i, j), factor * 0.5 * m(j, j)};
}

std::vector<Eigen::Vector3d> sample_points(int count) {
    std::mt19937_64 rng(0x5eed2024ULL);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        pts.emplace_back(u(rng), u(rng), u(rng));
    }
    return pts;
}

double smallest_singular_value_normalized(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                          const Eigen::Vector3d& c) {
    Eigen::Matrix3d m;
    m.col(0) = a.normalized();
    m.col(1) = b.normalized();
    m.col(2) = c.normalized();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m);
    return svd.singularValues()[2];
}

}  // namespace

Eigen::Vector3d NormalForm::apply(const Eigen::Vector3d& p) const {
    const double x = p[0], y = p[1], z = p[2];
    switch (kind) {
        case NormalCase::I:
            return std::get<GenericMapParams>(params).apply(p);
        case NormalCase::II: {
            const auto& c = std::get<CaseIIParams>(params);
            return {c.shift[0] + c.alpha * x + y + c.quad(x, z), c.shift[1] - c.beta * x,
                    c.shift[2] + z / c.beta};
        }
        case NormalCase::III: {
            const auto& c = std::get<CaseIIIParams>(params);
            return {c.shift[0] + c.alpha * x + c.quad(y, z), c.shift[1] - z / c.alpha,
                    c.shift[2] + y + c.beta * z};
        }
        case NormalCase::Affine:
            break;
    }
    throw PreconditionError("affine maps have no quadratic normal form");
}

Decomposition decompose(const QuadMap& map, double tol) {
    if (map.dim() != 3) {
        throw DimensionMismatch("normal-form reduction is defined on R^3");
    }
    if (!is_volume_preserving(map, tol).value) {
        throw PreconditionError("map is not volume preserving");
    }
    if (!has_quadratic_inverse(map, tol).value) {
        throw PreconditionError("map has no quadratic inverse");
    }
    Decomposition d{map.affine_part(), extract_shear(map.standard_part(), tol)};
    if (d.shear.kind == ShearExtraction::Kind::NotAShear) {
        throw NumericalFailure(
            "standard-form factor passed the quadratic-inverse test but is not a (v, P) shear; "
            "input is internally inconsistent");
    }
    return d;
}

ZDimension z_dimension(const Eigen::Vector3d& v, const Eigen::Matrix3d& l) {
    if (v.norm() == 0.0) {
        throw PreconditionError("v = 0: the map is affine");
    }
    Eigen::Matrix3d k;
    k.col(0) = v;
    k.col(1) = l * v;
    k.col(2) = l * (l * v);
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(k);
    const Eigen::Vector3d s = svd.singularValues();
    ZDimension out;
    out.singular_values = {s[0], s[1], s[2]};
    const double thresh = kRankThreshold * s[0];
    for (int i = 0; i < 3; ++i) {
        if (s[i] > thresh) {
            ++out.dim;
        }
        if (s[i] > thresh && s[i] < 10.0 * thresh) {
            out.near_degenerate = true;
        }
        if (s[i] <= thresh && s[i] > 0.1 * thresh) {
            out.near_degenerate = true;
        }
    }
    return out;
}

double second_trace(const Eigen::Matrix3d& l) {
    return l(0, 0) * l(1, 1) - l(0, 1) * l(1, 0) + l(0, 0) * l(2, 2) - l(0, 2) * l(2, 0) +
           l(1, 1) * l(2, 2) - l(1, 2) * l(2, 1);
}

NormalForm to_normal_form(const QuadMap& map, double tol) {
    const Decomposition dec = decompose(map, tol);
    NormalForm nf;
    const Eigen::Matrix3d l = map.linear();
    const Eigen::Vector3d b = map.constant();
    nf.diagnostics.trace_linear = l.trace();
    nf.diagnostics.second_trace_linear = second_trace(l);

    if (dec.shear.kind == ShearExtraction::Kind::Affine) {
        nf.kind = NormalCase::Affine;
        nf.conjugacy = AffineMap::identity(3);
        nf.diagnostics.notes.emplace_back("quadratic part vanishes; no normal-form reduction");
        return nf;
    }

    const Eigen::Vector3d v = dec.shear.data->v();
    const Eigen::Matrix3d p = dec.shear.data->p();
    const ZDimension zd = z_dimension(v, l);
    nf.diagnostics.z_singular_values = zd.singular_values;
    nf.diagnostics.near_degenerate = zd.near_degenerate;
    if (zd.near_degenerate) {
        nf.diagnostics.notes.emplace_back("rank of [v, Lv, L^2 v] is within 10x of the threshold");
    }
    const double tau = l.trace();
    const double sigma = second_trace(l);
    const Eigen::Vector3d lv = l * v;
    const Eigen::Vector3d llv = l * lv;

    Eigen::Matrix3d u;
    if (zd.dim == 3) {
        u.col(0) = lv;
        u.col(1) = llv - tau * lv;
        u.col(2) = v;
        const Eigen::Vector3d xi0 = u.lu().solve(b);
        const Eigen::Matrix3d pu = u.transpose() * p * u;
        const QuadraticForm2 q = form_from_block(pu, 0, 1);
        const double y0 = xi0[1];
        const double z0 = xi0[2];
        // Translation (x, y, z) -> (x, y + y0, z + y0 + z0) removes the lagged shifts.
        GenericMapParams g;
        g.quad = q;
        g.alpha = xi0[0] - sigma * y0 + y0 + z0 + q.c * y0 * y0;
        g.tau = tau + q.b * y0;
        g.sigma = sigma - 2.0 * q.c * y0;
        nf.kind = NormalCase::I;
        nf.params = g;
        nf.conjugacy = AffineMap(u, u * Eigen::Vector3d(0.0, y0, y0 + z0));
    } else if (zd.dim == 2) {
        // L^2 v = alpha L v - beta v.
        Eigen::Matrix<double, 3, 2> basis;
        basis.col(0) = lv;
        basis.col(1) = -v;
        const Eigen::Vector2d ab = basis.colPivHouseholderQr().solve(llv);
        const double alpha = ab[0];
        const double beta = ab[1];
        if (std::abs(beta) <= tol) {
            throw NumericalFailure("case II reduction found beta = 0");
        }
        const double r = tau - alpha;
        nf.diagnostics.notes.emplace_back("deflated eigenvalue " + std::to_string(r) + ", 1/beta " +
                                          std::to_string(1.0 / beta));
        Eigen::JacobiSVD<Eigen::Matrix3d> svd(l - r * Eigen::Matrix3d::Identity(), Eigen::ComputeFullV);
        Eigen::Vector3d w = svd.matrixV().col(2);
        const Eigen::Vector3d sv = svd.singularValues();
        if (sv[1] <= 1e-6 * std::max(1.0, sv[0])) {
            // Repeated eigenvalue: pick the null vector farthest from Z(v, L).
            Eigen::Matrix<double, 3, 2> z;
            z.col(0) = v;
            z.col(1) = lv;
            const Eigen::HouseholderQR<Eigen::Matrix<double, 3, 2>> qr(z);
            const Eigen::Vector3d normal = Eigen::Matrix3d(qr.householderQ()).col(2);
            const Eigen::Vector3d c1 = svd.matrixV().col(1);
            const Eigen::Vector3d c2 = svd.matrixV().col(2);
            w = (normal.dot(c1) * c1 + normal.dot(c2) * c2).normalized();
        }
        u.col(0) = lv;
        u.col(1) = v;
        u.col(2) = w;
        CaseIIParams c;
        c.shift = u.lu().solve(b);
        c.alpha = alpha;
        c.beta = beta;
        c.quad = form_from_block(u.transpose() * p * u, 0, 2);
        nf.kind = NormalCase::II;
        nf.params = c;
        nf.conjugacy = AffineMap(u, Eigen::Vector3d::Zero());
    } else {
        const double alpha = v.dot(lv) / v.dot(v);
        if (std::abs(alpha) <= tol) {
            throw NumericalFailure("case III reduction found a zero eigenvalue");
        }
        // w in the invariant complement range(L - alpha I) of span{v}.
        const Eigen::Matrix3d shifted = l - alpha * Eigen::Matrix3d::Identity();
        Eigen::Vector3d w = Eigen::Vector3d::Zero();
        double best = -1.0;
        for (int j = 0; j < 3; ++j) {
            const Eigen::Vector3d cand = shifted.col(j);
            if (cand.norm() == 0.0) {
                continue;
            }
            const Eigen::Vector3d lcand = l * cand;
            if (lcand.norm() == 0.0) {
                continue;
            }
            const double s = smallest_singular_value_normalized(v, cand, lcand);
            if (s > best) {
                best = s;
                w = cand;
            }
        }
        if (best <= kRankThreshold) {
            throw NumericalFailure("case III reduction could not complete span{v} to R^3");
        }
        w.normalize();
        u.col(0) = v;
        u.col(1) = w;
        u.col(2) = l * w;
        CaseIIIParams c;
        c.shift = u.lu().solve(b);
        c.alpha = alpha;
        c.beta = tau - alpha;
        c.quad = form_from_block(u.transpose() * p * u, 1, 2, alpha);
        nf.kind = NormalCase::III;
        nf.params = c;
        nf.conjugacy = AffineMap(u, Eigen::Vector3d::Zero());
    }
    nf.diagnostics.conjugacy_residual = conjugacy_residual(map, nf);
    return nf;
}

GenericReduction reduce_generic(const NormalForm& nf, double tol) {
    if (nf.kind != NormalCase::I) {
        throw PreconditionError("generic reduction applies to case I normal forms only");
    }
    GenericReduction out{nf, std::nullopt, 1.0, 0.0};
    const GenericMapParams& in = nf.generic();
    const double sum = in.quad.sum();
    if (std::abs(sum) <= tol) {
        out.non_generic = NonGenericReason::SumZero;
        return out;
    }
    // x -> lambda x with lambda = 1/(a+b+c) scales Q by lambda and alpha by 1/lambda.
    const double lambda = 1.0 / sum;
    GenericMapParams g = in;
    g.alpha = in.alpha * sum;
    g.quad = {in.quad.a * lambda, in.quad.b * lambda, in.quad.c * lambda};

    double gamma = 0.0;
    if (in.sigma != 0.0) {
        const double denom = g.quad.b + 2.0 * g.quad.c;
        if (std::abs(denom) <= tol) {
            out.non_generic = NonGenericReason::Translation;
            return out;
        }
        gamma = in.sigma / denom;
        g.alpha += (g.tau - g.sigma) * gamma + gamma * gamma * g.quad.sum();
        g.tau += gamma * (2.0 * g.quad.a + g.quad.b);
        g.sigma = 0.0;
    }

    const AffineMap scaling(lambda * Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero());
    const AffineMap translation(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Constant(gamma));
    out.form.params = g;
    out.form.conjugacy = nf.conjugacy.compose(scaling).compose(translation);
    out.scale = lambda;
    out.shift = gamma;
    return out;
}

double conjugacy_residual(const QuadMap& map, const NormalForm& nf, int samples) {
    if (nf.kind == NormalCase::Affine) {
        return 0.0;
    }
    const Eigen::Matrix3d c = nf.conjugacy.linear();
    const Eigen::Vector3d c0 = nf.conjugacy.constant();
    const auto lu = c.fullPivLu();
    double worst = 0.0;
    for (const auto& x : sample_points(samples)) {
        const Eigen::Vector3d fx = map.evaluate(c * x + c0);
        const Eigen::Vector3d back = lu.solve(fx - c0);
        worst = std::max(worst, (back - nf.apply(x)).cwiseAbs().maxCoeff());
    }
    return worst;
}

const char* to_string(NormalCase c) {
    switch (c) {
        case NormalCase::I:
            return "I";
        case NormalCase::II:
            return "II";
        case NormalCase::III:
            return "III";
        case NormalCase::Affine:
            return "affine";
    }
    return "unknown";
}

const char* to_string(NonGenericReason r) {
    switch (r) {
        case NonGenericReason::SumZero:
            return "sum_zero";
        case NonGenericReason::Translation:
            return "translation";
    }
    return "unknown";
}

}  // namespace quadvp
