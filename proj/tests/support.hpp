#pragma once

// Independent reference computations used as test oracles. Nothing here calls
// into the library's algorithms; maps are evaluated straight from raw
// coefficient arrays.

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct RawMap {
    Vec b;
    Mat l;
    std::vector<Mat> a;  // component i quadratic part is 1/2 x^T a[i] x

    Vec operator()(const Vec& x) const {
        Vec y = b + l * x;
        for (std::size_t i = 0; i < a.size(); ++i) {
            y[static_cast<Eigen::Index>(i)] += 0.5 * x.dot(a[i] * x);
        }
        return y;
    }
    Mat jacobian(const Vec& x) const {
        Mat j = l;
        for (std::size_t i = 0; i < a.size(); ++i) {
            j.row(static_cast<Eigen::Index>(i)) += (a[i] * x).transpose();
        }
        return j;
    }
    // M(x)[i][j] = sum_k a_i[j][k] x_k
    Mat m_of(const Vec& x) const {
        Mat m(a.size(), a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            m.row(static_cast<Eigen::Index>(i)) = (a[i] * x).transpose();
        }
        return m;
    }
};

inline std::mt19937_64& rng() {
    static std::mt19937_64 g(0xC0FFEEULL);
    return g;
}

inline double uniform(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline Vec random_vec(Eigen::Index n, double scale = 1.0) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v[i] = scale * uniform();
    }
    return v;
}

inline Mat random_mat(Eigen::Index n, Eigen::Index m, double scale = 1.0) {
    Mat a(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            a(i, j) = scale * uniform();
        }
    }
    return a;
}

inline Mat random_symmetric(Eigen::Index n) {
    Mat a = random_mat(n, n);
    return 0.5 * (a + a.transpose());
}

// Random well-conditioned matrix with determinant exactly +1 up to rounding.
inline Mat random_sl(Eigen::Index n) {
    for (;;) {
        Mat a = Mat::Identity(n, n) + random_mat(n, n, 0.8);
        const double d = a.determinant();
        if (std::abs(d) < 0.2) {
            continue;
        }
        if (d < 0) {
            a.row(0) *= -1.0;
        }
        a /= std::cbrt(std::abs(d));
        if (n != 3) {
            a /= std::pow(std::abs(a.determinant()), 1.0 / static_cast<double>(n));
        }
        return a;
    }
}

// v with |v| in [0.5, 1.5] and P symmetric with P v = 0.
struct RawShear {
    Eigen::Vector3d v;
    Eigen::Matrix3d p;
};

inline RawShear random_shear() {
    Eigen::Vector3d v = random_vec(3);
    while (v.norm() < 0.3) {
        v = random_vec(3);
    }
    v *= uniform(0.5, 1.5) / v.norm();
    const Eigen::Matrix3d proj = Eigen::Matrix3d::Identity() - v * v.transpose() / v.squaredNorm();
    Eigen::Matrix3d p = proj * random_symmetric(3) * proj;
    p = 0.5 * (p + p.transpose());
    return {v, p};
}

// x -> l (x + 1/2 (x^T P x) v) + b
inline RawMap affine_after_shear(const Mat& l, const Vec& b, const Eigen::Vector3d& v, const Eigen::Matrix3d& p) {
    RawMap f{b, l, {}};
    const Vec lv = l * v;
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        f.a.push_back(lv[i] * p);
    }
    return f;
}

// (x, y, z) -> (alpha + tau x - sigma y + z + a x^2 + b x y + c y^2, x, y)
struct Generic {
    double alpha, tau, sigma, a, b, c;
    double q(double u, double w) const { return a * u * u + b * u * w + c * w * w; }
    Eigen::Vector3d f(const Eigen::Vector3d& p) const {
        return {alpha + tau * p[0] - sigma * p[1] + p[2] + q(p[0], p[1]), p[0], p[1]};
    }
    Eigen::Vector3d finv(const Eigen::Vector3d& p) const {
        // x = Y, y = Z, z = X - alpha - tau Y + sigma Z - Q(Y, Z)
        return {p[1], p[2], p[0] - alpha - tau * p[1] + sigma * p[2] - q(p[1], p[2])};
    }
    Eigen::Matrix3d jac(const Eigen::Vector3d& p) const {
        Eigen::Matrix3d j;
        j << tau + 2 * a * p[0] + b * p[1], -sigma + b * p[0] + 2 * c * p[1], 1, 1, 0, 0, 0, 1, 0;
        return j;
    }
};

// Real and complex roots of l^3 - t l^2 + s l - 1 via Durand-Kerner.
inline std::vector<std::complex<double>> cubic_roots(double t, double s) {
    using C = std::complex<double>;
    std::vector<C> z = {C(0.4, 0.9), C(0.4, 0.9) * C(0.4, 0.9), C(0.4, 0.9) * C(0.4, 0.9) * C(0.4, 0.9)};
    const auto p = [&](C x) { return ((x - t) * x + s) * x - 1.0; };
    for (int it = 0; it < 2000; ++it) {
        for (int i = 0; i < 3; ++i) {
            C den = 1.0;
            for (int j = 0; j < 3; ++j) {
                if (j != i) {
                    den *= z[i] - z[j];
                }
            }
            z[i] -= p(z[i]) / den;
        }
    }
    return z;
}

// Symplectic J = [[0, I], [-I, 0]].
inline Mat standard_j(Eigen::Index n) {
    Mat j = Mat::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n) = Mat::Identity(n, n);
    j.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
    return j;
}

// Product of elementary symplectic matrices.
inline Mat random_symplectic(Eigen::Index n) {
    Mat out = Mat::Identity(2 * n, 2 * n);
    for (int k = 0; k < 3; ++k) {
        Mat up = Mat::Identity(2 * n, 2 * n);
        up.topRightCorner(n, n) = 0.7 * random_symmetric(n);
        Mat lo = Mat::Identity(2 * n, 2 * n);
        lo.bottomLeftCorner(n, n) = 0.7 * random_symmetric(n);
        Mat a = Mat::Identity(n, n) + random_mat(n, n, 0.4);
        Mat d = Mat::Zero(2 * n, 2 * n);
        d.topLeftCorner(n, n) = a;
        d.bottomRightCorner(n, n) = a.inverse().transpose();
        out = out * up * d * lo;
    }
    return out;
}

// Fully symmetric random tensor t[i](j, k).
inline std::vector<Mat> random_symmetric_tensor(Eigen::Index n) {
    std::vector<Mat> t(static_cast<std::size_t>(n), Mat::Zero(n, n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            for (Eigen::Index k = j; k < n; ++k) {
                const double c = uniform();
                const Eigen::Index idx[3] = {i, j, k};
                int perm[3] = {0, 1, 2};
                do {
                    t[static_cast<std::size_t>(idx[perm[0]])](idx[perm[1]], idx[perm[2]]) = c;
                } while (std::next_permutation(perm, perm + 3));
            }
        }
    }
    return t;
}

// (q, p) -> (q + grad V(p), p), grad V(p)_i = 1/2 sum_jk t_ijk p_j p_k.
inline RawMap gradient_shear(const std::vector<Mat>& t) {
    const Eigen::Index n = static_cast<Eigen::Index>(t.size());
    RawMap f{Vec::Zero(2 * n), Mat::Identity(2 * n, 2 * n), std::vector<Mat>(2 * t.size(), Mat::Zero(2 * n, 2 * n))};
    for (Eigen::Index i = 0; i < n; ++i) {
        f.a[static_cast<std::size_t>(i)].bottomRightCorner(n, n) = t[static_cast<std::size_t>(i)];
    }
    return f;
}

// Coefficients of x -> g(h(x)) where g is linear+const and h is RawMap.
inline RawMap affine_after(const Mat& l, const Vec& b, const RawMap& h) {
    RawMap f{l * h.b + b, l * h.l, {}};
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        Mat s = Mat::Zero(h.l.rows(), h.l.cols());
        for (Eigen::Index m = 0; m < l.cols(); ++m) {
            s += l(i, m) * h.a[static_cast<std::size_t>(m)];
        }
        f.a.push_back(s);
    }
    return f;
}

// Coefficients of x -> h(c x) for linear c.
inline RawMap before_linear(const RawMap& h, const Mat& c) {
    RawMap f{h.b, h.l * c, {}};
    for (const auto& a : h.a) {
        f.a.push_back(c.transpose() * a * c);
    }
    return f;
}

}  // namespace oracle
