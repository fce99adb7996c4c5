#include "quadvp/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <iterator>
#include <unordered_map>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "quadvp/error.hpp"

namespace quadvp {

namespace {

using cd = std::complex<double>;
constexpr double kTwoPi = 6.283185307179586476925286766559;

Eigen::Vector3cd companion_eigenvector(cd lambda) { return {lambda * lambda, lambda, cd(1.0)}; }

/// Iterates f (unstable growth) or f^{-1} (stable growth).
struct Stepper {
    const GenericMapParams* p;
    ManifoldKind kind;
    Eigen::Vector3d operator()(Eigen::Vector3d v, long n) const {
        for (long i = 0; i < n && v.allFinite(); ++i) {
            if (kind == ManifoldKind::Unstable) {
                p->step(v[0], v[1], v[2]);
            } else {
                p->step_back(v[0], v[1], v[2]);
            }
        }
        return v;
    }
};

/// Expansion matrix G = A_g^m of the growth map on the subspace, and its real powers.
struct SubspacePower {
    Eigen::MatrixXd g;
    bool complex_pair = false;
    double rho = 1.0;
    double phi = 0.0;

    Eigen::MatrixXd power(double u) const {
        const Eigen::Index k = g.rows();
        if (u == 0.0) {
            return Eigen::MatrixXd::Identity(k, k);
        }
        if (complex_pair) {
            const double r = std::pow(rho, u);
            Eigen::MatrixXd out(2, 2);
            out << r * std::cos(u * phi), r * std::sin(u * phi), -r * std::sin(u * phi), r * std::cos(u * phi);
            return out;
        }
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            out(i, i) = std::pow(g(i, i), u);
        }
        return out;
    }
};

int choose_steps(const Eigen::MatrixXd& ag, bool complex_pair, double growth) {
    double rate;
    bool negative = false;
    if (complex_pair) {
        rate = std::sqrt(std::abs(ag.determinant()));
    } else {
        rate = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < ag.rows(); ++i) {
            rate = std::min(rate, std::abs(ag(i, i)));
            negative = negative || ag(i, i) < 0.0;
        }
    }
    if (!(rate > 1.0)) {
        throw NumericalFailure("growth map does not expand the invariant subspace");
    }
    int m = std::max(1, static_cast<int>(std::ceil(std::log(growth) / std::log(rate))));
    if (negative && m % 2 == 1) {
        ++m;
    }
    return m;
}

SubspacePower make_power(const Eigen::MatrixXd& ag, bool complex_pair, int& m) {
    for (int attempt = 0; attempt < 8; ++attempt, ++m) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Identity(ag.rows(), ag.cols());
        for (int i = 0; i < m; ++i) {
            g = ag * g;
        }
        SubspacePower sp;
        sp.g = g;
        sp.complex_pair = complex_pair;
        if (complex_pair) {
            sp.rho = std::sqrt(g.determinant());
            sp.phi = std::atan2(g(0, 1), g(0, 0));
            if (std::abs(std::abs(sp.phi) - M_PI) < 1e-3) {
                continue;
            }
            return sp;
        }
        bool positive = true;
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
            positive = positive && g(i, i) > 0.0;
        }
        if (positive) {
            return sp;
        }
    }
    throw NumericalFailure("could not choose an orientation-preserving generation length");
}

double norm_d(const Eigen::Vector3d& v) { return v.norm(); }

}  // namespace

LinearData linear_data(const GenericMapParams& p, const FixedPointReport& fp) {
    LinearData ld;
    ld.point = fp.location;
    ld.jacobian = p.jacobian(fp.location);
    std::vector<cd> stable, unstable;
    for (const auto& z : fp.stability.eigenvalues) {
        if (std::abs(std::abs(z) - 1.0) < 1e-9) {
            throw PreconditionError("fixed point is not hyperbolic");
        }
        (std::abs(z) < 1.0 ? stable : unstable).push_back(z);
    }
    const auto build = [](const std::vector<cd>& ev) {
        InvariantSubspace sub;
        if (ev.size() == 1) {
            const Eigen::Vector3d v = companion_eigenvector(ev[0]).real().normalized();
            sub.basis = v;
            sub.action = Eigen::MatrixXd::Constant(1, 1, ev[0].real());
        } else if (ev.size() == 2) {
            if (ev[0].imag() != 0.0) {
                const cd lambda = ev[0].imag() > 0.0 ? ev[0] : ev[1];
                Eigen::Vector3cd w = companion_eigenvector(lambda);
                w /= w.norm();
                const cd ww = (w.array() * w.array()).sum();
                w *= std::exp(cd(0.0, -0.5 * std::arg(ww)));
                sub.basis.resize(3, 2);
                sub.basis.col(0) = w.real();
                sub.basis.col(1) = w.imag();
                sub.action.resize(2, 2);
                sub.action << lambda.real(), lambda.imag(), -lambda.imag(), lambda.real();
                sub.complex_pair = true;
            } else {
                if (ev[0] == ev[1]) {
                    throw NumericalFailure("repeated real eigenvalue: invariant subspace is defective");
                }
                sub.basis.resize(3, 2);
                sub.basis.col(0) = companion_eigenvector(ev[0]).real().normalized();
                sub.basis.col(1) = companion_eigenvector(ev[1]).real().normalized();
                sub.action = Eigen::MatrixXd::Zero(2, 2);
                sub.action(0, 0) = ev[0].real();
                sub.action(1, 1) = ev[1].real();
            }
        }
        return sub;
    };
    ld.stable = build(stable);
    ld.unstable = build(unstable);
    return ld;
}

Box default_box(const GenericMapParams& p) {
    const double kappa = escape_bound(p);
    const double sum = p.quad.sum();
    const double eta = sum != 0.0 ? (p.tau - p.sigma) / sum : 0.0;
    Box b;
    b.center = Eigen::Vector3d::Constant(-0.5 * eta);
    b.half_width = 1.5 * kappa + 0.5 * std::abs(eta);
    return b;
}

ManifoldMesh grow_2d(const GenericMapParams& p, const FixedPointReport& fp, ManifoldKind kind, int depth,
                     const GrowOptions& options) {
    if (depth < 0) {
        throw PreconditionError("depth must be nonnegative");
    }
    const LinearData ld = linear_data(p, fp);
    const InvariantSubspace& sub = ld.subspace(kind);
    if (sub.basis.cols() != 2) {
        throw PreconditionError("requested manifold is not two dimensional at this fixed point");
    }
    ManifoldMesh mesh;
    mesh.kind = kind;
    mesh.fixed_point = fp;
    mesh.params = p;
    mesh.depth = depth;
    mesh.refine = options.refine;
    mesh.epsilon = options.epsilon > 0.0 ? options.epsilon : 1e-4 * (1.0 + std::abs(fp.location[0]));
    if (options.box) {
        mesh.box = *options.box;
    } else if (p.quad.is_positive_definite()) {
        mesh.box = default_box(p);
    } else {
        throw PreconditionError("indefinite Q: a bounding box must be supplied");
    }

    const Eigen::MatrixXd ag = kind == ManifoldKind::Unstable ? sub.action : Eigen::MatrixXd(sub.action.inverse());
    int m = options.steps_per_generation > 0 ? options.steps_per_generation
                                             : choose_steps(ag, sub.complex_pair, options.growth_per_generation);
    const SubspacePower gp = make_power(ag, sub.complex_pair, m);
    mesh.steps_per_generation = m;

    const Stepper step{&p, kind};
    const Eigen::Vector3d xs = fp.location;
    const Eigen::MatrixXd& basis = sub.basis;
    const double eps = mesh.epsilon;
    const auto seed = [&](double theta) { return Eigen::Vector2d(eps * std::cos(theta), eps * std::sin(theta)); };
    const auto p0 = [&](double theta) -> Eigen::Vector3d { return xs + basis * seed(theta); };
    // Point of generation `gen` at fundamental-annulus coordinates (u, theta).
    const auto point = [&](int gen, double u, double theta) -> Eigen::Vector3d {
        const Eigen::Vector3d base = p0(theta);
        if (u == 0.0) {
            return step(base, static_cast<long>(m) * gen);
        }
        const Eigen::Vector3d image = step(base, m);
        if (u == 1.0) {
            return step(image, static_cast<long>(m) * gen);
        }
        const Eigen::Vector2d c = seed(theta);
        const Eigen::Vector3d corr = image - xs - basis * (gp.g * c);
        return step(Eigen::Vector3d(xs + basis * (gp.power(u) * c) + u * corr), static_cast<long>(m) * gen);
    };
    const auto theta_of = [](int k, int n) { return kTwoPi * k / n; };

    // rows[g][k][l]: strip g, radial row k (u = k / nu), angle l.
    std::vector<std::vector<std::vector<Eigen::Vector3d>>> rows;
    int nth = std::max(3, options.seed_points);
    int nu = std::max(1, options.initial_radial);
    std::size_t total = 0;
    for (int g = 0; g < depth; ++g) {
        std::vector<std::vector<Eigen::Vector3d>> grid;
        while (true) {
            grid.assign(static_cast<std::size_t>(nu) + 1, std::vector<Eigen::Vector3d>(static_cast<std::size_t>(nth)));
            for (int k = 0; k <= nu; ++k) {
                for (int l = 0; l < nth; ++l) {
                    grid[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] =
                        point(g, static_cast<double>(k) / nu, theta_of(l, nth));
                }
            }
            double eth = 0.0, eu = 0.0;
            for (int k = 0; k <= nu; ++k) {
                for (int l = 0; l < nth; ++l) {
                    const auto& a = grid[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
                    if (!mesh.box.contains(a)) {
                        continue;
                    }
                    const auto& b = grid[static_cast<std::size_t>(k)][static_cast<std::size_t>((l + 1) % nth)];
                    if (mesh.box.contains(b)) {
                        eth = std::max(eth, norm_d(a - b));
                    }
                    if (k < nu) {
                        const auto& c = grid[static_cast<std::size_t>(k) + 1][static_cast<std::size_t>(l)];
                        if (mesh.box.contains(c)) {
                            eu = std::max(eu, norm_d(a - c));
                        }
                    }
                }
            }
            const std::size_t next_size = total + static_cast<std::size_t>(nu + 1) * static_cast<std::size_t>(nth) * 2;
            if (eth > options.refine && next_size <= options.max_vertices) {
                nth *= 2;
                continue;
            }
            if (eu > options.refine && next_size <= options.max_vertices) {
                nu *= 2;
                continue;
            }
            if (eth > options.refine || eu > options.refine) {
                mesh.refinement_capped = true;
            }
            break;
        }
        total += static_cast<std::size_t>(nu) * static_cast<std::size_t>(nth);
        mesh.ring_points.push_back(nth);
        mesh.radial_points.push_back(nu);
        rows.push_back(std::move(grid));
    }

    // Assemble: center, ring 0, then per strip its interior rows and the next ring.
    std::vector<Eigen::Vector3d> verts;
    std::vector<int> gen_of;
    std::vector<std::array<int, 3>> tris;
    verts.push_back(xs);
    gen_of.push_back(0);
    const auto add_row = [&](const std::vector<Eigen::Vector3d>& row, int g) {
        const int start = static_cast<int>(verts.size());
        for (const auto& v : row) {
            verts.push_back(v);
            gen_of.push_back(g);
        }
        return start;
    };
    const int n0 = depth > 0 ? mesh.ring_points[0] : std::max(3, options.seed_points);
    std::vector<Eigen::Vector3d> ring0;
    if (depth > 0) {
        ring0 = rows[0][0];
    } else {
        for (int l = 0; l < n0; ++l) {
            ring0.push_back(p0(theta_of(l, n0)));
        }
    }
    int ring_start = add_row(ring0, 0);
    int ring_n = n0;
    for (int l = 0; l < ring_n; ++l) {
        tris.push_back({0, ring_start + l, ring_start + (l + 1) % ring_n});
    }
    for (int g = 0; g < depth; ++g) {
        const auto& grid = rows[static_cast<std::size_t>(g)];
        const int nug = mesh.radial_points[static_cast<std::size_t>(g)];
        const int nt = mesh.ring_points[static_cast<std::size_t>(g)];
        int prev = ring_start;
        for (int k = 1; k < nug; ++k) {
            const int cur = add_row(grid[static_cast<std::size_t>(k)], g);
            for (int l = 0; l < nt; ++l) {
                const int l1 = (l + 1) % nt;
                tris.push_back({prev + l, cur + l, cur + l1});
                tris.push_back({prev + l, cur + l1, prev + l1});
            }
            prev = cur;
        }
        // Outer ring at the next strip's resolution (shared with it).
        const bool last = g + 1 == depth;
        const int nn = last ? nt : mesh.ring_points[static_cast<std::size_t>(g) + 1];
        const std::vector<Eigen::Vector3d>& outer =
            last ? grid[static_cast<std::size_t>(nug)] : rows[static_cast<std::size_t>(g) + 1][0];
        const int next = add_row(outer, g + 1);
        const int ratio = nn / nt;
        for (int l = 0; l < nt; ++l) {
            for (int q = 0; q < ratio; ++q) {
                tris.push_back({prev + l, next + l * ratio + q, next + (l * ratio + q + 1) % nn});
            }
            tris.push_back({prev + l, next + ((l + 1) * ratio) % nn, prev + (l + 1) % nt});
        }
        ring_start = next;
        ring_n = nn;
    }

    // Drop everything outside the box.
    std::vector<int> remap(verts.size(), -1);
    for (std::size_t i = 0; i < verts.size(); ++i) {
        if (mesh.box.contains(verts[i])) {
            remap[i] = static_cast<int>(mesh.vertices.size());
            mesh.vertices.push_back(verts[i]);
            mesh.generation.push_back(gen_of[i]);
        } else {
            mesh.truncated = true;
        }
    }
    for (const auto& t : tris) {
        const int a = remap[static_cast<std::size_t>(t[0])];
        const int b = remap[static_cast<std::size_t>(t[1])];
        const int c = remap[static_cast<std::size_t>(t[2])];
        if (a < 0 || b < 0 || c < 0) {
            mesh.truncated = true;
            continue;
        }
        mesh.triangles.push_back({a, b, c});
        const auto& va = mesh.vertices[static_cast<std::size_t>(a)];
        const auto& vb = mesh.vertices[static_cast<std::size_t>(b)];
        const auto& vc = mesh.vertices[static_cast<std::size_t>(c)];
        mesh.max_edge = std::max({mesh.max_edge, (va - vb).norm(), (vb - vc).norm(), (vc - va).norm()});
    }
    return mesh;
}

ManifoldBranches grow_1d(const GenericMapParams& p, const FixedPointReport& fp, ManifoldKind kind, int depth,
                         const GrowOptions& options) {
    if (depth < 0) {
        throw PreconditionError("depth must be nonnegative");
    }
    const LinearData ld = linear_data(p, fp);
    const InvariantSubspace& sub = ld.subspace(kind);
    if (sub.basis.cols() != 1) {
        throw PreconditionError("requested manifold is not one dimensional at this fixed point");
    }
    Box box;
    if (options.box) {
        box = *options.box;
    } else if (p.quad.is_positive_definite()) {
        box = default_box(p);
    } else {
        throw PreconditionError("indefinite Q: a bounding box must be supplied");
    }
    ManifoldBranches out;
    out.kind = kind;
    out.epsilon = options.epsilon > 0.0 ? options.epsilon : 1e-4 * (1.0 + std::abs(fp.location[0]));
    const double lam = kind == ManifoldKind::Unstable ? sub.action(0, 0) : 1.0 / sub.action(0, 0);
    int m = options.steps_per_generation > 0
                ? options.steps_per_generation
                : choose_steps(Eigen::MatrixXd::Constant(1, 1, lam), false, options.growth_per_generation);
    if (lam < 0.0 && m % 2 == 1) {
        ++m;
    }
    out.steps_per_generation = m;
    const double gm = std::pow(lam, m);
    const Stepper step{&p, kind};
    const Eigen::Vector3d xs = fp.location;
    const Eigen::Vector3d v = sub.basis.col(0);

    for (int b = 0; b < 2; ++b) {
        const double sign = b == 0 ? 1.0 : -1.0;
        const Eigen::Vector3d base = xs + sign * out.epsilon * v;
        const Eigen::Vector3d image = step(base, m);
        const Eigen::Vector3d corr = image - xs - sign * out.epsilon * gm * v;
        const auto point = [&](int g, double u) -> Eigen::Vector3d {
            if (u == 0.0) {
                return step(base, static_cast<long>(m) * g);
            }
            return step(Eigen::Vector3d(xs + sign * out.epsilon * std::pow(gm, u) * v + u * corr),
                        static_cast<long>(m) * g);
        };
        auto& pts = out.branches[static_cast<std::size_t>(b)];
        auto& gens = out.generation[static_cast<std::size_t>(b)];
        int n = 4;
        bool stopped = false;
        for (int g = 0; g < depth && !stopped; ++g) {
            std::vector<Eigen::Vector3d> seg;
            while (true) {
                seg.clear();
                for (int k = 0; k <= n; ++k) {
                    seg.push_back(point(g, static_cast<double>(k) / n));
                }
                double e = 0.0;
                for (int k = 0; k < n; ++k) {
                    if (box.contains(seg[static_cast<std::size_t>(k)]) &&
                        box.contains(seg[static_cast<std::size_t>(k) + 1])) {
                        e = std::max(e, (seg[static_cast<std::size_t>(k)] - seg[static_cast<std::size_t>(k) + 1]).norm());
                    }
                }
                if (e > options.refine && n < (1 << 22)) {
                    n *= 2;
                    continue;
                }
                break;
            }
            for (int k = 0; k < n; ++k) {
                if (!box.contains(seg[static_cast<std::size_t>(k)])) {
                    stopped = true;
                    out.truncated = true;
                    break;
                }
                pts.push_back(seg[static_cast<std::size_t>(k)]);
                gens.push_back(g);
            }
        }
        if (!stopped) {
            const Eigen::Vector3d last = point(depth, 0.0);
            if (box.contains(last)) {
                pts.push_back(last);
                gens.push_back(depth);
            } else {
                out.truncated = true;
            }
        }
    }
    return out;
}

namespace {

struct Segment {
    Eigen::Vector3d a;
    Eigen::Vector3d b;
    int ta;
    int tb;
};

/// Intersection of triangle (va, ia) with the plane (n, d): the points where
/// edges cross the plane, with edges traversed in canonical vertex order.
int plane_cut(const std::array<Eigen::Vector3d, 3>& v, const std::array<int, 3>& idx, const std::array<double, 3>& dist,
              std::array<Eigen::Vector3d, 2>& out) {
    int count = 0;
    for (int i = 0; i < 3 && count < 2; ++i) {
        if (dist[static_cast<std::size_t>(i)] == 0.0) {
            out[static_cast<std::size_t>(count++)] = v[static_cast<std::size_t>(i)];
        }
    }
    for (int e = 0; e < 3 && count < 2; ++e) {
        std::size_t i = static_cast<std::size_t>(e), j = static_cast<std::size_t>((e + 1) % 3);
        if (idx[i] > idx[j]) {
            std::swap(i, j);
        }
        if ((dist[i] < 0.0 && dist[j] > 0.0) || (dist[i] > 0.0 && dist[j] < 0.0)) {
            out[static_cast<std::size_t>(count++)] = v[i] + (v[j] - v[i]) * (dist[i] / (dist[i] - dist[j]));
        }
    }
    return count;
}

std::optional<std::pair<Eigen::Vector3d, Eigen::Vector3d>> tri_tri(const ManifoldMesh& ma, int ta,
                                                                   const ManifoldMesh& mb, int tb,
                                                                   const std::vector<Eigen::Vector4d>& pa,
                                                                   const std::vector<Eigen::Vector4d>& pb) {
    const auto& ia = ma.triangles[static_cast<std::size_t>(ta)];
    const auto& ib = mb.triangles[static_cast<std::size_t>(tb)];
    const std::array<Eigen::Vector3d, 3> va{ma.vertices[static_cast<std::size_t>(ia[0])],
                                            ma.vertices[static_cast<std::size_t>(ia[1])],
                                            ma.vertices[static_cast<std::size_t>(ia[2])]};
    const std::array<Eigen::Vector3d, 3> vb{mb.vertices[static_cast<std::size_t>(ib[0])],
                                            mb.vertices[static_cast<std::size_t>(ib[1])],
                                            mb.vertices[static_cast<std::size_t>(ib[2])]};
    const Eigen::Vector4d& plb = pb[static_cast<std::size_t>(tb)];
    const Eigen::Vector4d& pla = pa[static_cast<std::size_t>(ta)];
    std::array<double, 3> da, db;
    for (std::size_t i = 0; i < 3; ++i) {
        da[i] = plb.head<3>().dot(va[i]) - plb[3];
        db[i] = pla.head<3>().dot(vb[i]) - pla[3];
    }
    const auto one_side = [](const std::array<double, 3>& d) {
        return (d[0] > 0.0 && d[1] > 0.0 && d[2] > 0.0) || (d[0] < 0.0 && d[1] < 0.0 && d[2] < 0.0);
    };
    if (one_side(da) || one_side(db)) {
        return std::nullopt;
    }
    if (da[0] == 0.0 && da[1] == 0.0 && da[2] == 0.0) {
        return std::nullopt;
    }
    std::array<Eigen::Vector3d, 2> sa, sb;
    if (plane_cut(va, ia, da, sa) < 2 || plane_cut(vb, ib, db, sb) < 2) {
        return std::nullopt;
    }
    const Eigen::Vector3d dir = pla.head<3>().cross(plb.head<3>());
    double a0 = dir.dot(sa[0]), a1 = dir.dot(sa[1]);
    double b0 = dir.dot(sb[0]), b1 = dir.dot(sb[1]);
    if (a0 > a1) {
        std::swap(a0, a1);
        std::swap(sa[0], sa[1]);
    }
    if (b0 > b1) {
        std::swap(b0, b1);
        std::swap(sb[0], sb[1]);
    }
    const double lo = std::max(a0, b0);
    const double hi = std::min(a1, b1);
    if (!(lo < hi)) {
        return std::nullopt;
    }
    const Eigen::Vector3d p = a0 >= b0 ? sa[0] : sb[0];
    const Eigen::Vector3d q = a1 <= b1 ? sa[1] : sb[1];
    return std::make_pair(p, q);
}

struct CellKey {
    long long x, y, z;
    bool operator==(const CellKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct CellHash {
    std::size_t operator()(const CellKey& k) const {
        std::size_t h = static_cast<std::size_t>(k.x) * 73856093ULL;
        h ^= static_cast<std::size_t>(k.y) * 19349663ULL;
        h ^= static_cast<std::size_t>(k.z) * 83492791ULL;
        return h;
    }
};

CellKey key_of(const Eigen::Vector3d& p, double cell) {
    return {static_cast<long long>(std::floor(p.x() / cell)), static_cast<long long>(std::floor(p.y() / cell)),
            static_cast<long long>(std::floor(p.z() / cell))};
}

std::vector<Eigen::Vector4d> planes(const ManifoldMesh& m) {
    std::vector<Eigen::Vector4d> out;
    out.reserve(m.triangles.size());
    for (const auto& t : m.triangles) {
        const auto& a = m.vertices[static_cast<std::size_t>(t[0])];
        const auto& b = m.vertices[static_cast<std::size_t>(t[1])];
        const auto& c = m.vertices[static_cast<std::size_t>(t[2])];
        const Eigen::Vector3d n = (b - a).cross(c - a);
        Eigen::Vector4d pl;
        pl.head<3>() = n;
        pl[3] = n.dot(a);
        out.push_back(pl);
    }
    return out;
}

double segment_line_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& o,
                             const Eigen::Vector3d& dir, Eigen::Vector3d& closest) {
    // Minimize |a + t (b - a) - o - s dir| over t in [0, 1], s free.
    const Eigen::Vector3d u = b - a;
    const Eigen::Vector3d w = a - o;
    const Eigen::Vector3d uperp = u - u.dot(dir) * dir;
    const Eigen::Vector3d wperp = w - w.dot(dir) * dir;
    double t = 0.0;
    const double den = uperp.squaredNorm();
    if (den > 0.0) {
        t = std::clamp(-wperp.dot(uperp) / den, 0.0, 1.0);
    }
    closest = a + t * u;
    return (wperp + t * uperp).norm();
}

}  // namespace

std::vector<HeteroclinicCurve> intersect_meshes(const ManifoldMesh& a, const ManifoldMesh& b,
                                                const std::optional<Reversor>& reversor,
                                                const IntersectOptions& options) {
    std::vector<HeteroclinicCurve> curves;
    if (a.triangles.empty() || b.triangles.empty()) {
        return curves;
    }
    const auto pa = planes(a);
    const auto pb = planes(b);

    double cell = std::max({b.max_edge, a.max_edge, 1e-9});
    std::unordered_map<CellKey, std::vector<int>, CellHash> grid;
    for (std::size_t t = 0; t < b.triangles.size(); ++t) {
        Eigen::Vector3d lo = b.vertices[static_cast<std::size_t>(b.triangles[t][0])];
        Eigen::Vector3d hi = lo;
        for (int k = 1; k < 3; ++k) {
            const auto& v = b.vertices[static_cast<std::size_t>(b.triangles[t][static_cast<std::size_t>(k)])];
            lo = lo.cwiseMin(v);
            hi = hi.cwiseMax(v);
        }
        const CellKey kl = key_of(lo, cell), kh = key_of(hi, cell);
        for (long long x = kl.x; x <= kh.x; ++x)
            for (long long y = kl.y; y <= kh.y; ++y)
                for (long long z = kl.z; z <= kh.z; ++z) grid[{x, y, z}].push_back(static_cast<int>(t));
    }

    std::vector<Segment> segs;
    std::vector<std::size_t> stamp(b.triangles.size(), 0);
    for (std::size_t t = 0; t < a.triangles.size(); ++t) {
        Eigen::Vector3d lo = a.vertices[static_cast<std::size_t>(a.triangles[t][0])];
        Eigen::Vector3d hi = lo;
        for (int k = 1; k < 3; ++k) {
            const auto& v = a.vertices[static_cast<std::size_t>(a.triangles[t][static_cast<std::size_t>(k)])];
            lo = lo.cwiseMin(v);
            hi = hi.cwiseMax(v);
        }
        const CellKey kl = key_of(lo, cell), kh = key_of(hi, cell);
        for (long long x = kl.x; x <= kh.x; ++x)
            for (long long y = kl.y; y <= kh.y; ++y)
                for (long long z = kl.z; z <= kh.z; ++z) {
                    const auto it = grid.find({x, y, z});
                    if (it == grid.end()) {
                        continue;
                    }
                    for (int tb : it->second) {
                        if (stamp[static_cast<std::size_t>(tb)] == t + 1) {
                            continue;
                        }
                        stamp[static_cast<std::size_t>(tb)] = t + 1;
                        if (auto s = tri_tri(a, static_cast<int>(t), b, tb, pa, pb)) {
                            segs.push_back({s->first, s->second, static_cast<int>(t), tb});
                        }
                    }
                }
    }
    if (segs.empty()) {
        return curves;
    }

    // Merge endpoints into graph nodes.
    const double mcell = 4.0 * options.merge_tol;
    std::unordered_map<CellKey, std::vector<int>, CellHash> node_grid;
    std::vector<Eigen::Vector3d> nodes;
    const auto node_of = [&](const Eigen::Vector3d& p) {
        const CellKey k = key_of(p, mcell);
        for (long long x = k.x - 1; x <= k.x + 1; ++x)
            for (long long y = k.y - 1; y <= k.y + 1; ++y)
                for (long long z = k.z - 1; z <= k.z + 1; ++z) {
                    const auto it = node_grid.find({x, y, z});
                    if (it == node_grid.end()) {
                        continue;
                    }
                    for (int n : it->second) {
                        if ((nodes[static_cast<std::size_t>(n)] - p).norm() <= options.merge_tol) {
                            return n;
                        }
                    }
                }
        nodes.push_back(p);
        node_grid[k].push_back(static_cast<int>(nodes.size()) - 1);
        return static_cast<int>(nodes.size()) - 1;
    };
    struct Edge {
        int u, v, seg;
    };
    std::vector<Edge> edges;
    for (std::size_t s = 0; s < segs.size(); ++s) {
        const int u = node_of(segs[s].a);
        const int v = node_of(segs[s].b);
        if (u != v) {
            edges.push_back({u, v, static_cast<int>(s)});
        }
    }
    std::vector<std::vector<int>> adj(nodes.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        adj[static_cast<std::size_t>(edges[e].u)].push_back(static_cast<int>(e));
        adj[static_cast<std::size_t>(edges[e].v)].push_back(static_cast<int>(e));
    }
    std::vector<char> used(edges.size(), 0);
    const auto degree_label = [&](int n) { return adj[static_cast<std::size_t>(n)].size() == 1 ? "boundary" : "junction"; };

    const auto walk = [&](int start, int first_edge) {
        HeteroclinicCurve c;
        c.polyline.push_back(nodes[static_cast<std::size_t>(start)]);
        int cur = start;
        int e = first_edge;
        while (e >= 0 && !used[static_cast<std::size_t>(e)]) {
            used[static_cast<std::size_t>(e)] = 1;
            const Edge& ed = edges[static_cast<std::size_t>(e)];
            const int nxt = ed.u == cur ? ed.v : ed.u;
            c.polyline.push_back(nodes[static_cast<std::size_t>(nxt)]);
            c.segment_triangles.push_back({segs[static_cast<std::size_t>(ed.seg)].ta, segs[static_cast<std::size_t>(ed.seg)].tb});
            cur = nxt;
            e = -1;
            if (adj[static_cast<std::size_t>(cur)].size() == 2) {
                for (int cand : adj[static_cast<std::size_t>(cur)]) {
                    if (!used[static_cast<std::size_t>(cand)]) {
                        e = cand;
                    }
                }
            }
        }
        c.closed = cur == start && c.polyline.size() > 2;
        if (c.closed) {
            c.endpoints = {"closed", "closed"};
        } else {
            c.endpoints = {degree_label(start), degree_label(cur)};
        }
        return c;
    };
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        if (adj[n].size() == 2) {
            continue;
        }
        for (int e : adj[n]) {
            if (!used[static_cast<std::size_t>(e)]) {
                curves.push_back(walk(static_cast<int>(n), e));
            }
        }
    }
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (!used[e]) {
            curves.push_back(walk(edges[e].u, static_cast<int>(e)));
        }
    }

    // Orient from the end nearer the first mesh's fixed point.
    const Eigen::Vector3d origin = a.fixed_point.location;
    for (auto& c : curves) {
        if ((c.polyline.back() - origin).norm() < (c.polyline.front() - origin).norm()) {
            std::reverse(c.polyline.begin(), c.polyline.end());
            std::reverse(c.segment_triangles.begin(), c.segment_triangles.end());
            std::swap(c.endpoints[0], c.endpoints[1]);
        }
    }

    if (reversor) {
        const FixLine line = fix_set(*reversor);
        const Eigen::Vector3d o = line.point(0.0);
        const Eigen::Vector3d dir = line.direction();
        const double tol = options.fix_tol > 0.0 ? options.fix_tol : std::max(a.refine, b.refine);
        const Eigen::Matrix3d dh = reversor->jacobian();
        const bool a_stable = a.kind == ManifoldKind::Stable;
        for (auto& c : curves) {
            const std::size_t ns = c.segment_triangles.size();
            std::vector<double> dist(ns);
            std::vector<Eigen::Vector3d> close(ns);
            for (std::size_t i = 0; i < ns; ++i) {
                dist[i] = segment_line_distance(c.polyline[i], c.polyline[i + 1], o, dir, close[i]);
            }
            for (std::size_t i = 0; i < ns; ++i) {
                if (dist[i] > tol) {
                    continue;
                }
                if ((i > 0 && dist[i - 1] < dist[i]) || (i + 1 < ns && dist[i + 1] <= dist[i])) {
                    continue;
                }
                FixCrossing fc;
                fc.point = close[i];
                fc.segment = i;
                fc.distance = dist[i];
                const int tri = a_stable ? c.segment_triangles[i][0] : c.segment_triangles[i][1];
                const Eigen::Vector4d& pl = a_stable ? pa[static_cast<std::size_t>(tri)] : pb[static_cast<std::size_t>(tri)];
                const Eigen::Vector3d nrm = pl.head<3>().normalized();
                fc.predicted_tangent = nrm.cross(dh * nrm);
                const std::size_t i0 = i > 0 ? i - 1 : i;
                const std::size_t i1 = std::min(i + 2, c.polyline.size() - 1);
                const Eigen::Vector3d tangent = c.polyline[i1] - c.polyline[i0];
                const double denom = fc.predicted_tangent.norm() * tangent.norm();
                if (denom > 0.0) {
                    const double cosang = std::min(1.0, std::abs(fc.predicted_tangent.dot(tangent)) / denom);
                    fc.angle_deg = std::acos(cosang) * 180.0 / M_PI;
                }
                c.fix_crossings.push_back(fc);
            }
        }
    }
    return curves;
}

std::vector<HeteroclinicPoint> heteroclinic_from_symmetry(const GenericMapParams& p, const Reversor& r, double lo,
                                                          double hi, const HeteroclinicSearchOptions& options) {
    using q128 = __float128;
    const auto fps = fixed_points(p);
    if (fps.size() != 2) {
        throw PreconditionError("heteroclinic search needs two fixed points");
    }
    const FixedPointReport* fa = nullptr;
    const FixedPointReport* fb = nullptr;
    for (const auto& fp : fps) {
        if (fp.stability.classification == StabilityClass::TypeA) {
            fa = &fp;
        } else if (fp.stability.classification == StabilityClass::TypeB) {
            fb = &fp;
        }
    }
    if (fa == nullptr || fb == nullptr) {
        throw PreconditionError("heteroclinic search needs hyperbolic fixed points of opposite type");
    }
    const LinearData ld = linear_data(p, *fa);
    const double lam_u = ld.unstable.action(0, 0);
    // Left eigenvector for the unstable eigenvalue.
    const Eigen::Matrix3d shifted = (ld.jacobian - lam_u * Eigen::Matrix3d::Identity()).transpose();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(shifted, Eigen::ComputeFullV);
    const Eigen::Vector3d left = svd.matrixV().col(2);

    const double xa = fa->location[0];
    const double xb = fb->location[0];

    // Side of W^s(x_A): sign of the unstable coordinate shortly after the
    // closest approach to x_A, with the parity of a negative eigenvalue removed.
    struct Probe {
        int side = 0;
        double closest = std::numeric_limits<double>::infinity();
    };
    const auto probe = [&](auto s) {
        using T = decltype(s);
        const T eta = static_cast<T>(r.eta);
        T x = s, y = -eta / 2, z = -eta - s;
        const auto dist = [&](const T& u, const T& v, const T& w) {
            const double dx = static_cast<double>(u - static_cast<T>(xa));
            const double dy = static_cast<double>(v - static_cast<T>(xa));
            const double dz = static_cast<double>(w - static_cast<T>(xa));
            return std::sqrt(dx * dx + dy * dy + dz * dz);
        };
        Probe pr;
        int best_n = -1;
        bool decided = false;
        for (int n = 0; n < options.max_steps; ++n) {
            const double d = dist(x, y, z);
            if (!std::isfinite(d) || d > 1e6) {
                break;
            }
            if (d < pr.closest) {
                pr.closest = d;
                best_n = n;
                decided = false;
            } else if (!decided && best_n >= 0 && d > 4.0 * pr.closest) {
                const double c = left[0] * static_cast<double>(x - static_cast<T>(xa)) +
                                 left[1] * static_cast<double>(y - static_cast<T>(xa)) +
                                 left[2] * static_cast<double>(z - static_cast<T>(xa));
                pr.side = c > 0.0 ? 1 : (c < 0.0 ? -1 : 0);
                if (lam_u < 0.0 && n % 2 == 1) {
                    pr.side = -pr.side;
                }
                decided = true;
            }
            p.step(x, y, z);
        }
        if (!decided) {
            pr.side = 0;
        }
        return pr;
    };
    const auto closest = [&](q128 s, bool forward, double target) {
        const q128 eta = r.eta;
        q128 x = s, y = -eta / 2, z = -eta - s;
        const auto dist = [&]() {
            const double dx = static_cast<double>(x - target);
            const double dy = static_cast<double>(y - target);
            const double dz = static_cast<double>(z - target);
            return std::sqrt(dx * dx + dy * dy + dz * dz);
        };
        double best = dist();
        for (int n = 0; n < options.max_steps; ++n) {
            if (forward) {
                p.step(x, y, z);
            } else {
                p.step_back(x, y, z);
            }
            const double d = dist();
            if (!std::isfinite(d) || d > 1e6) {
                break;
            }
            best = std::min(best, d);
        }
        return best;
    };
    const auto bisect = [&](auto a, auto b, int s0, int iterations) {
        using T = decltype(a);
        for (int it = 0; it < iterations; ++it) {
            const T m = (a + b) / 2;
            if (m == a || m == b) {
                break;
            }
            const int sm = probe(m).side;
            if (sm == 0) {
                return std::optional<std::pair<T, T>>();
            }
            if (sm == s0) {
                a = m;
            } else {
                b = m;
            }
        }
        return std::optional<std::pair<T, T>>(std::make_pair(a, b));
    };

    std::vector<HeteroclinicPoint> out;
    const int n = std::max(2, options.samples);
    std::vector<int> sides(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        sides[static_cast<std::size_t>(i)] = probe(lo + (hi - lo) * i / n).side;
    }
    for (int i = 0; i < n; ++i) {
        const int s0 = sides[static_cast<std::size_t>(i)];
        const int s1 = sides[static_cast<std::size_t>(i) + 1];
        if (s0 == 0 || s1 == 0 || s0 == s1) {
            continue;
        }
        const auto coarse = bisect(lo + (hi - lo) * i / n, lo + (hi - lo) * (i + 1) / n, s0, 80);
        if (!coarse) {
            continue;
        }
        // Only true crossings of the stable manifold approach x_A closely.
        if (probe(0.5 * (coarse->first + coarse->second)).closest > 1e-3 * (1.0 + std::abs(xa))) {
            continue;
        }
        const auto fine = bisect(static_cast<q128>(coarse->first), static_cast<q128>(coarse->second), s0, 200);
        if (!fine) {
            continue;
        }
        const q128 s = (fine->first + fine->second) / 2;
        HeteroclinicPoint hp;
        hp.s = static_cast<double>(s);
        hp.point = FixLine{r.eta}.point(hp.s);
        hp.forward_distance = closest(s, true, xa);
        hp.backward_distance = closest(s, false, xb);
        hp.forward_limit = fa->which;
        if (hp.forward_distance < options.certify_tol && hp.backward_distance < options.certify_tol) {
            const bool dup = std::any_of(out.begin(), out.end(), [&](const HeteroclinicPoint& o) {
                return std::abs(o.s - hp.s) < 1e-12 * (1.0 + std::abs(hp.s));
            });
            if (!dup) {
                out.push_back(hp);
            }
        }
    }
    return out;
}

namespace {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;
using RPoint = bg::model::point<double, 3, bg::cs::cartesian>;
using RValue = std::pair<RPoint, std::size_t>;

double directed_hausdorff(const std::vector<Eigen::Vector3d>& a, const std::vector<Eigen::Vector3d>& b) {
    std::vector<RValue> values;
    values.reserve(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        values.emplace_back(RPoint(b[i].x(), b[i].y(), b[i].z()), i);
    }
    const bgi::rtree<RValue, bgi::quadratic<16>> tree(values.begin(), values.end());
    double worst = 0.0;
    std::vector<RValue> hit;
    for (const auto& p : a) {
        hit.clear();
        tree.query(bgi::nearest(RPoint(p.x(), p.y(), p.z()), 1), std::back_inserter(hit));
        worst = std::max(worst, (b[hit.front().second] - p).norm());
    }
    return worst;
}

}  // namespace

double hausdorff_distance(const std::vector<Eigen::Vector3d>& a, const std::vector<Eigen::Vector3d>& b) {
    if (a.empty() || b.empty()) {
        return std::numeric_limits<double>::infinity();
    }
    return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double distance_to_curves(const Eigen::Vector3d& x, const std::vector<HeteroclinicCurve>& curves) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : curves) {
        for (std::size_t i = 0; i + 1 < c.polyline.size(); ++i) {
            const Eigen::Vector3d u = c.polyline[i + 1] - c.polyline[i];
            const double len2 = u.squaredNorm();
            const double t = len2 > 0.0 ? std::clamp((x - c.polyline[i]).dot(u) / len2, 0.0, 1.0) : 0.0;
            best = std::min(best, (c.polyline[i] + t * u - x).norm());
        }
        if (c.polyline.size() == 1) {
            best = std::min(best, (c.polyline[0] - x).norm());
        }
    }
    return best;
}

const char* to_string(ManifoldKind k) { return k == ManifoldKind::Stable ? "stable" : "unstable"; }

}  // namespace quadvp
