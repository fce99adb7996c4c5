#include <doctest.h>

#include "quadvp/error.hpp"
#include "quadvp/manifold.hpp"
#include "support.hpp"

using namespace quadvp;

namespace {

const GenericMapParams kSaddlePair{0.0, -0.3, 0.0, {0.5, 0.0, 0.5}};

oracle::Generic saddle_pair_oracle() { return {0.0, -0.3, 0.0, 0.5, 0.0, 0.5}; }

double nearest(const Eigen::Vector3d& x, const std::vector<Eigen::Vector3d>& cloud) {
    double best = 1e300;
    for (const auto& v : cloud) {
        best = std::min(best, (v - x).norm());
    }
    return best;
}

double segment_distance(const Eigen::Vector3d& x, const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    const Eigen::Vector3d d = b - a;
    const double t = d.squaredNorm() > 0 ? std::clamp((x - a).dot(d) / d.squaredNorm(), 0.0, 1.0) : 0.0;
    return (a + t * d - x).norm();
}

double polyline_distance(const Eigen::Vector3d& x, const std::vector<Eigen::Vector3d>& line) {
    double best = 1e300;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        best = std::min(best, segment_distance(x, line[i], line[i + 1]));
    }
    return best;
}

Eigen::Vector3d iterate_n(const oracle::Generic& o, Eigen::Vector3d x, long n) {
    for (long k = 0; k < std::abs(n); ++k) {
        x = n > 0 ? o.f(x) : o.finv(x);
    }
    return x;
}

}  // namespace

TEST_CASE("linear_data at the saddle-pair fixed points") {
    const auto fps = fixed_points(kSaddlePair);
    REQUIRE(fps.size() == 2);
    CHECK(fps[0].stability.classification == StabilityClass::TypeA);
    CHECK(fps[1].stability.classification == StabilityClass::TypeB);
    const auto a = linear_data(kSaddlePair, fps[0]);
    CHECK(a.unstable.basis.cols() == 1);
    CHECK(a.stable.basis.cols() == 2);
    CHECK(a.stable.complex_pair);
    const auto b = linear_data(kSaddlePair, fps[1]);
    CHECK(b.unstable.basis.cols() == 2);
    CHECK(b.stable.basis.cols() == 1);
    for (const auto* ld : {&a, &b}) {
        for (const auto* sub : {&ld->stable, &ld->unstable}) {
            // J B = B A on the invariant subspace.
            CHECK((ld->jacobian * sub->basis - sub->basis * sub->action).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
    // t = s: a fixed point with eigenvalue 1.
    const auto deg = fixed_points({0.0225, -0.3, 0.0, {0.5, 0.0, 0.5}});
    REQUIRE(deg.size() == 1);
    CHECK_THROWS_AS(linear_data(kSaddlePair, deg[0]), PreconditionError);
}

TEST_CASE("default box is invariant under the reversor and contains the escape cube") {
    const Box b = default_box(kSaddlePair);
    const Reversor r = *reversor_for(kSaddlePair);
    const double kappa = escape_bound(kSaddlePair);
    for (int i = 0; i < 200; ++i) {
        const Eigen::Vector3d x = oracle::random_vec(3, 1.5 * kappa);
        CHECK(b.contains(x));
        const Eigen::Vector3d y = b.center + oracle::random_vec(3, b.half_width);
        CHECK(b.contains(r.apply(y)));
    }
}

TEST_CASE("grow_2d: depth 0 is the seed ring in the eigenplane") {
    const auto fps = fixed_points(kSaddlePair);
    GrowOptions o;
    const auto mesh = grow_2d(kSaddlePair, fps[1], ManifoldKind::Unstable, 0, o);
    const auto ld = linear_data(kSaddlePair, fps[1]);
    const Eigen::Vector3d b0 = ld.unstable.basis.col(0), b1 = ld.unstable.basis.col(1);
    const Eigen::Vector3d normal = b0.cross(b1).normalized();
    CHECK(mesh.vertices.size() == 65u);
    CHECK(mesh.epsilon == doctest::Approx(1e-4 * (1.0 + std::abs(fps[1].location[0]))));
    for (std::size_t i = 1; i < mesh.vertices.size(); ++i) {
        const Eigen::Vector3d d = mesh.vertices[i] - fps[1].location;
        CHECK(std::abs(d.dot(normal)) < 1e-15 + mesh.epsilon * mesh.epsilon);
        CHECK(d.norm() <= 2.0 * mesh.epsilon);
    }
    CHECK_THROWS_AS(grow_2d(kSaddlePair, fps[1], ManifoldKind::Stable, 1, o), PreconditionError);
}

TEST_CASE("grow_2d: ring of generation 1 is the image of the seed ring") {
    const auto fps = fixed_points(kSaddlePair);
    GrowOptions o;
    o.refine = 1e9;  // no angular refinement, so rings keep the seed sampling
    const auto d0 = grow_2d(kSaddlePair, fps[1], ManifoldKind::Unstable, 0, o);
    const auto d1 = grow_2d(kSaddlePair, fps[1], ManifoldKind::Unstable, 1, o);
    const auto oracle_map = saddle_pair_oracle();
    std::vector<Eigen::Vector3d> ring1;
    for (std::size_t i = 0; i < d1.vertices.size(); ++i) {
        if (d1.generation[i] == 1) {
            ring1.push_back(d1.vertices[i]);
        }
    }
    REQUIRE(ring1.size() == 64u);
    for (std::size_t i = 1; i < d0.vertices.size(); ++i) {
        CHECK(nearest(iterate_n(oracle_map, d0.vertices[i], d1.steps_per_generation), ring1) < 1e-12);
    }
}

TEST_CASE("grow_2d: invariance residual and generation areas") {
    const auto fps = fixed_points(kSaddlePair);
    GrowOptions o;
    o.refine = 0.1;
    const auto oracle_map = saddle_pair_oracle();
    for (const auto& [fp, kind] : {std::pair{fps[1], ManifoldKind::Unstable}, std::pair{fps[0], ManifoldKind::Stable}}) {
        const int depth = 4;
        const auto mesh = grow_2d(kSaddlePair, fp, kind, depth, o);
        const long m = kind == ManifoldKind::Unstable ? mesh.steps_per_generation : -mesh.steps_per_generation;
        std::vector<Eigen::Vector3d> later;
        for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
            if (mesh.generation[i] >= 1) {
                later.push_back(mesh.vertices[i]);
            }
        }
        int tested = 0;
        for (std::size_t i = 0; i < mesh.vertices.size(); i += 7) {
            if (mesh.generation[i] >= depth - 1) {
                continue;
            }
            const Eigen::Vector3d y = iterate_n(oracle_map, mesh.vertices[i], m);
            if (!mesh.box.contains(y)) {
                continue;
            }
            CHECK(nearest(y, later) < 10.0 * o.refine);
            ++tested;
        }
        CHECK(tested > 10);
    }
    const auto wu = grow_2d(kSaddlePair, fps[1], ManifoldKind::Unstable, 5, o);
    std::vector<double> area(6, 0.0);
    for (const auto& t : wu.triangles) {
        const auto& a = wu.vertices[static_cast<std::size_t>(t[0])];
        const auto& b = wu.vertices[static_cast<std::size_t>(t[1])];
        const auto& c = wu.vertices[static_cast<std::size_t>(t[2])];
        const int g = std::max({wu.generation[static_cast<std::size_t>(t[0])], wu.generation[static_cast<std::size_t>(t[1])],
                                wu.generation[static_cast<std::size_t>(t[2])]});
        area[static_cast<std::size_t>(g)] += 0.5 * (b - a).cross(c - a).norm();
    }
    for (int g = 1; g < 5; ++g) {
        CHECK(area[static_cast<std::size_t>(g)] >= area[static_cast<std::size_t>(g) - 1]);
    }
}

TEST_CASE("grow_1d: seeds and the reversor relation between branches") {
    const auto fps = fixed_points(kSaddlePair);
    const auto s0 = grow_1d(kSaddlePair, fps[1], ManifoldKind::Stable, 0, {});
    CHECK(s0.branches[0].size() == 1u);
    CHECK(s0.branches[1].size() == 1u);
    CHECK((s0.branches[0][0] - fps[1].location).norm() == doctest::Approx(s0.epsilon));

    GrowOptions o;
    o.refine = 0.02;
    const auto ws = grow_1d(kSaddlePair, fps[1], ManifoldKind::Stable, 4, o);
    const auto wu = grow_1d(kSaddlePair, fps[0], ManifoldKind::Unstable, 4, o);
    const Reversor r = *reversor_for(kSaddlePair);
    int tested = 0;
    for (const auto& branch : ws.branches) {
        for (std::size_t i = 0; i < branch.size(); i += 5) {
            const Eigen::Vector3d y = r.apply(branch[i]);
            const double d = std::min(polyline_distance(y, wu.branches[0]), polyline_distance(y, wu.branches[1]));
            if ((branch[i] - fps[1].location).norm() > 0.5) {
                continue;
            }
            CHECK(d < 1e-3);
            ++tested;
        }
    }
    CHECK(tested > 5);
}

TEST_CASE("intersect_meshes: disjoint meshes give nothing") {
    const auto fps = fixed_points(kSaddlePair);
    const auto a = grow_2d(kSaddlePair, fps[0], ManifoldKind::Stable, 0, {});
    const auto b = grow_2d(kSaddlePair, fps[1], ManifoldKind::Unstable, 0, {});
    CHECK(intersect_meshes(a, b, reversor_for(kSaddlePair)).empty());
}

TEST_CASE("intersect_meshes: two crossing planes meet along a line") {
    ManifoldMesh a, b;
    const int n = 8;
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            const double u = -1.0 + 2.0 * i / n, w = -1.0 + 2.0 * j / n;
            a.vertices.emplace_back(u, w, 0.1);
            b.vertices.emplace_back(u, 0.1, w);
        }
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int k = j * (n + 1) + i;
            for (auto* m : {&a, &b}) {
                m->triangles.push_back({k, k + 1, k + n + 2});
                m->triangles.push_back({k, k + n + 2, k + n + 1});
            }
        }
    }
    a.max_edge = b.max_edge = 2.0 * std::sqrt(2.0) / n;
    const auto curves = intersect_meshes(a, b);
    REQUIRE(curves.size() == 1u);
    double xmin = 1e9, xmax = -1e9;
    for (const auto& p : curves[0].polyline) {
        CHECK(std::abs(p[1] - 0.1) < 1e-12);
        CHECK(std::abs(p[2] - 0.1) < 1e-12);
        xmin = std::min(xmin, p[0]);
        xmax = std::max(xmax, p[0]);
    }
    CHECK(xmin == doctest::Approx(-1.0));
    CHECK(xmax == doctest::Approx(1.0));
}

TEST_CASE("symmetric heteroclinic points connect the two fixed points") {
    const auto fps = fixed_points(kSaddlePair);
    const Reversor r = *reversor_for(kSaddlePair);
    const auto hits = heteroclinic_from_symmetry(kSaddlePair, r, -0.5, 0.5);
    REQUIRE_FALSE(hits.empty());
    const auto oracle_map = saddle_pair_oracle();
    for (const auto& h : hits) {
        CHECK((r.apply(h.point) - h.point).norm() < 1e-12);
        CHECK(h.forward_distance < 1e-6);
        CHECK(h.backward_distance < 1e-6);
        // heteroclinic symmetry: forward limit and backward limit are the two different fixed points
        const auto& fwd = h.forward_limit == FixedPointSide::Plus ? fps[0] : fps[1];
        const auto& bwd = h.forward_limit == FixedPointSide::Plus ? fps[1] : fps[0];
        Eigen::Vector3d x = h.point, y = h.point;
        double best_f = 1e9, best_b = 1e9;
        for (int k = 0; k < 4000; ++k) {
            x = oracle_map.f(x);
            y = oracle_map.finv(y);
            best_f = std::min(best_f, (x - fwd.location).norm());
            best_b = std::min(best_b, (y - bwd.location).norm());
        }
        // Saddle approach is limited by rounding amplified along the unstable direction.
        CHECK(best_f < 1e-3);
        CHECK(best_b < 1e-3);
        CHECK(best_f < 1e-2 * (fwd.location - bwd.location).norm());
    }
}

TEST_CASE("hausdorff_distance matches brute force") {
    std::vector<Eigen::Vector3d> a, b;
    for (int i = 0; i < 300; ++i) {
        a.push_back(oracle::random_vec(3));
        b.push_back(oracle::random_vec(3));
    }
    double ref = 0.0;
    for (const auto& x : a) {
        ref = std::max(ref, nearest(x, b));
    }
    for (const auto& x : b) {
        ref = std::max(ref, nearest(x, a));
    }
    CHECK(hausdorff_distance(a, b) == doctest::Approx(ref).epsilon(1e-15));
    CHECK(hausdorff_distance(a, a) == 0.0);
}
