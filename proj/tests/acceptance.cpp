// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "quadvp/cli.hpp"
#include "quadvp/diagram.hpp"
#include "quadvp/dynamics.hpp"
#include "quadvp/io.hpp"
#include "quadvp/manifold.hpp"
#include "quadvp/normalform.hpp"
#include "quadvp/shear.hpp"
#include "quadvp/symplectic.hpp"
#include "support.hpp"

using namespace quadvp;
using oracle::Mat;
using oracle::Vec;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

QuadMap to_quad(const oracle::RawMap& f) { return QuadMap(f.b, f.l, f.a); }

oracle::RawMap standard_shear(const Eigen::Vector3d& v, const Eigen::Matrix3d& p) {
    return oracle::affine_after_shear(Mat::Identity(3, 3), Vec::Zero(3), v, p);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

Eigen::Matrix3d random_rotation() {
    Eigen::HouseholderQR<Eigen::Matrix3d> qr(Eigen::Matrix3d(oracle::random_mat(3, 3)));
    Eigen::Matrix3d q = qr.householderQ();
    if (q.determinant() < 0) {
        q.col(0) *= -1.0;
    }
    return q;
}

// x + 1/2 Q(y, z) e1 + c z^2 e2 in a rotated frame: volume preserving, no quadratic inverse, not a shear.
oracle::RawMap triangular_perturbation(double scale) {
    const Eigen::Matrix3d r = random_rotation();
    std::vector<Mat> a(3, Mat::Zero(3, 3));
    Eigen::Matrix2d q = oracle::random_symmetric(2);
    a[0].bottomRightCorner(2, 2) = q;
    a[1](2, 2) = scale * (0.5 + std::abs(oracle::uniform()));
    a[0](1, 1) += 1.0;
    const oracle::RawMap t{Vec::Zero(3), Mat::Identity(3, 3), a};
    // x -> r t(r^T x)
    return oracle::before_linear(oracle::affine_after(r, Vec::Zero(3), t), r.transpose());
}

Outcome criterion1() {
    const auto t0 = Clock::now();
    Outcome o;
    int bad_pos = 0, bad_neg = 0;
    double worst_det = 0.0, worst_inv = 0.0;
    for (int k = 0; k < 500; ++k) {
        const auto s = oracle::random_shear();
        const auto raw = standard_shear(s.v, s.p);
        const QuadMap f = to_quad(raw);
        const auto vp = is_volume_preserving(f);
        bool ok = vp.value && vp.certificate.condition.find("symbolic") != std::string::npos;
        for (int i = 0; i < 100; ++i) {
            const double d = raw.jacobian(oracle::random_vec(3, 2.0)).determinant();
            worst_det = std::max(worst_det, std::abs(d - 1.0));
        }
        const auto id = compose_quadratic(f, invert_quadratic(f));
        const auto id2 = compose_quadratic(invert_quadratic(f), f);
        ok = ok && id && id2;
        if (id && id2) {
            worst_inv = std::max({worst_inv, id->max_coefficient_difference(QuadMap::identity(3)),
                                  id2->max_coefficient_difference(QuadMap::identity(3))});
        }
        bad_pos += !ok;
    }
    for (int k = 0; k < 500; ++k) {
        QuadMap f;
        if (k % 2 == 0) {
            const auto s = oracle::random_shear();
            Eigen::Matrix3d p = s.p + 0.5 * oracle::random_symmetric(3);
            while ((p * s.v).norm() < 1e-3) {
                p = s.p + 0.5 * oracle::random_symmetric(3);
            }
            f = to_quad(standard_shear(s.v, p));
        } else {
            const auto s = oracle::random_shear();
            auto raw = standard_shear(s.v, s.p);
            for (auto& a : raw.a) {
                a += 0.1 * oracle::random_symmetric(3);
            }
            f = to_quad(raw);
        }
        const bool vp = is_volume_preserving(f).value;
        const bool qi = vp && has_quadratic_inverse(f).value;
        bad_neg += vp && qi;
    }
    const double dt = seconds_since(t0);
    o.pass = bad_pos == 0 && bad_neg == 0 && worst_det <= 1e-12 && worst_inv <= 1e-12 && dt < 10.0;
    o.detail = "shears failing=" + std::to_string(bad_pos) + "/500, non-examples passing=" + std::to_string(bad_neg) +
               "/500, max|detDf-1|=" + fmt("%.2e", worst_det) + ", inverse residual=" + fmt("%.2e", worst_inv) +
               ", " + fmt("%.2fs", dt);
    return o;
}

Outcome criterion2() {
    Outcome o;
    double worst = 0.0, worst_pt = 0.0;
    for (int k = 0; k < 100; ++k) {
        const auto s = oracle::random_shear();
        const ShearData d(s.v, s.p);
        const QuadMap f = build_shear(d);
        const QuadMap finv = invert_quadratic(f);
        for (int e = -3; e <= 3; ++e) {
            QuadMap acc = QuadMap::identity(3);
            for (int i = 0; i < std::abs(e); ++i) {
                acc = *compose_quadratic(e > 0 ? f : finv, acc);
            }
            worst = std::max(worst, power(d, e).max_coefficient_difference(acc));
            const auto raw = standard_shear(s.v, s.p);
            Vec x = oracle::random_vec(3);
            const Vec x0 = x;
            for (int i = 0; i < std::abs(e); ++i) {
                x = e > 0 ? raw(x) : Vec(x - 0.5 * x.dot(s.p * x) * s.v);
            }
            worst_pt = std::max(worst_pt, (power(d, e).evaluate(x0) - x).norm());
        }
    }
    o.pass = worst <= 1e-12 && worst_pt <= 1e-12;
    o.detail = "max coefficient diff=" + fmt("%.2e", worst) + ", pointwise=" + fmt("%.2e", worst_pt);
    return o;
}

Outcome criterion3() {
    Outcome o;
    double worst_be = 0.0, worst_eb = 0.0;
    int accepted = 0, nonvp = 0;
    for (int k = 0; k < 500; ++k) {
        const auto s = oracle::random_shear();
        const ShearData d(s.v, s.p);
        const auto ex = extract_shear(build_shear(d));
        if (ex.kind != ShearExtraction::Kind::Shear) {
            worst_eb = 1e300;
            continue;
        }
        worst_eb = std::max({worst_eb, (ex.data->v() - d.v()).norm(), (ex.data->p() - d.p()).norm()});
        const QuadMap f = to_quad(standard_shear(s.v, s.p));
        const auto ex2 = extract_shear(f);
        if (ex2.kind != ShearExtraction::Kind::Shear) {
            worst_be = 1e300;
            continue;
        }
        worst_be = std::max(worst_be, build_shear(*ex2.data).max_coefficient_difference(f));
    }
    for (int k = 0; k < 500; ++k) {
        const QuadMap f = to_quad(triangular_perturbation(oracle::uniform(0.01, 1.0)));
        nonvp += !is_volume_preserving(f).value;
        accepted += extract_shear(f).kind != ShearExtraction::Kind::NotAShear;
    }
    o.pass = worst_be <= 1e-12 && worst_eb <= 1e-12 && accepted == 0 && nonvp == 0;
    o.detail = "build(extract) diff=" + fmt("%.2e", worst_be) + ", extract(build) diff=" + fmt("%.2e", worst_eb) +
               ", non-shears accepted=" + std::to_string(accepted) + "/500 (all volume preserving: " +
               (nonvp == 0 ? "yes" : "no") + ")";
    return o;
}

// Criterion 4 helpers.
Eigen::Matrix3d well_conditioned() {
    for (;;) {
        Eigen::Matrix3d v = oracle::random_mat(3, 3);
        if (std::abs(v.determinant()) > 0.3) {
            return v;
        }
    }
}

Eigen::Matrix3d killing(const Eigen::Vector3d& v) {
    const Eigen::Matrix3d pr = Eigen::Matrix3d::Identity() - v * v.transpose() / v.squaredNorm();
    Eigen::Matrix3d p = pr * oracle::random_symmetric(3) * pr;
    return 0.5 * (p + p.transpose());
}

oracle::RawMap draw_case(int which) {
    if (which == 1) {
        const Eigen::Vector3d v = oracle::random_vec(3).normalized();
        return oracle::affine_after_shear(oracle::random_sl(3), oracle::random_vec(3), v, killing(v));
    }
    const Eigen::Matrix3d basis = well_conditioned();
    Eigen::Matrix3d block = Eigen::Matrix3d::Zero();
    Eigen::Vector3d v;
    if (which == 2) {
        Eigen::Matrix2d c;
        double beta = 0.0;
        do {
            c = Eigen::Matrix2d::Identity() + oracle::random_mat(2, 2, 0.9);
            beta = c.determinant();
        } while (std::abs(beta) < 0.3 || std::abs(beta) > 3.0);
        block.topLeftCorner<2, 2>() = c;
        block(2, 2) = 1.0 / beta;
        v = basis * Eigen::Vector3d(oracle::uniform(0.5, 1.0), oracle::uniform(0.5, 1.0), 0.0);
    } else {
        const double alpha = (oracle::uniform() < 0 ? -1.0 : 1.0) * oracle::uniform(0.5, 2.0);
        block << alpha, 0, 0, 0, 0, -1.0 / alpha, 0, 1, oracle::uniform(-2.0, 2.0);
        v = basis.col(0);
    }
    return oracle::affine_after_shear(basis * block * basis.inverse(), oracle::random_vec(3), v, killing(v));
}

Eigen::Vector3d closed_form(const NormalForm& nf, const Eigen::Vector3d& p) {
    const double x = p[0], y = p[1], z = p[2];
    if (nf.kind == NormalCase::I) {
        const auto& g = nf.generic();
        return oracle::Generic{g.alpha, g.tau, g.sigma, g.quad.a, g.quad.b, g.quad.c}.f(p);
    }
    if (nf.kind == NormalCase::II) {
        const auto& c = std::get<CaseIIParams>(nf.params);
        return {c.shift[0] + c.alpha * x + y + c.quad.a * x * x + c.quad.b * x * z + c.quad.c * z * z,
                c.shift[1] - c.beta * x, c.shift[2] + z / c.beta};
    }
    const auto& c = std::get<CaseIIIParams>(nf.params);
    return {c.shift[0] + c.alpha * x + c.quad.a * y * y + c.quad.b * y * z + c.quad.c * z * z,
            c.shift[1] - z / c.alpha, c.shift[2] + y + c.beta * z};
}

Outcome criterion4() {
    const auto t0 = Clock::now();
    Outcome o;
    int wrong_tag = 0, errors = 0;
    double worst = 0.0;
    for (int which = 1; which <= 3; ++which) {
        for (int k = 0; k < 200; ++k) {
            const auto raw = draw_case(which);
            try {
                const NormalForm nf = to_normal_form(to_quad(raw));
                const NormalCase want = which == 1 ? NormalCase::I : which == 2 ? NormalCase::II : NormalCase::III;
                if (nf.kind != want) {
                    ++wrong_tag;
                    continue;
                }
                const auto lu = nf.conjugacy.linear().partialPivLu();
                for (int i = 0; i < 20; ++i) {
                    const Eigen::Vector3d xi = oracle::random_vec(3);
                    const Vec image = lu.solve(raw(nf.conjugacy.apply(xi)) - nf.conjugacy.constant());
                    const Eigen::Vector3d expect = closed_form(nf, xi);
                    worst = std::max(worst, (image - expect).cwiseAbs().maxCoeff() / (1.0 + expect.cwiseAbs().maxCoeff()));
                }
            } catch (const std::exception&) {
                ++errors;
            }
        }
    }
    const double dt = seconds_since(t0);
    o.pass = wrong_tag == 0 && errors == 0 && worst < 1e-9 && dt < 30.0;
    o.detail = "wrong tags=" + std::to_string(wrong_tag) + "/600, errors=" + std::to_string(errors) +
               ", max relative oracle residual=" + fmt("%.2e", worst) + ", " + fmt("%.2fs", dt);
    return o;
}

Outcome criterion5() {
    Outcome o;
    const QuadraticForm2 forms[3] = {{0.5, 0.0, 0.5}, {0.2, 0.3, 0.5}, {-0.5, 1.0, 0.5}};
    double worst_fix = 0.0, worst_trace = 0.0;
    int count_errors = 0, flips = 0;
    for (const auto& q : forms) {
        const oracle::Generic base{0, 0, 0, q.a, q.b, q.c};
        std::vector<int> counts(50 * 50);
        for (int j = 0; j < 50; ++j) {
            for (int i = 0; i < 50; ++i) {
                const double tau = -4.0 + 8.0 * (i + 0.5) / 50.0;
                const double alpha = -4.0 + 8.0 * (j + 0.5) / 50.0;
                const GenericMapParams p{alpha, tau, 0.0, q};
                const auto fps = fixed_points(p);
                const double disc = tau * tau - 4.0 * alpha;
                const int expect = disc > 0 ? 2 : disc < 0 ? 0 : 1;
                counts[static_cast<std::size_t>(j * 50 + i)] = static_cast<int>(fps.size());
                count_errors += static_cast<int>(fps.size()) != expect;
                oracle::Generic g = base;
                g.alpha = alpha;
                g.tau = tau;
                for (const auto& f : fps) {
                    worst_fix = std::max(worst_fix, (g.f(f.location) - f.location).cwiseAbs().maxCoeff());
                    const double sign = f.which == FixedPointSide::Plus ? 1.0 : -1.0;
                    worst_trace = std::max(worst_trace, std::abs(f.t - f.s - sign * std::sqrt(disc)));
                }
            }
        }
        for (int j = 0; j < 50; ++j) {
            for (int i = 0; i + 1 < 50; ++i) {
                const int a = counts[static_cast<std::size_t>(j * 50 + i)], b = counts[static_cast<std::size_t>(j * 50 + i + 1)];
                if (a != b) {
                    ++flips;
                    const double t0 = -4.0 + 8.0 * (i + 0.5) / 50.0, t1 = t0 + 8.0 / 50.0;
                    const double alpha = -4.0 + 8.0 * (j + 0.5) / 50.0;
                    count_errors += (t0 * t0 - 4 * alpha) * (t1 * t1 - 4 * alpha) >= 0;
                }
            }
        }
    }
    o.pass = count_errors == 0 && worst_fix <= 1e-12 && worst_trace <= 1e-10 && flips > 0;
    o.detail = "max|f(x*)-x*|=" + fmt("%.2e", worst_fix) + ", max trace identity error=" + fmt("%.2e", worst_trace) +
               ", count mismatches=" + std::to_string(count_errors) + ", count flips=" + std::to_string(flips);
    return o;
}

Outcome criterion6() {
    Outcome o;
    const auto r1 = classify_stability(-1.0, -1.0);
    std::vector<std::complex<double>> want = {-1.0, -1.0, 1.0};
    double e1 = 0.0;
    std::vector<bool> used(3, false);
    for (const auto& w : want) {
        double best = 1e9;
        std::size_t bi = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            if (!used[i] && std::abs(r1.eigenvalues[i] - w) < best) {
                best = std::abs(r1.eigenvalues[i] - w);
                bi = i;
            }
        }
        used[bi] = true;
        e1 = std::max(e1, best);
    }
    const auto r3 = classify_stability(3.0, 3.0);
    double e3 = 0.0;
    for (const auto& z : r3.eigenvalues) {
        e3 = std::max(e3, std::abs(z - 1.0));
    }
    double worst_gap = 0.0;
    int samples = 0;
    for (int branch = 0; branch < 2; ++branch) {
        for (int k = 0; k <= 500; ++k) {
            const double r = branch == 0 ? -3.0 + 2.7 * k / 500.0 : 0.3 + 2.7 * k / 500.0;
            const auto rep = classify_stability(2 * r + 1 / (r * r), r * r + 2 / r);
            double best = 1e9;
            for (int i = 0; i < 3; ++i) {
                for (int j = i + 1; j < 3; ++j) {
                    best = std::min(best, std::abs(rep.eigenvalues[static_cast<std::size_t>(i)] - rep.eigenvalues[static_cast<std::size_t>(j)]));
                }
            }
            worst_gap = std::max(worst_gap, best);
            ++samples;
        }
    }
    o.pass = e1 <= 1e-9 && e3 <= 1e-6 && worst_gap < 1e-6;
    o.detail = "(-1,-1) error=" + fmt("%.2e", e1) + ", (3,3) triple-root error=" + fmt("%.2e", e3) +
               ", max double-root gap over " + std::to_string(samples) + " samples=" + fmt("%.2e", worst_gap);
    return o;
}

GenericMapParams random_positive_definite() {
    for (;;) {
        const double a = oracle::uniform(0.05, 1.0), c = oracle::uniform(0.05, 1.0);
        const double b = oracle::uniform(-1.0, 1.0) * 2.0 * std::sqrt(a * c);
        const double s = a + b + c;
        GenericMapParams p{oracle::uniform(-2, 2), oracle::uniform(-2, 2), oracle::uniform(-2, 2), {a / s, b / s, c / s}};
        if (p.quad.is_positive_definite() && p.quad.discriminant() > 1e-3) {
            return p;
        }
    }
}

Outcome criterion7() {
    const auto t0 = Clock::now();
    Outcome o;
    const double k0 = escape_bound({0.5, 0.0, 0.5}, 0.0, 0.0, 0.0);
    int not_escaped = 0, not_monotone = 0, wrong_axis = 0, false_escape = 0, fixed_checked = 0, p2_checked = 0;
    int drifted = 0;
    // An escape counts against the bound only if it fires while the orbit is still on the invariant set;
    // unstable orbits leave it through rounding and may then escape legitimately.
    const auto tally = [&](const OrbitRecord& orbit, const std::vector<Eigen::Vector3d>& invariant) {
        if (!orbit.escape_time) {
            return;
        }
        const auto& x = orbit.states[static_cast<std::size_t>(*orbit.escape_time)];
        bool on_set = false;
        for (const auto& v : invariant) {
            on_set = on_set || (x - v).norm() < 1e-6 * (1.0 + v.norm());
        }
        false_escape += on_set;
        drifted += !on_set;
    };
    for (int k = 0; k < 1000; ++k) {
        const auto p = random_positive_definite();
        const double kappa = escape_bound(p);
        const int which = 1 + k % 3;
        const double big = kappa * oracle::uniform(1.01, 3.0) * (oracle::uniform() < 0 ? -1.0 : 1.0);
        Eigen::Vector3d x0(oracle::uniform() * std::abs(big), oracle::uniform() * std::abs(big), oracle::uniform() * std::abs(big));
        x0[which == 1 ? 0 : which == 2 ? 2 : 1] = big;
        std::vector<Direction> dirs;
        if (which != 2) {
            dirs.push_back(Direction::Forward);
        }
        if (which != 1) {
            dirs.push_back(Direction::Backward);
        }
        for (const auto dir : dirs) {
            const auto orbit = iterate(p, x0, 500, dir);
            if (orbit.verdict == OrbitVerdict::BoundedSoFar) {
                ++not_escaped;
                continue;
            }
            const auto& s = orbit.states;
            const std::size_t t0i = static_cast<std::size_t>(*orbit.escape_time);
            bool mono = true;
            if (dir == Direction::Forward) {
                double prev = std::max(std::abs(s[t0i][0]), std::abs(s[t0i][1]));
                for (std::size_t t = t0i + 1; t < s.size(); ++t) {
                    mono = mono && s[t][0] > prev;
                    prev = s[t][0];
                }
            } else {
                double prev = -std::max(std::abs(s[t0i][1]), std::abs(s[t0i][2]));
                for (std::size_t t = t0i + 1; t < s.size(); ++t) {
                    mono = mono && s[t][2] < prev;
                    prev = s[t][2];
                }
            }
            not_monotone += !mono;
            const auto a = asymptotic_direction(orbit);
            const bool axis_ok = dir == Direction::Forward ? a.axis == AsymptoticAxis::PlusX && s.back()[0] > 0
                                                           : a.axis == AsymptoticAxis::MinusZ && s.back()[2] < 0;
            wrong_axis += !(axis_ok && a.ratio_near < 0.1 && a.ratio_far < 0.1);
        }
        for (const auto& f : fixed_points(p)) {
            if (f.location.cwiseAbs().maxCoeff() < kappa) {
                for (const auto dir : {Direction::Forward, Direction::Backward}) {
                    const auto orbit = iterate(p, f.location, 100, dir);
                    tally(orbit, {f.location});
                }
                ++fixed_checked;
            }
        }
    }
    for (int k = 0; k < 100; ++k) {
        // Period-2 lines exist only for degenerate Q (a = c = b/2).
        const double a = 0.25;
        const double sigma = oracle::uniform(-1, 1);
        const GenericMapParams p{oracle::uniform(-0.2, 0.2), -2.0 - sigma, sigma, {a, 2 * a, a}};
        const auto line = period2_line(p);
        if (!line) {
            continue;
        }
        for (double delta : line->deltas) {
            const Eigen::Vector3d x0 = Period2Line::point(delta, oracle::uniform(-1, 1));
            const oracle::Generic g{p.alpha, p.tau, p.sigma, p.quad.a, p.quad.b, p.quad.c};
            for (const auto dir : {Direction::Forward, Direction::Backward}) {
                tally(iterate(p, x0, 100, dir), {x0, dir == Direction::Forward ? g.f(x0) : g.finv(x0)});
            }
            ++p2_checked;
        }
    }
    const double dt = seconds_since(t0);
    o.pass = k0 == 4.0 && not_escaped == 0 && not_monotone == 0 && wrong_axis == 0 && false_escape == 0 && dt < 60.0;
    o.detail = "kappa(a=c=1/2)=" + fmt("%.17g", k0) + ", not escaped=" + std::to_string(not_escaped) +
               ", non-monotone=" + std::to_string(not_monotone) + ", wrong axis=" + std::to_string(wrong_axis) +
               ", escapes fired on an invariant set=" + std::to_string(false_escape) + " (fixed points " +
               std::to_string(fixed_checked) + ", period-2 seeds " + std::to_string(p2_checked) +
               "; escapes after rounding drift off the set=" + std::to_string(drifted) + "), " + fmt("%.2fs", dt);
    return o;
}

Outcome criterion8() {
    Outcome o;
    int failures = 0, wrong = 0;
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const double a = oracle::uniform(-1.0, 1.5);
        const GenericMapParams p{oracle::uniform(-2, 2), oracle::uniform(-2, 2), oracle::uniform(-2, 2), {a, 1.0 - 2.0 * a, a}};
        const auto h = reversor_for(p);
        if (!h) {
            ++failures;
            continue;
        }
        failures += h->linear() * h->linear() != Eigen::Matrix3d::Identity();
        failures += h->linear() * h->constant() + h->constant() != Eigen::Vector3d::Zero();
        const oracle::Generic g{p.alpha, p.tau, p.sigma, p.quad.a, p.quad.b, p.quad.c};
        for (int i = 0; i < 20; ++i) {
            const Eigen::Vector3d x = oracle::random_vec(3, 2.0);
            failures += (h->apply(h->apply(x)) - x).cwiseAbs().maxCoeff() > 1e-12;
            worst = std::max(worst, (h->apply(g.f(x)) - g.finv(h->apply(x))).cwiseAbs().maxCoeff());
        }
    }
    for (int k = 0; k < 100; ++k) {
        double a, c;
        do {
            a = oracle::uniform(-1, 1.5);
            c = oracle::uniform(-1, 1.5);
        } while (std::abs(a - c) <= 1e-3);
        wrong += reversor_for({oracle::uniform(), oracle::uniform(), oracle::uniform(), {a, 1.0 - a - c, c}}).has_value();
    }
    o.pass = failures == 0 && worst < 1e-10 && wrong == 0;
    o.detail = "h^2 or construction failures=" + std::to_string(failures) + ", max|hf - f^-1 h|=" + fmt("%.2e", worst) +
               ", a!=c reported reversible=" + std::to_string(wrong) + "/100";
    return o;
}

Outcome criterion9() {
    Outcome o;
    const oracle::Generic g{0.0, -2.0, 0.0, 0.25, 0.5, 0.25};
    std::string per;
    for (double delta : {0.0, -4.0}) {
        double worst = 0.0;
        for (int k = 0; k <= 20; ++k) {
            const double x = -3.0 + 6.0 * k / 20.0;
            const Eigen::Vector3d v(x, delta - x, x);
            worst = std::max(worst, (g.f(g.f(v)) - v).cwiseAbs().maxCoeff());
        }
        const bool ok = worst <= 1e-12;
        o.pass = o.pass && ok;
        per += (per.empty() ? "" : ", ") + std::string("delta=") + fmt("%g", delta) + " max|f^2(v)-v|=" + fmt("%.3g", worst);
    }
    const auto line = period2_line({0.0, -2.0, 0.0, {0.25, 0.5, 0.25}});
    std::string roots;
    if (line) {
        for (double d : line->deltas) {
            roots += (roots.empty() ? "" : ",") + fmt("%g", d);
        }
    }
    o.detail = per + "; period-2 lines of the map are at delta in {" + roots + "}";
    return o;
}

Outcome criterion10() {
    Outcome o;
    bool certified = true;
    for (int n : {2, 3, 4}) {
        const auto b = periodic_count_bound({1.0, 0.0, 2.0}, n);
        certified = certified && b.bound_2n && b.violating_k.empty();
    }
    bool reported = true;
    for (int n : {2, 4, 6, 8}) {
        const auto b = periodic_count_bound({0.5, 0.0, 0.5}, n);
        reported = reported && !b.bound_2n &&
                   std::find(b.violating_k.begin(), b.violating_k.end(), n / 2) != b.violating_k.end();
    }
    o.pass = certified && reported;
    o.detail = std::string("(1,0,2) certified for n=2,3,4: ") + (certified ? "yes" : "no") +
               "; a=c reports k=n/2 for n=2,4,6,8: " + (reported ? "yes" : "no");
    return o;
}

Outcome criterion11() {
    Outcome o;
    int failures = 0;
    double worst_m2 = 0.0, worst_sym = 0.0, worst_grad = 0.0, worst_form = 0.0;
    for (Eigen::Index n : {2, 3}) {
        const SymplecticContext ctx(n);
        for (int k = 0; k < 100; ++k) {
            const Mat lam = oracle::random_symplectic(n);
            const auto raw = oracle::affine_after(lam, oracle::random_vec(2 * n),
                                                  oracle::gradient_shear(oracle::random_symmetric_tensor(n)));
            try {
                const QuadMap f = to_quad(raw);
                if (!is_symplectic(f, ctx, 1e-9).value) {
                    ++failures;
                    continue;
                }
                const auto d = symplectic_decompose(f, ctx, 1e-9);
                worst_m2 = std::max(worst_m2, d.m_squared_residual);
                const auto g = shear_to_gradient_form(d.shear, ctx);
                const auto inv = g.lambda.partialPivLu();
                const oracle::RawMap s{d.shear.constant(), d.shear.linear(), d.shear.quad()};
                for (int i = 0; i < 10; ++i) {
                    const Vec p = oracle::random_vec(n);
                    Mat jac(n, n);
                    for (Eigen::Index j = 0; j < n; ++j) {
                        jac.col(j) = g.b_of(Vec::Unit(n, j)) * p + g.b_of(p).col(j);
                    }
                    worst_sym = std::max(worst_sym, (jac - jac.transpose()).cwiseAbs().maxCoeff() / (1.0 + jac.norm()));
                    Vec fd(n);
                    for (Eigen::Index j = 0; j < n; ++j) {
                        const Vec e = 1e-5 * Vec::Unit(n, j);
                        fd[j] = (g.potential(p + e) - g.potential(p - e)) / 2e-5;
                    }
                    worst_grad = std::max(worst_grad, (fd - g.gradient(p)).norm() / (1e-12 + g.gradient(p).norm()));
                    const Vec x = oracle::random_vec(2 * n);
                    Vec expect = x;
                    expect.head(n) += g.gradient(x.tail(n));
                    worst_form = std::max(worst_form, (g.lambda * s(inv.solve(x)) - expect).cwiseAbs().maxCoeff());
                }
            } catch (const std::exception&) {
                ++failures;
            }
        }
    }
    o.pass = failures == 0 && worst_m2 <= 1e-9 && worst_sym <= 1e-9 && worst_grad <= 1e-6 && worst_form <= 1e-9;
    o.detail = "failures=" + std::to_string(failures) + "/200, max symbolic M^2 coefficient=" + fmt("%.2e", worst_m2) +
               ", Jacobian asymmetry=" + fmt("%.2e", worst_sym) + ", grad V rel error=" + fmt("%.2e", worst_grad) +
               ", gradient-form residual=" + fmt("%.2e", worst_form);
    return o;
}

Outcome criterion12() {
    const auto t0 = Clock::now();
    Outcome o;
    const GenericMapParams p{0.0, -0.3, 0.0, {0.5, 0.0, 0.5}};
    const auto fps = fixed_points(p);
    const Reversor r = *reversor_for(p);
    GrowOptions opt;
    opt.epsilon = 1e-3;
    opt.refine = 0.05;
    const int depth = 8;
    // x+ has the 2D stable manifold, x- the 2D unstable one.
    const auto ws = grow_2d(p, fps[0], ManifoldKind::Stable, depth, opt);
    const auto wu = grow_2d(p, fps[1], ManifoldKind::Unstable, depth, opt);
    const auto curves = intersect_meshes(ws, wu, r);
    const auto hits = heteroclinic_from_symmetry(p, r, -0.5, 0.5);
    const double resolution = std::max(ws.max_edge, wu.max_edge);

    int crossings = 0, matched = 0, tangent_ok = 0;
    double best_angle = 180.0;
    for (const auto& c : curves) {
        for (const auto& fc : c.fix_crossings) {
            ++crossings;
            double nearest = 1e300;
            for (const auto& h : hits) {
                nearest = std::min(nearest, (h.point - fc.point).norm());
            }
            matched += nearest <= resolution;
            tangent_ok += fc.angle_deg < 5.0;
            best_angle = std::min(best_angle, fc.angle_deg);
        }
    }
    std::vector<Eigen::Vector3d> image;
    image.reserve(wu.vertices.size());
    for (const auto& v : wu.vertices) {
        image.push_back(r.apply(v));
    }
    const double haus = hausdorff_distance(image, ws.vertices);
    const double dt = seconds_since(t0);
    o.pass = !curves.empty() && !hits.empty() && crossings > 0 && matched > 0 && tangent_ok > 0 &&
             haus < 2.0 * resolution && dt < 120.0;
    o.detail = "curves=" + std::to_string(curves.size()) + ", symmetric hits=" + std::to_string(hits.size()) +
               ", Fix(h) crossings=" + std::to_string(crossings) + " (matched by a hit within " + fmt("%.3g", resolution) +
               ": " + std::to_string(matched) + ", tangent within 5 deg: " + std::to_string(tangent_ok) +
               ", best " + fmt("%.2f", best_angle) + " deg), Hausdorff(h W^u, W^s)=" + fmt("%.2e", haus) +
               ", vertices=" + std::to_string(ws.vertices.size()) + "+" + std::to_string(wu.vertices.size()) + ", " +
               fmt("%.1fs", dt);
    return o;
}

std::string run_diagram(const std::vector<std::string>& extra, const std::filesystem::path& out) {
    std::vector<std::string> args = {"quadvp", "-o", out.string(), "diagram"};
    args.insert(args.end(), extra.begin(), extra.end());
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream so, se;
    if (run_cli(static_cast<int>(argv.size()), argv.data(), so, se) != 0) {
        throw std::runtime_error("diagram command failed: " + se.str());
    }
    return read_file(out);
}

// Distance from a point to the analytic boundaries in the (tau, alpha) plane, sigma = 0.
double analytic_distance(const QuadraticForm2& q, const Eigen::Vector2d& pt) {
    double best = 1e300;
    const int n = 20000;
    for (int k = 0; k <= n; ++k) {
        const double tau = -6.0 + 12.0 * k / n;
        best = std::min(best, (Eigen::Vector2d(tau, tau * tau / 4.0) - pt).norm());
        if (q.a == q.c) {
            const double alpha = -6.0 + 12.0 * k / n;
            if (alpha <= 1.0) {
                best = std::min(best, (Eigen::Vector2d(-2.0, alpha) - pt).norm());
            }
        } else {
            const double x = -(2.0 + tau) / (2.0 * (q.a - q.c));
            best = std::min(best, (Eigen::Vector2d(tau, -x * x - tau * x) - pt).norm());
        }
    }
    return best;
}

Outcome criterion13() {
    Outcome o;
    const auto dir = std::filesystem::temp_directory_path() / "quadvp_acceptance";
    std::filesystem::create_directories(dir);
    struct Set {
        const char* name;
        QuadraticForm2 q;
    };
    const Set sets[2] = {{"a_eq_c", {0.5, 0.0, 0.5}}, {"a_ne_c", {-0.5, 1.0, 0.5}}};
    std::string detail;
    for (const auto& s : sets) {
        const std::vector<std::string> args = {"--a", fmt("%.17g", s.q.a), "--b", fmt("%.17g", s.q.b), "--c",
                                               fmt("%.17g", s.q.c), "--sigma", "0", "--nx", "160", "--ny", "160"};
        const std::string a = run_diagram(args, dir / (std::string(s.name) + "_1.csv"));
        const std::string b = run_diagram(args, dir / (std::string(s.name) + "_2.csv"));
        std::vector<std::string> svg_args = args;
        svg_args.insert(svg_args.end(), {"--format", "svg"});
        const std::string sa = run_diagram(svg_args, dir / (std::string(s.name) + "_1.svg"));
        const std::string sb = run_diagram(svg_args, dir / (std::string(s.name) + "_2.svg"));
        const bool stable = a == b && sa == sb;

        // Parse cells: i,j,tau,alpha,fixed_points,plus,minus,...
        std::istringstream in(a);
        std::string line;
        std::getline(in, line);
        std::getline(in, line);
        const int nx = 160, ny = 160;
        std::vector<std::string> key(static_cast<std::size_t>(nx * ny));
        std::vector<Eigen::Vector2d> centre(static_cast<std::size_t>(nx * ny));
        while (std::getline(in, line)) {
            std::vector<std::string> f;
            std::stringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ',')) {
                f.push_back(cell);
            }
            f.resize(10);
            const int i = std::stoi(f[0]), j = std::stoi(f[1]);
            key[static_cast<std::size_t>(j * nx + i)] = f[4] + "|" + f[5] + "|" + f[6];
            centre[static_cast<std::size_t>(j * nx + i)] = {std::stod(f[2]), std::stod(f[3])};
        }
        const double cell = 8.0 / 160.0;
        int boundary = 0, off = 0;
        double worst = 0.0;
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                const auto idx = static_cast<std::size_t>(j * nx + i);
                for (const auto& [di, dj] : {std::pair{1, 0}, std::pair{0, 1}}) {
                    if (i + di >= nx || j + dj >= ny) {
                        continue;
                    }
                    const auto nb = static_cast<std::size_t>((j + dj) * nx + i + di);
                    if (key[idx] == key[nb]) {
                        continue;
                    }
                    ++boundary;
                    const double d = analytic_distance(s.q, 0.5 * (centre[idx] + centre[nb]));
                    worst = std::max(worst, d);
                    off += d > cell;
                }
            }
        }
        o.pass = o.pass && stable && boundary > 0 && off == 0;
        detail += std::string(detail.empty() ? "" : "; ") + s.name + ": byte-stable=" + (stable ? "yes" : "no") +
                  ", boundary edges=" + std::to_string(boundary) + ", farther than one cell=" + std::to_string(off) +
                  ", max distance=" + fmt("%.3g", worst) + " (cell " + fmt("%.3g", cell) + ")";
    }
    o.detail = detail;
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},   {5, criterion5},   {6, criterion6},  {7, criterion7},
        {8, criterion8}, {9, criterion9}, {10, criterion10}, {11, criterion11}, {12, criterion12}, {13, criterion13}};
    int failed = 0;
    for (const auto& [id, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += !o.pass;
        std::printf("%s %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
