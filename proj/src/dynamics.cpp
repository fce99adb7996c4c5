#include "quadvp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "quadvp/error.hpp"

namespace quadvp {

namespace {

using cd = std::complex<double>;

cd cubic(double t, double s, cd z) { return ((z - t) * z + s) * z - 1.0; }
cd cubic_prime(double t, double s, cd z) { return (3.0 * z - 2.0 * t) * z + s; }

cd polish(double t, double s, cd z) {
    for (int it = 0; it < 4; ++it) {
        const cd d = cubic_prime(t, s, z);
        if (std::abs(d) == 0.0) {
            break;
        }
        const cd next = z - cubic(t, s, z) / d;
        if (!(std::abs(cubic(t, s, next)) < std::abs(cubic(t, s, z)))) {
            break;
        }
        z = next;
    }
    return z;
}

bool is_real(const cd& z) { return z.imag() == 0.0; }

bool finite(const Eigen::Vector3d& v) { return v.allFinite(); }

std::vector<Eigen::Vector3d> seeded_points(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < count; ++i) {
        pts.emplace_back(u(rng), u(rng), u(rng));
    }
    return pts;
}

}  // namespace

StabilityReport classify_stability(double t, double s, double boundary_tol) {
    Eigen::Matrix3d c;
    c << t, -s, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0;
    const Eigen::EigenSolver<Eigen::Matrix3d> es(c, false);
    std::array<cd, 3> r;
    for (int i = 0; i < 3; ++i) {
        r[static_cast<std::size_t>(i)] = polish(t, s, es.eigenvalues()[i]);
    }
    // Clean up real roots that acquired tiny imaginary parts.
    for (auto& z : r) {
        if (std::abs(z.imag()) <= 1e-14 * (1.0 + std::abs(z))) {
            z = cd(z.real(), 0.0);
        }
    }

    // Multiple roots: snap clusters onto the critical points of the cubic.
    const double scale = 1.0 + std::abs(t) + std::abs(s);
    const auto close = [](cd u, cd w, double ref) { return std::abs(u - w) < 1e-3 * (1.0 + std::abs(ref)); };
    const double triple = t / 3.0;
    if (close(r[0], triple, triple) && close(r[1], triple, triple) && close(r[2], triple, triple) &&
        std::abs(cubic(t, s, triple)) <= 1e-13 * scale && std::abs(cubic_prime(t, s, triple)) <= 1e-6 * scale) {
        r = {cd(triple), cd(triple), cd(triple)};
    } else {
        const double disc = 4.0 * t * t - 12.0 * s;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            for (const double cand : {(2.0 * t + sq) / 6.0, (2.0 * t - sq) / 6.0}) {
                if (cand == 0.0 || std::abs(cubic(t, s, cand)) > 1e-13 * scale) {
                    continue;
                }
                std::vector<std::size_t> near;
                for (std::size_t i = 0; i < 3; ++i) {
                    if (close(r[i], cand, cand)) {
                        near.push_back(i);
                    }
                }
                if (near.size() == 2) {
                    const std::size_t other = 3 - near[0] - near[1];
                    r[near[0]] = cand;
                    r[near[1]] = cand;
                    r[other] = 1.0 / (cand * cand);
                    break;
                }
            }
        }
    }

    std::sort(r.begin(), r.end(), [](const cd& u, const cd& w) {
        if (is_real(u) != is_real(w)) {
            return is_real(u);
        }
        if (u.real() != w.real()) {
            return u.real() < w.real();
        }
        return u.imag() > w.imag();
    });

    StabilityReport rep;
    rep.eigenvalues = r;
    bool near_one = false;
    bool near_minus_one = false;
    int expanding = 0;
    int contracting = 0;
    for (const auto& z : r) {
        near_one = near_one || std::abs(z - 1.0) < boundary_tol;
        near_minus_one = near_minus_one || std::abs(z + 1.0) < boundary_tol;
        if (std::abs(z) > 1.0 + boundary_tol) {
            ++expanding;
        } else if (std::abs(z) < 1.0 - boundary_tol) {
            ++contracting;
        }
        if (z.imag() > 0.0) {
            rep.complex_phase = std::arg(z);
        }
    }
    if (near_one) {
        const bool pair_on_circle = rep.complex_phase.has_value() && expanding == 0 && contracting == 0;
        rep.classification = pair_on_circle ? StabilityClass::EllipticPair : StabilityClass::SaddleNode;
    } else if (near_minus_one) {
        rep.classification = StabilityClass::PeriodDoubling;
    } else if (expanding == 1 && contracting == 2) {
        rep.classification = StabilityClass::TypeA;
    } else if (expanding == 2 && contracting == 1) {
        rep.classification = StabilityClass::TypeB;
    } else {
        rep.classification = StabilityClass::EllipticPair;
    }
    return rep;
}

std::vector<FixedPointReport> fixed_points(const GenericMapParams& p) {
    if (std::abs(p.quad.sum() - 1.0) > 1e-9) {
        throw PreconditionError("fixed_points expects a + b + c = 1; normalize first");
    }
    const double ts = p.tau - p.sigma;
    const double disc = ts * ts - 4.0 * p.alpha;
    std::vector<FixedPointReport> out;
    if (disc < 0.0) {
        return out;
    }
    const double root = std::sqrt(disc);
    const auto make = [&](FixedPointSide side, double x) {
        FixedPointReport r;
        r.which = side;
        r.location = Eigen::Vector3d::Constant(x);
        r.t = p.tau + (2.0 * p.quad.a + p.quad.b) * x;
        r.s = p.sigma - (2.0 * p.quad.c + p.quad.b) * x;
        r.stability = classify_stability(r.t, r.s);
        return r;
    };
    out.push_back(make(FixedPointSide::Plus, 0.5 * (-ts + root)));
    if (disc > 0.0) {
        out.push_back(make(FixedPointSide::Minus, 0.5 * (-ts - root)));
    }
    return out;
}

double escape_bound(const QuadraticForm2& q, double alpha, double tau, double sigma) {
    if (!q.is_positive_definite()) {
        throw NotPositiveDefinite("escape bound needs a positive definite quadratic form");
    }
    const double d = q.discriminant();
    const double m = std::max(q.a, q.c);
    const double a = std::abs(tau) + std::abs(sigma) + 2.0;
    // Positive root of (d/m) x^2 - a x - |alpha| = 0.
    return m / (2.0 * d) * (a + std::sqrt(a * a + 4.0 * std::abs(alpha) * d / m));
}

std::vector<double> OrbitRecord::scalars() const {
    std::vector<double> out;
    if (states.empty()) {
        return out;
    }
    if (direction == Direction::Forward) {
        out = {states[0][2], states[0][1], states[0][0]};
        for (std::size_t k = 1; k < states.size(); ++k) {
            out.push_back(states[k][0]);
        }
    } else {
        for (std::size_t k = states.size(); k-- > 1;) {
            out.push_back(states[k][2]);
        }
        out.push_back(states[0][2]);
        out.push_back(states[0][1]);
        out.push_back(states[0][0]);
    }
    return out;
}

namespace {

bool settled(const Eigen::Vector3d& v, Direction dir) {
    if (dir == Direction::Forward) {
        return v[0] > 0.0 && std::abs(v[1] / v[0]) < 0.1 && std::abs(v[2] / v[1]) < 0.1;
    }
    return v[2] < 0.0 && std::abs(v[1] / v[2]) < 0.1 && std::abs(v[0] / v[1]) < 0.1;
}

}  // namespace

OrbitRecord iterate(const GenericMapParams& p, const Eigen::Vector3d& x0, int n_steps, Direction direction,
                    const IterateOptions& options) {
    OrbitRecord rec;
    rec.direction = direction;
    rec.states.push_back(x0);
    const bool pd = p.quad.is_positive_definite();
    const double kappa = pd ? escape_bound(p) : 0.0;
    const OrbitVerdict escaped =
        direction == Direction::Forward ? OrbitVerdict::EscapedForward : OrbitVerdict::EscapedBackward;

    const auto check = [&](const Eigen::Vector3d& v, int k) {
        if (!pd || rec.verdict != OrbitVerdict::BoundedSoFar) {
            return;
        }
        const double ax = std::abs(v[0]), ay = std::abs(v[1]), az = std::abs(v[2]);
        int which = 0;
        if (ay >= ax && ay >= az && ay > kappa) {
            which = 3;
        } else if (direction == Direction::Forward && ax >= ay && ax >= az && ax > kappa) {
            which = 1;
        } else if (direction == Direction::Backward && az >= ax && az >= ay && az > kappa) {
            which = 2;
        }
        if (which != 0) {
            rec.verdict = escaped;
            rec.escape_time = k;
            rec.trigger_case = which;
        }
    };

    int tail = 0;
    for (int k = 0; k < n_steps; ++k) {
        Eigen::Vector3d v = rec.states.back();
        check(v, k);
        if (rec.verdict != OrbitVerdict::BoundedSoFar) {
            if (settled(v, direction) || tail >= options.tail_steps) {
                break;
            }
            ++tail;
        }
        if (direction == Direction::Forward) {
            p.step(v[0], v[1], v[2]);
        } else {
            p.step_back(v[0], v[1], v[2]);
        }
        if (!finite(v) || v.cwiseAbs().maxCoeff() > options.overflow_limit) {
            rec.overflow = true;
            if (rec.verdict == OrbitVerdict::BoundedSoFar) {
                rec.verdict = escaped;
                rec.escape_time = k;
            }
            break;
        }
        rec.states.push_back(v);
    }
    if (!rec.overflow) {
        check(rec.states.back(), static_cast<int>(rec.states.size()) - 1);
    }
    return rec;
}

AsymptoticReport asymptotic_direction(const OrbitRecord& orbit) {
    if (orbit.verdict == OrbitVerdict::BoundedSoFar) {
        throw PreconditionError("asymptotic direction needs an escaped orbit");
    }
    const Eigen::Vector3d& v = orbit.states.back();
    AsymptoticReport r;
    if (orbit.verdict == OrbitVerdict::EscapedForward) {
        r.axis = AsymptoticAxis::PlusX;
        r.ratio_near = std::abs(v[1] / v[0]);
        r.ratio_far = std::abs(v[2] / v[1]);
        r.settled = settled(v, Direction::Forward);
    } else {
        r.axis = AsymptoticAxis::MinusZ;
        r.ratio_near = std::abs(v[1] / v[2]);
        r.ratio_far = std::abs(v[0] / v[1]);
        r.settled = settled(v, Direction::Backward);
    }
    return r;
}

Eigen::Matrix3d Reversor::jacobian() const {
    Eigen::Matrix3d m;
    m << 0.0, 0.0, -1.0, 0.0, -1.0, 0.0, -1.0, 0.0, 0.0;
    return m;
}

double Reversor::functional_residual(const GenericMapParams& p, int samples) const {
    double worst = 0.0;
    for (const auto& x : seeded_points(samples, 0x4e7e45ULL)) {
        const Eigen::Vector3d lhs = apply(p.apply(x));
        const Eigen::Vector3d rhs = p.apply_inverse(apply(x));
        worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff() / std::max(1.0, lhs.cwiseAbs().maxCoeff()));
    }
    return worst;
}

std::optional<Reversor> reversor_for(const GenericMapParams& p, double tol) {
    const double sum = p.quad.sum();
    if (std::abs(sum) <= tol) {
        throw NonGeneric("a + b + c = 0: reversibility is not addressed for this case");
    }
    if (std::abs(p.quad.a - p.quad.c) > tol * std::max({1.0, std::abs(p.quad.a), std::abs(p.quad.c)})) {
        return std::nullopt;
    }
    Reversor r{(p.tau - p.sigma) / sum};
    const double res = r.functional_residual(p);
    if (res > 1e-10) {
        throw NumericalFailure("reversor functional equation fails, residual " + std::to_string(res));
    }
    return r;
}

namespace {

/// Residual vector whose zeros on Fix(h) are symmetric orbits of the period.
Eigen::Vector3d symmetric_residual(const GenericMapParams& p, const Reversor& r, int period, double s) {
    Eigen::Vector3d v = FixLine{r.eta}.point(s);
    for (int i = 0; i < period / 2; ++i) {
        p.step(v[0], v[1], v[2]);
    }
    if (period % 2 == 0) {
        return r.apply(v) - v;
    }
    return r.apply(p.apply(v)) - v;
}

double periodicity_residual(const GenericMapParams& p, const Eigen::Vector3d& x, int period) {
    Eigen::Vector3d v = x;
    for (int i = 0; i < period; ++i) {
        p.step(v[0], v[1], v[2]);
    }
    return (v - x).cwiseAbs().maxCoeff() / std::max(1.0, x.cwiseAbs().maxCoeff());
}

}  // namespace

std::vector<Eigen::Vector3d> symmetric_orbit_search(const GenericMapParams& p, const Reversor& r, int period,
                                                    double lo, double hi, const SymmetricOrbitOptions& options) {
    if (period < 1) {
        throw PreconditionError("period must be positive");
    }
    if (!(hi > lo) || options.samples < 2) {
        return {};
    }
    const int n = options.samples;
    std::vector<double> s(static_cast<std::size_t>(n) + 1);
    std::vector<Eigen::Vector3d> res(s.size());
    for (int i = 0; i <= n; ++i) {
        s[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / n;
        res[static_cast<std::size_t>(i)] = symmetric_residual(p, r, period, s[static_cast<std::size_t>(i)]);
    }

    std::vector<double> candidates;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        for (int comp = 0; comp < 3; ++comp) {
            const double f0 = res[i][comp];
            const double f1 = res[i + 1][comp];
            if (!std::isfinite(f0) || !std::isfinite(f1)) {
                continue;
            }
            if (f0 == 0.0) {
                candidates.push_back(s[i]);
            } else if (f0 * f1 < 0.0) {
                double a = s[i], b = s[i + 1], fa = f0;
                while (b - a > options.root_tol * std::max(1.0, std::abs(a))) {
                    const double m = 0.5 * (a + b);
                    const double fm = symmetric_residual(p, r, period, m)[comp];
                    if ((fm < 0.0) == (fa < 0.0)) {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                    if (m == a && m == b) {
                        break;
                    }
                }
                candidates.push_back(0.5 * (a + b));
            }
        }
    }
    if (res.back().allFinite() && res.back().norm() == 0.0) {
        candidates.push_back(s.back());
    }

    std::vector<Eigen::Vector3d> out;
    for (double c : candidates) {
        const Eigen::Vector3d rr = symmetric_residual(p, r, period, c);
        const Eigen::Vector3d x = FixLine{r.eta}.point(c);
        if (!rr.allFinite() || rr.cwiseAbs().maxCoeff() > options.accept_tol * std::max(1.0, x.norm())) {
            continue;
        }
        if (periodicity_residual(p, x, period) > options.accept_tol) {
            continue;
        }
        const bool dup = std::any_of(out.begin(), out.end(),
                                     [&](const Eigen::Vector3d& y) { return (y - x).norm() < 1e-8; });
        if (!dup) {
            out.push_back(x);
        }
    }
    return out;
}

std::optional<Period2Line> period2_line(const GenericMapParams& p, double tol) {
    const auto& q = p.quad;
    const double scale = std::max({1.0, std::abs(q.a), std::abs(q.b), std::abs(q.c)});
    if (std::abs(q.a - q.c) > tol * scale || std::abs(q.a - 0.5 * q.b) > tol * scale ||
        std::abs(p.sigma + p.tau + 2.0) > tol * std::max({1.0, std::abs(p.sigma), std::abs(p.tau)})) {
        return std::nullopt;
    }
    Period2Line line;
    const double lin = -(1.0 + p.sigma);
    if (q.a == 0.0) {
        if (lin != 0.0) {
            line.deltas.push_back(-p.alpha / lin);
        }
        return line;
    }
    const double disc = lin * lin - 4.0 * q.a * p.alpha;
    if (disc < 0.0) {
        return line;
    }
    if (disc == 0.0) {
        line.deltas.push_back(-lin / (2.0 * q.a));
        return line;
    }
    const double sq = std::sqrt(disc);
    const double r1 = (-lin - sq) / (2.0 * q.a);
    const double r2 = (-lin + sq) / (2.0 * q.a);
    line.deltas = {std::min(r1, r2), std::max(r1, r2)};
    return line;
}

PeriodicCountBound periodic_count_bound(const QuadraticForm2& q, int n, double tol) {
    if (q.a == 0.0 && q.c == 0.0) {
        throw PreconditionError("a = c = 0: Q(mu, 1) has no roots to examine");
    }
    if (n < 1) {
        throw PreconditionError("n must be positive");
    }
    PeriodicCountBound out;
    if (q.a == 0.0) {
        out.mu_plus = -q.c / q.b;
    } else {
        const cd disc = std::sqrt(cd(q.b * q.b - 4.0 * q.a * q.c));
        out.mu_plus = (-q.b + disc) / (2.0 * q.a);
        out.mu_minus = (-q.b - disc) / (2.0 * q.a);
    }
    for (int k = 0; k <= n; ++k) {
        double dist;
        if (out.mu_minus) {
            dist = std::abs(std::pow(out.mu_plus, k) * std::pow(*out.mu_minus, n - k) - 1.0);
        } else {
            dist = (k == n) ? std::abs(std::pow(out.mu_plus, n) - 1.0) : std::numeric_limits<double>::infinity();
        }
        out.distance_to_one.push_back(dist);
        if (dist <= tol) {
            out.violating_k.push_back(k);
        }
    }
    out.bound_2n = out.violating_k.empty();
    return out;
}

const char* to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::TypeA:
            return "type_a";
        case StabilityClass::TypeB:
            return "type_b";
        case StabilityClass::SaddleNode:
            return "saddle_node";
        case StabilityClass::PeriodDoubling:
            return "period_doubling";
        case StabilityClass::EllipticPair:
            return "elliptic_pair";
    }
    return "unknown";
}

const char* to_string(FixedPointSide s) { return s == FixedPointSide::Plus ? "plus" : "minus"; }

const char* to_string(OrbitVerdict v) {
    switch (v) {
        case OrbitVerdict::BoundedSoFar:
            return "bounded_so_far";
        case OrbitVerdict::EscapedForward:
            return "escaped_forward";
        case OrbitVerdict::EscapedBackward:
            return "escaped_backward";
    }
    return "unknown";
}

const char* to_string(AsymptoticAxis a) { return a == AsymptoticAxis::PlusX ? "+x" : "-z"; }

}  // namespace quadvp
