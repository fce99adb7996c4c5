#include "quadvp/diagram.hpp"

#include <cmath>

#include "quadvp/error.hpp"

namespace quadvp {

namespace {

/// Splits a sampled polyline into the runs that stay inside the window.
std::vector<std::vector<Eigen::Vector2d>> clip(const std::vector<Eigen::Vector2d>& pts, const DiagramSpec& s) {
    std::vector<std::vector<Eigen::Vector2d>> out;
    std::vector<Eigen::Vector2d> cur;
    for (const auto& p : pts) {
        const bool inside = p.allFinite() && p.x() >= s.x_min && p.x() <= s.x_max && p.y() >= s.y_min &&
                            p.y() <= s.y_max;
        if (inside) {
            cur.push_back(p);
        } else if (!cur.empty()) {
            if (cur.size() > 1) {
                out.push_back(std::move(cur));
            }
            cur.clear();
        }
    }
    if (cur.size() > 1) {
        out.push_back(std::move(cur));
    }
    return out;
}

void add_curve(std::vector<DiagramCurve>& curves, const std::string& name, const std::vector<Eigen::Vector2d>& pts,
               const DiagramSpec& spec) {
    auto segs = clip(pts, spec);
    for (auto& c : curves) {
        if (c.name == name) {
            for (auto& s : segs) {
                c.segments.push_back(std::move(s));
            }
            return;
        }
    }
    curves.push_back({name, std::move(segs)});
}

std::vector<double> r_samples(double lo, double hi, int n) {
    std::vector<double> r(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        r[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (n - 1);
    }
    return r;
}

bool has_complex(const StabilityReport& r) {
    for (const auto& z : r.eigenvalues) {
        if (z.imag() != 0.0) {
            return true;
        }
    }
    return false;
}

}  // namespace

std::string DiagramCell::region_key(bool with_complex) const {
    std::string k = std::to_string(fixed_point_count);
    if (plus) {
        k += std::string("|") + to_string(*plus);
        if (with_complex && plus_complex) {
            k += "*";
        }
    }
    if (minus) {
        k += std::string("|") + to_string(*minus);
        if (with_complex && minus_complex) {
            k += "*";
        }
    }
    return k;
}

std::vector<DiagramCurve> diagram_curves(const DiagramSpec& spec, int n) {
    std::vector<DiagramCurve> curves;
    const double sigma = spec.sigma;
    const auto& q = spec.quad;
    const std::vector<double> branches[2] = {r_samples(-3.0, -0.3, n), r_samples(0.3, 3.0, n)};

    if (spec.plane == DiagramPlane::TS) {
        const double lo = std::min(spec.x_min, spec.y_min) - 1.0;
        const double hi = std::max(spec.x_max, spec.y_max) + 1.0;
        std::vector<Eigen::Vector2d> sn, pd;
        for (double u : r_samples(lo, hi, n)) {
            sn.emplace_back(u, u);
            pd.emplace_back(u, -2.0 - u);
        }
        add_curve(curves, "saddle_node", sn, spec);
        add_curve(curves, "period_doubling", pd, spec);
        for (const auto& rs : branches) {
            std::vector<Eigen::Vector2d> dr;
            for (double r : rs) {
                dr.emplace_back(2.0 * r + 1.0 / (r * r), r * r + 2.0 / r);
            }
            add_curve(curves, "double_root", dr, spec);
        }
        return curves;
    }

    // (tau, alpha) plane. t = s is exactly the discriminant curve.
    std::vector<Eigen::Vector2d> disc;
    for (double tau : r_samples(spec.x_min, spec.x_max, n)) {
        disc.emplace_back(tau, 0.25 * (tau - sigma) * (tau - sigma));
    }
    add_curve(curves, "discriminant", disc, spec);

    std::vector<Eigen::Vector2d> pd;
    if (q.a == q.c) {
        const double tau = -2.0 - sigma;
        for (double alpha : r_samples(spec.y_min, spec.y_max, n)) {
            if (alpha <= 0.25 * (tau - sigma) * (tau - sigma)) {
                pd.emplace_back(tau, alpha);
            }
        }
    } else {
        for (double tau : r_samples(spec.x_min, spec.x_max, n)) {
            const double x = -(2.0 + tau + sigma) / (2.0 * (q.a - q.c));
            pd.emplace_back(tau, -x * x - (tau - sigma) * x);
        }
    }
    add_curve(curves, "period_doubling", pd, spec);

    const double k = 2.0 * q.c + q.b;
    if (k != 0.0) {
        for (const auto& rs : branches) {
            std::vector<Eigen::Vector2d> dr;
            for (double r : rs) {
                const double t = 2.0 * r + 1.0 / (r * r);
                const double s = r * r + 2.0 / r;
                const double x = (sigma - s) / k;
                const double tau = t - (2.0 * q.a + q.b) * x;
                dr.emplace_back(tau, -x * x - (tau - sigma) * x);
            }
            add_curve(curves, "double_root", dr, spec);
        }
    }
    return curves;
}

StabilityDiagram stability_diagram(const DiagramSpec& spec, int curve_samples) {
    if (spec.nx < 1 || spec.ny < 1 || !(spec.x_max > spec.x_min) || !(spec.y_max > spec.y_min)) {
        throw PreconditionError("diagram grid needs positive resolution and nonempty bounds");
    }
    StabilityDiagram d;
    d.spec = spec;
    d.cells.resize(static_cast<std::size_t>(spec.nx) * static_cast<std::size_t>(spec.ny));
    for (int j = 0; j < spec.ny; ++j) {
        for (int i = 0; i < spec.nx; ++i) {
            DiagramCell c;
            c.i = i;
            c.j = j;
            c.x = spec.x_min + (i + 0.5) * d.dx();
            c.y = spec.y_min + (j + 0.5) * d.dy();
            if (spec.plane == DiagramPlane::TS) {
                const StabilityReport r = classify_stability(c.x, c.y);
                c.fixed_point_count = 1;
                c.plus = r.classification;
                c.plus_complex = has_complex(r);
                c.plus_phase = r.complex_phase;
            } else {
                const GenericMapParams p{c.y, c.x, spec.sigma, spec.quad};
                const auto fps = fixed_points(p);
                c.fixed_point_count = static_cast<int>(fps.size());
                for (const auto& fp : fps) {
                    if (fp.which == FixedPointSide::Plus) {
                        c.plus = fp.stability.classification;
                        c.plus_complex = has_complex(fp.stability);
                        c.plus_phase = fp.stability.complex_phase;
                    } else {
                        c.minus = fp.stability.classification;
                        c.minus_complex = has_complex(fp.stability);
                    }
                }
            }
            d.cells[static_cast<std::size_t>(j) * static_cast<std::size_t>(spec.nx) + static_cast<std::size_t>(i)] = c;
        }
    }
    d.curves = diagram_curves(spec, curve_samples);
    return d;
}

}  // namespace quadvp
