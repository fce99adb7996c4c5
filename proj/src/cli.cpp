#include "quadvp/cli.hpp"

#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "quadvp/io.hpp"
#include "quadvp/symplectic.hpp"

namespace quadvp {

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPredicate = 2;
constexpr int kExitError = 1;

struct ParamFlags {
    std::optional<double> alpha, tau, sigma, a, b, c;
    std::string nf_file;
    CLI::Option* nf = nullptr;

    void add(CLI::App* app) {
        std::vector<CLI::Option*> opts = {
            app->add_option("--alpha", alpha, "alpha (default 0)"), app->add_option("--tau", tau, "tau (default 0)"),
            app->add_option("--sigma", sigma, "sigma (default 0)"), app->add_option("--a", a, "quadratic a (default 0.5)"),
            app->add_option("--b", b, "quadratic b (default 0)"), app->add_option("--c", c, "quadratic c (default 0.5)")};
        nf = app->add_option("--nf", nf_file, "normal-form JSON file")->check(CLI::ExistingFile);
        for (auto* o : opts) {
            nf->excludes(o);
        }
    }

    GenericMapParams resolve() const {
        if (!nf_file.empty()) {
            return generic_params_from_json(parse_json_text(read_file(nf_file)));
        }
        return GenericMapParams{alpha.value_or(0.0), tau.value_or(0.0), sigma.value_or(0.0),
                                {a.value_or(0.5), b.value_or(0.0), c.value_or(0.5)}};
    }
};

struct Emitter {
    std::string output;
    std::ostream* out = nullptr;

    void emit(const std::string& text) const {
        if (output.empty() || output == "-") {
            *out << text;
        } else {
            write_file_atomic(output, text);
        }
    }
};

json base_config(const std::string& command, std::uint64_t seed) {
    return {{"version", kVersion}, {"command", command}, {"seed", seed}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_classify(const std::string& file, bool symplectic, double tol, const json& config, const Emitter& em) {
    const QuadMap map = read_map_file(file);
    json report = {{"config", config}, {"dim", map.dim()}};
    int code = kExitOk;
    if (symplectic) {
        if (map.dim() % 2 != 0) {
            throw DimensionMismatch("symplectic classification needs an even dimension");
        }
        const SymplecticContext ctx(map.dim() / 2);
        const auto sym = is_symplectic(map, ctx, tol);
        report["symplectic"] = sym.value;
        report["symplectic_certificate"] = certificate_to_json(sym.certificate);
        report["B"] = nullptr;
        report["lambda"] = nullptr;
        if (!sym.value) {
            em.emit(dump(report));
            return kExitPredicate;
        }
        const auto dec = symplectic_decompose(map, ctx, tol);
        const auto g = shear_to_gradient_form(dec.shear, ctx);
        json b = json::array();
        for (const auto& bk : g.b) {
            b.push_back(matrix_to_json(bk));
        }
        report["B"] = b;
        report["lambda"] = matrix_to_json(g.lambda);
        report["affine"] = {{"linear", matrix_to_json(dec.affine.linear())}, {"const", vector_to_json(dec.affine.constant())}};
        report["m_squared_residual"] = dec.m_squared_residual;
        report["gradient_form"] = {{"null_dim", g.null_dim},
                                   {"isotropy_violation", g.isotropy_violation},
                                   {"lagrangian_residual", g.lagrangian_residual},
                                   {"form_residual", g.form_residual},
                                   {"symmetry_residual", g.symmetry_residual}};
        em.emit(dump(report));
        return kExitOk;
    }
    json preds = json::array();
    const auto vp = is_volume_preserving(map, tol);
    preds.push_back({{"name", "volume_preserving"}, {"value", vp.value}, {"certificate", certificate_to_json(vp.certificate)}});
    const auto skip = [&](const char* name) { preds.push_back({{"name", name}, {"value", nullptr}, {"skipped", true}}); };
    if (!vp.value) {
        code = kExitPredicate;
        skip("quadratic_inverse");
        skip("shear");
        skip("case");
    } else {
        const auto qi = has_quadratic_inverse(map, tol);
        preds.push_back({{"name", "quadratic_inverse"}, {"value", qi.value}, {"certificate", certificate_to_json(qi.certificate)}});
        if (!qi.value) {
            code = kExitPredicate;
            skip("shear");
            skip("case");
        } else if (map.dim() != 3) {
            preds.push_back({{"name", "shear"}, {"value", nullptr}, {"error", "shear extraction supports dim 3 only"}});
            preds.push_back({{"name", "case"}, {"value", nullptr}, {"error", "normal forms support dim 3 only"}});
        } else {
            const auto ex = extract_shear(map.standard_part(), tol);
            json sh = {{"name", "shear"},
                       {"value", ex.kind != ShearExtraction::Kind::NotAShear},
                       {"kind", to_string(ex.kind)},
                       {"proportionality_residual", ex.proportionality_residual},
                       {"kernel_residual", ex.kernel_residual}};
            if (ex.data) {
                sh["data"] = shear_to_json(*ex.data);
            }
            preds.push_back(sh);
            if (ex.kind == ShearExtraction::Kind::NotAShear) {
                code = kExitPredicate;
                skip("case");
            } else {
                json cj = {{"name", "case"}, {"value", "affine"}};
                if (ex.kind == ShearExtraction::Kind::Shear) {
                    const auto z = z_dimension(ex.data->v(), map.linear());
                    static const char* tags[] = {"affine", "III", "II", "I"};
                    cj["value"] = tags[z.dim];
                    cj["z_dimension"] = z.dim;
                    cj["z_singular_values"] = z.singular_values;
                    cj["near_degenerate"] = z.near_degenerate;
                }
                preds.push_back(cj);
            }
        }
    }
    report["predicates"] = preds;
    em.emit(dump(report));
    return code;
}

int cmd_normal_form(const std::string& file, double tol, const json& config, const Emitter& em) {
    const QuadMap map = read_map_file(file);
    const auto vp = is_volume_preserving(map, tol);
    const auto qi = vp.value ? has_quadratic_inverse(map, tol) : PredicateResult{};
    if (!vp.value || !qi.value) {
        json j = {{"config", config},
                  {"error", vp.value ? "map has no quadratic inverse" : "map is not volume preserving"},
                  {"certificate", certificate_to_json(vp.value ? qi.certificate : vp.certificate)}};
        em.emit(dump(j));
        return kExitPredicate;
    }
    if (map.dim() != 3) {
        throw DimensionMismatch("normal forms support dim 3 only");
    }
    if (extract_shear(map.standard_part(), tol).kind == ShearExtraction::Kind::NotAShear) {
        em.emit(dump({{"config", config}, {"error", "standard part is not a shear"}}));
        return kExitPredicate;
    }
    const NormalForm nf = to_normal_form(map, tol);
    std::optional<GenericReduction> g;
    if (nf.kind == NormalCase::I) {
        g = reduce_generic(nf, tol);
    }
    json j = normal_form_to_json(nf, g);
    j["config"] = config;
    em.emit(dump(j));
    return kExitOk;
}

std::string meta_line(const json& config) { return config.dump(); }

// Sign changes of the heteroclinic residual are closely spaced; sample densely.
int density_samples(double lo, double hi) {
    return std::max(2000, static_cast<int>(std::ceil(2000.0 * (hi - lo))));
}

// The escape bound exists only for positive definite Q.
json kappa_json(const GenericMapParams& p) {
    return p.quad.is_positive_definite() ? json(escape_bound(p)) : json(nullptr);
}

json params_config(const GenericMapParams& p, const ParamFlags& f) {
    json j = generic_params_to_json(p);
    j["source"] = f.nf_file.empty() ? "flags" : f.nf_file;
    return j;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quadratic volume-preserving maps: classification, normal forms, dynamics", "quadvp"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    std::uint64_t seed = 20240601;
    app.add_option("--seed", seed, "seed for sampled diagnostics")->capture_default_str();
    Emitter em;
    em.out = &out;
    app.add_option("-o,--output", em.output, "output path (default stdout)");
    double tol = kCoefficientTolerance;
    app.add_option("--tol", tol, "coefficient tolerance")->capture_default_str();

    std::string map_file;
    bool symplectic = false;
    auto* classify = app.add_subcommand("classify", "run the predicate chain on a map file");
    classify->add_option("map", map_file, "map JSON file")->required()->check(CLI::ExistingFile);
    classify->add_flag("--symplectic", symplectic, "decompose as a symplectic map");

    auto* normal = app.add_subcommand("normal-form", "reduce a 3D map to normal form");
    normal->add_option("map", map_file, "map JSON file")->required()->check(CLI::ExistingFile);

    ParamFlags pf_fixed, pf_diag, pf_iter, pf_mani, pf_sym;
    std::string format;

    auto* fixed = app.add_subcommand("fixed-points", "fixed points and their stability");
    pf_fixed.add(fixed);
    fixed->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));

    DiagramSpec dspec;
    std::string plane = "tau-alpha";
    auto* diag = app.add_subcommand("diagram", "stability diagram over a parameter plane");
    pf_diag.add(diag);
    diag->add_option("--plane", plane, "tau-alpha|t-s")->check(CLI::IsMember({"tau-alpha", "t-s"}))->capture_default_str();
    diag->add_option("--xmin", dspec.x_min)->capture_default_str();
    diag->add_option("--xmax", dspec.x_max)->capture_default_str();
    diag->add_option("--ymin", dspec.y_min)->capture_default_str();
    diag->add_option("--ymax", dspec.y_max)->capture_default_str();
    diag->add_option("--nx", dspec.nx)->check(CLI::PositiveNumber)->capture_default_str();
    diag->add_option("--ny", dspec.ny)->check(CLI::PositiveNumber)->capture_default_str();
    diag->add_option("--format", format, "csv|svg")->check(CLI::IsMember({"csv", "svg"}));

    std::vector<double> x0{0.0, 0.0, 0.0};
    int steps = 100;
    bool backward = false;
    IterateOptions iopts;
    auto* iter = app.add_subcommand("iterate", "iterate an orbit");
    pf_iter.add(iter);
    iter->add_option("--x0", x0, "initial point x y z")->expected(3)->delimiter(',');
    iter->add_option("--steps", steps)->check(CLI::NonNegativeNumber)->capture_default_str();
    iter->add_flag("--backward", backward, "iterate the inverse map");
    iter->add_option("--tail-steps", iopts.tail_steps)->capture_default_str();
    iter->add_option("--overflow-limit", iopts.overflow_limit)->capture_default_str();

    int depth = 8;
    GrowOptions gopts;
    gopts.epsilon = 1e-3;
    std::optional<double> lo, hi;
    HeteroclinicSearchOptions hopts;
    std::string prefix;
    auto* mani = app.add_subcommand("manifold", "2D invariant manifolds and heteroclinic curves");
    pf_mani.add(mani);
    mani->add_option("--depth", depth)->check(CLI::Range(0, 20))->capture_default_str();
    mani->add_option("--epsilon", gopts.epsilon, "seed radius (0 = automatic)")->capture_default_str();
    mani->add_option("--refine", gopts.refine, "edge-length bound")->capture_default_str();
    mani->add_option("--steps-per-generation", gopts.steps_per_generation, "(0 = automatic)")->capture_default_str();
    mani->add_option("--max-vertices", gopts.max_vertices)->capture_default_str();
    mani->add_option("--lo", lo, "symmetric search bracket start");
    mani->add_option("--hi", hi, "symmetric search bracket end");
    auto* mani_samples = mani->add_option("--samples", hopts.samples, "heteroclinic samples (default 2000 per unit length)");
    mani->add_option("--prefix", prefix, "output file prefix")->required();

    int period = 1;
    SymmetricOrbitOptions sopts;
    bool heteroclinic = false;
    auto* sym = app.add_subcommand("symmetric", "symmetric periodic or heteroclinic orbits on Fix(h)");
    pf_sym.add(sym);
    sym->add_option("--period", period)->check(CLI::PositiveNumber)->capture_default_str();
    sym->add_option("--lo", lo);
    sym->add_option("--hi", hi);
    auto* sym_samples = sym->add_option("--samples", sopts.samples,
                                        "samples (default 10000; heteroclinic: 2000 per unit length)");
    sym->add_flag("--heteroclinic", heteroclinic, "search for heteroclinic points instead");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitError;
    }

    try {
        json config = base_config(app.get_subcommands().front()->get_name(), seed);
        config["tol"] = tol;
        if (*classify) {
            config["map"] = map_file;
            config["symplectic"] = symplectic;
            return cmd_classify(map_file, symplectic, tol, config, em);
        }
        if (*normal) {
            config["map"] = map_file;
            return cmd_normal_form(map_file, tol, config, em);
        }
        if (*fixed) {
            const auto p = pf_fixed.resolve();
            config["params"] = params_config(p, pf_fixed);
            const auto fps = fixed_points(p);
            if (format == "csv") {
                std::vector<std::vector<std::string>> rows;
                for (const auto& f : fps) {
                    std::vector<std::string> r = {to_string(f.which), format_double(f.location[0]),
                                                  format_double(f.location[1]), format_double(f.location[2]),
                                                  format_double(f.t), format_double(f.s),
                                                  to_string(f.stability.classification)};
                    for (const auto& z : f.stability.eigenvalues) {
                        r.push_back(format_double(z.real()));
                        r.push_back(format_double(z.imag()));
                    }
                    rows.push_back(r);
                }
                em.emit(csv_text(meta_line(config),
                                 {"which", "x", "y", "z", "t", "s", "class", "l1_re", "l1_im", "l2_re", "l2_im", "l3_re", "l3_im"},
                                 rows));
            } else {
                json arr = json::array();
                for (const auto& f : fps) {
                    arr.push_back(fixed_point_to_json(f));
                }
                em.emit(dump({{"config", config}, {"fixed_points", arr}, {"escape_bound", kappa_json(p)}}));
            }
            return kExitOk;
        }
        if (*diag) {
            const auto p = pf_diag.resolve();
            dspec.plane = plane == "t-s" ? DiagramPlane::TS : DiagramPlane::TauAlpha;
            dspec.quad = p.quad;
            dspec.sigma = p.sigma;
            config["params"] = {{"a", p.quad.a}, {"b", p.quad.b}, {"c", p.quad.c}, {"sigma", p.sigma}};
            config["grid"] = {{"plane", plane}, {"xmin", dspec.x_min}, {"xmax", dspec.x_max}, {"ymin", dspec.y_min},
                              {"ymax", dspec.y_max}, {"nx", dspec.nx}, {"ny", dspec.ny}};
            config["format"] = format.empty() ? "csv" : format;
            const auto d = stability_diagram(dspec);
            em.emit(format == "svg" ? diagram_svg(d, meta_line(config)) : diagram_csv(d, meta_line(config)));
            return kExitOk;
        }
        if (*iter) {
            const auto p = pf_iter.resolve();
            config["params"] = params_config(p, pf_iter);
            config["x0"] = x0;
            config["steps"] = steps;
            config["direction"] = backward ? "backward" : "forward";
            config["tail_steps"] = iopts.tail_steps;
            config["overflow_limit"] = iopts.overflow_limit;
            config["escape_bound"] = kappa_json(p);
            const auto orbit = iterate(p, Eigen::Vector3d(x0[0], x0[1], x0[2]), steps,
                                       backward ? Direction::Backward : Direction::Forward, iopts);
            em.emit(orbit_csv(orbit, meta_line(config)));
            return kExitOk;
        }
        if (*mani) {
            const auto p = pf_mani.resolve();
            const auto fps = fixed_points(p);
            if (fps.size() != 2) {
                throw PreconditionError("manifold needs two distinct fixed points");
            }
            const auto two_stable = [](const FixedPointReport& f) { return f.stability.classification == StabilityClass::TypeA; };
            const auto two_unstable = [](const FixedPointReport& f) { return f.stability.classification == StabilityClass::TypeB; };
            const FixedPointReport* fs = nullptr;
            const FixedPointReport* fu = nullptr;
            for (const auto& f : fps) {
                if (two_stable(f) && !fs) {
                    fs = &f;
                } else if (two_unstable(f) && !fu) {
                    fu = &f;
                }
            }
            if (!fs || !fu) {
                throw PreconditionError("need one fixed point with a 2D stable and one with a 2D unstable manifold");
            }
            const auto r = reversor_for(p);
            const double sep = std::abs(fps[0].location[0] - fps[1].location[0]);
            const double reach = std::max(0.5, sep);
            const double xlo = std::min(fps[0].location[0], fps[1].location[0]) - reach;
            const double xhi = std::max(fps[0].location[0], fps[1].location[0]) + reach;
            config["params"] = params_config(p, pf_mani);
            config["depth"] = depth;
            config["epsilon"] = gopts.epsilon;
            config["refine"] = gopts.refine;
            config["steps_per_generation"] = gopts.steps_per_generation;
            config["max_vertices"] = gopts.max_vertices;
            const auto ws = grow_2d(p, *fs, ManifoldKind::Stable, depth, gopts);
            const auto wu = grow_2d(p, *fu, ManifoldKind::Unstable, depth, gopts);
            const auto curves = intersect_meshes(ws, wu, r);
            json summary = {{"config", config}};
            for (const auto* m : {&ws, &wu}) {
                const std::string stem = prefix + "." + to_string(m->kind);
                json side = mesh_sidecar(*m);
                side["config"] = config;
                write_file_atomic(stem + ".obj", mesh_obj(*m, meta_line(config)));
                write_file_atomic(stem + ".json", dump(side));
                summary[to_string(m->kind)] = stem + ".obj";
            }
            write_file_atomic(prefix + ".curves.csv", curves_csv(curves, meta_line(config)));
            json cj = json::array();
            for (const auto& c : curves) {
                json crossings = json::array();
                for (const auto& fc : c.fix_crossings) {
                    crossings.push_back({{"point", vector_to_json(fc.point)}, {"distance", fc.distance}, {"angle_deg", fc.angle_deg}});
                }
                cj.push_back({{"points", c.polyline.size()}, {"closed", c.closed}, {"endpoints", c.endpoints}, {"fix_crossings", crossings}});
            }
            summary["curves"] = cj;
            if (r) {
                const double a0 = lo.value_or(xlo), a1 = hi.value_or(xhi);
                if (mani_samples->count() == 0) {
                    hopts.samples = density_samples(a0, a1);
                }
                config["bracket"] = {a0, a1};
                config["samples"] = hopts.samples;
                summary["config"] = config;
                json hits = json::array();
                for (const auto& h : heteroclinic_from_symmetry(p, *r, a0, a1, hopts)) {
                    hits.push_back({{"s", h.s},
                                    {"point", vector_to_json(h.point)},
                                    {"forward_limit", to_string(h.forward_limit)},
                                    {"forward_distance", h.forward_distance},
                                    {"backward_distance", h.backward_distance},
                                    {"distance_to_curves", distance_to_curves(h.point, curves)}});
                }
                summary["symmetric_heteroclinic"] = hits;
            }
            write_file_atomic(prefix + ".summary.json", dump(summary));
            out << dump(summary);
            return kExitOk;
        }
        if (*sym) {
            const auto p = pf_sym.resolve();
            const auto r = reversor_for(p);
            if (!r) {
                json j = {{"config", config}, {"error", "map is not reversible (a != c)"}};
                em.emit(dump(j));
                return kExitPredicate;
            }
            const double kappa = p.quad.is_positive_definite() ? escape_bound(p) : 2.0;
            const double a0 = lo.value_or(-1.5 * kappa), a1 = hi.value_or(1.5 * kappa);
            config["params"] = params_config(p, pf_sym);
            config["bracket"] = {a0, a1};
            config["eta"] = r->eta;
            std::vector<std::vector<std::string>> rows;
            if (heteroclinic) {
                config["mode"] = "heteroclinic";
                hopts.samples = sym_samples->count() == 0 ? density_samples(a0, a1) : sopts.samples;
                config["samples"] = hopts.samples;
                for (const auto& h : heteroclinic_from_symmetry(p, *r, a0, a1, hopts)) {
                    rows.push_back({format_double(h.s), format_double(h.point[0]), format_double(h.point[1]),
                                    format_double(h.point[2]), to_string(h.forward_limit),
                                    format_double(h.forward_distance), format_double(h.backward_distance)});
                }
                em.emit(csv_text(meta_line(config), {"s", "x", "y", "z", "forward_limit", "forward_distance", "backward_distance"}, rows));
            } else {
                config["mode"] = "periodic";
                config["period"] = period;
                config["samples"] = sopts.samples;
                for (const auto& v : symmetric_orbit_search(p, *r, period, a0, a1, sopts)) {
                    rows.push_back({format_double(v[0]), format_double(v[1]), format_double(v[2])});
                }
                em.emit(csv_text(meta_line(config), {"x", "y", "z"}, rows));
            }
            return kExitOk;
        }
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

}  // namespace quadvp
