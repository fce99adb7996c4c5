#include "quadvp/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "quadvp/error.hpp"

namespace quadvp {

using nlohmann::json;

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : Error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
      line_(line),
      column_(column) {}

json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // e.byte is 1-based and points just past the offending character.
        std::size_t line = 1, column = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ParseError("invalid JSON", line, column);
    }
}

Eigen::VectorXd vector_from_json(const json& j) {
    if (!j.is_array()) {
        throw Error("expected a numeric array");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) {
            throw Error("expected a number in array");
        }
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) {
        throw Error("expected a nonempty array of rows");
    }
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        const Eigen::VectorXd row = vector_from_json(j[r]);
        if (static_cast<std::size_t>(row.size()) != cols) {
            throw DimensionMismatch("ragged matrix rows");
        }
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        a.push_back(v[i]);
    }
    return a;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        a.push_back(vector_to_json(m.row(r).transpose()));
    }
    return a;
}

QuadMap map_from_json(const json& j) {
    for (const char* key : {"dim", "const", "linear", "quad"}) {
        if (!j.contains(key)) {
            throw Error(std::string("map file is missing \"") + key + "\"");
        }
    }
    const int n = j.at("dim").get<int>();
    if (n < 1) {
        throw DimensionMismatch("dim must be positive");
    }
    const Eigen::VectorXd b = vector_from_json(j.at("const"));
    const Eigen::MatrixXd l = matrix_from_json(j.at("linear"));
    if (b.size() != n || l.rows() != n || l.cols() != n) {
        throw DimensionMismatch("const/linear sizes do not match dim");
    }
    const json& q = j.at("quad");
    if (!q.is_array() || static_cast<int>(q.size()) != n) {
        throw DimensionMismatch("quad must hold dim matrices");
    }
    std::vector<Eigen::MatrixXd> a;
    for (const auto& m : q) {
        a.push_back(matrix_from_json(m));
        if (a.back().rows() != n || a.back().cols() != n) {
            throw DimensionMismatch("quad matrices must be dim x dim");
        }
    }
    return QuadMap(b, l, a);
}

json map_to_json(const QuadMap& m) {
    json q = json::array();
    for (const auto& a : m.quad()) {
        q.push_back(matrix_to_json(a));
    }
    return {{"dim", m.dim()}, {"const", vector_to_json(m.constant())}, {"linear", matrix_to_json(m.linear())}, {"quad", q}};
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

QuadMap read_map_file(const std::filesystem::path& path) { return map_from_json(parse_json_text(read_file(path))); }

json shear_to_json(const ShearData& d) { return {{"v", vector_to_json(d.v())}, {"P", matrix_to_json(d.p())}}; }

json certificate_to_json(const Certificate& c) {
    json j = {{"condition", c.condition}, {"max_residual", c.max_residual}, {"det_linear", c.det_linear}};
    if (c.alternative_residual) {
        j["alternative_residual"] = *c.alternative_residual;
    }
    return j;
}

json generic_params_to_json(const GenericMapParams& p) {
    return {{"alpha", p.alpha}, {"tau", p.tau}, {"sigma", p.sigma}, {"a", p.quad.a}, {"b", p.quad.b}, {"c", p.quad.c}};
}

namespace {

json quad_json(const QuadraticForm2& q) { return {{"a", q.a}, {"b", q.b}, {"c", q.c}}; }

}  // namespace

json normal_form_to_json(const NormalForm& nf, const std::optional<GenericReduction>& generic) {
    json j;
    j["case"] = to_string(nf.kind);
    json params = json::object();
    switch (nf.kind) {
        case NormalCase::I:
            params = generic_params_to_json(nf.generic());
            break;
        case NormalCase::II: {
            const auto& c = std::get<CaseIIParams>(nf.params);
            params = {{"x0", c.shift[0]}, {"y0", c.shift[1]}, {"z0", c.shift[2]}, {"alpha", c.alpha}, {"beta", c.beta},
                      {"quad", quad_json(c.quad)}};
            break;
        }
        case NormalCase::III: {
            const auto& c = std::get<CaseIIIParams>(nf.params);
            params = {{"x0", c.shift[0]}, {"y0", c.shift[1]}, {"z0", c.shift[2]}, {"alpha", c.alpha}, {"beta", c.beta},
                      {"quad", quad_json(c.quad)}};
            break;
        }
        case NormalCase::Affine:
            break;
    }
    j["params"] = params;
    j["conjugacy"] = {{"linear", matrix_to_json(nf.conjugacy.linear())}, {"const", vector_to_json(nf.conjugacy.constant())}};
    j["generic"] = nullptr;
    if (generic) {
        if (generic->non_generic) {
            j["non_generic"] = to_string(*generic->non_generic);
        } else {
            const auto& g = generic->form.generic();
            j["generic"] = {{"alpha", g.alpha}, {"tau", g.tau}, {"a", g.quad.a}, {"b", g.quad.b}, {"c", g.quad.c}};
            j["generic_conjugacy"] = {{"linear", matrix_to_json(generic->form.conjugacy.linear())},
                                      {"const", vector_to_json(generic->form.conjugacy.constant())},
                                      {"scale", generic->scale},
                                      {"shift", generic->shift}};
        }
    }
    const auto& d = nf.diagnostics;
    j["diagnostics"] = {{"z_singular_values", d.z_singular_values},
                        {"near_degenerate", d.near_degenerate},
                        {"trace_linear", d.trace_linear},
                        {"second_trace_linear", d.second_trace_linear},
                        {"conjugacy_residual", d.conjugacy_residual},
                        {"notes", d.notes}};
    return j;
}

GenericMapParams generic_params_from_json(const json& j) {
    GenericMapParams p;
    if (j.contains("generic") && j["generic"].is_object()) {
        const auto& g = j["generic"];
        p.alpha = g.at("alpha").get<double>();
        p.tau = g.at("tau").get<double>();
        p.sigma = g.value("sigma", 0.0);
        p.quad = {g.at("a").get<double>(), g.at("b").get<double>(), g.at("c").get<double>()};
        return p;
    }
    if (j.value("case", std::string()) == "I" && j.contains("params")) {
        const auto& g = j["params"];
        p.alpha = g.at("alpha").get<double>();
        p.tau = g.at("tau").get<double>();
        p.sigma = g.at("sigma").get<double>();
        p.quad = {g.at("a").get<double>(), g.at("b").get<double>(), g.at("c").get<double>()};
        return p;
    }
    throw Error("normal-form file has no generic parameters");
}

json fixed_point_to_json(const FixedPointReport& fp) {
    json ev = json::array();
    for (const auto& z : fp.stability.eigenvalues) {
        ev.push_back({z.real(), z.imag()});
    }
    json j = {{"which", to_string(fp.which)},
              {"location", vector_to_json(fp.location)},
              {"t", fp.t},
              {"s", fp.s},
              {"eigenvalues", ev},
              {"classification", to_string(fp.stability.classification)}};
    if (fp.stability.complex_phase) {
        j["complex_phase"] = *fp.stability.complex_phase;
    }
    return j;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_text(const std::string& metadata, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
    std::string out = "# " + metadata + "\n";
    for (std::size_t i = 0; i < header.size(); ++i) {
        out += (i ? "," : "") + header[i];
    }
    out += "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            out += (i ? "," : "") + r[i];
        }
        out += "\n";
    }
    return out;
}

std::string diagram_csv(const StabilityDiagram& d, const std::string& metadata) {
    const bool ts = d.spec.plane == DiagramPlane::TS;
    std::vector<std::vector<std::string>> rows;
    rows.reserve(d.cells.size());
    for (const auto& c : d.cells) {
        rows.push_back({std::to_string(c.i), std::to_string(c.j), format_double(c.x), format_double(c.y),
                        std::to_string(c.fixed_point_count), c.plus ? to_string(*c.plus) : "",
                        c.minus ? to_string(*c.minus) : "", c.plus_complex ? "1" : "0", c.minus_complex ? "1" : "0",
                        c.plus_phase ? format_double(*c.plus_phase) : ""});
    }
    return csv_text(metadata,
                    {"i", "j", ts ? "t" : "tau", ts ? "s" : "alpha", "fixed_points", "plus", "minus", "plus_complex",
                     "minus_complex", "plus_phase"},
                    rows);
}

namespace {

std::string region_color(const DiagramCell& c) {
    static const std::map<std::string, std::string> base = {
        {"type_a", "#d95f02"}, {"type_b", "#1b9e77"}, {"saddle_node", "#444444"},
        {"period_doubling", "#7570b3"}, {"elliptic_pair", "#e7298a"}};
    if (c.fixed_point_count == 0) {
        return "#f0f0f0";
    }
    std::string col = c.plus ? base.at(to_string(*c.plus)) : "#ffffff";
    if (c.minus && c.plus && *c.minus == *c.plus) {
        col = *c.plus == StabilityClass::TypeA ? "#fdae6b" : "#8dd3c7";
    }
    return col;
}

}  // namespace

std::string diagram_svg(const StabilityDiagram& d, const std::string& metadata) {
    const double w = 800.0, h = 800.0;
    const auto& s = d.spec;
    const auto px = [&](double x) { return (x - s.x_min) / (s.x_max - s.x_min) * w; };
    const auto py = [&](double y) { return h - (y - s.y_min) / (s.y_max - s.y_min) * h; };
    std::string out;
    char buf[256];
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n";
    std::string meta = metadata;
    for (const auto& [from, to] : std::vector<std::pair<std::string, std::string>>{{"&", "&amp;"}, {"<", "&lt;"}, {">", "&gt;"}}) {
        for (std::size_t pos = 0; (pos = meta.find(from, pos)) != std::string::npos; pos += to.size()) {
            meta.replace(pos, from.size(), to);
        }
    }
    out += "<metadata>" + meta + "</metadata>\n<g id=\"regions\" shape-rendering=\"crispEdges\">\n";
    const double cw = w / s.nx, ch = h / s.ny;
    for (const auto& c : d.cells) {
        const std::string col = region_color(c);
        const double op = c.plus_complex ? 0.75 : 1.0;
        std::snprintf(buf, sizeof buf, "<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" fill=\"%s\" fill-opacity=\"%.2f\"/>\n",
                      c.i * cw, h - (c.j + 1) * ch, cw, ch, col.c_str(), op);
        out += buf;
    }
    out += "</g>\n<g id=\"curves\" fill=\"none\" stroke-width=\"1.5\">\n";
    static const std::map<std::string, std::string> stroke = {
        {"discriminant", "#000000"}, {"saddle_node", "#000000"}, {"period_doubling", "#0000cc"}, {"double_root", "#cc0000"}};
    for (const auto& curve : d.curves) {
        for (const auto& seg : curve.segments) {
            std::string path;
            for (std::size_t k = 0; k < seg.size(); ++k) {
                std::snprintf(buf, sizeof buf, "%s%.3f %.3f", k ? " L" : "M", px(seg[k].x()), py(seg[k].y()));
                path += buf;
            }
            const auto it = stroke.find(curve.name);
            out += "<path class=\"" + curve.name + "\" stroke=\"" + (it != stroke.end() ? it->second : "#000000") +
                   "\" d=\"" + path + "\"/>\n";
        }
    }
    out += "</g>\n</svg>\n";
    return out;
}

std::string orbit_csv(const OrbitRecord& orbit, const std::string& metadata) {
    std::vector<std::vector<std::string>> rows;
    const int sign = orbit.direction == Direction::Forward ? 1 : -1;
    for (std::size_t k = 0; k < orbit.states.size(); ++k) {
        const auto& v = orbit.states[k];
        rows.push_back({std::to_string(sign * static_cast<int>(k)), format_double(v[0]), format_double(v[1]),
                        format_double(v[2])});
    }
    std::string meta = metadata + " verdict=" + to_string(orbit.verdict);
    if (orbit.escape_time) {
        meta += " escape_time=" + std::to_string(*orbit.escape_time);
    }
    if (orbit.overflow) {
        meta += " overflow=1";
    }
    return csv_text(meta, {"step", "x", "y", "z"}, rows);
}

std::string mesh_obj(const ManifoldMesh& mesh, const std::string& metadata) {
    std::string out = "# " + metadata + "\n";
    out.reserve(mesh.vertices.size() * 60 + mesh.triangles.size() * 30);
    for (const auto& v : mesh.vertices) {
        out += "v " + format_double(v[0]) + " " + format_double(v[1]) + " " + format_double(v[2]) + "\n";
    }
    for (const auto& t : mesh.triangles) {
        out += "f " + std::to_string(t[0] + 1) + " " + std::to_string(t[1] + 1) + " " + std::to_string(t[2] + 1) + "\n";
    }
    return out;
}

json mesh_sidecar(const ManifoldMesh& mesh) {
    return {{"kind", to_string(mesh.kind)},
            {"fixed_point", fixed_point_to_json(mesh.fixed_point)},
            {"params", generic_params_to_json(mesh.params)},
            {"epsilon", mesh.epsilon},
            {"steps_per_generation", mesh.steps_per_generation},
            {"depth", mesh.depth},
            {"refine", mesh.refine},
            {"box", {{"center", vector_to_json(mesh.box.center)}, {"half_width", mesh.box.half_width}}},
            {"truncated", mesh.truncated},
            {"refinement_capped", mesh.refinement_capped},
            {"ring_points", mesh.ring_points},
            {"radial_points", mesh.radial_points},
            {"max_edge", mesh.max_edge},
            {"vertex_count", mesh.vertices.size()},
            {"triangle_count", mesh.triangles.size()},
            {"generation", mesh.generation}};
}

std::string curves_csv(const std::vector<HeteroclinicCurve>& curves, const std::string& metadata) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t c = 0; c < curves.size(); ++c) {
        for (const auto& p : curves[c].polyline) {
            rows.push_back({std::to_string(c), format_double(p[0]), format_double(p[1]), format_double(p[2])});
        }
    }
    return csv_text(metadata, {"curve_id", "x", "y", "z"}, rows);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write " + tmp.string());
        }
        out << content;
        if (!out) {
            throw Error("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace quadvp
