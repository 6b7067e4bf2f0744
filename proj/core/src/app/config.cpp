#include "rodnet/app.hpp"
#include "rodnet/so3.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace rodnet::app {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string &path, const std::string &what)
{
    throw ValidationError(path + ": " + what);
}

void allow_keys(const json &j, const std::string &path, std::initializer_list<const char *> keys)
{
    if (!j.is_object())
        fail(path, "expected an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            fail(path + "." + it.key(), "unknown field");
}

const json &require(const json &j, const std::string &path, const char *key)
{
    if (!j.contains(key))
        fail(path + "." + key, "missing required field");
    return j.at(key);
}

double number(const json &j, const std::string &path)
{
    if (!j.is_number())
        fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        fail(path, "must be finite");
    return v;
}

double positive(const json &j, const std::string &path)
{
    const double v = number(j, path);
    if (!(v > 0.0))
        fail(path, "must be positive");
    return v;
}

int integer(const json &j, const std::string &path)
{
    if (!j.is_number_integer())
        fail(path, "expected an integer");
    return j.get<int>();
}

bool boolean(const json &j, const std::string &path)
{
    if (!j.is_boolean())
        fail(path, "expected true or false");
    return j.get<bool>();
}

std::string string(const json &j, const std::string &path)
{
    if (!j.is_string())
        fail(path, "expected a string");
    return j.get<std::string>();
}

template <int N> Eigen::Matrix<double, N, 1> vec(const json &j, const std::string &path)
{
    if (!j.is_array() || j.size() != N)
        fail(path, "expected an array of " + std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, 1> v;
    for (int k = 0; k < N; ++k)
        v(k) = number(j[static_cast<std::size_t>(k)], path + "[" + std::to_string(k) + "]");
    return v;
}

Mat3 mat3(const json &j, const std::string &path)
{
    if (!j.is_array() || j.size() != 3)
        fail(path, "expected a 3x3 array of rows");
    Mat3 M;
    for (int r = 0; r < 3; ++r)
        M.row(r) = vec<3>(j[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]").transpose();
    return M;
}

FrameInput parse_frame(const json &j, const std::string &path)
{
    allow_keys(j, path, {"quaternion", "matrix", "tangent", "axis"});
    FrameInput f;
    const int given = static_cast<int>(j.contains("quaternion")) + static_cast<int>(j.contains("matrix")) +
                      static_cast<int>(j.contains("tangent") || j.contains("axis"));
    if (given != 1)
        fail(path, "give exactly one of quaternion, matrix or tangent+axis");
    if (j.contains("quaternion")) {
        const Eigen::Vector4d q = vec<4>(j["quaternion"], path + ".quaternion");
        f.kind = FrameInput::Kind::quaternion;
        f.quaternion = Quat(q(0), q(1), q(2), q(3));
    } else if (j.contains("matrix")) {
        f.kind = FrameInput::Kind::matrix;
        f.matrix = mat3(j["matrix"], path + ".matrix");
    } else {
        f.kind = FrameInput::Kind::tangent_axis;
        f.tangent = vec<3>(require(j, path, "tangent"), path + ".tangent");
        f.axis = vec<3>(require(j, path, "axis"), path + ".axis");
    }
    return f;
}

xsection::SectionGeometry parse_geometry(const json &j, const std::string &path)
{
    const std::string kind = string(require(j, path, "kind"), path + ".kind");
    try {
        if (kind == "circle") {
            allow_keys(j, path, {"kind", "radius", "center"});
            const Vec2 c = j.contains("center") ? vec<2>(j["center"], path + ".center") : Vec2::Zero();
            return xsection::SectionGeometry::circle(positive(require(j, path, "radius"), path + ".radius"), c);
        }
        if (kind == "rectangle") {
            allow_keys(j, path, {"kind", "width", "height"});
            return xsection::SectionGeometry::rectangle(positive(require(j, path, "width"), path + ".width"),
                                                        positive(require(j, path, "height"), path + ".height"));
        }
        if (kind == "polygon") {
            allow_keys(j, path, {"kind", "vertices"});
            const json &v = require(j, path, "vertices");
            if (!v.is_array())
                fail(path + ".vertices", "expected an array of [x2, x3] points");
            std::vector<Vec2> pts;
            for (std::size_t k = 0; k < v.size(); ++k)
                pts.push_back(vec<2>(v[k], path + ".vertices[" + std::to_string(k) + "]"));
            return xsection::SectionGeometry::polygon(std::move(pts));
        }
    } catch (const ValidationError &e) {
        const std::string what = e.what();
        if (what.rfind(path, 0) == 0)
            throw;
        fail(path, what);
    }
    fail(path + ".kind", "expected circle, rectangle or polygon");
}

SectionInput parse_section_input(const json &j, const std::string &path, const char *geometry_key)
{
    SectionInput s;
    s.geometry = parse_geometry(require(j, path, geometry_key), path + "." + geometry_key);
    const json &m = require(j, path, "material");
    allow_keys(m, path + ".material", {"lambda", "mu"});
    s.material.lambda = number(require(m, path + ".material", "lambda"), path + ".material.lambda");
    s.material.mu = number(require(m, path + ".material", "mu"), path + ".material.mu");
    try {
        s.material.validate();
    } catch (const ValidationError &e) {
        fail(path + ".material", e.what());
    }
    if (j.contains("mesh_size"))
        s.mesh_size = positive(j["mesh_size"], path + ".mesh_size");
    return s;
}

LoadProfile parse_profile(const json &j, const std::string &path)
{
    allow_keys(j, path, {"constant", "polynomial", "samples"});
    if (j.size() != 1)
        fail(path, "give exactly one of constant, polynomial or samples");
    try {
        if (j.contains("constant"))
            return LoadProfile::constant(vec<3>(j["constant"], path + ".constant"));
        if (j.contains("polynomial")) {
            const json &c = j["polynomial"];
            if (!c.is_array() || c.empty())
                fail(path + ".polynomial", "expected a nonempty array of coefficient vectors");
            std::vector<Vec3> coeffs;
            for (std::size_t k = 0; k < c.size(); ++k)
                coeffs.push_back(vec<3>(c[k], path + ".polynomial[" + std::to_string(k) + "]"));
            if (coeffs.size() == 1)
                return LoadProfile::constant(coeffs[0]);
            return LoadProfile::polynomial(std::move(coeffs));
        }
        const json &s = j["samples"];
        const std::string sp = path + ".samples";
        allow_keys(s, sp, {"x", "values"});
        const json &x = require(s, sp, "x");
        const json &v = require(s, sp, "values");
        if (!x.is_array() || !v.is_array())
            fail(sp, "x and values must be arrays");
        std::vector<double> xs;
        std::vector<Vec3> vs;
        for (std::size_t k = 0; k < x.size(); ++k)
            xs.push_back(number(x[k], sp + ".x[" + std::to_string(k) + "]"));
        for (std::size_t k = 0; k < v.size(); ++k)
            vs.push_back(vec<3>(v[k], sp + ".values[" + std::to_string(k) + "]"));
        return LoadProfile::sampled(std::move(xs), std::move(vs));
    } catch (const ValidationError &e) {
        const std::string what = e.what();
        if (what.rfind(path, 0) == 0)
            throw;
        fail(path, what);
    }
}

RodInput parse_rod(const json &j, const std::string &path)
{
    allow_keys(j, path, {"length", "frame", "stiffness", "loads"});
    RodInput r;
    r.length = positive(require(j, path, "length"), path + ".length");
    r.frame = parse_frame(require(j, path, "frame"), path + ".frame");
    // Frames are resolved here so errors carry the config path.
    resolve_frame(r.frame, path + ".frame");

    const json &st = require(j, path, "stiffness");
    const std::string sp = path + ".stiffness";
    if (st.contains("H")) {
        allow_keys(st, sp, {"H"});
        r.stiffness = mat3(st["H"], sp + ".H");
    } else {
        allow_keys(st, sp, {"section", "material", "mesh_size"});
        r.stiffness = parse_section_input(st, sp, "section");
    }

    if (j.contains("loads")) {
        const json &l = j["loads"];
        const std::string lp = path + ".loads";
        allow_keys(l, lp, {"distributed", "end_force"});
        if (l.contains("distributed")) {
            r.distributed = parse_profile(l["distributed"], lp + ".distributed");
            try {
                r.distributed.validate_support(r.length);
            } catch (const ValidationError &e) {
                fail(lp + ".distributed", e.what());
            }
        }
        if (l.contains("end_force"))
            r.end_force = vec<3>(l["end_force"], lp + ".end_force");
    }
    return r;
}

void parse_solver(const json &j, const std::string &path, solver::SolverOptions &o, std::size_t rods)
{
    allow_keys(j, path,
               {"segments", "g_tol", "max_iterations", "armijo_c1", "backtrack", "max_backtracks", "optimizer",
                "lbfgs_memory", "init", "seed", "allow_unbalanced", "balance_tol", "project_rigid_rotation"});
    if (j.contains("segments")) {
        const json &s = j["segments"];
        o.segments.clear();
        if (s.is_array()) {
            for (std::size_t k = 0; k < s.size(); ++k)
                o.segments.push_back(integer(s[k], path + ".segments[" + std::to_string(k) + "]"));
        } else {
            o.segments.push_back(integer(s, path + ".segments"));
        }
    }
    if (j.contains("g_tol"))
        o.g_tol = number(j["g_tol"], path + ".g_tol");
    if (j.contains("max_iterations"))
        o.max_iterations = integer(j["max_iterations"], path + ".max_iterations");
    if (j.contains("armijo_c1"))
        o.armijo_c1 = number(j["armijo_c1"], path + ".armijo_c1");
    if (j.contains("backtrack"))
        o.backtrack = number(j["backtrack"], path + ".backtrack");
    if (j.contains("max_backtracks"))
        o.max_backtracks = integer(j["max_backtracks"], path + ".max_backtracks");
    if (j.contains("optimizer")) {
        try {
            o.optimizer = solver::parse_optimizer(string(j["optimizer"], path + ".optimizer"));
        } catch (const ValidationError &e) {
            fail(path + ".optimizer", e.what());
        }
    }
    if (j.contains("lbfgs_memory"))
        o.lbfgs_memory = integer(j["lbfgs_memory"], path + ".lbfgs_memory");
    if (j.contains("init")) {
        try {
            apply_init_spec(string(j["init"], path + ".init"), o);
        } catch (const ValidationError &e) {
            fail(path + ".init", e.what());
        }
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned())
            fail(path + ".seed", "expected a nonnegative integer");
        o.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("allow_unbalanced"))
        o.allow_unbalanced = boolean(j["allow_unbalanced"], path + ".allow_unbalanced");
    if (j.contains("balance_tol"))
        o.balance_tol = number(j["balance_tol"], path + ".balance_tol");
    if (j.contains("project_rigid_rotation"))
        o.project_rigid_rotation = boolean(j["project_rigid_rotation"], path + ".project_rigid_rotation");
    try {
        o.validate(rods);
    } catch (const ValidationError &e) {
        fail(path, e.what());
    }
}

json parse_json(const std::string &text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        throw ValidationError(std::string("config: malformed JSON: ") + e.what());
    }
}

void check_version(const json &j)
{
    if (!j.is_object())
        fail("config", "expected a JSON object");
    const json &v = require(j, "config", "version");
    if (!v.is_number_integer() || v.get<int>() != 1)
        fail("config.version", "unsupported schema version (expected 1)");
}

ojson vec_json(const Vec3 &v) { return ojson::array({v(0), v(1), v(2)}); }

ojson mat_json(const Mat3 &M)
{
    ojson rows = ojson::array();
    for (int r = 0; r < 3; ++r)
        rows.push_back(vec_json(M.row(r).transpose()));
    return rows;
}

ojson geometry_json(const xsection::SectionGeometry &g)
{
    ojson o;
    switch (g.kind) {
    case xsection::SectionKind::circle:
        o["kind"] = "circle";
        o["radius"] = g.radius;
        o["center"] = ojson::array({g.center.x(), g.center.y()});
        break;
    case xsection::SectionKind::rectangle:
        o["kind"] = "rectangle";
        o["width"] = g.width;
        o["height"] = g.height;
        break;
    case xsection::SectionKind::polygon: {
        o["kind"] = "polygon";
        ojson v = ojson::array();
        for (const auto &p : g.vertices)
            v.push_back(ojson::array({p.x(), p.y()}));
        o["vertices"] = v;
        break;
    }
    }
    return o;
}

ojson profile_json(const LoadProfile &p)
{
    ojson o;
    switch (p.kind()) {
    case LoadProfile::Kind::constant:
        o["constant"] = vec_json(p.coefficients().front());
        break;
    case LoadProfile::Kind::polynomial: {
        ojson c = ojson::array();
        for (const auto &v : p.coefficients())
            c.push_back(vec_json(v));
        o["polynomial"] = c;
        break;
    }
    case LoadProfile::Kind::samples: {
        ojson x = ojson::array(), v = ojson::array();
        for (double a : p.abscissae())
            x.push_back(a);
        for (const auto &b : p.values())
            v.push_back(vec_json(b));
        o["samples"] = {{"x", x}, {"values", v}};
        break;
    }
    }
    return o;
}

} // namespace

void apply_init_spec(const std::string &spec, solver::SolverOptions &options)
{
    if (spec == "straight") {
        options.init = solver::InitKind::straight;
        options.amplitude = 0.0;
        return;
    }
    const std::string prefix = "perturbed:";
    if (spec.rfind(prefix, 0) == 0) {
        const std::string amp = spec.substr(prefix.size());
        std::size_t used = 0;
        double a = 0.0;
        try {
            a = std::stod(amp, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used == 0 || used != amp.size() || !(a >= 0.0) || !std::isfinite(a))
            throw ValidationError("init '" + spec + "': amplitude must be a nonnegative number");
        options.init = solver::InitKind::perturbed;
        options.amplitude = a;
        return;
    }
    throw ValidationError("init '" + spec + "': expected straight or perturbed:AMP");
}

std::string init_spec(const solver::SolverOptions &options)
{
    switch (options.init) {
    case solver::InitKind::straight:
    case solver::InitKind::provided: return "straight";
    case solver::InitKind::perturbed: return "perturbed:" + format_double(options.amplitude);
    }
    return "straight";
}

RunConfig parse_config(const std::string &text)
{
    const json j = parse_json(text);
    check_version(j);
    allow_keys(j, "config", {"version", "rods", "solver", "thresholds", "output"});
    RunConfig cfg;
    const json &rods = require(j, "config", "rods");
    if (!rods.is_array() || rods.empty())
        fail("rods", "expected a nonempty array");
    for (std::size_t i = 0; i < rods.size(); ++i)
        cfg.network.rods.push_back(parse_rod(rods[i], "rods[" + std::to_string(i) + "]"));

    if (j.contains("solver"))
        parse_solver(j["solver"], "solver", cfg.solver, cfg.network.rods.size());
    if (j.contains("thresholds")) {
        const json &t = j["thresholds"];
        allow_keys(t, "thresholds", {"junction_couple"});
        if (t.contains("junction_couple"))
            cfg.thresholds.junction_couple = positive(t["junction_couple"], "thresholds.junction_couple");
    }
    if (j.contains("output")) {
        const json &o = j["output"];
        allow_keys(o, "output", {"directory", "emit_plot_data"});
        if (o.contains("directory"))
            cfg.output_dir = string(o["directory"], "output.directory");
        if (o.contains("emit_plot_data"))
            cfg.emit_plot_data = boolean(o["emit_plot_data"], "output.emit_plot_data");
    }
    return cfg;
}

RunConfig load_config(const std::string &path) { return parse_config(read_file(path)); }

std::vector<SectionInput> load_sections(const std::string &path, std::vector<std::size_t> *rod_indices)
{
    const json j = parse_json(read_file(path));
    check_version(j);
    std::vector<SectionInput> out;
    if (rod_indices)
        rod_indices->clear();
    if (j.contains("section")) {
        allow_keys(j, "config", {"version", "section", "material", "mesh_size"});
        out.push_back(parse_section_input(j, "config", "section"));
        return out;
    }
    const RunConfig cfg = parse_config(j.dump());
    for (std::size_t i = 0; i < cfg.network.rods.size(); ++i)
        if (const auto *s = std::get_if<SectionInput>(&cfg.network.rods[i].stiffness)) {
            out.push_back(*s);
            if (rod_indices)
                rod_indices->push_back(i);
        }
    if (out.empty())
        fail("rods", "no rod specifies a cross-section");
    return out;
}

std::string normalized_config(const RunConfig &cfg)
{
    ojson root;
    root["version"] = 1;
    ojson rods = ojson::array();
    for (std::size_t i = 0; i < cfg.network.rods.size(); ++i) {
        const RodInput &r = cfg.network.rods[i];
        ojson rod;
        rod["length"] = r.length;
        const Quat q = resolve_frame(r.frame, "rods[" + std::to_string(i) + "].frame");
        rod["frame"] = {{"quaternion", ojson::array({q.w(), q.x(), q.y(), q.z()})}};
        if (const auto *H = std::get_if<Mat3>(&r.stiffness)) {
            rod["stiffness"] = {{"H", mat_json(*H)}};
        } else {
            const auto &s = std::get<SectionInput>(r.stiffness);
            ojson st;
            st["section"] = geometry_json(s.geometry);
            st["material"] = {{"lambda", s.material.lambda}, {"mu", s.material.mu}};
            st["mesh_size"] = s.mesh_size;
            rod["stiffness"] = st;
        }
        rod["loads"] = {{"distributed", profile_json(r.distributed)}, {"end_force", vec_json(r.end_force)}};
        rods.push_back(rod);
    }
    root["rods"] = rods;

    const auto &o = cfg.solver;
    ojson s;
    ojson seg = ojson::array();
    for (int n : o.segments_for(cfg.network.rods.size()))
        seg.push_back(n);
    s["segments"] = seg;
    s["g_tol"] = o.g_tol;
    s["max_iterations"] = o.max_iterations;
    s["armijo_c1"] = o.armijo_c1;
    s["backtrack"] = o.backtrack;
    s["max_backtracks"] = o.max_backtracks;
    s["optimizer"] = solver::to_string(o.optimizer);
    s["lbfgs_memory"] = o.lbfgs_memory;
    s["init"] = init_spec(o);
    s["seed"] = o.seed;
    s["allow_unbalanced"] = o.allow_unbalanced;
    s["balance_tol"] = o.balance_tol;
    s["project_rigid_rotation"] = o.project_rigid_rotation;
    root["solver"] = s;

    ojson t = ojson::object();
    if (cfg.thresholds.junction_couple)
        t["junction_couple"] = *cfg.thresholds.junction_couple;
    root["thresholds"] = t;
    root["output"] = {{"directory", cfg.output_dir}, {"emit_plot_data", cfg.emit_plot_data}};
    return root.dump(2) + "\n";
}

void write_file(const std::string &path, const std::string &content)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open '" + path + "' for writing");
    f << content;
    if (!f)
        throw IoError("failed writing '" + path + "'");
}

std::string read_file(const std::string &path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace rodnet::app
