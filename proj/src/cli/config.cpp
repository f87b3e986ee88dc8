#include "roughsew/cli/config.hpp"

#include "roughsew/errors.hpp"

#include <fstream>
#include <sstream>

namespace roughsew::cli {

using nlohmann::json;

namespace {

Vector to_vector(const json& j) {
    if (!j.is_array() || j.empty()) throw StructuralError("expected a non-empty numeric array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

Matrix to_matrix(const json& j) {
    if (!j.is_array() || j.empty()) throw StructuralError("expected a non-empty matrix");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw StructuralError("matrix rows must have equal length");
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
    return m;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

void parse_into(RunConfig& cfg, const json& doc) {
    if (!doc.is_object() || doc.empty()) throw StructuralError("config must be a non-empty JSON object");
    cfg.raw = doc;
    cfg.params.horizon = get_or(doc, "T", 1.0);
    cfg.params.p = get_or(doc, "p", 2.0);
    cfg.params.gamma = get_or(doc, "gamma", 1.0);
    cfg.params.delta_scale = get_or(doc, "delta_scale", 1.0);
    cfg.params.validate();
    cfg.control_scale = get_or(doc, "control_scale", 1.0);
    if (!(cfg.control_scale > 0.0)) throw StructuralError("control_scale must be positive");

    if (!doc.contains("driver") || !doc["driver"].is_object()) throw StructuralError("config needs a driver object");
    cfg.driver = doc["driver"];
    if (!cfg.driver.contains("kind")) throw StructuralError("driver.kind missing");
    if (!doc.contains("field") || !doc["field"].is_object()) throw StructuralError("config needs a field object");
    cfg.field = doc["field"];
    if (!cfg.field.contains("kind")) throw StructuralError("field.kind missing");

    const int substeps = get_or(doc, "ode_substeps", 16);
    std::vector<std::string> names;
    if (doc.contains("schemes")) names = doc["schemes"].get<std::vector<std::string>>();
    else if (doc.contains("scheme")) names.push_back(doc["scheme"].get<std::string>());
    else names.push_back("davie");
    for (const auto& n : names) {
        SchemeSpec s = SchemeSpec::parse(n);
        s.ode_substeps = substeps;
        s.validate();
        cfg.schemes.push_back(s);
    }

    cfg.level = get_or(doc, "level", 10);
    cfg.min_level = get_or(doc, "min_level", 2);
    if (cfg.level < 2 || cfg.level > 20) throw StructuralError("level must lie in [2, 20]");
    if (cfg.min_level < 0 || cfg.min_level > cfg.level) throw StructuralError("min_level must lie in [0, level]");
    if (doc.contains("galaxy_levels")) cfg.galaxy_levels = doc["galaxy_levels"].get<std::vector<int>>();
    for (int k : cfg.galaxy_levels)
        if (k < 1 || k > 16) throw StructuralError("galaxy_levels must lie in [1, 16]");
    cfg.tol = get_or(doc, "tol", 1e-10);
    cfg.seed = get_or<std::uint64_t>(doc, "seed", 1);
    cfg.reference = get_or<std::string>(doc, "reference", "self");
    if (cfg.reference != "self" && cfg.reference != "exp" && cfg.reference != "ode")
        throw StructuralError("reference must be self, exp or ode");
    cfg.reference_steps = get_or<std::size_t>(doc, "reference_steps", 100000);
    cfg.samples = get_or<std::size_t>(doc, "samples", 8);
    if (cfg.samples == 0) throw StructuralError("samples must be >= 1");

    if (doc.contains("probes"))
        for (const auto& p : doc["probes"]) cfg.probes.push_back(to_vector(p));
    if (doc.contains("box")) {
        cfg.box.center = to_vector(doc["box"].at("center"));
        cfg.box.radius = doc["box"].at("radius").get<double>();
    }
}

}  // namespace

RunConfig parse_config(const json& doc) {
    RunConfig cfg;
    try {
        parse_into(cfg, doc);
    } catch (const json::exception& e) {
        throw StructuralError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buf.str());
    } catch (const json::exception& e) {
        throw StructuralError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

Control build_control(const RunConfig& cfg) { return make_holder_control(cfg.control_scale, cfg.params.horizon); }

RoughDriver build_driver(const RunConfig& cfg) {
    const auto& d = cfg.driver;
    const Control control = build_control(cfg);
    try {
        const auto kind = d.at("kind").get<std::string>();
        if (kind == "pure_area") return pure_area_driver(to_matrix(d.at("area")), cfg.params, control);
        if (kind == "piecewise_linear") {
            std::vector<Vector> vertices;
            for (const auto& v : d.at("vertices")) vertices.push_back(to_vector(v));
            return piecewise_linear_driver(std::move(vertices), cfg.params, control, get_or(d, "depth", 2));
        }
        if (kind == "smooth") {
            const auto name = get_or<std::string>(d, "path", "circle");
            SmoothPath path;
            if (name == "circle") path = circle_path(get_or(d, "radius", 1.0), get_or(d, "frequency", 1.0));
            else if (name == "line") path = line_path(to_vector(d.at("velocity")));
            else if (name == "lissajous") path = lissajous_path(get_or<std::size_t>(d, "dim", 2));
            else throw StructuralError("unknown smooth path '" + name + "'");
            SmoothLiftOptions opt;
            opt.base_level = get_or(d, "base_level", 12);
            opt.substeps_per_cell = get_or(d, "substeps", 16);
            opt.depth = get_or(d, "depth", 2);
            return lift_smooth(path, cfg.params, control, opt);
        }
        throw StructuralError("unknown driver kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw StructuralError(std::string("driver: ") + e.what());
    }
}

VectorFieldFamily build_field(const RunConfig& cfg, std::size_t driver_dim) {
    const auto& f = cfg.field;
    try {
        const auto kind = f.at("kind").get<std::string>();
        const auto state_dim = get_or<std::size_t>(f, "state_dim", driver_dim);
        const double scale = get_or(f, "scale", 1.0);
        if (kind == "linear") {
            std::vector<Matrix> ms;
            for (const auto& m : f.at("matrices")) ms.push_back(to_matrix(m));
            return linear_field(std::move(ms));
        }
        if (kind == "trig") return trig_field(state_dim, driver_dim, scale);
        if (kind == "componentwise_trig") return componentwise_trig_field(state_dim, driver_dim, scale);
        if (kind == "rotation") return rotation_field(state_dim, driver_dim, scale);
        throw StructuralError("unknown field kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw StructuralError(std::string("field: ") + e.what());
    }
}

}  // namespace roughsew::cli
