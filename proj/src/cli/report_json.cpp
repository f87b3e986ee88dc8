#include "roughsew/cli/report_json.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace roughsew::cli {

using nlohmann::json;

namespace {

// JSON has no inf/nan; keep them readable as strings.
json number(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

}  // namespace

json vector_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
    return out;
}

json to_json(const SampleSpec& spec) {
    return json{{"points", spec.points},
                {"box_center", spec.box.center.size() ? vector_json(spec.box.center) : json::array()},
                {"box_radius", spec.box.radius},
                {"max_pairs", spec.max_pairs},
                {"max_triples", spec.max_triples},
                {"seed", spec.seed}};
}

json to_json(const DefectReport& r) {
    json times = json::array();
    for (double t : r.times) times.push_back(t);
    return json{{"quantity", r.quantity},
                {"value", number(r.value)},
                {"witness", {{"times", times}, {"point", r.point.size() ? vector_json(r.point) : json::array()}}},
                {"samples", r.samples},
                {"sample_spec", to_json(r.spec)}};
}

json to_json(const RefinementStudy& s) {
    json values = json::array();
    for (double v : s.values) values.push_back(number(v));
    return json{{"levels", s.levels}, {"values", values}, {"drift", number(s.drift)}, {"finite", s.finite}};
}

json to_json(const ConvergenceReport& r) {
    json levels = json::array();
    for (const auto& rec : r.records)
        levels.push_back({{"level", rec.level},
                          {"mesh", rec.mesh},
                          {"error", number(rec.error)},
                          {"runtime_ms", rec.runtime_ms},
                          {"cauchy_increment", number(rec.cauchy_increment)}});
    json probes = json::array();
    for (const auto& p : r.probes) probes.push_back(vector_json(p));
    return json{{"scheme", r.scheme},
                {"reference", r.reference},
                {"order", r.order},
                {"horizon", r.horizon},
                {"records", levels},
                {"fitted_order", r.fit.slope ? json(*r.fit.slope) : json(nullptr)},
                {"fit_levels_used", r.fit.used_levels},
                {"theoretical_order", r.theoretical.value},
                {"theoretical_degenerate", r.theoretical.degenerate},
                {"meets_theory", r.meets_theory()},
                {"probes", probes},
                {"seed", r.seed}};
}

json to_json(const Certification& c) {
    json values = json::array();
    for (double v : c.constants) values.push_back(number(v));
    return json{{"levels", c.levels}, {"constants", values}, {"drift", number(c.drift)}, {"certified", c.certified}};
}

json to_json(const CompareReport& r) {
    return json{{"level", r.level},         {"distance", number(r.distance)},  {"eps1", number(r.eps1)},
                {"eps2", number(r.eps2)},   {"eps3", number(r.eps3)},          {"initial_gap", r.initial_gap},
                {"bound_sum", number(r.bound_sum)}, {"fitted_C", number(r.fitted_C)}};
}

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string rate_csv(const ConvergenceReport& r) {
    std::ostringstream out;
    out << "level,mesh,error,runtime_ms\n";
    for (const auto& rec : r.records)
        out << rec.level << ',' << format_double(rec.mesh) << ',' << format_double(rec.error) << ','
            << format_double(rec.runtime_ms) << '\n';
    return out.str();
}

std::string trajectory_csv(const SolutionPath& y) {
    std::ostringstream out;
    out << 't';
    const auto d = y.values.empty() ? 0 : y.values.front().size();
    for (Eigen::Index i = 0; i < d; ++i) out << ",y" << (i + 1);
    out << '\n';
    for (std::size_t k = 0; k < y.times.size(); ++k) {
        out << format_double(y.times[k]);
        for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_double(y.values[k][i]);
        out << '\n';
    }
    return out.str();
}

}  // namespace roughsew::cli
