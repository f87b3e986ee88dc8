#include "roughsew/cli/commands.hpp"

#include "roughsew/analysis.hpp"
#include "roughsew/cli/config.hpp"
#include "roughsew/cli/report_json.hpp"
#include "roughsew/errors.hpp"
#include "roughsew/schemes.hpp"
#include "roughsew/sewing.hpp"

#include <CLI11.hpp>
#include <boost/rational.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>

namespace roughsew::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::string out_dir = "roughsew_out";
    std::optional<std::uint64_t> seed;
    std::optional<int> levels;
    bool quiet = false;
    bool timing = false;
    std::string D, B, alpha, kappa;
};

// Everything a study needs, built once from the config.
struct Setup {
    RunConfig cfg;
    RoughDriver driver;
    VectorFieldFamily field;
    Control control;
    std::vector<Vector> probes;
    SampleSpec spec;
};

Setup make_setup(const Options& opt) {
    if (opt.config.empty()) throw StructuralError("--config is required");
    Setup s;
    s.cfg = load_config(opt.config);
    if (opt.seed) s.cfg.seed = *opt.seed;
    if (opt.levels) {
        if (*opt.levels < 2 || *opt.levels > 20) throw StructuralError("--levels must lie in [2, 20]");
        s.cfg.level = *opt.levels;
        s.cfg.min_level = std::min(s.cfg.min_level, s.cfg.level);
    }
    s.driver = build_driver(s.cfg);
    s.field = build_field(s.cfg, s.driver.dim);
    if (s.field.driver_dim != s.driver.dim)
        throw StructuralError("field has " + std::to_string(s.field.driver_dim) + " channels, driver dimension is " +
                              std::to_string(s.driver.dim));
    s.control = s.driver.control;
    const auto d = static_cast<Eigen::Index>(s.field.state_dim);
    if (s.cfg.box.center.size() == 0) s.cfg.box.center = Vector::Zero(d);
    if (s.cfg.box.center.size() != d) throw StructuralError("box.center has the wrong dimension");
    s.probes = s.cfg.probes.empty() ? sample_points(s.cfg.box, s.cfg.samples, s.cfg.seed) : s.cfg.probes;
    for (const auto& p : s.probes)
        if (p.size() != d) throw StructuralError("probe dimension does not match the field");
    s.spec.box = s.cfg.box;
    s.spec.points = s.cfg.samples;
    s.spec.seed = s.cfg.seed;
    return s;
}

void write_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path.string() + "'");
    f << text;
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

json horizon_json(const SewingParameters& p) {
    return json{{"theta", p.theta()},
                {"kappa", p.remainder().kappa()},
                {"delta_T", p.delta_T()},
                {"criterion", p.horizon_criterion()},
                {"small_enough", p.horizon_small_enough()}};
}

void warn_horizon(const SewingParameters& p, std::ostream& err) {
    if (!p.horizon_small_enough())
        err << "warning: kappa (1 + delta_T)^2 + delta_T = " << p.horizon_criterion()
            << " >= 1; the horizon is not small enough for the sewing bounds, consider a smaller T\n";
}

// exp(T C) a with C = sum_{i,j} A^{ij} B_j B_i: the limit flow of a pure-area
// driver under linear fields.
std::function<Vector(const Vector&)> exp_reference(const Setup& s) {
    if (!s.driver.area) throw CapabilityError("reference 'exp' needs a pure_area driver");
    if (s.field.name != "linear") throw CapabilityError("reference 'exp' needs a linear field");
    const Matrix& A = *s.driver.area;
    const auto jac = s.field.jacobian(Vector::Zero(static_cast<Eigen::Index>(s.field.state_dim)));
    Matrix C = Matrix::Zero(jac[0].rows(), jac[0].cols());
    for (std::size_t i = 0; i < jac.size(); ++i)
        for (std::size_t j = 0; j < jac.size(); ++j)
            C += A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * jac[j] * jac[i];
    const Matrix E = (s.cfg.params.horizon * C).exp();
    return [E](const Vector& a) -> Vector { return E * a; };
}

std::function<Vector(const Vector&)> make_reference(const Setup& s, const FlowFamily& phi) {
    if (s.cfg.reference == "exp") return exp_reference(s);
    if (s.cfg.reference == "ode") {
        if (!s.driver.path) throw CapabilityError("reference 'ode' needs a path driver");
        const SmoothPath path = *s.driver.path;
        const VectorFieldFamily field = s.field;
        const double T = s.cfg.params.horizon;
        const std::size_t steps = s.cfg.reference_steps;
        return [field, path, T, steps](const Vector& a) { return ode_reference(field, path, 0.0, T, a, steps); };
    }
    return self_reference(phi, s.cfg.level + 2);
}

int order_of(const SchemeSpec& spec) { return spec.kind == SchemeKind::euler ? spec.n : 2; }

int cmd_solve(const Options& opt, std::ostream& out, std::ostream& err) {
    const Setup s = make_setup(opt);
    warn_horizon(s.cfg.params, err);
    const SchemeSpec& spec = s.cfg.schemes.front();
    const FlowFamily phi = make_scheme(spec, s.field, s.driver);
    const Vector& a = s.probes.front();
    const double T = s.cfg.params.horizon;
    const SewResult res = sew(phi, 0.0, T, a, s.cfg.level, s.cfg.tol);
    const SolutionPath y = sew_trajectory(phi, a, res.level);

    const fs::path dir(opt.out_dir);
    write_file(dir / "trajectory.csv", trajectory_csv(y));
    json inc = json::array();
    for (double v : res.increments) inc.push_back(v);
    write_json(dir / "solve.json", json{{"scheme", spec.name()},
                                        {"start", vector_json(a)},
                                        {"final", vector_json(res.value)},
                                        {"level", res.level},
                                        {"increments", inc},
                                        {"status", to_string(res.status)},
                                        {"tol", s.cfg.tol},
                                        {"horizon", horizon_json(s.cfg.params)}});
    if (!opt.quiet) out << "solve " << spec.name() << ": level " << res.level << ", status " << to_string(res.status) << '\n';
    if (res.status == SewStatus::non_cauchy) {
        err << "error: iterated products are not Cauchy up to level " << res.level << '\n';
        return exit_convergence;
    }
    return exit_ok;
}

int cmd_rate(const Options& opt, std::ostream& out, std::ostream& err) {
    const Setup s = make_setup(opt);
    warn_horizon(s.cfg.params, err);
    std::vector<int> levels;
    for (int k = s.cfg.min_level; k <= s.cfg.level; ++k) levels.push_back(k);
    json reports = json::array();
    const fs::path dir(opt.out_dir);
    for (const auto& spec : s.cfg.schemes) {
        const FlowFamily phi = make_scheme(spec, s.field, s.driver);
        ConvergenceReport rep =
            convergence_study(phi, make_reference(s, phi), s.probes, levels, s.cfg.params, order_of(spec), opt.timing);
        rep.reference = s.cfg.reference;
        rep.seed = s.cfg.seed;
        rep.scheme = spec.name();
        write_file(dir / ("rate_" + spec.name() + ".csv"), rate_csv(rep));
        reports.push_back(to_json(rep));
        if (!opt.quiet) {
            out << "rate " << spec.name() << ": fitted order ";
            if (rep.fit.slope) out << *rep.fit.slope;
            else out << "n/a";
            out << ", theoretical " << rep.theoretical.value << '\n';
        }
    }
    write_json(dir / "rate.json", json{{"reports", reports}, {"horizon", horizon_json(s.cfg.params)}});
    return exit_ok;
}

struct Check {
    std::string name;
    double value;
    double threshold;
    bool passed;
    bool hard;
};

int cmd_verify(const Options& opt, std::ostream& out, std::ostream& err) {
    const Setup s = make_setup(opt);
    std::vector<Check> checks;
    json details;
    const double T = s.cfg.params.horizon;
    const auto grid = uniform_grid(T, std::size_t{1} << std::min(6, s.cfg.level));
    const auto varpi = s.cfg.params.remainder();

    const auto chen = check_chen(s.driver, grid, 1e-10, 1000, s.cfg.seed);
    checks.push_back({"driver_chen", chen.max_defect, 1e-10, chen.passed, true});
    const double wg = check_weak_geometric(s.driver, grid, 1000, s.cfg.seed);
    checks.push_back({"driver_weak_geometric", wg, 1e-10, wg <= 1e-10, true});
    const double sup = control_superadditivity_defect(s.control, 1000, s.cfg.seed);
    checks.push_back({"control_superadditivity", sup, 0.0, sup <= 0.0, true});
    double contraction = 0.0;
    {
        Rng rng(s.cfg.seed);
        for (int k = 0; k < 1000; ++k) {
            const double delta = std::pow(10.0, rng.uniform(-6.0, 1.0));
            contraction = std::max(contraction, std::abs(2.0 * varpi(delta / 2.0) / varpi(delta) - varpi.kappa()));
        }
    }
    checks.push_back({"remainder_contraction", contraction, 1e-14, contraction <= 1e-14, true});
    checks.push_back({"horizon_criterion", s.cfg.params.horizon_criterion(), 1.0, s.cfg.params.horizon_small_enough(),
                      false});

    for (std::size_t i = 0; i < s.field.driver_dim; ++i) {
        const auto c = four_point_scaled(analytic_four_point(s.field, s.cfg.params.gamma), 1.1);
        const auto rep = empirical_four_point_defect(s.field.channel(i), s.field.state_dim, c, 10000,
                                                     s.cfg.box.radius, s.cfg.seed + i);
        checks.push_back({"four_point_channel_" + std::to_string(i), rep.max_violation, 0.0, rep.max_violation <= 0.0,
                          true});
    }

    json schemes = json::object();
    for (const auto& spec : s.cfg.schemes) {
        const FlowFamily phi = make_scheme(spec, s.field, s.driver);
        const auto study = refinement_study(
            [&](std::span<const double> g) { return almost_flow_defect(phi, g, s.spec, varpi, s.control).value; }, T,
            s.cfg.galaxy_levels);
        double growth = 0.0;
        for (std::size_t k = 1; k < study.values.size(); ++k)
            if (study.values[k - 1] > 0.0) growth = std::max(growth, study.values[k] / study.values[k - 1]);
        const bool stable = study.finite && growth <= 1.1;
        checks.push_back({spec.name() + "_almost_flow_stable", growth, 1.1, stable, true});
        const Partition pi = Partition::dyadic(T, s.cfg.galaxy_levels.back());
        const double M = study.values.empty() ? 0.0 : study.values.back();
        const auto gap = sewing_gap(phi, pi, grid, s.spec, s.cfg.params, s.control, M);
        const auto ul = ul_lipschitz_estimate(phi, pi, s.spec);
        checks.push_back({spec.name() + "_ul_lipschitz", ul.value, 1.0 + s.cfg.params.delta_T(),
                          ul.value <= 1.0 + s.cfg.params.delta_T(), false});
        schemes[spec.name()] = json{{"almost_flow_M", to_json(study)},
                                    {"sewing_gap", to_json(gap.gap)},
                                    {"sewing_bound_shape", std::isfinite(gap.bound_shape) ? json(gap.bound_shape) : json(nullptr)},
                                    {"ul_lipschitz", to_json(ul)}};
    }

    json list = json::array();
    bool ok = true;
    for (const auto& c : checks) {
        list.push_back({{"name", c.name},
                        {"value", std::isfinite(c.value) ? json(c.value) : json("inf")},
                        {"threshold", c.threshold},
                        {"passed", c.passed},
                        {"hard", c.hard}});
        if (c.hard && !c.passed) {
            ok = false;
            err << "violated: " << c.name << " = " << c.value << " (threshold " << c.threshold << ")\n";
        }
        if (!c.hard && !c.passed) err << "warning: " << c.name << " = " << c.value << '\n';
    }
    write_json(fs::path(opt.out_dir) / "verify.json", json{{"checks", list},
                                                            {"schemes", schemes},
                                                            {"jacobian_source", s.field.jacobian_source == DerivativeSource::analytic ? "analytic" : "finite_difference"},
                                                            {"horizon", horizon_json(s.cfg.params)},
                                                            {"passed", ok}});
    if (!opt.quiet) out << "verify: " << (ok ? "all hard invariants hold" : "hard invariant violated") << '\n';
    return ok ? exit_ok : exit_hypothesis;
}

int cmd_compare(const Options& opt, std::ostream& out, std::ostream& err) {
    const Setup s = make_setup(opt);
    if (s.cfg.schemes.size() < 2) throw StructuralError("compare needs at least two schemes");
    warn_horizon(s.cfg.params, err);
    const double T = s.cfg.params.horizon;
    const auto varpi = s.cfg.params.remainder();
    std::vector<FlowFamily> flows;
    for (const auto& spec : s.cfg.schemes) flows.push_back(make_scheme(spec, s.field, s.driver));
    const Partition pi = Partition::dyadic(T, s.cfg.level);
    std::vector<std::vector<Vector>> limits;
    for (const auto& phi : flows) {
        std::vector<Vector> v;
        for (const auto& a : s.probes) v.push_back(iterated_product(phi, pi, 0.0, T, a));
        limits.push_back(std::move(v));
    }
    json pairs = json::array();
    for (std::size_t i = 0; i < flows.size(); ++i)
        for (std::size_t j = i + 1; j < flows.size(); ++j) {
            const auto study = refinement_study(
                [&](std::span<const double> g) { return galaxy_distance(flows[i], flows[j], g, s.spec, varpi, s.control).value; },
                T, s.cfg.galaxy_levels);
            double cross = 0.0;
            for (std::size_t p = 0; p < s.probes.size(); ++p) cross = std::max(cross, (limits[i][p] - limits[j][p]).norm());
            pairs.push_back({{"schemes", {s.cfg.schemes[i].name(), s.cfg.schemes[j].name()}},
                             {"galaxy_distance", to_json(study)},
                             {"limit_distance", cross},
                             {"limit_level", s.cfg.level}});
            if (!opt.quiet)
                out << s.cfg.schemes[i].name() << " vs " << s.cfg.schemes[j].name() << ": galaxy drift " << study.drift
                    << ", limit distance " << cross << '\n';
        }
    write_json(fs::path(opt.out_dir) / "compare.json", json{{"pairs", pairs}, {"horizon", horizon_json(s.cfg.params)}});
    return exit_ok;
}

int cmd_invert(const Options& opt, std::ostream& out, std::ostream& err) {
    const Setup s = make_setup(opt);
    warn_horizon(s.cfg.params, err);
    const double T = s.cfg.params.horizon;
    const SchemeSpec& spec = s.cfg.schemes.front();
    const FlowFamily phi = make_scheme(spec, s.field, s.driver);
    const Partition pi = Partition::dyadic(T, s.cfg.level);
    const FlowFamily zeta = inverse_flow(phi, s.cfg.level);
    const std::vector<std::pair<double, double>> spans{{0.0, T}, {0.0, T / 2}, {T / 2, T}};
    double round_trip = 0.0, two_sided = 0.0;
    json rows = json::array();
    for (const auto& [s0, t0] : spans) {
        double rt = 0.0, ts = 0.0;
        for (const auto& a : s.probes) {
            rt = std::max(rt, (zeta(t0, s0, iterated_product(phi, pi, s0, t0, a)) - a).norm());
            ts = std::max(ts, (iterated_product(phi, pi, s0, t0, zeta(t0, s0, a)) - a).norm());
        }
        rows.push_back({{"s", s0}, {"t", t0}, {"round_trip", rt}, {"two_sided", ts}});
        round_trip = std::max(round_trip, rt);
        two_sided = std::max(two_sided, ts);
    }
    write_json(fs::path(opt.out_dir) / "invert.json", json{{"scheme", spec.name()},
                                                            {"level", s.cfg.level},
                                                            {"spans", rows},
                                                            {"round_trip", round_trip},
                                                            {"two_sided", two_sided}});
    if (!opt.quiet) out << "invert " << spec.name() << ": round trip " << round_trip << ", two-sided " << two_sided << '\n';
    return exit_ok;
}

using Rational = boost::rational<long long>;

// "3", "-1/2" or "0.25" as an exact rational; empty for anything else.
std::optional<Rational> parse_rational(const std::string& text) {
    try {
        const auto slash = text.find('/');
        if (slash != std::string::npos) {
            std::size_t p1 = 0, p2 = 0;
            const auto num = std::stoll(text.substr(0, slash), &p1);
            const auto den = std::stoll(text.substr(slash + 1), &p2);
            if (p1 != slash || p2 != text.size() - slash - 1 || den == 0) return std::nullopt;
            return Rational(num, den);
        }
        const auto dot = text.find('.');
        if (text.find_first_of("eE") != std::string::npos) return std::nullopt;
        if (dot == std::string::npos) {
            std::size_t p = 0;
            const auto v = std::stoll(text, &p);
            if (p != text.size()) return std::nullopt;
            return Rational(v);
        }
        const std::string digits = text.substr(0, dot) + text.substr(dot + 1);
        const std::size_t decimals = text.size() - dot - 1;
        if (decimals > 15) return std::nullopt;
        std::size_t p = 0;
        const auto v = std::stoll(digits, &p);
        if (p != digits.size()) return std::nullopt;
        long long den = 1;
        for (std::size_t k = 0; k < decimals; ++k) den *= 10;
        return Rational(text[0] == '-' && v == 0 ? 0 : v, den);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

double parse_number(const std::string& name, const std::string& text) {
    try {
        std::size_t p = 0;
        const double v = std::stod(text, &p);
        if (p == text.size()) return v;
    } catch (const std::exception&) {
    }
    if (auto r = parse_rational(text)) return boost::rational_cast<double>(*r);
    throw StructuralError("--" + name + ": '" + text + "' is not a number");
}

std::string rational_text(const Rational& r) {
    return r.denominator() == 1 ? std::to_string(r.numerator())
                                : std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

int cmd_constants(const Options& opt, std::ostream& out, std::ostream&) {
    if (opt.B.empty() || opt.alpha.empty() || opt.kappa.empty())
        throw StructuralError("constants needs --B, --alpha and --kappa (and --D for the discrete constant)");
    json result;
    const auto rB = parse_rational(opt.B), ra = parse_rational(opt.alpha), rk = parse_rational(opt.kappa);
    const auto rD = opt.D.empty() ? std::nullopt : parse_rational(opt.D);
    const double B = parse_number("B", opt.B), alpha = parse_number("alpha", opt.alpha),
                 kappa = parse_number("kappa", opt.kappa);
    if (!(B >= 0.0) || !(alpha >= 0.0) || !(kappa > 0.0 && kappa < 1.0))
        throw StructuralError("constants: need B >= 0, alpha >= 0 and kappa in (0, 1)");
    const bool exact = rB && ra && rk && (opt.D.empty() || rD);
    result["inputs"] = {{"D", opt.D}, {"B", opt.B}, {"alpha", opt.alpha}, {"kappa", opt.kappa}};
    result["exact"] = exact;
    result["denominator"] = exact ? json(rational_text(davie_denominator(*ra, *rk))) : json(davie_denominator(alpha, kappa));
    if (!opt.D.empty()) {
        const double D = parse_number("D", opt.D);
        if (exact) {
            const Rational A = davie_constant_discrete(*rD, *rB, *ra, *rk);
            result["discrete"] = {{"exact", rational_text(A)}, {"value", boost::rational_cast<double>(A)}};
        } else {
            result["discrete"] = {{"value", davie_constant_discrete(D, B, alpha, kappa)}};
        }
    }
    if (exact) {
        const Rational A = davie_constant_continuous(*rB, *ra, *rk);
        result["continuous"] = {{"exact", rational_text(A)}, {"value", boost::rational_cast<double>(A)}};
    } else {
        result["continuous"] = {{"value", davie_constant_continuous(B, alpha, kappa)}};
    }
    if (!opt.quiet) out << result.dump(2) << '\n';
    if (!opt.out_dir.empty() && opt.out_dir != "-") write_json(fs::path(opt.out_dir) / "constants.json", result);
    return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Rough differential equations by sewing almost flows", "roughsew"};
    app.require_subcommand(1);
    Options opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "JSON run configuration")->required();
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--seed", opt.seed, "sampling seed (overrides config)");
        sub->add_option("--levels", opt.levels, "finest dyadic level (overrides config)");
        sub->add_flag("--quiet", opt.quiet, "no summary on standard output");
        sub->add_flag("--timing", opt.timing, "record wall-clock runtimes (outputs are then not reproducible)");
    };
    auto* solve = app.add_subcommand("solve", "sew the first scheme from the first probe, write trajectory.csv");
    auto* rate = app.add_subcommand("rate", "convergence study per scheme, write rate_<scheme>.csv and rate.json");
    auto* verify = app.add_subcommand("verify", "hypothesis checks, write verify.json");
    auto* compare = app.add_subcommand("compare", "galaxy and limit distances between schemes, write compare.json");
    auto* invert = app.add_subcommand("invert", "inverse flow round trip, write invert.json");
    for (auto* sub : {solve, rate, verify, compare, invert}) add_common(sub);
    auto* constants = app.add_subcommand("constants", "Davie lemma constants");
    constants->add_option("--D", opt.D, "successive-point bound D");
    constants->add_option("--B", opt.B, "recursion constant B");
    constants->add_option("--alpha", opt.alpha, "alpha_T");
    constants->add_option("--kappa", opt.kappa, "remainder contraction kappa");
    constants->add_option("--out", opt.out_dir, "output directory");
    constants->add_flag("--quiet", opt.quiet, "no output on standard output");
    opt.out_dir.clear();

    std::vector<const char*> argv{"roughsew"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return exit_config;
    }
    if (opt.out_dir.empty() && !constants->parsed()) opt.out_dir = "roughsew_out";

    try {
        if (solve->parsed()) return cmd_solve(opt, out, err);
        if (rate->parsed()) return cmd_rate(opt, out, err);
        if (verify->parsed()) return cmd_verify(opt, out, err);
        if (compare->parsed()) return cmd_compare(opt, out, err);
        if (invert->parsed()) return cmd_invert(opt, out, err);
        if (constants->parsed()) return cmd_constants(opt, out, err);
    } catch (const StructuralError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const CapabilityError& e) {
        err << "capability error: " << e.what() << '\n';
        return exit_capability;
    } catch (const HypothesisError& e) {
        err << "hypothesis violated: " << e.what() << '\n';
        return exit_hypothesis;
    } catch (const ConvergenceError& e) {
        err << "no convergence: " << e.what() << '\n';
        return exit_convergence;
    } catch (const IntegratorError& e) {
        err << "no convergence: " << e.what() << '\n';
        return exit_convergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_config;
}

}  // namespace roughsew::cli
