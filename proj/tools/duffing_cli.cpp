// Command-line laboratory driver.
//
//   duffing_cli run <config.json>     execute one experiment, write CSV + manifest
//   duffing_cli verify [--quick]      run the built-in verification suite
//   duffing_cli emit-plots <manifest> derive plot-ready point clouds from a run
//
// Exit codes: 0 success, 1 verification failure, 2 config error,
// 3 hypothesis rejection, 4 runtime failure. Column layouts and the config
// schema are documented in docs/SCHEMA.md. Outputs are deterministic for a
// given config: fixed seeds, fixed grids, %.12g formatting.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "duffinglab/acceptance.hpp"
#include "duffinglab/corpus.hpp"
#include "duffinglab/dynamics.hpp"
#include "duffinglab/experiments.hpp"
#include "duffinglab/smoothing.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace duffing;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct HypothesisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

const json& field(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) throw ConfigError("missing field: " + path + "." + key);
    return j.at(key);
}

double get_num(const json& j, const char* key, const std::string& path) {
    const auto& v = field(j, key, path);
    if (!v.is_number()) throw ConfigError("field " + path + "." + key + " must be a number");
    return v.get<double>();
}

double get_num_or(const json& j, const char* key, double dflt) {
    if (!j.contains(key)) return dflt;
    if (!j.at(key).is_number()) throw ConfigError(std::string("field ") + key + " must be a number");
    return j.at(key).get<double>();
}

PeriodicCoefficient parse_coefficient(const json& j, const std::string& path) {
    const std::string type = field(j, "type", path).get<std::string>();
    if (type == "zero") return make_zero();
    if (type == "step") {
        std::vector<double> breaks = field(j, "breaks", path).get<std::vector<double>>();
        std::vector<double> values = field(j, "values", path).get<std::vector<double>>();
        return make_step(std::move(breaks), std::move(values));
    }
    if (type == "trig") {
        std::vector<TrigTerms::Term> terms;
        for (const auto& t : field(j, "terms", path)) {
            if (!t.is_array() || t.size() != 3)
                throw ConfigError("trig term must be [k, amplitude, phase] at " + path);
            terms.push_back({t[0].get<int>(), t[1].get<double>(), t[2].get<double>()});
        }
        return make_trig(get_num_or(j, "mean", 0.0), std::move(terms));
    }
    if (type == "weierstrass") {
        std::vector<double> phases;
        if (j.contains("phases")) phases = j.at("phases").get<std::vector<double>>();
        return make_weierstrass(get_num(j, "gamma", path), int(get_num_or(j, "base", 2)),
                                int(get_num(j, "terms", path)), std::move(phases),
                                get_num_or(j, "amplitude", 1.0));
    }
    throw ConfigError("unknown coefficient type '" + type + "' at " + path);
}

EquationSpec parse_equation(const json& j) {
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        if (name == "corpus-n1") return corpus::n1();
        if (name == "corpus-n1-integrable") return corpus::n1_integrable();
        if (name == "corpus-n2") return corpus::n2();
        throw ConfigError("unknown named equation '" + name + "'");
    }
    const int n = int(get_num(j, "n", "equation"));
    const double gamma = get_num(j, "gamma", "equation");
    // hypothesis gate: the averaging theory needs gamma > 1 - 1/n
    if (!(n >= 1)) throw HypothesisError("rejected: n must be a positive integer");
    if (!(gamma > 1.0 - 1.0 / n && gamma <= 1.0))
        throw HypothesisError("rejected: hypothesis gamma > 1 - 1/n fails (gamma = " +
                              num(gamma) + ", 1 - 1/n = " + num(1.0 - 1.0 / n) + ")");
    std::vector<PeriodicCoefficient> cs;
    const auto& arr = field(j, "coefficients", "equation");
    for (size_t i = 0; i < arr.size(); ++i)
        cs.push_back(parse_coefficient(arr[i], "equation.coefficients[" + std::to_string(i) + "]"));
    try {
        return EquationSpec(n, gamma, std::move(cs));
    } catch (const std::invalid_argument& e) {
        throw HypothesisError(std::string("rejected: ") + e.what());
    }
}

void write_csv(const fs::path& file, const std::string& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file " + file.string());
    os << header << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << "\n";
    }
}

struct RunArtifacts {
    json metrics = json::object();
    json assertions = json::array();
    std::vector<std::string> outputs;
    bool ok() const {
        for (const auto& a : assertions)
            if (!a.at("pass").get<bool>()) return false;
        return true;
    }
    void assert_le(const std::string& name, double value, double bound) {
        assertions.push_back({{"name", name}, {"pass", value <= bound}, {"value", value},
                              {"bound", bound}});
    }
    void assert_true(const std::string& name, bool pass, double value, double bound) {
        assertions.push_back({{"name", name}, {"pass", pass}, {"value", value}, {"bound", bound}});
    }
};

// ---- experiments ----------------------------------------------------------

RunArtifacts run_period(const json& params, const fs::path& out) {
    const int n = int(get_num(params, "n", "params"));
    const double T0 = min_period(n);
    write_csv(out / "period.csv", "n,T0", {{std::to_string(n), num(T0)}});
    RunArtifacts a;
    a.outputs.push_back("period.csv");
    a.metrics["T0"] = T0;
    a.assert_true("period_positive", T0 > 0.0, T0, 0.0);
    return a;
}

RunArtifacts run_smooth_check(const json& cfg, const json& params, const fs::path& out) {
    const auto f = parse_coefficient(field(cfg, "function", "config"), "function");
    const double gamma = f.declared_class().is_holder() ? f.declared_class().exponent
                                                        : get_num(params, "gamma", "params");
    std::vector<double> sigmas;
    for (int e = 4; e <= 10; ++e) sigmas.push_back(std::pow(2.0, -e));
    std::vector<std::vector<std::string>> rows;
    for (double s : sigmas) rows.push_back({num(s), num(approximation_error(f, s))});
    write_csv(out / "smooth_check.csv", "sigma,approximation_error", rows);
    const double slope = fitted_error_slope(f, sigmas);
    RunArtifacts a;
    a.outputs.push_back("smooth_check.csv");
    a.metrics["fitted_slope"] = slope;
    a.metrics["gamma"] = gamma;
    a.assert_true("slope_matches_regularity", std::fabs(slope - gamma) <= 0.15,
                  slope, 0.15);
    return a;
}

RunArtifacts run_normal_form(const EquationSpec& spec, const json& params, const fs::path& out,
                             const ActionAngleChart& chart, NormalFormState* keep = nullptr) {
    const double A = get_num(params, "A", "params");
    const double eps0 = get_num_or(params, "eps0", 0.1);
    Parameters p;
    try {
        p = choose_parameters(spec.n, spec.gamma, eps0, A);
    } catch (const std::invalid_argument& e) {
        throw HypothesisError(std::string("rejected: ") + e.what());
    }
    ScaledSystem sys(spec, A);
    auto st = iterate_normal_form(sys, chart, p);
    std::vector<std::vector<std::string>> rows;
    for (const auto& rec : st.log)
        rows.push_back({std::to_string(rec.step), num(rec.sup_S), num(rec.sup_dtS),
                        num(rec.sup_residual), num(rec.window_lo), num(rec.window_hi)});
    write_csv(out / "transform_log.csv", "step,sup_S,sup_dtS,sup_residual,window_lo,window_hi",
              rows);
    RunArtifacts a;
    a.outputs.push_back("transform_log.csv");
    const auto [lo, hi] = twist_bounds(st);
    a.metrics["steps"] = p.N;
    a.metrics["eps"] = p.eps;
    a.metrics["final_residual"] = st.log.back().sup_residual;
    a.metrics["twist_lower"] = lo;
    a.metrics["twist_upper"] = hi;
    a.assert_le("final_residual_le_eps0", st.log.back().sup_residual,
                calibration::final_residual * eps0);
    a.assert_true("twist_comparable_to_A^n", lo >= std::pow(A, spec.n) /
                  calibration::twist_lower_divisor, lo,
                  std::pow(A, spec.n) / calibration::twist_lower_divisor);
    if (keep) *keep = std::move(st);
    return a;
}

RunArtifacts run_twist(const EquationSpec& spec, const json& params, const fs::path& out,
                       const ActionAngleChart& chart) {
    NormalFormState st;
    RunArtifacts a = run_normal_form(spec, params, out, chart, &st);
    const double A = get_num(params, "A", "params");
    const double eps0 = get_num_or(params, "eps0", 0.1);
    const Window ann{get_num_or(params, "annulus_lo", 2.0), get_num_or(params, "annulus_hi", 3.0)};
    ScaledSystem sys(spec, A);
    const auto fit = fit_twist_form(scaled_flow(sys, get_num_or(params, "tolerance", 1e-12)),
                                    chart, st, ann, int(get_num_or(params, "nrho", 12)),
                                    int(get_num_or(params, "nxi", 16)));
    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < fit.rho_grid.size(); ++i)
        rows.push_back({num(fit.rho_grid[i]), num(fit.alpha_samples[i]),
                        num(fit.alpha_predicted[i]), num(fit.F_sup_by_rho[i]),
                        num(fit.G_sup_by_rho[i])});
    write_csv(out / "twist.csv", "rho,alpha_measured,alpha_predicted,F_sup,G_sup", rows);
    a.outputs.push_back("twist.csv");
    a.metrics["F_sup"] = fit.F_sup;
    a.metrics["G_sup"] = fit.G_sup;
    a.metrics["twist_min"] = fit.twist_min;
    a.assert_le("F_sup_le_C_eps0", fit.F_sup, calibration::fluctuation * eps0);
    a.assert_le("G_sup_le_C_eps0", fit.G_sup, calibration::fluctuation * eps0);
    return a;
}

RunArtifacts run_boundedness(const EquationSpec& spec, const json& params, const fs::path& out) {
    const double extent = get_num_or(params, "grid_extent", 10.0);
    const int npts = int(get_num_or(params, "grid_points", 5));
    if (npts < 1) throw ConfigError("params.grid_points must be >= 1");
    const double horizon = get_num_or(params, "horizon", 10000.0);
    std::vector<State2> grid;
    for (int i = 0; i < npts; ++i)
        for (int k = 0; k < npts; ++k) {
            const double x = npts == 1 ? 0.0 : -extent + 2.0 * extent * i / (npts - 1);
            const double v = npts == 1 ? 0.0 : -extent + 2.0 * extent * k / (npts - 1);
            grid.push_back({x, v});
        }
    const auto rows = boundedness_survey(spec, grid, horizon, get_num_or(params, "tolerance", 1e-10));
    std::vector<std::vector<std::string>> csv;
    int escapes = 0;
    double supmax = 0.0;
    for (const auto& w : rows) {
        csv.push_back({num(w.x0), num(w.xdot0), num(w.energy), num(w.sup_norm),
                       std::to_string(int(w.escaped)), num(w.escape_time)});
        escapes += int(w.escaped);
        supmax = std::max(supmax, w.sup_norm);
    }
    write_csv(out / "survey.csv", "x0,xdot0,energy,sup_norm,escaped,escape_time", csv);
    RunArtifacts a;
    a.outputs.push_back("survey.csv");
    a.metrics["escapes"] = escapes;
    a.metrics["max_sup_norm"] = supmax;
    a.assert_true("zero_escapes", escapes == 0, double(escapes), 0.0);
    return a;
}

RunArtifacts run_level_scan(const EquationSpec& spec, const json& params, const fs::path& out,
                            const ActionAngleChart& chart) {
    std::vector<double> As = field(params, "A_values", "params").get<std::vector<double>>();
    const long horizon = long(get_num_or(params, "horizon", 100000.0));
    const auto rep = level_scan(spec, chart, As, horizon, get_num_or(params, "collar", 5.0),
                                long(get_num_or(params, "rotation_iterates", 4000)));
    std::vector<std::vector<std::string>> csv;
    bool confined = true;
    for (const auto& lv : rep.levels) {
        csv.push_back({num(lv.A), num(lv.annulus.lo), num(lv.annulus.hi),
                       lv.verdict == Confinement::confined ? "confined" : "violated",
                       std::to_string(lv.first_violation), num(lv.rotation),
                       num(lv.rotation_error)});
        if (lv.verdict != Confinement::confined) confined = false;
    }
    write_csv(out / "levels.csv",
              "A,annulus_lo,annulus_hi,verdict,first_violation,rotation,rotation_error", csv);
    RunArtifacts a;
    a.outputs.push_back("levels.csv");
    a.metrics["levels"] = As.size();
    a.assert_true("all_levels_confined", confined, confined ? 1.0 : 0.0, 1.0);
    for (size_t i = 0; i + 1 < rep.levels.size(); ++i)
        a.assert_true("rotation_increases_" + std::to_string(i),
                      rep.levels[i].rotation < rep.levels[i + 1].rotation,
                      rep.levels[i + 1].rotation, rep.levels[i].rotation);
    return a;
}

// ---- subcommand drivers ---------------------------------------------------

int cmd_run(const std::string& config_path) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::fprintf(stderr, "config error: cannot read %s\n", config_path.c_str());
        return 2;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string raw = ss.str();
    json cfg;
    try {
        cfg = json::parse(raw);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    try {
        const std::string experiment = field(cfg, "experiment", "config").get<std::string>();
        const json params = cfg.contains("params") ? cfg.at("params") : json::object();

        fs::path root = "runs";
        if (const char* env = std::getenv("DUFFINGLAB_OUTPUT_ROOT")) root = env;
        const fs::path out =
            root / (cfg.contains("output") ? cfg.at("output").get<std::string>() : experiment);
        fs::create_directories(out);

        RunArtifacts a;
        const auto chart_for = [](int n) { return ActionAngleChart::build(n); };
        if (experiment == "period") {
            a = run_period(params, out);
        } else if (experiment == "smooth-check") {
            a = run_smooth_check(cfg, params, out);
        } else {
            const auto spec = parse_equation(field(cfg, "equation", "config"));
            if (experiment == "normal-form")
                a = run_normal_form(spec, params, out, chart_for(spec.n));
            else if (experiment == "twist")
                a = run_twist(spec, params, out, chart_for(spec.n));
            else if (experiment == "boundedness")
                a = run_boundedness(spec, params, out);
            else if (experiment == "level-scan")
                a = run_level_scan(spec, params, out, chart_for(spec.n));
            else
                throw ConfigError("unknown experiment '" + experiment + "'");
        }

        json manifest;
        manifest["experiment"] = experiment;
        manifest["params"] = params;
        manifest["config_hash"] = fnv1a(raw);
        manifest["metrics"] = a.metrics;
        manifest["assertions"] = a.assertions;
        manifest["outputs"] = a.outputs;
        std::ofstream mo(out / "manifest.json", std::ios::binary);
        mo << manifest.dump(2) << "\n";
        std::printf("%s: wrote %s\n", experiment.c_str(), (out / "manifest.json").string().c_str());
        for (const auto& as : a.assertions)
            std::printf("  [%s] %s (value %.6g, bound %.6g)\n",
                        as.at("pass").get<bool>() ? "ok" : "FAIL",
                        as.at("name").get<std::string>().c_str(), as.at("value").get<double>(),
                        as.at("bound").get<double>());
        return a.ok() ? 0 : 4;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const HypothesisError& e) {
        std::fprintf(stderr, "hypothesis error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 4;
    }
}

int cmd_verify(bool quick) {
    const int failures =
        acceptance::run_all(quick, [](const acceptance::CriterionResult& r) {
            std::printf("[%s] %2d %-38s %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                        r.detail.c_str());
            std::fflush(stdout);
        });
    std::printf("%d of 12 criteria failed%s\n", failures, quick ? " (quick mode)" : "");
    return failures == 0 ? 0 : 1;
}

int cmd_emit_plots(const std::string& manifest_path) {
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) {
        std::fprintf(stderr, "config error: cannot read %s\n", manifest_path.c_str());
        return 2;
    }
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
    try {
        const fs::path dir = fs::path(manifest_path).parent_path();
        const fs::path plots = dir / "plots";
        const std::string experiment = field(manifest, "experiment", "manifest").get<std::string>();

        // reduce a run CSV to selected columns
        const auto project = [&](const std::string& src, const std::string& dst,
                                 const std::string& header, std::vector<int> cols) {
            std::ifstream is(dir / src);
            if (!is) throw std::runtime_error("missing run output " + src);
            fs::create_directories(plots);
            std::ofstream os(plots / dst, std::ios::binary);
            os << header << "\n";
            std::string line;
            std::getline(is, line); // drop source header
            while (std::getline(is, line)) {
                std::vector<std::string> cells;
                std::stringstream ls(line);
                std::string cell;
                while (std::getline(ls, cell, ',')) cells.push_back(cell);
                for (size_t i = 0; i < cols.size(); ++i)
                    os << (i ? "," : "") << cells.at(size_t(cols[i]));
                os << "\n";
            }
            std::printf("wrote %s\n", (plots / dst).string().c_str());
        };

        if (experiment == "normal-form" || experiment == "twist")
            project("transform_log.csv", "residual_decay.csv", "step,sup_residual", {0, 3});
        if (experiment == "twist")
            project("twist.csv", "twist_curve.csv", "rho,alpha_measured", {0, 1});
        if (experiment == "smooth-check")
            project("smooth_check.csv", "sigma_error.csv", "sigma,approximation_error", {0, 1});
        if (experiment == "boundedness")
            project("survey.csv", "sup_norms.csv", "energy,sup_norm", {2, 3});
        if (experiment == "level-scan")
            project("levels.csv", "frequency_vs_A.csv", "A,rotation", {0, 5});
        if (experiment == "period")
            project("period.csv", "period.csv", "n,T0", {0, 1});
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 4;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for a quasi-periodically forced oscillator"};
    app.require_subcommand(1);

    std::string config_path, manifest_path;
    bool quick = false;
    auto* run = app.add_subcommand("run", "execute one experiment from a JSON config");
    run->add_option("config", config_path, "config file")->required();
    auto* verify = app.add_subcommand("verify", "run the built-in verification suite");
    verify->add_flag("--quick", quick, "shrink horizons for a smoke test");
    auto* plots = app.add_subcommand("emit-plots", "derive plot CSVs from a run manifest");
    plots->add_option("manifest", manifest_path, "manifest.json of a completed run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (run->parsed()) return cmd_run(config_path);
    if (verify->parsed()) return cmd_verify(quick);
    return cmd_emit_plots(manifest_path);
}
