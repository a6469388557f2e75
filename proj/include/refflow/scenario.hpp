#pragma once

// Declarative scenario runner: parse a JSON config into a validated Scenario
// and execute it, writing deterministic artifacts and mapping failures to
// stable exit codes.

#include <filesystem>
#include <iostream>
#include <set>
#include <string>

#include <json.hpp>

#include "refflow/charts.hpp"
#include "refflow/error.hpp"
#include "refflow/fields.hpp"
#include "refflow/flow.hpp"
#include "refflow/io.hpp"
#include "refflow/laws.hpp"
#include "refflow/refgrad.hpp"

namespace refflow {

struct Scenario {
    std::string command;  // flow | refgrad | verify | grid-residual | bch
    std::string verify_law;  // lemma1 | lemma2 | lemma3 | eulerian
    std::string chart = "cartesian";
    std::string metric = "euclidean";
    std::string connection = "zero";  // zero | levi-civita
    std::string field_name = "constant";
    nlohmann::json field_params = nlohmann::json::object();

    Vec4 p{};
    double lambda = 1.0;
    double lambda1 = 0.0, lambda2 = 0.0;
    double s_total = 0.0;
    bool arclength = false;
    double h = 1e-4;          // finite-difference shift
    int series_order = 12;
    std::string method = "variational";
    std::string pair = "rotation";  // lemma1 chart pairing
    double angle = 0.4;             // lemma1 rotation pairing angle
    GridSpec grid;
    Mat4 X, Y;
    int degree = 5;
    double tolerance = 0.0;  // 0 => per-law default
    IntegratorConfig integrator;
    std::string output;  // base name; defaults per command
};

namespace scenario_detail {

using nlohmann::json;

inline double num(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) raise(ErrorKind::ValidationError, "'" + key + "' must be a number");
    const double v = j[key].get<double>();
    if (!std::isfinite(v)) raise(ErrorKind::ValidationError, "'" + key + "' must be finite");
    return v;
}

inline Vec4 vec4(const json& j, const std::string& key, const Vec4& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_array() || j[key].size() != 4)
        raise(ErrorKind::ValidationError, "'" + key + "' must be an array of 4 numbers");
    Vec4 v;
    for (size_t i = 0; i < 4; ++i) v[i] = j[key][i].get<double>();
    if (!all_finite(v)) raise(ErrorKind::ValidationError, "'" + key + "' must be finite");
    return v;
}

inline Mat4 mat4(const json& j, const std::string& key) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 16)
        raise(ErrorKind::ValidationError, "'" + key + "' must be an array of 16 numbers (row-major)");
    Mat4 m;
    for (size_t i = 0; i < 16; ++i) m.a[i] = j[key][i].get<double>();
    if (!all_finite(m)) raise(ErrorKind::ValidationError, "'" + key + "' must be finite");
    return m;
}

inline std::array<double, 3> vec3(const json& j, const std::string& key,
                                  const std::array<double, 3>& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_array() || j[key].size() != 3)
        raise(ErrorKind::ValidationError, "'" + key + "' must be an array of 3 numbers");
    std::array<double, 3> v{};
    for (size_t i = 0; i < 3; ++i) v[i] = j[key][i].get<double>();
    return v;
}

inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            raise(ErrorKind::ValidationError, "unknown key '" + it.key() + "' in " + where);
}

}  // namespace scenario_detail

inline MetricSpec make_builtin_metric(const std::string& name) {
    if (name == "euclidean") return metric_euclidean();
    if (name == "minkowski") return metric_minkowski();
    if (name == "polar") return metric_polar();
    if (name == "spherical") return metric_spherical();
    raise(ErrorKind::ValidationError, "unknown metric '" + name + "'");
}

inline GeneratingField make_builtin_field(const std::string& name, const nlohmann::json& params,
                                          const std::string& chart) {
    using scenario_detail::mat4;
    using scenario_detail::num;
    using scenario_detail::vec3;
    using scenario_detail::vec4;
    GeneratingField f;
    if (name == "constant")
        f = field_constant(vec4(params, "c", Vec4{0, 1, 0, 0}), chart);
    else if (name == "linear")
        f = field_linear(mat4(params, "A"), chart);
    else if (name == "rotation")
        f = field_rotation();
    else if (name == "shear")
        f = field_shear(num(params, "k", 1.0), num(params, "q", 0.3));
    else if (name == "polar-radial")
        f = field_polar_radial();
    else if (name == "scaled-rotation")
        f = field_scaled_rotation();
    else if (name == "scaled-axial")
        f = field_scaled_axial();
    else if (name == "quadratic")
        f = field_quadratic();
    else if (name == "four-velocity")
        f = builtin_four_velocity(vec3(params, "v", {0, 0, 0}), num(params, "c", 1.0));
    else if (name == "four-magnetic")
        f = builtin_four_magnetic(vec3(params, "E", {0, 0, 0}), vec3(params, "B", {0, 0, 1}),
                                  vec3(params, "v", {0, 0, 0}), num(params, "c", 1.0));
    else
        raise(ErrorKind::ValidationError, "unknown field builtin '" + name + "'");
    f.chart = chart;
    return f;
}

inline Scenario parse_scenario(const std::string& text) {
    using nlohmann::json;
    using namespace scenario_detail;

    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        raise(ErrorKind::ParseError, e.what());
    }
    if (!j.is_object()) raise(ErrorKind::ParseError, "scenario document must be a JSON object");

    check_keys(j,
               {"command", "verify", "chart", "metric", "connection", "field", "p", "lambda",
                "lambda1", "lambda2", "s_total", "arclength", "h", "series_order", "method",
                "pair", "angle", "grid", "X", "Y", "degree", "tolerance", "integrator", "output"},
               "scenario");

    Scenario s;
    if (!j.contains("command") || !j["command"].is_string())
        raise(ErrorKind::ValidationError, "scenario requires a string 'command'");
    s.command = j["command"].get<std::string>();
    const std::set<std::string> commands{"flow", "refgrad", "verify", "grid-residual", "bch"};
    if (!commands.count(s.command))
        raise(ErrorKind::ValidationError, "unknown command '" + s.command + "'");

    if (j.contains("chart")) s.chart = j["chart"].get<std::string>();
    if (j.contains("metric")) s.metric = j["metric"].get<std::string>();
    make_builtin_metric(s.metric);  // existence check
    if (j.contains("connection")) {
        s.connection = j["connection"].get<std::string>();
        if (s.connection != "zero" && s.connection != "levi-civita")
            raise(ErrorKind::ValidationError, "unknown connection '" + s.connection + "'");
    }

    if (j.contains("field")) {
        const json& fj = j["field"];
        if (!fj.is_object() || !fj.contains("builtin"))
            raise(ErrorKind::ValidationError, "'field' must be an object with a 'builtin' key");
        s.field_name = fj["builtin"].get<std::string>();
        s.field_params = fj;
        s.field_params.erase("builtin");
        make_builtin_field(s.field_name, s.field_params, s.chart);  // existence + param check
    }

    s.p = vec4(j, "p", s.p);
    s.lambda = num(j, "lambda", s.lambda);
    s.lambda1 = num(j, "lambda1", s.lambda1);
    s.lambda2 = num(j, "lambda2", s.lambda2);
    s.s_total = num(j, "s_total", s.s_total);
    if (j.contains("arclength")) s.arclength = j["arclength"].get<bool>();
    s.h = num(j, "h", s.h);
    s.series_order = static_cast<int>(num(j, "series_order", s.series_order));
    if (j.contains("method")) {
        s.method = j["method"].get<std::string>();
        const std::set<std::string> methods{"variational", "series", "finite-difference"};
        if (!methods.count(s.method))
            raise(ErrorKind::ValidationError, "unknown refgrad method '" + s.method + "'");
    }
    if (j.contains("pair")) s.pair = j["pair"].get<std::string>();
    s.angle = num(j, "angle", s.angle);
    s.degree = static_cast<int>(num(j, "degree", s.degree));
    s.tolerance = num(j, "tolerance", s.tolerance);
    if (j.contains("output")) s.output = j["output"].get<std::string>();

    if (s.command == "verify") {
        if (!j.contains("verify") || !j["verify"].is_string())
            raise(ErrorKind::ValidationError, "'verify' command requires a 'verify' law name");
        s.verify_law = j["verify"].get<std::string>();
        const std::set<std::string> laws{"lemma1", "lemma2", "lemma3", "eulerian"};
        if (!laws.count(s.verify_law))
            raise(ErrorKind::ValidationError, "unknown law '" + s.verify_law + "'");
    }

    if (j.contains("grid")) {
        const json& gj = j["grid"];
        check_keys(gj, {"lo", "hi", "count"}, "grid");
        s.grid.lo = vec4(gj, "lo", s.grid.lo);
        s.grid.hi = vec4(gj, "hi", s.grid.hi);
        if (gj.contains("count")) {
            if (!gj["count"].is_array() || gj["count"].size() != 4)
                raise(ErrorKind::ValidationError, "'count' must be an array of 4 integers");
            for (size_t i = 0; i < 4; ++i) s.grid.count[i] = gj["count"][i].get<int>();
        }
        s.grid.validate();
    }

    if (s.command == "bch") {
        s.X = mat4(j, "X");
        s.Y = mat4(j, "Y");
    }

    if (j.contains("integrator")) {
        const json& ij = j["integrator"];
        check_keys(ij, {"method", "step_size", "rel_tol", "abs_tol", "max_steps"}, "integrator");
        if (ij.contains("method")) {
            const std::string m = ij["method"].get<std::string>();
            if (m == "rk4")
                s.integrator.method = IntegratorMethod::RK4;
            else if (m == "rk45")
                s.integrator.method = IntegratorMethod::RK45;
            else
                raise(ErrorKind::ValidationError, "unknown integrator method '" + m + "'");
        }
        s.integrator.step_size = num(ij, "step_size", s.integrator.step_size);
        if (ij.contains("step_size") && !(s.integrator.step_size > 0.0))
            raise(ErrorKind::ValidationError, "step_size must be positive");
        s.integrator.rel_tol = num(ij, "rel_tol", s.integrator.rel_tol);
        s.integrator.abs_tol = num(ij, "abs_tol", s.integrator.abs_tol);
        s.integrator.max_steps = static_cast<long>(num(ij, "max_steps", static_cast<double>(s.integrator.max_steps)));
        s.integrator.validate();
    }

    return s;
}

namespace scenario_detail {

struct Setup {
    MetricSpec metric;
    ConnectionCoeffs conn;
    GeneratingField field;
};

inline Setup build(const Scenario& s) {
    Setup out{make_builtin_metric(s.metric), ConnectionCoeffs::zero(),
              make_builtin_field(s.field_name, s.field_params, s.chart)};
    if (s.connection == "levi-civita") out.conn = ConnectionCoeffs::levi_civita(out.metric);
    return out;
}

inline ResidualReport run_lemma1(const Scenario& s) {
    const IntegratorConfig& cfg = s.integrator;
    const double tol = s.tolerance > 0 ? s.tolerance : 1e-5;
    if (s.pair == "rotation") {
        // Planar rotation field seen from a rigidly rotated Cartesian chart;
        // its component form is invariant under in-plane rotations.
        GeneratingField f_J = field_rotation();
        GeneratingField f_I = field_rotation();
        f_I.chart = "cartesian-rotated";
        const ChartTransform t = transform_rotation_xy(s.angle);
        return check_covariance(f_I, ConnectionCoeffs::zero(), f_J, ConnectionCoeffs::zero(), t,
                                Coordinates(s.p, "cartesian"), s.lambda, cfg, tol);
    }
    if (s.pair == "polar-radial") {
        // Unit radial field: Cartesian components (0, x/rho, y/rho, 0) vs the
        // constant r-direction field on the polar chart.
        GeneratingField f_J = field_polar_radial();
        GeneratingField f_I = field_constant({0, 1, 0, 0}, "polar");
        const ChartTransform t = transform_cartesian_to_polar();
        return check_covariance(f_I, ConnectionCoeffs::levi_civita(metric_polar()), f_J,
                                ConnectionCoeffs::zero(), t, Coordinates(s.p, "cartesian"),
                                s.lambda, cfg, tol);
    }
    if (s.pair == "rotation-polar") {
        // Planar rotation field vs the constant theta-direction field on the
        // polar chart; the wide branch-cut margin makes overlap exits visible.
        GeneratingField f_J = field_rotation();
        GeneratingField f_I = field_constant({0, 0, 1, 0}, "polar");
        const ChartTransform t = transform_cartesian_to_polar(1e-6, 0.1);
        return check_covariance(f_I, ConnectionCoeffs::levi_civita(metric_polar()), f_J,
                                ConnectionCoeffs::zero(), t, Coordinates(s.p, "cartesian"),
                                s.lambda, cfg, tol);
    }
    raise(ErrorKind::ValidationError, "unknown lemma1 pair '" + s.pair + "'");
}

}  // namespace scenario_detail

inline int exit_code_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::ParseError:
        case ErrorKind::ValidationError:
        case ErrorKind::DomainError:
        case ErrorKind::DegreeOutOfRange:
        case ErrorKind::NonFiniteInput:
        case ErrorKind::OutsideOverlap:
        case ErrorKind::SuperluminalVelocity:
        case ErrorKind::StepTooSmall:
            return 2;
        default:
            return 3;
    }
}

/// Execute a validated scenario; returns the process exit code (0 pass,
/// 1 law-check failure). Artifacts land under out_dir.
inline int run_scenario(const Scenario& s, const std::string& out_dir = ".") {
    namespace fs = std::filesystem;
    using scenario_detail::Setup;
    const Setup setup = scenario_detail::build(s);
    const IntegratorConfig& cfg = s.integrator;
    auto out_path = [&](const std::string& fallback) {
        return fs::path(out_dir) / (s.output.empty() ? fallback : s.output);
    };

    if (s.command == "flow") {
        FlowSolution sol;
        if (s.arclength)
            sol = reparametrize_arclength(setup.field, setup.metric, Coordinates(s.p, s.chart),
                                          s.s_total != 0.0 ? s.s_total : s.lambda, cfg);
        else
            sol = integrate_flow(setup.field, Coordinates(s.p, s.chart), s.lambda, cfg);
        atomic_write_file(out_path("flow.csv"), flow_to_csv(sol));
        return 0;
    }

    if (s.command == "refgrad") {
        RefGradient g;
        const Coordinates p(s.p, s.chart);
        if (s.method == "variational")
            g = refgrad_variational(setup.field, setup.conn, p, s.lambda, cfg);
        else if (s.method == "series") {
            const FlowSolution sol = integrate_flow(setup.field, p, s.lambda, cfg);
            SeriesTruncation trunc;
            trunc.order = s.series_order;
            g = refgrad_series(setup.field, setup.conn, sol, trunc);
        } else
            g = refgrad_finite_difference(setup.field, p, s.lambda, s.h, cfg);
        atomic_write_file(out_path("refgrad.json"), refgrad_to_record(g));
        return 0;
    }

    if (s.command == "bch") {
        const Mat4 Z = bch_combine(s.X, s.Y, s.degree);
        std::string rec = "{\"degree\": " + std::to_string(s.degree) + ", \"Z\": [";
        for (int i = 0; i < 16; ++i) {
            if (i) rec += ", ";
            rec += format_double(Z.a[static_cast<size_t>(i)]);
        }
        rec += "]}\n";
        atomic_write_file(out_path("bch.json"), rec);
        return 0;
    }

    // verify / grid-residual
    ResidualReport report;
    const std::string law = s.command == "grid-residual" ? "eulerian" : s.verify_law;
    const double tol = s.tolerance;
    if (law == "lemma1") {
        report = scenario_detail::run_lemma1(s);
    } else if (law == "lemma2") {
        report = check_group_property(setup.field, setup.conn, Coordinates(s.p, s.chart),
                                      s.lambda1, s.lambda2, cfg, tol > 0 ? tol : 1e-7);
    } else if (law == "lemma3") {
        report = check_representation_relation(setup.field, setup.metric, setup.conn,
                                               Coordinates(s.p, s.chart), s.lambda,
                                               s.s_total != 0.0 ? s.s_total : s.lambda, cfg,
                                               tol > 0 ? tol : 1e-5);
    } else if (law == "eulerian") {
        report = eulerian_residual(setup.field, setup.conn, s.grid, s.lambda, cfg,
                                   tol > 0 ? tol : 1e-4, s.chart);
    } else {
        raise(ErrorKind::ValidationError, "verify command requires a law name");
    }

    std::cout << report_summary_line(report);
    atomic_write_file(out_path("report.json"), report_to_record(report));
    return report.pass ? 0 : 1;
}

/// Wrapper used by the CLI: catches domain errors, emits one machine-parsable
/// diagnostic line on stderr, and maps the error kind to an exit code.
inline int run_scenario_guarded(const Scenario& s, const std::string& out_dir = ".") {
    try {
        return run_scenario(s, out_dir);
    } catch (const Error& e) {
        std::cerr << "ERROR kind=" << to_string(e.kind()) << " message=\"" << e.what() << "\"\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "ERROR kind=Internal message=\"" << e.what() << "\"\n";
        return 3;
    }
}

}  // namespace refflow
