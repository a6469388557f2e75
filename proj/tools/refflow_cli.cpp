// Command-line front end: runs declarative JSON scenarios or direct
// flag-form subcommands for flow integration, gradient computation, law
// verification, and exponent combination.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "refflow/refflow.hpp"

namespace {

refflow::Vec4 parse_vec4(const std::vector<double>& v, const char* flag) {
    if (v.size() != 4)
        refflow::raise(refflow::ErrorKind::ValidationError,
                       std::string(flag) + " requires exactly 4 numbers");
    return {v[0], v[1], v[2], v[3]};
}

refflow::Mat4 parse_mat4(const std::vector<double>& v, const char* flag) {
    if (v.size() != 16)
        refflow::raise(refflow::ErrorKind::ValidationError,
                       std::string(flag) + " requires exactly 16 numbers (row-major)");
    refflow::Mat4 m;
    for (size_t i = 0; i < 16; ++i) m.a[i] = v[i];
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace refflow;

    CLI::App app{"flow maps and referential gradients of 4D vector fields"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string out_dir = ".";
    int threads = 1;
    double tol_override = 0.0;
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--threads", threads, "reserved; execution is deterministic single-thread");
    app.add_option("--tol", tol_override, "override the law tolerance");

    // Shared flag-form state.
    Scenario s;
    std::vector<double> p_flag{0, 0, 0, 0}, X_flag, Y_flag;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--field", s.field_name, "builtin field name");
        cmd->add_option("--chart", s.chart, "chart name");
        cmd->add_option("--metric", s.metric, "builtin metric name");
        cmd->add_option("--connection", s.connection, "zero | levi-civita");
        cmd->add_option("--p", p_flag, "reference point (4 numbers)")->expected(4);
        cmd->add_option("--lambda", s.lambda, "flow parameter span");
        cmd->add_option("--step", s.integrator.step_size, "fixed integrator step");
        cmd->add_option("--output", s.output, "output file name");
    };

    CLI::App* run = app.add_subcommand("run", "execute a JSON scenario file");
    std::string scenario_path;
    run->add_option("scenario", scenario_path, "scenario JSON path")->required();

    CLI::App* flow_cmd = app.add_subcommand("flow", "integrate an orbit of the field");
    add_common(flow_cmd);
    flow_cmd->add_flag("--arclength", s.arclength, "integrate the arc-length representation");
    flow_cmd->add_option("--s", s.s_total, "arc-length span");

    CLI::App* rg = app.add_subcommand("refgrad", "compute the referential gradient");
    add_common(rg);
    rg->add_option("--method", s.method, "variational | series | finite-difference");
    rg->add_option("--fd-step", s.h, "finite-difference shift");
    rg->add_option("--order", s.series_order, "series truncation order");

    CLI::App* verify = app.add_subcommand("verify", "check a structural law");
    verify->add_option("law", s.verify_law, "lemma1 | lemma2 | lemma3 | eulerian")->required();
    add_common(verify);
    verify->add_option("--lambda1", s.lambda1, "first span (lemma2)");
    verify->add_option("--lambda2", s.lambda2, "second span (lemma2)");
    verify->add_option("--s-total", s.s_total, "arc-length span (lemma3)");
    verify->add_option("--pair", s.pair, "chart pairing (lemma1)");
    verify->add_option("--angle", s.angle, "rotation pairing angle (lemma1)");
    std::vector<double> grid_lo{0, 0, 0, 0}, grid_hi{0, 0, 0, 0};
    std::vector<int> grid_count{1, 1, 1, 1};
    verify->add_option("--grid-lo", grid_lo, "grid lower corner")->expected(4);
    verify->add_option("--grid-hi", grid_hi, "grid upper corner")->expected(4);
    verify->add_option("--grid-count", grid_count, "grid point counts")->expected(4);

    CLI::App* bch = app.add_subcommand("bch", "combine exponents by nested commutators");
    bch->add_option("--X", X_flag, "left exponent (16 numbers)")->expected(16);
    bch->add_option("--Y", Y_flag, "right exponent (16 numbers)")->expected(16);
    bch->add_option("--degree", s.degree, "truncation degree 1..5");
    bch->add_option("--output", s.output, "output file name");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            std::ifstream in(scenario_path);
            if (!in) raise(ErrorKind::ValidationError, "cannot read scenario file " + scenario_path);
            std::ostringstream buf;
            buf << in.rdbuf();
            Scenario parsed = parse_scenario(buf.str());
            if (tol_override > 0.0) parsed.tolerance = tol_override;
            return run_scenario_guarded(parsed, out_dir);
        }

        s.p = parse_vec4(p_flag, "--p");
        if (tol_override > 0.0) s.tolerance = tol_override;
        if (flow_cmd->parsed()) s.command = "flow";
        if (rg->parsed()) s.command = "refgrad";
        if (verify->parsed()) s.command = "verify";
        if (bch->parsed()) {
            s.command = "bch";
            s.X = parse_mat4(X_flag, "--X");
            s.Y = parse_mat4(Y_flag, "--Y");
        }
        if (verify->parsed()) {
            for (size_t i = 0; i < 4; ++i) {
                s.grid.lo[i] = grid_lo[i];
                s.grid.hi[i] = grid_hi[i];
                s.grid.count[i] = grid_count[i];
            }
        }
        return run_scenario_guarded(s, out_dir);
    } catch (const Error& e) {
        std::cerr << "ERROR kind=" << to_string(e.kind()) << " message=\"" << e.what() << "\"\n";
        return exit_code_for(e.kind());
    }
}
