#pragma once

// Deterministic serialization: fixed 17-significant-digit float formatting,
// CSV emitters for trajectories and gradients, structured-text records for
// residual reports, and atomic file writes (temp file + rename).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "refflow/error.hpp"
#include "refflow/flow.hpp"
#include "refflow/laws.hpp"
#include "refflow/refgrad.hpp"

namespace refflow {

/// 17 significant digits, lowercase exponent — exact double round-trip.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    fs::create_directories(dir);
    const fs::path tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorKind::ValidationError, "cannot open output file " + tmp.string());
        out << content;
        if (!out.flush()) raise(ErrorKind::ValidationError, "write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline std::string flow_to_csv(const FlowSolution& sol) {
    std::string s = "sigma,x0,x1,x2,x3";
    const bool arc = !sol.lambda_of_s.empty();
    if (arc) s += ",lambda_of_s";
    s += "\n";
    for (size_t i = 0; i < sol.sigma.size(); ++i) {
        s += format_double(sol.sigma[i]);
        for (int m = 0; m < 4; ++m) s += "," + format_double(sol.x[i][static_cast<size_t>(m)]);
        if (arc) s += "," + format_double(sol.lambda_of_s[i]);
        s += "\n";
    }
    return s;
}

inline std::string refgrad_to_record(const RefGradient& g) {
    std::string s = "{\"lambda\": " + format_double(g.lambda) + ", \"p\": [";
    for (int m = 0; m < 4; ++m) {
        if (m) s += ", ";
        s += format_double(g.p.x[static_cast<size_t>(m)]);
    }
    s += "], \"chart\": \"" + g.p.chart + "\", \"method\": \"" + g.method + "\", \"matrix\": [";
    for (int i = 0; i < 16; ++i) {
        if (i) s += ", ";
        s += format_double(g.F.a[static_cast<size_t>(i)]);
    }
    s += "], \"error_bound\": ";
    s += g.error_bound ? format_double(*g.error_bound) : std::string("null");
    s += "}\n";
    return s;
}

inline std::string refgrad_to_csv(const RefGradient& g) {
    std::string s = "lambda";
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            s += ",F" + std::to_string(i) + std::to_string(j);
    s += "\n" + format_double(g.lambda);
    for (int i = 0; i < 16; ++i) s += "," + format_double(g.F.a[static_cast<size_t>(i)]);
    s += "\n";
    return s;
}

inline std::string report_summary_line(const ResidualReport& r) {
    return "LAW " + r.law + " residual=" + format_double(r.residual) +
           " tol=" + format_double(r.tolerance) + (r.pass ? " PASS" : " FAIL") + "\n";
}

inline std::string report_to_record(const ResidualReport& r) {
    std::string s = "{\"law\": \"" + r.law + "\", \"residual\": " + format_double(r.residual) +
                    ", \"tolerance\": " + format_double(r.tolerance) +
                    ", \"pass\": " + (r.pass ? "true" : "false") + ", \"diagnostics\": {";
    bool first = true;
    for (const auto& [k, v] : r.diagnostics) {
        if (!first) s += ", ";
        first = false;
        s += "\"" + k + "\": " + format_double(v);
    }
    s += "}}\n";
    return s;
}

}  // namespace refflow
