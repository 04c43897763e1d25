#include "fopinn/metrics_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fopinn/sampling.hpp"

namespace fopinn {

RelL2 relative_l2(std::span<const double> u, std::span<const double> u_ref) {
    if (u.size() != u_ref.size())
        throw DimensionMismatchError("relative_l2: length mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - u_ref[i];
        num += d * d;
        den += u_ref[i] * u_ref[i];
    }
    RelL2 out;
    if (den == 0.0) {
        out.zero_reference = true;
        out.value = std::sqrt(num);
    } else {
        out.value = std::sqrt(num / den);
    }
    return out;
}

namespace {

const char* output_name(int idx) {
    static const char* names[4] = {"u", "tau", "phi", "psi"};
    return idx < 4 ? names[idx] : "out";
}

} // namespace

void FieldDump::write_csv(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ConfigError("cannot open " + path + " for writing");
    for (const auto& [k, v] : metadata) std::fprintf(f, "# %s=%s\n", k.c_str(), v.c_str());
    std::fprintf(f, "x,y");
    if (dim == 3) std::fprintf(f, ",z");
    for (int m = 0; m < n_outputs; ++m) std::fprintf(f, ",%s", output_name(m));
    if (!reference.empty()) std::fprintf(f, ",u_ref");
    std::fprintf(f, "\n");
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < dim; ++k)
            std::fprintf(f, "%s%.17g", k ? "," : "", points[i * dim + k]);
        for (int m = 0; m < n_outputs; ++m)
            std::fprintf(f, ",%.17g", outputs[i * n_outputs + m]);
        if (!reference.empty()) std::fprintf(f, ",%.17g", reference[i]);
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

FieldDump FieldDump::read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    FieldDump d;
    std::string line;
    // comments, then header
    while (std::getline(f, line)) {
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=');
            if (eq != std::string::npos)
                d.metadata[line.substr(2, eq - 2)] = line.substr(eq + 1);
            continue;
        }
        break;
    }
    std::vector<std::string> cols;
    {
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    d.dim = (cols.size() > 2 && cols[2] == "z") ? 3 : 2;
    bool has_ref = !cols.empty() && cols.back() == "u_ref";
    d.n_outputs = static_cast<int>(cols.size()) - d.dim - (has_ref ? 1 : 0);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string c;
        int idx = 0;
        while (std::getline(ss, c, ',')) {
            const double v = std::strtod(c.c_str(), nullptr);
            if (idx < d.dim)
                d.points.push_back(v);
            else if (idx < d.dim + d.n_outputs)
                d.outputs.push_back(v);
            else
                d.reference.push_back(v);
            ++idx;
        }
    }
    return d;
}

FieldDump evaluate_on_grid(const MlpNet& net, const Problem& problem, int resolution) {
    FieldDump d;
    d.dim = problem.dim();
    d.resolution = resolution;
    d.n_outputs = net.output_dim();
    d.points = eval_grid(problem.domain, resolution);
    const std::size_t n = d.points.size() / d.dim;
    d.outputs.resize(n * d.n_outputs);
    std::vector<double> x(d.dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < d.dim; ++k) x[k] = d.points[i * d.dim + k];
        const auto out = net.forward(x);
        for (int m = 0; m < d.n_outputs; ++m) {
            if (!std::isfinite(out[m]))
                throw NonFiniteError("evaluate_on_grid: non-finite network output");
            d.outputs[i * d.n_outputs + m] = out[m];
        }
    }
    return d;
}

FieldDump evaluate_fn_on_grid(const std::function<double(const Pt&)>& fn, const Problem& problem,
                              int resolution) {
    FieldDump d;
    d.dim = problem.dim();
    d.resolution = resolution;
    d.n_outputs = 1;
    d.points = eval_grid(problem.domain, resolution);
    const std::size_t n = d.points.size() / d.dim;
    d.outputs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Pt x{0, 0, 0};
        for (int k = 0; k < d.dim; ++k) x[k] = d.points[i * d.dim + k];
        d.outputs[i] = fn(x);
    }
    return d;
}

void attach_exact_reference(FieldDump& dump, const Problem& problem) {
    if (!problem.has_exact()) throw ConfigError("problem has no exact solution");
    const std::size_t n = dump.size();
    dump.reference.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Pt x{0, 0, 0};
        for (int k = 0; k < dump.dim; ++k) x[k] = dump.points[i * dump.dim + k];
        dump.reference[i] = problem.exact(x);
    }
}

void attach_grid_reference(FieldDump& dump, const GridSolution& ref) {
    if (dump.dim != 2) throw ConfigError("grid reference attachment is 2D-only");
    const std::size_t n = dump.size();
    dump.reference.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        dump.reference[i] = ref.interpolate(dump.points[i * 2], dump.points[i * 2 + 1]);
}

void write_history_csv(const std::string& path, const RunReport& report) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ConfigError("cannot open " + path + " for writing");
    std::fprintf(f, "phase,step,total,flux_div,tau,phi,psi,boundary,positivity,lr,wall_seconds\n");
    for (const auto& row : report.history) {
        const auto& b = row.breakdown;
        std::fprintf(f, "%c,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.6f\n",
                     row.phase, row.step, b.total, b.flux_div, b.n_cons > 0 ? b.cons[0] : 0.0,
                     b.n_cons > 1 ? b.cons[1] : 0.0, b.n_cons > 2 ? b.cons[2] : 0.0, b.boundary,
                     b.positivity, row.lr, row.wall_seconds);
    }
    std::fclose(f);
}

void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ConfigError("cannot open " + path + " for writing");
    std::fprintf(f, "method,rel_l2,final_loss,adam_time,lbfgs_time\n");
    for (const auto& r : rows)
        std::fprintf(f, "%s,%.17g,%.17g,%.6f,%.6f\n", r.method.c_str(), r.rel_l2, r.final_loss,
                     r.adam_seconds, r.lbfgs_seconds);
    std::fclose(f);
}

} // namespace fopinn
