#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "fopinn/net.hpp"
#include "fopinn/optimize.hpp"
#include "fopinn/problems.hpp"
#include "fopinn/refsolve.hpp"

namespace fopinn {

struct RelL2 {
    double value = 0.0;
    bool zero_reference = false; // value is the absolute norm when set
};

/// Relative discrete L2 norm ||u - u_ref|| / ||u_ref|| over equal-length
/// samples; falls back to the absolute norm (flagged) for a zero reference.
RelL2 relative_l2(std::span<const double> u, std::span<const double> u_ref);

/// Grid evaluation of the network outputs plus optional reference values.
struct FieldDump {
    int dim = 2;
    int resolution = 0;
    int n_outputs = 1;
    std::vector<double> points;    // n*dim
    std::vector<double> outputs;   // n*n_outputs
    std::vector<double> reference; // n or empty
    std::map<std::string, std::string> metadata;

    std::size_t size() const { return points.size() / dim; }
    void write_csv(const std::string& path) const;
    static FieldDump read_csv(const std::string& path);
};

FieldDump evaluate_on_grid(const MlpNet& net, const Problem& problem, int resolution);

/// Same dump built from a plain callable (used for stubs and references).
FieldDump evaluate_fn_on_grid(const std::function<double(const Pt&)>& fn, const Problem& problem,
                              int resolution);

/// Fills dump.reference from the problem's exact solution, or from a
/// reference grid solution by bilinear interpolation (2D).
void attach_exact_reference(FieldDump& dump, const Problem& problem);
void attach_grid_reference(FieldDump& dump, const GridSolution& ref);

void write_history_csv(const std::string& path, const RunReport& report);

struct ComparisonRow {
    std::string method;
    double rel_l2 = 0.0;
    double final_loss = 0.0;
    double adam_seconds = 0.0;
    double lbfgs_seconds = 0.0;
};

void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows);

} // namespace fopinn
