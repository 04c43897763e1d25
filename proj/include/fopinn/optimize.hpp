#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "fopinn/residual.hpp"

namespace fopinn {

struct LrSchedule {
    enum class Kind { Constant, Step, InverseTime };
    Kind kind = Kind::Step;
    double gamma = 0.5; // step decay factor
    int every = 2500;   // steps between decays
    double k = 0.0;     // inverse-time rate

    double at(double lr0, int step) const;
};

struct LbfgsConfig {
    int memory = 50;
    int max_iters = 50000;
    double grad_tol = 1e-9;   // on the max-norm of the gradient
    double step_tol = 1e-12;  // on the max-norm of the accepted step
    double c1 = 1e-4;         // sufficient decrease
    double c2 = 0.9;          // curvature
    int max_linesearch = 40;
    // progress stop: relative decrease of f over f_window iterations
    double f_rel_tol = 1e-10;
    int f_window = 10;
};

struct TrainConfig {
    int adam_steps = 10000;
    double lr0 = 1e-3;
    LrSchedule schedule{};
    double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    LbfgsConfig lbfgs{};
    std::uint64_t seed = 1;
    int threads = 1;
    int resample_every = 0;    // redraw collocation points every K Adam steps (0 = off)
    int checkpoint_every = 0;  // save params every K Adam steps (0 = off)
    std::string checkpoint_prefix;
};

struct AdamState {
    std::vector<double> m, v;
    long t = 0;

    explicit AdamState(int n) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update; throws NonFiniteError on a bad gradient.
void adam_step(std::span<double> theta, std::span<const double> grad, AdamState& state,
               double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// Objective: fills grad (same length as theta) and returns the value.
using Objective = std::function<double(std::span<const double>, std::span<double>)>;

struct LbfgsResult {
    std::vector<double> theta; // best iterate seen
    double f = 0.0;
    int iters = 0;
    std::string stop_reason;
    std::vector<double> f_history; // objective value per iteration
};

/// Two-loop L-BFGS with a strong-Wolfe line search. Falls back to one
/// steepest-descent step on a line-search failure, then terminates if it
/// repeats. Returns the best iterate seen.
LbfgsResult lbfgs_minimize(const Objective& fg, std::vector<double> theta0,
                           const LbfgsConfig& cfg,
                           const std::function<void(int, double)>& on_iter = nullptr);

struct HistoryRow {
    char phase;      // 'a' Adam, 'l' L-BFGS
    int step;
    LossBreakdown breakdown;
    double lr;
    double wall_seconds;
};

struct RunReport {
    std::vector<double> final_params;
    std::vector<HistoryRow> history;
    double adam_seconds = 0.0, lbfgs_seconds = 0.0;
    LossBreakdown initial_breakdown, final_breakdown;
    ResolvedWeights weights;
    int lbfgs_iters = 0;
    std::string lbfgs_stop_reason;
    LbfgsConfig lbfgs_config; // recorded for provenance
};

/// Adam phase with schedule followed by L-BFGS on the same frozen loss.
/// Resolves inverse-initial weights at theta0 before the first step.
RunReport train(const Problem& problem, MlpNet& net, const PointSet& points,
                const LossSpec& spec, const TrainConfig& cfg);

} // namespace fopinn
