#include "fopinn/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>

namespace fopinn {

double LrSchedule::at(double lr0, int step) const {
    switch (kind) {
        case Kind::Constant: return lr0;
        case Kind::Step: return lr0 * std::pow(gamma, step / every);
        case Kind::InverseTime: return lr0 / (1.0 + k * step);
    }
    return lr0;
}

void adam_step(std::span<double> theta, std::span<const double> grad, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
    const int n = static_cast<int>(theta.size());
    for (int i = 0; i < n; ++i)
        if (!std::isfinite(grad[i]))
            throw NonFiniteError("adam_step: non-finite gradient component");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (int i = 0; i < n; ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double inf_norm(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s = std::max(s, std::abs(v));
    return s;
}

struct LineSearchOut {
    bool ok = false;
    double alpha = 0.0, f = 0.0;
    int evals = 0;
};

// Strong-Wolfe line search (bracket + zoom with bisection-safeguarded cubic
// interpolation). On return the last objective evaluation was made at the
// accepted point, so x/g hold that point's data.
LineSearchOut wolfe_line_search(const Objective& fg, std::vector<double>& x,
                                std::vector<double>& g, const std::vector<double>& x0,
                                const std::vector<double>& p, double f0, double dphi0,
                                double alpha_init, double c1, double c2, int max_evals) {
    LineSearchOut out;
    const int n = static_cast<int>(x0.size());
    auto eval = [&](double alpha) {
        for (int i = 0; i < n; ++i) x[i] = x0[i] + alpha * p[i];
        ++out.evals;
        return fg(x, g);
    };

    auto cubic = [](double a, double fa, double da, double b, double fb, double db) {
        // minimizer of the cubic through (a,fa,da),(b,fb,db); NaN-safe fallback
        const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
        const double disc = d1 * d1 - da * db;
        if (disc < 0.0) return 0.5 * (a + b);
        const double d2 = std::sqrt(disc) * (b > a ? 1.0 : -1.0);
        const double t = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
        if (!std::isfinite(t)) return 0.5 * (a + b);
        return t;
    };

    double alo = 0.0, flo = f0, dlo = dphi0;
    double ahi = 0.0, fhi = 0.0, dhi = 0.0;
    bool bracketed = false;

    double alpha = alpha_init, aprev = 0.0, fprev = f0, dprev = dphi0;
    for (int it = 0; it < max_evals && !bracketed; ++it) {
        const double f = eval(alpha);
        const double dphi = dot(g, p);
        if (f > f0 + c1 * alpha * dphi0 || (it > 0 && f >= fprev)) {
            alo = aprev; flo = fprev; dlo = dprev;
            ahi = alpha; fhi = f; dhi = dphi;
            bracketed = true;
            break;
        }
        if (std::abs(dphi) <= -c2 * dphi0) {
            out.ok = true;
            out.alpha = alpha;
            out.f = f;
            return out;
        }
        if (dphi >= 0.0) {
            alo = alpha; flo = f; dlo = dphi;
            ahi = aprev; fhi = fprev; dhi = dprev;
            bracketed = true;
            break;
        }
        aprev = alpha; fprev = f; dprev = dphi;
        alpha = std::min(alpha * 2.0, 1e12);
    }
    if (!bracketed) return out;

    for (int it = 0; it < max_evals; ++it) {
        double atrial = cubic(alo, flo, dlo, ahi, fhi, dhi);
        const double lo = std::min(alo, ahi), hi = std::max(alo, ahi);
        const double width = hi - lo;
        if (!(atrial > lo + 0.05 * width && atrial < hi - 0.05 * width))
            atrial = 0.5 * (alo + ahi);
        if (width < 1e-18 * std::max(1.0, std::abs(alo))) break;

        const double f = eval(atrial);
        const double dphi = dot(g, p);
        if (f > f0 + c1 * atrial * dphi0 || f >= flo) {
            ahi = atrial; fhi = f; dhi = dphi;
        } else {
            if (std::abs(dphi) <= -c2 * dphi0) {
                out.ok = true;
                out.alpha = atrial;
                out.f = f;
                return out;
            }
            if (dphi * (ahi - alo) >= 0.0) {
                ahi = alo; fhi = flo; dhi = dlo;
            }
            alo = atrial; flo = f; dlo = dphi;
        }
    }
    // Exhausted: settle for the best bracket endpoint if it at least
    // decreases f (sufficient decrease may be met without curvature).
    if (alo > 0.0 && flo < f0) {
        const double f = eval(alo); // re-evaluate so x/g match the returned point
        out.ok = true;
        out.alpha = alo;
        out.f = f;
        return out;
    }
    return out;
}

} // namespace

LbfgsResult lbfgs_minimize(const Objective& fg, std::vector<double> theta0,
                           const LbfgsConfig& cfg,
                           const std::function<void(int, double)>& on_iter) {
    const int n = static_cast<int>(theta0.size());
    LbfgsResult res;
    std::vector<double> x = std::move(theta0);
    std::vector<double> g(n, 0.0), x0(n), p(n), gprev(n);
    double f = fg(x, g);

    res.theta = x;
    res.f = f;

    std::deque<std::vector<double>> S, Y;
    std::deque<double> rho;
    std::vector<double> alpha_buf(cfg.memory, 0.0);
    std::deque<double> f_recent{f};
    bool fell_back = false;

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        if (inf_norm(g) <= cfg.grad_tol) {
            res.stop_reason = "grad_tol";
            break;
        }

        // two-loop recursion
        p = g;
        const int m = static_cast<int>(S.size());
        for (int i = m - 1; i >= 0; --i) {
            alpha_buf[i] = rho[i] * dot(S[i], p);
            for (int j = 0; j < n; ++j) p[j] -= alpha_buf[i] * Y[i][j];
        }
        if (m > 0) {
            const double gamma = dot(S[m - 1], Y[m - 1]) / dot(Y[m - 1], Y[m - 1]);
            for (int j = 0; j < n; ++j) p[j] *= gamma;
        }
        for (int i = 0; i < m; ++i) {
            const double beta = rho[i] * dot(Y[i], p);
            for (int j = 0; j < n; ++j) p[j] += (alpha_buf[i] - beta) * S[i][j];
        }
        for (int j = 0; j < n; ++j) p[j] = -p[j];

        double dphi0 = dot(g, p);
        if (!(dphi0 < 0.0)) { // not a descent direction; restart from steepest descent
            S.clear(); Y.clear(); rho.clear();
            for (int j = 0; j < n; ++j) p[j] = -g[j];
            dphi0 = dot(g, p);
        }

        x0 = x;
        gprev = g;
        const double f_before = f;
        const double alpha_init = (m == 0) ? std::min(1.0, 1.0 / std::max(inf_norm(g), 1e-12))
                                           : 1.0;
        LineSearchOut ls = wolfe_line_search(fg, x, g, x0, p, f, dphi0, alpha_init, cfg.c1,
                                             cfg.c2, cfg.max_linesearch);
        if (!ls.ok) {
            if (fell_back) {
                x = x0;
                res.stop_reason = "line_search_failure";
                break;
            }
            // one steepest-descent retry with a conservative step
            fell_back = true;
            S.clear(); Y.clear(); rho.clear();
            for (int j = 0; j < n; ++j) p[j] = -gprev[j];
            dphi0 = dot(gprev, p);
            ls = wolfe_line_search(fg, x, g, x0, p, f_before, dphi0,
                                   std::min(1.0, 1.0 / std::max(inf_norm(gprev), 1e-12)),
                                   cfg.c1, cfg.c2, cfg.max_linesearch);
            if (!ls.ok) {
                x = x0;
                res.stop_reason = "line_search_failure";
                break;
            }
        } else {
            fell_back = false;
        }
        f = ls.f;
        res.iters = iter;
        if (on_iter) on_iter(iter, f);
        res.f_history.push_back(f);
        if (f < res.f) {
            res.f = f;
            res.theta = x;
        }

        // curvature pair
        std::vector<double> s(n), y(n);
        double step_max = 0.0;
        for (int j = 0; j < n; ++j) {
            s[j] = x[j] - x0[j];
            y[j] = g[j] - gprev[j];
            step_max = std::max(step_max, std::abs(s[j]));
        }
        const double sy = dot(s, y);
        if (sy > 1e-12 * std::sqrt(dot(s, s)) * std::sqrt(dot(y, y))) {
            S.push_back(std::move(s));
            Y.push_back(std::move(y));
            rho.push_back(1.0 / sy);
            if (static_cast<int>(S.size()) > cfg.memory) {
                S.pop_front();
                Y.pop_front();
                rho.pop_front();
            }
        }

        if (step_max <= cfg.step_tol * std::max(1.0, inf_norm(x))) {
            res.stop_reason = "step_tol";
            break;
        }
        f_recent.push_back(f);
        if (static_cast<int>(f_recent.size()) > cfg.f_window + 1) f_recent.pop_front();
        if (static_cast<int>(f_recent.size()) == cfg.f_window + 1 &&
            f_recent.front() - f <= cfg.f_rel_tol * std::max(1.0, std::abs(f))) {
            res.stop_reason = "f_tol";
            break;
        }
    }
    if (res.stop_reason.empty())
        res.stop_reason = res.iters >= cfg.max_iters ? "max_iters" : "grad_tol";
    return res;
}

RunReport train(const Problem& problem, MlpNet& net, const PointSet& points,
                const LossSpec& spec, const TrainConfig& cfg) {
    using clock = std::chrono::steady_clock;
    const int required = spec.required_outputs(problem.dim());
    if (net.output_dim() != required)
        throw WrongOutputCountError("train: method needs " + std::to_string(required) +
                                    " network outputs, net has " +
                                    std::to_string(net.output_dim()));

    RunReport report;
    report.lbfgs_config = cfg.lbfgs;
    auto cache = CollocationCache::build(problem, points, spec);

    // weights resolved once at theta0 and frozen
    ResolvedWeights unit;
    unit.boundary = 1.0;
    unit.positivity = spec.positivity == Positivity::Penalty ? spec.positivity_weight : 0.0;
    report.initial_breakdown = eval_loss(net, cache, unit, {}, cfg.threads);
    report.weights = make_weights(spec, report.initial_breakdown);
    const ResolvedWeights w = report.weights;

    auto total_with = [](const LossBreakdown& bd, const ResolvedWeights& rw) {
        double t = rw.interior[0] * bd.flux_div + rw.boundary * bd.boundary +
                   rw.positivity * bd.positivity;
        for (int j = 0; j < bd.n_cons; ++j) t += rw.interior[1 + j] * bd.cons[j];
        return t;
    };
    double best_f = total_with(report.initial_breakdown, w);
    std::vector<double> best_theta = net.params;

    std::vector<double> grad(net.param_count(), 0.0);
    LossBreakdown last_bd;
    auto objective = [&](std::span<const double> theta, std::span<double> gout) {
        std::copy(theta.begin(), theta.end(), net.params.begin());
        last_bd = eval_loss(net, cache, w, gout, cfg.threads);
        return last_bd.total;
    };

    const auto t_start = clock::now();
    auto seconds_since = [](clock::time_point t0) {
        return std::chrono::duration<double>(clock::now() - t0).count();
    };

    // Adam phase
    AdamState state(net.param_count());
    for (int step = 0; step < cfg.adam_steps; ++step) {
        if (cfg.resample_every > 0 && step > 0 && step % cfg.resample_every == 0) {
            const auto ps = sample(problem.domain, problem.interfaces, points.n_interior(),
                                   points.n_boundary(),
                                   points.seed + 0x9e3779b9ULL * static_cast<unsigned>(step));
            cache = CollocationCache::build(problem, ps, spec);
        }
        const LossBreakdown bd = eval_loss(net, cache, w, grad, cfg.threads);
        if (!std::isfinite(bd.total))
            throw NonFiniteError("train: non-finite loss during Adam phase");
        if (bd.total < best_f) {
            best_f = bd.total;
            best_theta = net.params;
        }
        const double lr = cfg.schedule.at(cfg.lr0, step);
        adam_step(net.params, grad, state, lr, cfg.beta1, cfg.beta2, cfg.adam_eps);
        report.history.push_back({'a', step, bd, lr, seconds_since(t_start)});
        if (cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0 &&
            !cfg.checkpoint_prefix.empty())
            net.save_binary(cfg.checkpoint_prefix + "." + std::to_string(step + 1) + ".bin");
    }
    report.adam_seconds = seconds_since(t_start);

    // L-BFGS phase on the same frozen loss
    const auto t_lbfgs = clock::now();
    if (cfg.lbfgs.max_iters > 0) {
        auto res = lbfgs_minimize(
            objective, net.params, cfg.lbfgs, [&](int iter, double) {
                report.history.push_back(
                    {'l', iter, last_bd, 0.0,
                     std::chrono::duration<double>(clock::now() - t_start).count()});
            });
        net.params = res.theta;
        report.lbfgs_iters = res.iters;
        report.lbfgs_stop_reason = res.stop_reason;
        if (res.f < best_f) {
            best_f = res.f;
            best_theta = net.params;
        }
    }
    report.lbfgs_seconds = seconds_since(t_lbfgs);

    net.params = best_theta;
    report.final_breakdown = eval_loss(net, cache, w, {}, cfg.threads);
    report.final_params = net.params;
    return report;
}

} // namespace fopinn
