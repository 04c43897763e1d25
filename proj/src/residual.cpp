#include "fopinn/residual.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace fopinn {

namespace {
constexpr int kChunk = 1024; // points per reduction chunk (thread-count independent)
}

Method method_from_string(const std::string& s) {
    if (s == "weighted-fo") return Method::WeightedFO;
    if (s == "pure-fo") return Method::PureFO;
    if (s == "base-pinn") return Method::BasePinn;
    throw ConfigError("unknown method: " + s);
}

std::string method_to_string(Method m) {
    switch (m) {
        case Method::WeightedFO: return "weighted-fo";
        case Method::PureFO: return "pure-fo";
        case Method::BasePinn: return "base-pinn";
    }
    return "?";
}

std::vector<std::pair<std::string, double>> LossBreakdown::named_terms() const {
    std::vector<std::pair<std::string, double>> t;
    t.emplace_back("flux-divergence", flux_div);
    static const char* names[3] = {"tau-constitutive", "phi-constitutive", "psi-constitutive"};
    for (int j = 0; j < n_cons; ++j) t.emplace_back(names[j], cons[j]);
    t.emplace_back("boundary", boundary);
    t.emplace_back("positivity", positivity);
    return t;
}

CollocationCache CollocationCache::build(const Problem& problem, const PointSet& points,
                                         const LossSpec& spec) {
    CollocationCache c;
    c.dim = problem.dim();
    c.method = spec.method;
    c.n_int = points.n_interior();
    c.n_bnd = points.n_boundary();
    const int d = c.dim;

    c.xs_int = points.interior;
    c.xs_bnd = points.boundary;
    c.zeta.resize(c.n_int);
    c.f.resize(c.n_int);
    c.lambda.assign(static_cast<std::size_t>(c.n_int) * d, 0.0);
    c.q.assign(static_cast<std::size_t>(c.n_int) * d * d, 0.0);
    if (spec.method == Method::BasePinn)
        c.a_div.assign(static_cast<std::size_t>(c.n_int) * d, 0.0);
    else
        c.divq.assign(static_cast<std::size_t>(c.n_int) * d, 0.0);

    WeightFn w{problem.interfaces, spec.epsilon};
    for (int i = 0; i < c.n_int; ++i) {
        const Pt x = points.interior_at(i);
        c.f[i] = problem.source(x);
        c.zeta[i] = spec.method == Method::WeightedFO ? w.zeta(x) : 1.0;
        const EigenFrame fr = problem.tensor.frame_at(x);
        for (int j = 0; j < d; ++j) {
            c.lambda[i * d + j] = fr.lambda[j];
            for (int k = 0; k < d; ++k) c.q[(i * d + j) * d + k] = fr.q[j][k];
            if (spec.method != Method::BasePinn) c.divq[i * d + j] = fr.div_q[j];
        }
        if (spec.method == Method::BasePinn) {
            const auto adiv = problem.tensor.entry_divergence(x);
            for (int k = 0; k < d; ++k) c.a_div[i * d + k] = adiv[k];
        }
    }

    c.g.resize(c.n_bnd);
    for (int i = 0; i < c.n_bnd; ++i) c.g[i] = problem.boundary(points.boundary_at(i));
    return c;
}

namespace {

struct ChunkResult {
    double s_int = 0.0;      // interior/flux-divergence residual sum of squares
    double s_cons[3] = {0, 0, 0};
    double s_bnd = 0.0;
    double s_pos = 0.0;
};

// One chunk of interior points.
void run_interior_chunk(const MlpNet& net, const CollocationCache& cache,
                        const ResolvedWeights& w, int begin, int end, bool want_grad,
                        ChunkResult& res, double* grad, BlockEval& ev) {
    const int d = cache.dim;
    const bool base = cache.method == Method::BasePinn;
    const double inv_nf = 1.0 / cache.n_int;
    const bool penalty = w.positivity > 0.0;

    for (int b = begin; b < end; b += BlockEval::kBlock) {
        const int n = std::min(BlockEval::kBlock, end - b);
        const double* X = cache.xs_int.data() + static_cast<std::size_t>(b) * d;
        const double* dirs = base ? cache.q.data() + static_cast<std::size_t>(b) * d * d : nullptr;
        ev.forward(X, n, dirs);
        if (want_grad) ev.clear_adjoint();

        for (int p = 0; p < n; ++p) {
            const int i = b + p;
            if (base) {
                const double* o = ev.output(0, p);
                double r = cache.f[i];
                for (int k = 0; k < d; ++k) r += cache.a_div[i * d + k] * o[1 + k];
                for (int j = 0; j < d; ++j) r += cache.lambda[i * d + j] * o[1 + d + j];
                res.s_int += r * r;
                if (want_grad) {
                    double* adj = ev.adjoint(0, p);
                    const double cr = 2.0 * w.interior[0] * r * inv_nf;
                    for (int k = 0; k < d; ++k) adj[1 + k] += cr * cache.a_div[i * d + k];
                    for (int j = 0; j < d; ++j) adj[1 + d + j] += cr * cache.lambda[i * d + j];
                }
                const double uv = ev.output(0, p)[0];
                if (penalty && uv < 0.0) {
                    res.s_pos += uv * uv;
                    if (want_grad) ev.adjoint(0, p)[0] += 2.0 * w.positivity * uv * inv_nf;
                }
            } else {
                const double zi = cache.zeta[i];
                const double* ou = ev.output(0, p);
                double r_div = cache.f[i];
                double r_cons[3];
                for (int j = 0; j < d; ++j) {
                    const double* oa = ev.output(1 + j, p);
                    const double* qj = cache.q.data() + static_cast<std::size_t>(i * d + j) * d;
                    double div_j = oa[0] * cache.divq[i * d + j];
                    double gu_q = 0.0;
                    for (int k = 0; k < d; ++k) {
                        div_j += oa[1 + k] * qj[k];
                        gu_q += ou[1 + k] * qj[k];
                    }
                    r_div += div_j;
                    r_cons[j] = zi * (oa[0] - cache.lambda[i * d + j] * gu_q);
                }
                r_div *= zi;
                res.s_int += r_div * r_div;
                for (int j = 0; j < d; ++j) res.s_cons[j] += r_cons[j] * r_cons[j];
                if (want_grad) {
                    double* adj_u = ev.adjoint(0, p);
                    const double cdiv = 2.0 * w.interior[0] * r_div * zi * inv_nf;
                    for (int j = 0; j < d; ++j) {
                        double* adj_a = ev.adjoint(1 + j, p);
                        const double* qj =
                            cache.q.data() + static_cast<std::size_t>(i * d + j) * d;
                        adj_a[0] += cdiv * cache.divq[i * d + j];
                        for (int k = 0; k < d; ++k) adj_a[1 + k] += cdiv * qj[k];
                        const double cc = 2.0 * w.interior[1 + j] * r_cons[j] * zi * inv_nf;
                        adj_a[0] += cc;
                        const double cl = cc * cache.lambda[i * d + j];
                        for (int k = 0; k < d; ++k) adj_u[1 + k] -= cl * qj[k];
                    }
                }
                const double uv = ou[0];
                if (penalty && uv < 0.0) {
                    res.s_pos += uv * uv;
                    if (want_grad) ev.adjoint(0, p)[0] += 2.0 * w.positivity * uv * inv_nf;
                }
            }
        }
        if (want_grad) ev.backward(grad, dirs);
    }
}

void run_boundary_chunk(const MlpNet& net, const CollocationCache& cache,
                        const ResolvedWeights& w, int begin, int end, bool want_grad,
                        ChunkResult& res, double* grad, BlockEval& ev) {
    const int d = cache.dim;
    const double inv_nd = 1.0 / cache.n_bnd;
    for (int b = begin; b < end; b += BlockEval::kBlock) {
        const int n = std::min(BlockEval::kBlock, end - b);
        ev.forward(cache.xs_bnd.data() + static_cast<std::size_t>(b) * d, n);
        if (want_grad) ev.clear_adjoint();
        for (int p = 0; p < n; ++p) {
            const double r = ev.output(0, p)[0] - cache.g[b + p];
            res.s_bnd += r * r;
            if (want_grad) ev.adjoint(0, p)[0] += 2.0 * w.boundary * r * inv_nd;
        }
        if (want_grad) ev.backward(grad);
    }
}

} // namespace

LossBreakdown eval_loss(const MlpNet& net, const CollocationCache& cache,
                        const ResolvedWeights& weights, std::span<double> grad, int threads) {
    const int d = cache.dim;
    const bool base = cache.method == Method::BasePinn;
    if (net.output_dim() != (base ? 1 : 1 + d))
        throw WrongOutputCountError("loss: network must have " +
                                    std::to_string(base ? 1 : 1 + d) + " outputs, has " +
                                    std::to_string(net.output_dim()));
    const bool want_grad = !grad.empty();
    if (want_grad && static_cast<int>(grad.size()) != net.param_count())
        throw DimensionMismatchError("loss: gradient buffer has wrong length");
    if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);

    const int n_int_chunks = (cache.n_int + kChunk - 1) / kChunk;
    const int n_bnd_chunks = (cache.n_bnd + kChunk - 1) / kChunk;
    const int n_chunks = n_int_chunks + n_bnd_chunks;

    std::vector<ChunkResult> results(n_chunks);
    std::vector<std::vector<double>> chunk_grads;
    if (want_grad) chunk_grads.assign(n_chunks, std::vector<double>(net.param_count(), 0.0));

    auto run_chunk = [&](int ci, BlockEval& ev_int, BlockEval& ev_bnd) {
        double* g = want_grad ? chunk_grads[ci].data() : nullptr;
        if (ci < n_int_chunks) {
            const int begin = ci * kChunk;
            const int end = std::min(cache.n_int, begin + kChunk);
            run_interior_chunk(net, cache, weights, begin, end, want_grad, results[ci], g,
                               ev_int);
        } else {
            const int begin = (ci - n_int_chunks) * kChunk;
            const int end = std::min(cache.n_bnd, begin + kChunk);
            run_boundary_chunk(net, cache, weights, begin, end, want_grad, results[ci], g,
                               ev_bnd);
        }
    };

    const int n_workers = std::max(1, std::min(threads, n_chunks));
    if (n_workers == 1) {
        BlockEval ev_int(net, base ? JetMode::Dir2 : JetMode::Grad, base ? d : 0);
        BlockEval ev_bnd(net, JetMode::Value);
        for (int ci = 0; ci < n_chunks; ++ci) run_chunk(ci, ev_int, ev_bnd);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int t = 0; t < n_workers; ++t) {
            pool.emplace_back([&] {
                BlockEval ev_int(net, base ? JetMode::Dir2 : JetMode::Grad, base ? d : 0);
                BlockEval ev_bnd(net, JetMode::Value);
                for (;;) {
                    const int ci = next.fetch_add(1);
                    if (ci >= n_chunks) break;
                    run_chunk(ci, ev_int, ev_bnd);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    // fixed-order reduction over chunks
    LossBreakdown out;
    out.n_cons = base ? 0 : d;
    for (int ci = 0; ci < n_chunks; ++ci) {
        out.flux_div += results[ci].s_int;
        for (int j = 0; j < 3; ++j) out.cons[j] += results[ci].s_cons[j];
        out.boundary += results[ci].s_bnd;
        out.positivity += results[ci].s_pos;
    }
    if (want_grad) {
        for (int ci = 0; ci < n_chunks; ++ci) {
            const double* g = chunk_grads[ci].data();
            for (int i = 0; i < net.param_count(); ++i) grad[i] += g[i];
        }
    }
    out.flux_div /= cache.n_int;
    for (int j = 0; j < out.n_cons; ++j) out.cons[j] /= cache.n_int;
    out.boundary /= cache.n_bnd;
    out.positivity /= cache.n_int;

    out.total = weights.interior[0] * out.flux_div + weights.boundary * out.boundary +
                weights.positivity * out.positivity;
    for (int j = 0; j < out.n_cons; ++j) out.total += weights.interior[1 + j] * out.cons[j];
    return out;
}

LossBreakdown weighted_fo_loss(const MlpNet& net, const Problem& problem, const PointSet& points,
                               const LossSpec& spec, int threads) {
    LossSpec s = spec;
    if (s.method == Method::BasePinn)
        throw ConfigError("weighted_fo_loss called with base-pinn spec");
    const auto cache = CollocationCache::build(problem, points, s);
    ResolvedWeights w = make_weights(s, LossBreakdown{});
    return eval_loss(net, cache, w, {}, threads);
}

LossBreakdown base_pinn_loss(const MlpNet& net, const Problem& problem, const PointSet& points,
                             const LossSpec& spec, int threads) {
    LossSpec s = spec;
    s.method = Method::BasePinn;
    const auto cache = CollocationCache::build(problem, points, s);
    ResolvedWeights w = make_weights(s, LossBreakdown{});
    return eval_loss(net, cache, w, {}, threads);
}

ResolvedWeights make_weights(const LossSpec& spec, const LossBreakdown& initial) {
    ResolvedWeights w;
    w.positivity = spec.positivity == Positivity::Penalty ? spec.positivity_weight : 0.0;
    if (spec.strategy == WeightStrategy::Fixed) {
        for (int j = 0; j < 4; ++j)
            w.interior[j] = j < static_cast<int>(spec.interior_weights.size())
                                ? spec.interior_weights[j]
                                : 1.0;
        w.boundary = spec.boundary_weight;
        return w;
    }
    constexpr double kFloor = 1e-8;
    w.interior[0] = 1.0 / std::max(initial.flux_div, kFloor);
    for (int j = 0; j < initial.n_cons; ++j)
        w.interior[1 + j] = 1.0 / std::max(initial.cons[j], kFloor);
    w.boundary = 1.0 / std::max(initial.boundary, kFloor);
    return w;
}

LossBreakdown eval_loss_from_jets(const StubJetFn& jets, const CollocationCache& cache,
                                  const ResolvedWeights& weights) {
    const int d = cache.dim;
    const bool base = cache.method == Method::BasePinn;
    LossBreakdown out;
    out.n_cons = base ? 0 : d;
    for (int i = 0; i < cache.n_int; ++i) {
        Pt x{0, 0, 0};
        for (int k = 0; k < d; ++k) x[k] = cache.xs_int[i * d + k];
        const PointJet j = jets(x, base ? 2 : 1);
        if (base) {
            double r = cache.f[i];
            for (int k = 0; k < d; ++k) r += cache.a_div[i * d + k] * j.dvalue(0, k);
            for (int m = 0; m < d; ++m) {
                const double* qm = cache.q.data() + static_cast<std::size_t>(i * d + m) * d;
                double qhq = 0.0;
                for (int k = 0; k < d; ++k)
                    for (int l = 0; l < d; ++l) qhq += qm[k] * j.d2value(0, k, l) * qm[l];
                r += cache.lambda[i * d + m] * qhq;
            }
            out.flux_div += r * r;
        } else {
            const double zi = cache.zeta[i];
            double r_div = cache.f[i];
            for (int m = 0; m < d; ++m) {
                const double* qm = cache.q.data() + static_cast<std::size_t>(i * d + m) * d;
                double div_m = j.value(1 + m) * cache.divq[i * d + m];
                double gu_q = 0.0;
                for (int k = 0; k < d; ++k) {
                    div_m += j.dvalue(1 + m, k) * qm[k];
                    gu_q += j.dvalue(0, k) * qm[k];
                }
                r_div += div_m;
                const double rc = zi * (j.value(1 + m) - cache.lambda[i * d + m] * gu_q);
                out.cons[m] += rc * rc;
            }
            r_div *= zi;
            out.flux_div += r_div * r_div;
        }
        const double uv = jets(x, 0).value(0);
        if (uv < 0.0) out.positivity += uv * uv;
    }
    for (int i = 0; i < cache.n_bnd; ++i) {
        Pt x{0, 0, 0};
        for (int k = 0; k < d; ++k) x[k] = cache.xs_bnd[i * d + k];
        const double r = jets(x, 0).value(0) - cache.g[i];
        out.boundary += r * r;
    }
    out.flux_div /= cache.n_int;
    for (int j = 0; j < out.n_cons; ++j) out.cons[j] /= cache.n_int;
    out.positivity /= cache.n_int;
    out.boundary /= cache.n_bnd;
    out.total = weights.interior[0] * out.flux_div + weights.boundary * out.boundary +
                weights.positivity * out.positivity;
    for (int j = 0; j < out.n_cons; ++j) out.total += weights.interior[1 + j] * out.cons[j];
    return out;
}

} // namespace fopinn
