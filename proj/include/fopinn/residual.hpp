#pragma once

#include <functional>
#include <span>
#include <string>

#include "fopinn/deriv.hpp"
#include "fopinn/problems.hpp"
#include "fopinn/sampling.hpp"

namespace fopinn {

enum class Method { WeightedFO, PureFO, BasePinn };
enum class Positivity { None, Penalty, Softplus };
enum class WeightStrategy { Fixed, InverseInitial };

Method method_from_string(const std::string& s);
std::string method_to_string(Method m);

/// How the discrete functional is put together: which formulation, the
/// transition width of the interface mask, and the term weighting.
struct LossSpec {
    Method method = Method::WeightedFO;
    double epsilon = 0.01;
    WeightStrategy strategy = WeightStrategy::Fixed;
    double boundary_weight = 100.0;
    std::vector<double> interior_weights; // empty = all ones
    Positivity positivity = Positivity::None;
    double positivity_weight = 100.0;

    /// Network outputs the method needs for a d-dimensional problem.
    int required_outputs(int dim) const {
        return method == Method::BasePinn ? 1 : 1 + dim;
    }
};

/// Term-by-term value of the discrete functional. Terms are the raw
/// (unweighted) mean squares; total is their weighted sum.
struct LossBreakdown {
    double flux_div = 0.0;     // interior residual (base PINN uses this slot too)
    double cons[3] = {0, 0, 0}; // constitutive terms tau, phi (, psi)
    double boundary = 0.0;
    double positivity = 0.0;
    int n_cons = 0;
    double total = 0.0;

    std::vector<std::pair<std::string, double>> named_terms() const;
};

/// Numeric weights actually applied; frozen for the whole run.
struct ResolvedWeights {
    double interior[4] = {1.0, 1.0, 1.0, 1.0}; // flux-div then constitutive terms
    double boundary = 100.0;
    double positivity = 100.0;
};

/// Everything about the collocation points that does not depend on theta:
/// mask values, source/boundary data, eigenframes (and, for the base PINN,
/// the tensor entry divergences). Fields are plain arrays so tests can
/// manipulate them directly.
struct CollocationCache {
    int dim = 2;
    Method method = Method::WeightedFO;
    int n_int = 0, n_bnd = 0;
    std::vector<double> xs_int;  // n_int*dim
    std::vector<double> zeta;    // n_int (1.0 for pure FO; unused for base PINN)
    std::vector<double> f;       // n_int
    std::vector<double> lambda;  // n_int*dim
    std::vector<double> q;       // n_int*dim*dim, q[i][j][k]
    std::vector<double> divq;    // n_int*dim (FO only)
    std::vector<double> a_div;   // n_int*dim (base PINN only): sum_j d_j a_jk
    std::vector<double> xs_bnd;  // n_bnd*dim
    std::vector<double> g;       // n_bnd

    static CollocationCache build(const Problem& problem, const PointSet& points,
                                  const LossSpec& spec);
};

/// Evaluates the discrete functional; when grad is non-empty (length
/// net.param_count()) also accumulates d(total)/d(theta). Deterministic:
/// fixed-size chunks reduced in index order, independent of thread count.
LossBreakdown eval_loss(const MlpNet& net, const CollocationCache& cache,
                        const ResolvedWeights& weights, std::span<double> grad, int threads = 1);

/// Paper-facing entry points.
LossBreakdown weighted_fo_loss(const MlpNet& net, const Problem& problem, const PointSet& points,
                               const LossSpec& spec, int threads = 1);
LossBreakdown base_pinn_loss(const MlpNet& net, const Problem& problem, const PointSet& points,
                             const LossSpec& spec, int threads = 1);

/// Inverse-initial weight resolution (or pass-through for fixed weights);
/// floors vanishing initial terms at 1e-8.
ResolvedWeights make_weights(const LossSpec& spec, const LossBreakdown& initial);

/// Test/oracle path: evaluates the same functional from caller-supplied jets
/// (e.g. an exact manufactured solution) instead of a network.
using StubJetFn = std::function<PointJet(const Pt&, int order)>;
LossBreakdown eval_loss_from_jets(const StubJetFn& jets, const CollocationCache& cache,
                                  const ResolvedWeights& weights);

} // namespace fopinn
