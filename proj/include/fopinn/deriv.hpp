#pragma once

#include <span>
#include <vector>

#include "fopinn/net.hpp"

namespace fopinn {

/// Exact derivatives of every network output at one point.
struct PointJet {
    int c = 0, d = 0, order = 0;
    std::vector<double> values; // c
    std::vector<double> grad;   // c*d, row per output
    std::vector<double> hess;   // c*d*d full symmetric; empty for order < 2

    double value(int m) const { return values[m]; }
    double dvalue(int m, int k) const { return grad[m * d + k]; }
    double d2value(int m, int k, int l) const { return hess[(m * d + k) * d + l]; }
};

/// Jet propagation modes. Value/Grad/Hess carry the plain input jets;
/// Dir2 carries first derivatives plus second directional derivatives
/// along per-point direction vectors (used by the base-PINN residual).
enum class JetMode { Value = 0, Grad = 1, Hess = 2, Dir2 = 3 };

int jet_comps(JetMode mode, int d, int n_dirs);

/// Forward propagation of input jets through the network for a block of
/// points, with reverse accumulation of parameter gradients. One instance
/// per thread; buffers are reused across blocks.
class BlockEval {
  public:
    static constexpr int kBlock = 16; // points per forward/backward pass

    BlockEval(const MlpNet& net, JetMode mode, int n_dirs = 0);

    int comps() const { return jc_; }
    int block_capacity() const { return kBlock; }

    /// X: n_points*d coordinates; dirs (Dir2 only): n_points*n_dirs*d.
    void forward(const double* X, int n_points, const double* dirs = nullptr);

    /// Jet components of one output at one point: [value, g_0.., extra..].
    const double* output(int out_index, int p) const;

    void clear_adjoint();
    double* adjoint(int out_index, int p);

    /// Accumulates d(sum of seeded adjoint contractions)/d(theta) into
    /// param_grad (length net.param_count()).
    void backward(double* param_grad, const double* dirs = nullptr);

  private:
    const MlpNet* net_;
    JetMode mode_;
    int d_, jc_, n_dirs_, n_points_ = 0;
    std::vector<std::vector<double>> Z_; // pre-activations per layer 1..L
    std::vector<std::vector<double>> A_; // activations per layer 0..L
    std::vector<double> bar_a_, bar_z_;  // adjoint scratch, max width
    std::vector<double> adj_;            // adjoint of final activations
};

/// Convenience single-point jet with full Hessian support.
PointJet jet(const MlpNet& net, std::span<const double> x, int order);

} // namespace fopinn
