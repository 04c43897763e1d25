#include "fopinn/deriv.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace fopinn {

namespace {

inline int sym_count(int d) { return d * (d + 1) / 2; }

// packed index of the (k,l) Hessian entry, k <= l, lexicographic
inline int packed_index(int d, int k, int l) {
    return k * d - k * (k - 1) / 2 + (l - k);
}

// Z = W * A (+ b on value columns)
void affine_forward(const double* W, const double* b, const double* A, double* Z, int nout,
                    int nin, int cols, int jc) {
    for (int i = 0; i < nout; ++i) {
        double* zi = Z + static_cast<std::size_t>(i) * cols;
        std::fill(zi, zi + cols, 0.0);
        const double* wrow = W + static_cast<std::size_t>(i) * nin;
        for (int j = 0; j < nin; ++j) {
            const double w = wrow[j];
            const double* aj = A + static_cast<std::size_t>(j) * cols;
            for (int col = 0; col < cols; ++col) zi[col] += w * aj[col];
        }
        const double bi = b[i];
        for (int col = 0; col < cols; col += jc) zi[col] += bi;
    }
}

// Wbar += Zbar * A^T, bbar += row sums over value columns, Abar = W^T * Zbar
void affine_backward(const double* W, const double* Zbar, const double* A, double* Wbar,
                     double* bbar, double* Abar, int nout, int nin, int cols, int jc) {
    if (Abar) {
        for (int j = 0; j < nin; ++j)
            std::fill(Abar + static_cast<std::size_t>(j) * cols,
                      Abar + static_cast<std::size_t>(j + 1) * cols, 0.0);
    }
    for (int i = 0; i < nout; ++i) {
        const double* zrow = Zbar + static_cast<std::size_t>(i) * cols;
        const double* wrow = W + static_cast<std::size_t>(i) * nin;
        double* wbrow = Wbar + static_cast<std::size_t>(i) * nin;
        for (int j = 0; j < nin; ++j) {
            const double* arow = A + static_cast<std::size_t>(j) * cols;
            double s = 0.0;
            for (int col = 0; col < cols; ++col) s += zrow[col] * arow[col];
            wbrow[j] += s;
            if (Abar) {
                const double w = wrow[j];
                double* abrow = Abar + static_cast<std::size_t>(j) * cols;
                for (int col = 0; col < cols; ++col) abrow[col] += w * zrow[col];
            }
        }
        double bs = 0.0;
        for (int col = 0; col < cols; col += jc) bs += zrow[col];
        bbar[i] += bs;
    }
}

} // namespace

int jet_comps(JetMode mode, int d, int n_dirs) {
    switch (mode) {
        case JetMode::Value: return 1;
        case JetMode::Grad: return 1 + d;
        case JetMode::Hess: return 1 + d + sym_count(d);
        case JetMode::Dir2: return 1 + d + n_dirs;
    }
    return 1;
}

BlockEval::BlockEval(const MlpNet& net, JetMode mode, int n_dirs)
    : net_(&net), mode_(mode), d_(net.input_dim()), n_dirs_(n_dirs) {
    jc_ = jet_comps(mode, d_, n_dirs_);
    const int L = net.num_layers();
    Z_.resize(L + 1);
    A_.resize(L + 1);
    int wmax = 0;
    for (int k = 0; k <= L; ++k) {
        const int n = net.widths[k];
        wmax = std::max(wmax, n);
        A_[k].assign(static_cast<std::size_t>(n) * kBlock * jc_, 0.0);
        if (k >= 1) Z_[k].assign(static_cast<std::size_t>(n) * kBlock * jc_, 0.0);
    }
    bar_a_.assign(static_cast<std::size_t>(wmax) * kBlock * jc_, 0.0);
    bar_z_.assign(static_cast<std::size_t>(wmax) * kBlock * jc_, 0.0);
    adj_.assign(static_cast<std::size_t>(net.output_dim()) * kBlock * jc_, 0.0);
}

void BlockEval::forward(const double* X, int n_points, const double* dirs) {
    n_points_ = n_points;
    const int cols = n_points * jc_;
    const int L = net_->num_layers();

    // seed input jets
    for (int b = 0; b < d_; ++b) {
        double* row = A_[0].data() + static_cast<std::size_t>(b) * cols;
        std::fill(row, row + cols, 0.0);
        for (int p = 0; p < n_points; ++p) {
            row[p * jc_] = X[p * d_ + b];
            if (mode_ != JetMode::Value) row[p * jc_ + 1 + b] = 1.0;
        }
    }

    for (int k = 1; k <= L; ++k) {
        const int nin = net_->widths[k - 1], nout = net_->widths[k];
        affine_forward(net_->params.data() + net_->weight_offset(k),
                       net_->params.data() + net_->bias_offset(k), A_[k - 1].data(),
                       Z_[k].data(), nout, nin, cols, jc_);
        double* A = A_[k].data();
        const double* Z = Z_[k].data();
        if (k < L) {
            for (int i = 0; i < nout; ++i) {
                for (int p = 0; p < n_points; ++p) {
                    const double* z = Z + static_cast<std::size_t>(i) * cols + p * jc_;
                    double* a = A + static_cast<std::size_t>(i) * cols + p * jc_;
                    const double t = std::tanh(z[0]);
                    const double u = 1.0 - t * t;
                    a[0] = t;
                    for (int g = 1; g <= d_ && mode_ != JetMode::Value; ++g) a[g] = u * z[g];
                    if (mode_ == JetMode::Hess) {
                        const double s2 = -2.0 * t * u;
                        int idx = 1 + d_;
                        for (int kk = 0; kk < d_; ++kk)
                            for (int ll = kk; ll < d_; ++ll, ++idx)
                                a[idx] = u * z[idx] + s2 * z[1 + kk] * z[1 + ll];
                    } else if (mode_ == JetMode::Dir2) {
                        const double s2 = -2.0 * t * u;
                        const double* dv = dirs + static_cast<std::size_t>(p) * n_dirs_ * d_;
                        for (int j = 0; j < n_dirs_; ++j) {
                            double zv = 0.0;
                            for (int kk = 0; kk < d_; ++kk) zv += z[1 + kk] * dv[j * d_ + kk];
                            a[1 + d_ + j] = u * z[1 + d_ + j] + s2 * zv * zv;
                        }
                    }
                }
            }
        } else {
            std::memcpy(A, Z, static_cast<std::size_t>(nout) * cols * sizeof(double));
            if (net_->transform == OutputTransform::SoftplusFirst) {
                for (int p = 0; p < n_points; ++p) {
                    const double* z = Z + p * jc_; // output row 0
                    double* a = A + p * jc_;
                    const double v = z[0];
                    const double s1 = sigmoid(v);
                    a[0] = softplus(v);
                    for (int g = 1; g <= d_ && mode_ != JetMode::Value; ++g) a[g] = s1 * z[g];
                    const double s2 = s1 * (1.0 - s1);
                    if (mode_ == JetMode::Hess) {
                        int idx = 1 + d_;
                        for (int kk = 0; kk < d_; ++kk)
                            for (int ll = kk; ll < d_; ++ll, ++idx)
                                a[idx] = s1 * z[idx] + s2 * z[1 + kk] * z[1 + ll];
                    } else if (mode_ == JetMode::Dir2) {
                        const double* dv = dirs + static_cast<std::size_t>(p) * n_dirs_ * d_;
                        for (int j = 0; j < n_dirs_; ++j) {
                            double zv = 0.0;
                            for (int kk = 0; kk < d_; ++kk) zv += z[1 + kk] * dv[j * d_ + kk];
                            a[1 + d_ + j] = s1 * z[1 + d_ + j] + s2 * zv * zv;
                        }
                    }
                }
            }
        }
    }
}

const double* BlockEval::output(int out_index, int p) const {
    const int cols = n_points_ * jc_;
    return A_.back().data() + static_cast<std::size_t>(out_index) * cols + p * jc_;
}

void BlockEval::clear_adjoint() {
    std::fill(adj_.begin(), adj_.end(), 0.0);
}

double* BlockEval::adjoint(int out_index, int p) {
    const int cols = n_points_ * jc_;
    return adj_.data() + static_cast<std::size_t>(out_index) * cols + p * jc_;
}

void BlockEval::backward(double* param_grad, const double* dirs) {
    const int cols = n_points_ * jc_;
    const int L = net_->num_layers();

    // adjoint of final activations -> adjoint of final pre-activations
    double* zbar = bar_z_.data();
    {
        const int nout = net_->widths[L];
        std::memcpy(zbar, adj_.data(), static_cast<std::size_t>(nout) * cols * sizeof(double));
        if (net_->transform == OutputTransform::SoftplusFirst) {
            const double* Z = Z_[L].data();
            for (int p = 0; p < n_points_; ++p) {
                const double* z = Z + p * jc_;
                const double* abar = adj_.data() + p * jc_;
                double* zb = zbar + p * jc_;
                const double v = z[0];
                const double s1 = sigmoid(v);
                const double s2 = s1 * (1.0 - s1);
                const double s3 = s2 * (1.0 - 2.0 * s1);
                double vbar = s1 * abar[0];
                for (int g = 1; g <= d_ && mode_ != JetMode::Value; ++g) {
                    zb[g] = s1 * abar[g];
                    vbar += s2 * z[g] * abar[g];
                }
                if (mode_ == JetMode::Hess) {
                    int idx = 1 + d_;
                    for (int kk = 0; kk < d_; ++kk)
                        for (int ll = kk; ll < d_; ++ll, ++idx) {
                            const double hb = abar[idx];
                            zb[idx] = s1 * hb;
                            zb[1 + kk] += s2 * z[1 + ll] * hb;
                            zb[1 + ll] += s2 * z[1 + kk] * hb;
                            vbar += (s2 * z[idx] + s3 * z[1 + kk] * z[1 + ll]) * hb;
                        }
                } else if (mode_ == JetMode::Dir2) {
                    const double* dv = dirs + static_cast<std::size_t>(p) * n_dirs_ * d_;
                    for (int j = 0; j < n_dirs_; ++j) {
                        const double hb = abar[1 + d_ + j];
                        double zv = 0.0;
                        for (int kk = 0; kk < d_; ++kk) zv += z[1 + kk] * dv[j * d_ + kk];
                        zb[1 + d_ + j] = s1 * hb;
                        for (int kk = 0; kk < d_; ++kk)
                            zb[1 + kk] += 2.0 * s2 * zv * dv[j * d_ + kk] * hb;
                        vbar += (s2 * z[1 + d_ + j] + s3 * zv * zv) * hb;
                    }
                }
                zb[0] = vbar;
            }
        }
    }

    for (int k = L; k >= 1; --k) {
        const int nin = net_->widths[k - 1], nout = net_->widths[k];
        double* abar_prev = bar_a_.data();
        affine_backward(net_->params.data() + net_->weight_offset(k), zbar, A_[k - 1].data(),
                        param_grad + net_->weight_offset(k), param_grad + net_->bias_offset(k),
                        k > 1 ? abar_prev : nullptr, nout, nin, cols, jc_);
        if (k == 1) break;

        // adjoint through tanh of layer k-1
        const double* Z = Z_[k - 1].data();
        for (int i = 0; i < nin; ++i) {
            for (int p = 0; p < n_points_; ++p) {
                const double* z = Z + static_cast<std::size_t>(i) * cols + p * jc_;
                const double* abar = abar_prev + static_cast<std::size_t>(i) * cols + p * jc_;
                double* zb = zbar + static_cast<std::size_t>(i) * cols + p * jc_;
                const double t = std::tanh(z[0]);
                const double u = 1.0 - t * t;
                const double s2 = -2.0 * t * u;
                const double s3 = u * (4.0 * t * t - 2.0 * u);
                double vbar = u * abar[0];
                for (int g = 1; g <= d_ && mode_ != JetMode::Value; ++g) {
                    zb[g] = u * abar[g];
                    vbar += s2 * z[g] * abar[g];
                }
                if (mode_ == JetMode::Hess) {
                    int idx = 1 + d_;
                    for (int kk = 0; kk < d_; ++kk)
                        for (int ll = kk; ll < d_; ++ll, ++idx) {
                            const double hb = abar[idx];
                            zb[idx] = u * hb;
                            zb[1 + kk] += s2 * z[1 + ll] * hb;
                            zb[1 + ll] += s2 * z[1 + kk] * hb;
                            vbar += (s2 * z[idx] + s3 * z[1 + kk] * z[1 + ll]) * hb;
                        }
                } else if (mode_ == JetMode::Dir2) {
                    const double* dv = dirs + static_cast<std::size_t>(p) * n_dirs_ * d_;
                    for (int j = 0; j < n_dirs_; ++j) {
                        const double hb = abar[1 + d_ + j];
                        double zv = 0.0;
                        for (int kk = 0; kk < d_; ++kk) zv += z[1 + kk] * dv[j * d_ + kk];
                        zb[1 + d_ + j] = u * hb;
                        for (int kk = 0; kk < d_; ++kk)
                            zb[1 + kk] += 2.0 * s2 * zv * dv[j * d_ + kk] * hb;
                        vbar += (s2 * z[1 + d_ + j] + s3 * zv * zv) * hb;
                    }
                }
                zb[0] = vbar;
            }
        }
    }
}

PointJet jet(const MlpNet& net, std::span<const double> x, int order) {
    if (static_cast<int>(x.size()) != net.input_dim())
        throw DimensionMismatchError("jet: input length does not match network");
    const int d = net.input_dim(), c = net.output_dim();
    const JetMode mode = order >= 2 ? JetMode::Hess : (order == 1 ? JetMode::Grad : JetMode::Value);
    BlockEval ev(net, mode);
    ev.forward(x.data(), 1);

    PointJet out;
    out.c = c;
    out.d = d;
    out.order = order;
    out.values.resize(c);
    if (order >= 1) out.grad.assign(static_cast<std::size_t>(c) * d, 0.0);
    if (order >= 2) out.hess.assign(static_cast<std::size_t>(c) * d * d, 0.0);
    for (int m = 0; m < c; ++m) {
        const double* o = ev.output(m, 0);
        out.values[m] = o[0];
        for (int k = 0; k < d && order >= 1; ++k) out.grad[m * d + k] = o[1 + k];
        if (order >= 2) {
            for (int k = 0; k < d; ++k)
                for (int l = k; l < d; ++l) {
                    const double h = o[1 + d + packed_index(d, k, l)];
                    out.hess[(m * d + k) * d + l] = h;
                    out.hess[(m * d + l) * d + k] = h;
                }
        }
    }
    return out;
}

} // namespace fopinn
