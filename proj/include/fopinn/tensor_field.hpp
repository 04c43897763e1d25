#pragma once

#include <functional>
#include <map>
#include <optional>

#include "fopinn/geometry.hpp"

namespace fopinn {

/// Symmetric positive definite diffusion tensor, 2x2 or 3x3.
struct SpdTensor {
    int dim = 2;
    double a[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

    static SpdTensor make2d(double a11, double a12, double a22);
    static SpdTensor make3d(double a11, double a12, double a13, double a22, double a23, double a33);
    static SpdTensor identity(int dim);
    static SpdTensor diag2d(double a11, double a22) { return make2d(a11, 0.0, a22); }

    double frob_norm() const;
    void check_spd() const; // throws NotSpdError
};

/// Eigen-decomposition of an SPD tensor at one point: eigenvalues sorted
/// descending, unit eigenvectors with a deterministic sign, and the spatial
/// divergence of each eigenvector field at that point.
struct EigenFrame {
    int dim = 2;
    double lambda[3] = {0, 0, 0};
    double q[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}; // q[j] is the j-th eigenvector
    double div_q[3] = {0, 0, 0};
};

/// Closed-form 2x2 symmetric eigendecomposition. Diagonal tensors (within
/// |a12| <= 1e-14 * max diag) return the canonical basis.
EigenFrame eigen2d(const SpdTensor& t);

/// Cyclic Jacobi sweeps for the 3x3 case, to off-diagonal norm 1e-13*|t|.
EigenFrame eigen3d(const SpdTensor& t);

/// Makes the first component of v with magnitude > 1e-14 positive.
void fix_sign(double* v, int dim);

/// Evaluates Lambda(x), its eigenframe and the eigenvector divergences.
/// Immutable after construction; evaluation is pure.
class TensorField {
  public:
    TensorField() = default;

    static TensorField constant(const SpdTensor& t);
    /// One constant tensor per subdomain label; region of each tensor is
    /// identified by a sample point strictly inside it.
    static TensorField piecewise_constant(const InterfaceSet& interfaces,
                                          const std::vector<std::pair<Pt, SpdTensor>>& pieces);
    static TensorField varying(int dim, std::function<SpdTensor(const Pt&)> eval,
                               const BoxDomain& domain, const InterfaceSet& interfaces = {});

    /// Overrides generic decomposition with a problem-supplied frame
    /// (analytic eigenvectors and divergences, no sign fixing applied).
    void set_explicit_frame(std::function<EigenFrame(const Pt&)> frame);
    /// Analytic row divergence sum_j d_j a_jk, needed by the base PINN
    /// residual for spatially varying tensors.
    void set_entry_divergence(std::function<std::array<double, 3>(const Pt&)> div);

    int dim() const { return dim_; }
    bool has_explicit_frame() const { return static_cast<bool>(frame_fn_); }
    bool is_constant_frame() const;

    SpdTensor tensor_at(const Pt& x) const;
    EigenFrame frame_at(const Pt& x) const; // throws OnInterfaceError via subdomain checks
    std::array<double, 3> entry_divergence(const Pt& x) const;

    /// Central (one-sided near interfaces/boundary) finite differences of the
    /// sign-fixed eigenvector fields; exactly zero for constant-frame fields.
    std::array<double, 3> eigen_divergence(const Pt& x, double h = 0.0) const;

    const InterfaceSet& interfaces() const { return interfaces_; }

  private:
    enum class Kind { Constant, Piecewise, Varying } kind_ = Kind::Constant;
    int dim_ = 2;
    SpdTensor const_tensor_{};
    InterfaceSet interfaces_{};
    std::map<int, SpdTensor> pieces_{};
    std::function<SpdTensor(const Pt&)> eval_fn_;
    std::function<EigenFrame(const Pt&)> frame_fn_;
    std::function<std::array<double, 3>(const Pt&)> entry_div_fn_;
    BoxDomain domain_{};
    bool has_domain_ = false;

    EigenFrame raw_frame(const Pt& x) const; // frame without div_q fill
};

} // namespace fopinn
