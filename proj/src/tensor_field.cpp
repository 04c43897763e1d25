#include "fopinn/tensor_field.hpp"

#include <algorithm>
#include <cmath>

namespace fopinn {

SpdTensor SpdTensor::make2d(double a11, double a12, double a22) {
    SpdTensor t;
    t.dim = 2;
    t.a[0][0] = a11;
    t.a[0][1] = t.a[1][0] = a12;
    t.a[1][1] = a22;
    t.check_spd();
    return t;
}

SpdTensor SpdTensor::make3d(double a11, double a12, double a13, double a22, double a23,
                            double a33) {
    SpdTensor t;
    t.dim = 3;
    t.a[0][0] = a11;
    t.a[0][1] = t.a[1][0] = a12;
    t.a[0][2] = t.a[2][0] = a13;
    t.a[1][1] = a22;
    t.a[1][2] = t.a[2][1] = a23;
    t.a[2][2] = a33;
    t.check_spd();
    return t;
}

SpdTensor SpdTensor::identity(int dim) {
    SpdTensor t;
    t.dim = dim;
    for (int i = 0; i < dim; ++i) t.a[i][i] = 1.0;
    return t;
}

double SpdTensor::frob_norm() const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) s += a[i][j] * a[i][j];
    return std::sqrt(s);
}

void SpdTensor::check_spd() const {
    // leading principal minors (Sylvester)
    if (!(a[0][0] > 0.0)) throw NotSpdError("tensor: a11 <= 0");
    const double det2 = a[0][0] * a[1][1] - a[0][1] * a[0][1];
    if (!(det2 > 0.0)) throw NotSpdError("tensor: 2x2 leading minor <= 0");
    if (dim == 3) {
        const double det3 = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[1][2]) -
                            a[0][1] * (a[0][1] * a[2][2] - a[1][2] * a[0][2]) +
                            a[0][2] * (a[0][1] * a[1][2] - a[1][1] * a[0][2]);
        if (!(det3 > 0.0)) throw NotSpdError("tensor: determinant <= 0");
    }
}

void fix_sign(double* v, int dim) {
    for (int k = 0; k < dim; ++k) {
        if (std::abs(v[k]) > 1e-14) {
            if (v[k] < 0.0)
                for (int j = 0; j < dim; ++j) v[j] = -v[j];
            return;
        }
    }
}

namespace {

bool is_diagonal(const SpdTensor& t) {
    double dmax = 0.0;
    for (int i = 0; i < t.dim; ++i) dmax = std::max(dmax, std::abs(t.a[i][i]));
    for (int i = 0; i < t.dim; ++i)
        for (int j = i + 1; j < t.dim; ++j)
            if (std::abs(t.a[i][j]) > 1e-14 * dmax) return false;
    return true;
}

EigenFrame canonical_frame(const SpdTensor& t) {
    EigenFrame f;
    f.dim = t.dim;
    int order[3] = {0, 1, 2};
    // stable descending sort of the diagonal entries; ties keep axis order
    std::stable_sort(order, order + t.dim,
                     [&](int i, int j) { return t.a[i][i] > t.a[j][j]; });
    for (int j = 0; j < t.dim; ++j) {
        f.lambda[j] = t.a[order[j]][order[j]];
        f.q[j][order[j]] = 1.0;
    }
    return f;
}

} // namespace

EigenFrame eigen2d(const SpdTensor& t) {
    if (t.dim != 2) throw DimensionMismatchError("eigen2d: tensor is not 2x2");
    t.check_spd();
    if (is_diagonal(t)) return canonical_frame(t);

    const double a11 = t.a[0][0], a12 = t.a[0][1], a22 = t.a[1][1];
    const double s = std::sqrt((a11 - a22) * (a11 - a22) + 4.0 * a12 * a12);
    EigenFrame f;
    f.dim = 2;
    f.lambda[0] = 0.5 * (a11 + a22 + s);
    f.lambda[1] = 0.5 * (a11 + a22 - s);

    // Two algebraically equivalent eigenvector forms; keep the longer one.
    const double ax = a12, ay = f.lambda[0] - a11;
    const double bx = f.lambda[0] - a22, by = a12;
    double qx, qy;
    if (ax * ax + ay * ay >= bx * bx + by * by) {
        qx = ax;
        qy = ay;
    } else {
        qx = bx;
        qy = by;
    }
    const double n = std::sqrt(qx * qx + qy * qy);
    f.q[0][0] = qx / n;
    f.q[0][1] = qy / n;
    f.q[1][0] = -f.q[0][1];
    f.q[1][1] = f.q[0][0];
    fix_sign(f.q[0], 2);
    fix_sign(f.q[1], 2);
    return f;
}

EigenFrame eigen3d(const SpdTensor& t) {
    if (t.dim != 3) throw DimensionMismatchError("eigen3d: tensor is not 3x3");
    t.check_spd();
    if (is_diagonal(t)) return canonical_frame(t);

    double a[3][3];
    double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a[i][j] = t.a[i][j];

    const double tol = 1e-13 * t.frob_norm();
    bool converged = false;
    for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
        double off = std::sqrt(2.0 * (a[0][1] * a[0][1] + a[0][2] * a[0][2] +
                                      a[1][2] * a[1][2]));
        if (off <= tol) {
            converged = true;
            break;
        }
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(a[p][q]) <= 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double sgn = theta >= 0.0 ? 1.0 : -1.0;
                const double tt = sgn / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(tt * tt + 1.0);
                const double s = tt * c;
                for (int k = 0; k < 3; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < 3; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    {
        const double off = std::sqrt(2.0 * (a[0][1] * a[0][1] + a[0][2] * a[0][2] +
                                            a[1][2] * a[1][2]));
        if (off > tol) throw NoConvergenceError("eigen3d: Jacobi sweeps did not converge");
    }

    int order[3] = {0, 1, 2};
    std::stable_sort(order, order + 3, [&](int i, int j) { return a[i][i] > a[j][j]; });
    EigenFrame f;
    f.dim = 3;
    for (int j = 0; j < 3; ++j) {
        f.lambda[j] = a[order[j]][order[j]];
        for (int k = 0; k < 3; ++k) f.q[j][k] = v[k][order[j]];
        double n = std::sqrt(f.q[j][0] * f.q[j][0] + f.q[j][1] * f.q[j][1] +
                             f.q[j][2] * f.q[j][2]);
        for (int k = 0; k < 3; ++k) f.q[j][k] /= n;
        fix_sign(f.q[j], 3);
    }
    return f;
}

TensorField TensorField::constant(const SpdTensor& t) {
    TensorField f;
    f.kind_ = Kind::Constant;
    f.dim_ = t.dim;
    f.const_tensor_ = t;
    return f;
}

TensorField TensorField::piecewise_constant(const InterfaceSet& interfaces,
                                            const std::vector<std::pair<Pt, SpdTensor>>& pieces) {
    TensorField f;
    f.kind_ = Kind::Piecewise;
    f.interfaces_ = interfaces;
    if (pieces.empty()) throw ConfigError("piecewise tensor: no pieces given");
    f.dim_ = pieces.front().second.dim;
    for (const auto& [sample, tensor] : pieces) {
        const int label = interfaces.subdomain_of(sample);
        f.pieces_[label] = tensor;
    }
    return f;
}

TensorField TensorField::varying(int dim, std::function<SpdTensor(const Pt&)> eval,
                                 const BoxDomain& domain, const InterfaceSet& interfaces) {
    TensorField f;
    f.kind_ = Kind::Varying;
    f.dim_ = dim;
    f.eval_fn_ = std::move(eval);
    f.domain_ = domain;
    f.has_domain_ = true;
    f.interfaces_ = interfaces;
    return f;
}

void TensorField::set_explicit_frame(std::function<EigenFrame(const Pt&)> frame) {
    frame_fn_ = std::move(frame);
}

void TensorField::set_entry_divergence(std::function<std::array<double, 3>(const Pt&)> div) {
    entry_div_fn_ = std::move(div);
}

bool TensorField::is_constant_frame() const {
    return kind_ == Kind::Constant || kind_ == Kind::Piecewise;
}

SpdTensor TensorField::tensor_at(const Pt& x) const {
    switch (kind_) {
        case Kind::Constant:
            return const_tensor_;
        case Kind::Piecewise: {
            const int label = interfaces_.subdomain_of(x);
            auto it = pieces_.find(label);
            if (it == pieces_.end())
                throw ConfigError("piecewise tensor: no tensor registered for this subdomain");
            return it->second;
        }
        case Kind::Varying:
            return eval_fn_(x);
    }
    return const_tensor_;
}

EigenFrame TensorField::raw_frame(const Pt& x) const {
    if (frame_fn_) return frame_fn_(x);
    const SpdTensor t = tensor_at(x);
    return t.dim == 2 ? eigen2d(t) : eigen3d(t);
}

EigenFrame TensorField::frame_at(const Pt& x) const {
    EigenFrame f = raw_frame(x);
    if (frame_fn_) return f; // explicit frames carry their own divergences
    if (is_constant_frame()) {
        for (int j = 0; j < dim_; ++j) f.div_q[j] = 0.0;
        return f;
    }
    const auto div = eigen_divergence(x);
    for (int j = 0; j < dim_; ++j) f.div_q[j] = div[j];
    return f;
}

std::array<double, 3> TensorField::entry_divergence(const Pt& x) const {
    if (entry_div_fn_) return entry_div_fn_(x);
    return {0.0, 0.0, 0.0}; // constant and piecewise-constant fields
}

std::array<double, 3> TensorField::eigen_divergence(const Pt& x, double h) const {
    std::array<double, 3> out{0.0, 0.0, 0.0};
    if (is_constant_frame() && !frame_fn_) return out;
    if (frame_fn_) {
        const EigenFrame f = frame_fn_(x);
        return {f.div_q[0], f.div_q[1], f.div_q[2]};
    }
    if (h <= 0.0) h = 1e-5 * (has_domain_ ? domain_.diameter() : 1.0);

    const int home = interfaces_.subdomain_of(x); // throws OnInterface when applicable
    auto frame_ok = [&](const Pt& p, EigenFrame& f) {
        if (has_domain_ && !domain_.contains(p)) return false;
        if (!interfaces_.empty()) {
            if (interfaces_.min_distance(p) <= kOnInterfaceTol) return false;
            if (interfaces_.subdomain_of_unchecked(p) != home) return false;
        }
        f = raw_frame(p);
        return true;
    };

    const EigenFrame fc = raw_frame(x);
    for (int k = 0; k < dim_; ++k) {
        Pt xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        EigenFrame fp, fm;
        const bool okp = frame_ok(xp, fp);
        const bool okm = frame_ok(xm, fm);
        for (int j = 0; j < dim_; ++j) {
            double deriv;
            if (okp && okm)
                deriv = (fp.q[j][k] - fm.q[j][k]) / (2.0 * h);
            else if (okp)
                deriv = (fp.q[j][k] - fc.q[j][k]) / h;
            else if (okm)
                deriv = (fc.q[j][k] - fm.q[j][k]) / h;
            else
                throw ConfigError("eigen_divergence: no valid stencil arm on axis");
            out[j] += deriv;
        }
    }
    return out;
}

} // namespace fopinn
