#include "fopinn/refsolve.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace fopinn {

double GridSolution::interpolate(double x, double y) const {
    const int n = resolution - 1;
    double fx = (x - domain.lo[0]) / hx;
    double fy = (y - domain.lo[1]) / hy;
    fx = std::clamp(fx, 0.0, static_cast<double>(n));
    fy = std::clamp(fy, 0.0, static_cast<double>(n));
    const int ix = std::min(static_cast<int>(fx), n - 1);
    const int iy = std::min(static_cast<int>(fy), n - 1);
    const double tx = fx - ix, ty = fy - iy;
    return (1 - tx) * (1 - ty) * at(ix, iy) + tx * (1 - ty) * at(ix + 1, iy) +
           (1 - tx) * ty * at(ix, iy + 1) + tx * ty * at(ix + 1, iy + 1);
}

void GridSolution::export_csv(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ConfigError("cannot open " + path + " for writing");
    std::fprintf(f, "x,y,u\n");
    for (int iy = 0; iy < resolution; ++iy)
        for (int ix = 0; ix < resolution; ++ix)
            std::fprintf(f, "%.17g,%.17g,%.17g\n", domain.lo[0] + ix * hx,
                         domain.lo[1] + iy * hy, at(ix, iy));
    std::fclose(f);
}

namespace {

struct Entry {
    int ix, iy;
    double coef;
};

// Tensor sample that never lands exactly on an interface: on a hit, steps
// h/16 to both sides along the interface normal and averages.
SpdTensor sample_tensor(const Problem& p, Pt x, double h) {
    const auto& ifs = p.interfaces;
    if (!ifs.empty() && ifs.min_distance(x) <= 1e-9 * h) {
        for (const auto& it : ifs.items) {
            if (it.distance(x) > 1e-9 * h) continue;
            Pt xa = x, xb = x;
            const int axis = it.kind() == Interface::Kind::AxisPlane ? it.axis() : 0;
            xa[axis] -= h / 16.0;
            xb[axis] += h / 16.0;
            const SpdTensor ta = p.tensor.tensor_at(xa), tb = p.tensor.tensor_at(xb);
            SpdTensor t = ta;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) t.a[i][j] = 0.5 * (ta.a[i][j] + tb.a[i][j]);
            return t;
        }
    }
    return p.tensor.tensor_at(x);
}

double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

// Is there an axis-plane interface along coordinate value v on this axis?
bool on_axis_interface(const InterfaceSet& ifs, int axis, double v, double tol) {
    for (const auto& it : ifs.items)
        if (it.kind() == Interface::Kind::AxisPlane && it.axis() == axis &&
            std::abs(it.offset() - v) <= tol)
            return true;
    return false;
}

} // namespace

GridSolution solve_reference(const Problem& problem, int resolution) {
    if (problem.dim() != 2) throw ConfigError("reference solver is 2D-only");
    if (resolution < 3) throw ConfigError("reference solver needs resolution >= 3");

    GridSolution sol;
    sol.resolution = resolution;
    sol.domain = problem.domain;
    const int n = resolution - 1;
    const double hx = problem.domain.extent(0) / n;
    const double hy = problem.domain.extent(1) / n;
    sol.hx = hx;
    sol.hy = hy;
    const double x0 = problem.domain.lo[0], y0 = problem.domain.lo[1];
    auto node_x = [&](int ix) { return x0 + ix * hx; };
    auto node_y = [&](int iy) { return y0 + iy * hy; };
    const double h = std::min(hx, hy);
    const auto& ifs = problem.interfaces;

    // Flux through the x-face between (i,j) and (i+1,j): returns node stencil.
    auto x_face_flux = [&](int i, int j, std::vector<Entry>& st) {
        st.clear();
        const double xm = x0 + (i + 0.5) * hx, ym = node_y(j);
        if (on_axis_interface(ifs, 1, ym, 1e-12)) {
            // face lies along a horizontal interface: split the u_y term
            const SpdTensor tb = sample_tensor(problem, make_pt(xm, ym - 0.25 * hy), h);
            const SpdTensor tt = sample_tensor(problem, make_pt(xm, ym + 0.25 * hy), h);
            const double a11 = 0.5 * (tb.a[0][0] + tt.a[0][0]);
            st.push_back({i + 1, j, a11 / hx});
            st.push_back({i, j, -a11 / hx});
            const double cb = 0.5 * tb.a[0][1] / (2.0 * hy); // one-sided below
            st.push_back({i, j, cb});
            st.push_back({i + 1, j, cb});
            st.push_back({i, j - 1, -cb});
            st.push_back({i + 1, j - 1, -cb});
            const double ct = 0.5 * tt.a[0][1] / (2.0 * hy); // one-sided above
            st.push_back({i, j + 1, ct});
            st.push_back({i + 1, j + 1, ct});
            st.push_back({i, j, -ct});
            st.push_back({i + 1, j, -ct});
            return;
        }
        const Pt sm = make_pt(xm - 0.25 * hx, ym), sp = make_pt(xm + 0.25 * hx, ym);
        double a11, a12;
        const bool crosses =
            !ifs.empty() && (ifs.min_distance(make_pt(xm, ym)) <= 1e-12 ||
                             ifs.subdomain_of_unchecked(sm) != ifs.subdomain_of_unchecked(sp));
        if (crosses) {
            const SpdTensor tl = sample_tensor(problem, sm, h);
            const SpdTensor tr = sample_tensor(problem, sp, h);
            a11 = harmonic(tl.a[0][0], tr.a[0][0]);
            a12 = 0.5 * (tl.a[0][1] + tr.a[0][1]);
        } else {
            const SpdTensor t = sample_tensor(problem, make_pt(xm, ym), h);
            a11 = t.a[0][0];
            a12 = t.a[0][1];
        }
        st.push_back({i + 1, j, a11 / hx});
        st.push_back({i, j, -a11 / hx});
        const double c = a12 / (4.0 * hy);
        st.push_back({i, j + 1, c});
        st.push_back({i + 1, j + 1, c});
        st.push_back({i, j - 1, -c});
        st.push_back({i + 1, j - 1, -c});
    };

    auto y_face_flux = [&](int i, int j, std::vector<Entry>& st) {
        st.clear();
        const double xm = node_x(i), ym = y0 + (j + 0.5) * hy;
        if (on_axis_interface(ifs, 0, xm, 1e-12)) {
            const SpdTensor tl = sample_tensor(problem, make_pt(xm - 0.25 * hx, ym), h);
            const SpdTensor tr = sample_tensor(problem, make_pt(xm + 0.25 * hx, ym), h);
            const double a22 = 0.5 * (tl.a[1][1] + tr.a[1][1]);
            st.push_back({i, j + 1, a22 / hy});
            st.push_back({i, j, -a22 / hy});
            const double cl = 0.5 * tl.a[0][1] / (2.0 * hx);
            st.push_back({i, j, cl});
            st.push_back({i, j + 1, cl});
            st.push_back({i - 1, j, -cl});
            st.push_back({i - 1, j + 1, -cl});
            const double cr = 0.5 * tr.a[0][1] / (2.0 * hx);
            st.push_back({i + 1, j, cr});
            st.push_back({i + 1, j + 1, cr});
            st.push_back({i, j, -cr});
            st.push_back({i, j + 1, -cr});
            return;
        }
        const Pt sm = make_pt(xm, ym - 0.25 * hy), sp = make_pt(xm, ym + 0.25 * hy);
        double a22, a12;
        const bool crosses =
            !ifs.empty() && (ifs.min_distance(make_pt(xm, ym)) <= 1e-12 ||
                             ifs.subdomain_of_unchecked(sm) != ifs.subdomain_of_unchecked(sp));
        if (crosses) {
            const SpdTensor tb = sample_tensor(problem, sm, h);
            const SpdTensor tt = sample_tensor(problem, sp, h);
            a22 = harmonic(tb.a[1][1], tt.a[1][1]);
            a12 = 0.5 * (tb.a[0][1] + tt.a[0][1]);
        } else {
            const SpdTensor t = sample_tensor(problem, make_pt(xm, ym), h);
            a22 = t.a[1][1];
            a12 = t.a[0][1];
        }
        st.push_back({i, j + 1, a22 / hy});
        st.push_back({i, j, -a22 / hy});
        const double c = a12 / (4.0 * hx);
        st.push_back({i + 1, j, c});
        st.push_back({i + 1, j + 1, c});
        st.push_back({i - 1, j, -c});
        st.push_back({i - 1, j + 1, -c});
    };

    const int n_unknown = (n - 1) * (n - 1);
    auto unknown_of = [&](int ix, int iy) -> int {
        if (ix <= 0 || ix >= n || iy <= 0 || iy >= n) return -1;
        return (iy - 1) * (n - 1) + (ix - 1);
    };

    Eigen::VectorXd b(n_unknown);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n_unknown) * 12);
    std::vector<Entry> st;

    for (int iy = 1; iy < n; ++iy) {
        for (int ix = 1; ix < n; ++ix) {
            const int row = unknown_of(ix, iy);
            // quarter-point average of the source over the control volume
            double fv = 0.0;
            for (int sx = -1; sx <= 1; sx += 2)
                for (int sy = -1; sy <= 1; sy += 2)
                    fv += problem.source(
                        make_pt(node_x(ix) + 0.25 * sx * hx, node_y(iy) + 0.25 * sy * hy));
            b(row) = 0.25 * fv;

            auto add_face = [&](const std::vector<Entry>& stencil, double sign) {
                // equation: -(Fx_r - Fx_l + Fy_t - Fy_b)/h = f
                for (const auto& e : stencil) {
                    const double coef = -sign * e.coef;
                    const int col = unknown_of(e.ix, e.iy);
                    if (col >= 0)
                        trips.emplace_back(row, col, coef);
                    else
                        b(row) -= coef * problem.boundary(make_pt(node_x(e.ix), node_y(e.iy)));
                }
            };
            x_face_flux(ix, iy, st);
            add_face(st, 1.0 / hx);
            x_face_flux(ix - 1, iy, st);
            add_face(st, -1.0 / hx);
            y_face_flux(ix, iy, st);
            add_face(st, 1.0 / hy);
            y_face_flux(ix, iy - 1, st);
            add_face(st, -1.0 / hy);
        }
    }

    Eigen::SparseMatrix<double> A(n_unknown, n_unknown);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
        throw SingularSystemError("reference solve: factorization failed");
    Eigen::VectorXd u = lu.solve(b);

    auto residual = [&] {
        const Eigen::VectorXd r = A * u - b;
        const double bn = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
        return r.cwiseAbs().maxCoeff() / bn;
    };
    double res = residual();
    if (res > 1e-10) {
        const Eigen::VectorXd r = b - A * u;
        u += lu.solve(r);
        res = residual();
        if (res > 1e-10)
            throw NoConvergenceError("reference solve: residual above tolerance");
    }
    sol.residual_norm = res;

    sol.values.assign(static_cast<std::size_t>(resolution) * resolution, 0.0);
    for (int iy = 0; iy <= n; ++iy)
        for (int ix = 0; ix <= n; ++ix) {
            const int col = unknown_of(ix, iy);
            sol.values[iy * resolution + ix] =
                col >= 0 ? u(col) : problem.boundary(make_pt(node_x(ix), node_y(iy)));
        }
    return sol;
}

} // namespace fopinn
