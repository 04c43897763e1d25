#include "fopinn/problems.hpp"

#include <cmath>
#include <map>

namespace fopinn {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

} // namespace

Problem p1_smooth_aniso() {
    Problem p;
    p.name = "p1_smooth_aniso";
    p.domain = BoxDomain::unit_square();
    p.tensor = TensorField::constant(SpdTensor::diag2d(1.0, 1000.0));
    p.exact = [](const Pt& x) { return 1.0 + std::sin(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]); };
    p.source = [](const Pt& x) {
        return kTwoPi * kTwoPi * (1.0 + 1000.0) * std::sin(kTwoPi * x[0]) *
               std::sin(kTwoPi * x[1]);
    };
    p.boundary = p.exact;
    p.default_epsilon = 0.01;
    return p;
}

Problem p2_discont_iso() {
    Problem p;
    p.name = "p2_discont_iso";
    p.domain = BoxDomain::unit_square();
    p.interfaces.items.push_back(Interface::axis_plane(0, 0.5));
    p.tensor = TensorField::piecewise_constant(
        p.interfaces, {{make_pt(0.25, 0.5), SpdTensor::diag2d(5.0, 5.0)},
                       {make_pt(0.75, 0.5), SpdTensor::diag2d(1.0, 1.0)}});
    p.exact = [](const Pt& x) {
        const double yy = x[1] - x[1] * x[1];
        return x[0] <= 0.5 ? (x[0] * x[0] + 10.0) * yy : (5.0 * x[0] * x[0] + 9.0) * yy;
    };
    // f = -div(Lambda grad u), branchwise
    p.source = [](const Pt& x) {
        const double yy = x[1] - x[1] * x[1];
        if (x[0] <= 0.5) return -5.0 * (2.0 * yy - 2.0 * (x[0] * x[0] + 10.0));
        return -1.0 * (10.0 * yy - 2.0 * (5.0 * x[0] * x[0] + 9.0));
    };
    p.boundary = p.exact;
    return p;
}

namespace {

double p3_exact_2d(double x, double y) {
    if (x <= 0.5) return -2.0 * y * y + 4.0 * x * y + 6.0 * x + 2.0 * y + 1.0;
    return -2.0 * y * y + 1.6 * x * y - 0.6 * x + 3.2 * y + 4.3;
}

// Left: Lambda = I, u_xx = 0, u_yy = -4, u_xy = 4   -> f = 4
// Right: Lambda = [[10,3],[3,1]], u_xy = 1.6, u_yy = -4 -> f = -(2*3*1.6 - 4)
double p3_source_2d(double x) { return x <= 0.5 ? 4.0 : -5.6; }

} // namespace

Problem p3_discont_aniso_2d() {
    Problem p;
    p.name = "p3_discont_aniso_2d";
    p.domain = BoxDomain::unit_square();
    p.interfaces.items.push_back(Interface::axis_plane(0, 0.5));
    p.tensor = TensorField::piecewise_constant(
        p.interfaces, {{make_pt(0.25, 0.5), SpdTensor::identity(2)},
                       {make_pt(0.75, 0.5), SpdTensor::make2d(10.0, 3.0, 1.0)}});
    p.exact = [](const Pt& x) { return p3_exact_2d(x[0], x[1]); };
    p.source = [](const Pt& x) { return p3_source_2d(x[0]); };
    p.boundary = p.exact;
    return p;
}

Problem p4_discont_aniso_3d() {
    Problem p;
    p.name = "p4_discont_aniso_3d";
    p.domain = BoxDomain::unit_cube();
    p.interfaces.items.push_back(Interface::axis_plane(0, 0.5));
    p.tensor = TensorField::piecewise_constant(
        p.interfaces,
        {{make_pt(0.25, 0.5, 0.5), SpdTensor::identity(3)},
         {make_pt(0.75, 0.5, 0.5), SpdTensor::make3d(10.0, 3.0, 0.0, 1.0, 0.0, 1.0)}});
    p.exact = [](const Pt& x) { return p3_exact_2d(x[0], x[1]) + x[2]; };
    p.source = [](const Pt& x) { return p3_source_2d(x[0]); };
    p.boundary = p.exact;
    return p;
}

namespace {

struct QuadrantData {
    double ax, ay, alpha;
};

// quadrant index: 1 (x<=.5,y<=.5), 2 (x>.5,y<=.5), 3 (x>.5,y>.5), 4 (x<=.5,y>.5)
const QuadrantData kQuadrants[4] = {
    {10.0, 0.01, 0.1}, {0.1, 100.0, 10.0}, {0.01, 10.0, 100.0}, {100.0, 0.1, 0.01}};

const QuadrantData& quadrant_of(const Pt& x) {
    if (x[1] <= 0.5) return x[0] <= 0.5 ? kQuadrants[0] : kQuadrants[1];
    return x[0] > 0.5 ? kQuadrants[2] : kQuadrants[3];
}

} // namespace

Problem p5_strong_aniso_quadrants() {
    Problem p;
    p.name = "p5_strong_aniso_quadrants";
    p.domain = BoxDomain::unit_square();
    p.interfaces.items.push_back(Interface::axis_plane(0, 0.5));
    p.interfaces.items.push_back(Interface::axis_plane(1, 0.5));
    std::vector<std::pair<Pt, SpdTensor>> pieces;
    const Pt samples[4] = {make_pt(0.25, 0.25), make_pt(0.75, 0.25), make_pt(0.75, 0.75),
                           make_pt(0.25, 0.75)};
    for (int i = 0; i < 4; ++i)
        pieces.emplace_back(samples[i], SpdTensor::diag2d(kQuadrants[i].ax, kQuadrants[i].ay));
    p.tensor = TensorField::piecewise_constant(p.interfaces, pieces);
    p.exact = [](const Pt& x) {
        return quadrant_of(x).alpha * std::sin(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]);
    };
    p.source = [](const Pt& x) {
        const auto& q = quadrant_of(x);
        return kTwoPi * kTwoPi * (q.ax + q.ay) * q.alpha * std::sin(kTwoPi * x[0]) *
               std::sin(kTwoPi * x[1]);
    };
    p.boundary = [](const Pt&) { return 0.0; };
    return p;
}

Problem p6_local_source_rotated() {
    Problem p;
    p.name = "p6_local_source_rotated";
    p.domain = BoxDomain::unit_square();
    const double th = M_PI / 6.0, k1 = 1.0, k2 = 1000.0;
    const double c = std::cos(th), s = std::sin(th);
    // R(-th) diag(k1,k2) R(-th)^T
    const double a11 = c * c * k1 + s * s * k2;
    const double a12 = c * s * (k2 - k1);
    const double a22 = s * s * k1 + c * c * k2;
    p.tensor = TensorField::constant(SpdTensor::make2d(a11, a12, a22));
    EigenFrame frame;
    frame.dim = 2;
    frame.lambda[0] = k2;
    frame.lambda[1] = k1;
    frame.q[0][0] = s;
    frame.q[0][1] = c;
    frame.q[1][0] = c;
    frame.q[1][1] = -s;
    p.tensor.set_explicit_frame([frame](const Pt&) { return frame; });
    p.source = [](const Pt& x) {
        const double lo = 7.0 / 18.0, hi = 11.0 / 18.0;
        return (x[0] >= lo && x[0] <= hi && x[1] >= lo && x[1] <= hi) ? 1000.0 : 0.0;
    };
    p.boundary = [](const Pt&) { return 0.0; };
    return p;
}

Problem p6b_local_source_radial() {
    Problem p;
    p.name = "p6b_local_source_radial";
    p.domain = BoxDomain::unit_square();
    const double eps1 = 5.0e-3;
    p.tensor = TensorField::varying(
        2,
        [eps1](const Pt& x) {
            const double xx = x[0], yy = x[1];
            return SpdTensor::make2d(eps1 * xx * xx + yy * yy, (eps1 - 1.0) * xx * yy,
                                     xx * xx + eps1 * yy * yy);
        },
        BoxDomain::unit_square());
    p.tensor.set_explicit_frame([eps1](const Pt& x) {
        const double r = std::max(std::sqrt(x[0] * x[0] + x[1] * x[1]), 1e-8);
        EigenFrame f;
        f.dim = 2;
        f.lambda[0] = r * r;        // tangential
        f.lambda[1] = eps1 * r * r; // radial
        f.q[0][0] = -x[1] / r;
        f.q[0][1] = x[0] / r;
        f.q[1][0] = x[0] / r;
        f.q[1][1] = x[1] / r;
        f.div_q[0] = 0.0;
        f.div_q[1] = 1.0 / r;
        return f;
    });
    p.tensor.set_entry_divergence([eps1](const Pt& x) {
        return std::array<double, 3>{(3.0 * eps1 - 1.0) * x[0], (3.0 * eps1 - 1.0) * x[1], 0.0};
    });
    p.source = [](const Pt& x) {
        const double lo = 3.0 / 8.0, hi = 5.0 / 8.0;
        return (x[0] >= lo && x[0] <= hi && x[1] >= lo && x[1] <= hi) ? 1.0 : 0.0;
    };
    p.boundary = [](const Pt&) { return 0.0; };
    return p;
}

const Problem& get_problem(const std::string& name) {
    static const std::map<std::string, Problem> registry = [] {
        std::map<std::string, Problem> m;
        for (auto&& p : {p1_smooth_aniso(), p2_discont_iso(), p3_discont_aniso_2d(),
                         p4_discont_aniso_3d(), p5_strong_aniso_quadrants(),
                         p6_local_source_rotated(), p6b_local_source_radial()})
            m.emplace(p.name, std::move(p));
        return m;
    }();
    auto it = registry.find(name);
    if (it == registry.end()) throw ConfigError("unknown problem: " + name);
    return it->second;
}

std::vector<std::string> problem_names() {
    std::vector<std::string> names;
    for (auto&& n : {"p1_smooth_aniso", "p2_discont_iso", "p3_discont_aniso_2d",
                     "p4_discont_aniso_3d", "p5_strong_aniso_quadrants",
                     "p6_local_source_rotated", "p6b_local_source_radial"})
        names.emplace_back(n);
    return names;
}

} // namespace fopinn
