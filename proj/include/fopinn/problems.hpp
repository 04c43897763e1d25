#pragma once

#include <functional>
#include <optional>
#include <string>

#include "fopinn/tensor_field.hpp"

namespace fopinn {

/// One benchmark: domain, tensor field, interfaces, data functions and, when
/// known, the analytical solution. Immutable after registration.
struct Problem {
    std::string name;
    BoxDomain domain;
    InterfaceSet interfaces;
    TensorField tensor;
    std::function<double(const Pt&)> source;   // f
    std::function<double(const Pt&)> boundary; // g on the domain boundary
    std::function<double(const Pt&)> exact;    // u_e; empty when unknown
    double default_epsilon = 0.01;

    int dim() const { return domain.dim; }
    bool has_exact() const { return static_cast<bool>(exact); }
};

/// Smooth anisotropic tensor diag(1, 1e3), u = 1 + sin(2πx) sin(2πy).
Problem p1_smooth_aniso();
/// Isotropic tensor jumping 5 -> 1 across x = 0.5, piecewise-polynomial u.
Problem p2_discont_iso();
/// Tensor I -> [[10,3],[3,1]] across x = 0.5, piecewise-quadratic u.
Problem p3_discont_aniso_2d();
/// 3D extension of p3 with block tensors and u + z.
Problem p4_discont_aniso_3d();
/// Four quadrants with strongly anisotropic diagonal tensors.
Problem p5_strong_aniso_quadrants();
/// Rotated constant tensor (theta = pi/6, k = (1,1000)), box source f = 1000.
Problem p6_local_source_rotated();
/// Radial tensor with eps1 = 5e-3, box source f = 1.
Problem p6b_local_source_radial();

const Problem& get_problem(const std::string& name);
std::vector<std::string> problem_names();

} // namespace fopinn
