#pragma once

#include <string>
#include <vector>

#include "fopinn/problems.hpp"

namespace fopinn {

/// Nodal finite-difference solution on a uniform grid (x varies fastest).
struct GridSolution {
    int resolution = 0;
    double hx = 0.0, hy = 0.0;
    BoxDomain domain;
    std::vector<double> values;  // resolution * resolution
    double residual_norm = 0.0;  // ||Au-b||_inf / ||b||_inf after the solve

    double at(int ix, int iy) const { return values[iy * resolution + ix]; }
    double interpolate(double x, double y) const; // bilinear
    void export_csv(const std::string& path) const;
};

/// Nine-point second-order discretization of -div(Lambda grad u) = f with
/// Dirichlet data eliminated into the right-hand side. Faces that touch a
/// declared interface use one-sided tensor samples (harmonic mean for the
/// normal entry, arithmetic for the rest); faces lying along an interface
/// split the transverse derivative into one-sided halves. 2D only.
GridSolution solve_reference(const Problem& problem, int resolution);

} // namespace fopinn
