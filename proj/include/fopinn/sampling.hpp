#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fopinn/geometry.hpp"

namespace fopinn {

/// Fixed collocation draw: interior points strictly inside the box and off
/// every interface, boundary points on the faces. Immutable once built.
struct PointSet {
    int dim = 2;
    std::uint64_t seed = 0;
    std::vector<double> interior; // n_interior * dim
    std::vector<double> boundary; // n_boundary * dim

    int n_interior() const { return static_cast<int>(interior.size()) / dim; }
    int n_boundary() const { return static_cast<int>(boundary.size()) / dim; }

    Pt interior_at(int i) const;
    Pt boundary_at(int i) const;

    void export_csv(const std::string& path) const;
};

/// Interior points i.i.d. uniform on the box (points landing on an interface
/// are redrawn); boundary points uniform over the total boundary measure,
/// one coordinate clamped exactly to lo/hi. Deterministic in the seed.
PointSet sample(const BoxDomain& domain, const InterfaceSet& interfaces, int n_interior,
                int n_boundary, std::uint64_t seed);

/// Tensor-product uniform grid including boundary nodes; x varies fastest,
/// first point is lo, last is hi.
std::vector<double> eval_grid(const BoxDomain& domain, int resolution);

} // namespace fopinn
