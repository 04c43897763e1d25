#include "fopinn/sampling.hpp"

#include <cstdio>

#include "fopinn/net.hpp" // SplitMix64

namespace fopinn {

Pt PointSet::interior_at(int i) const {
    Pt p{0, 0, 0};
    for (int k = 0; k < dim; ++k) p[k] = interior[i * dim + k];
    return p;
}

Pt PointSet::boundary_at(int i) const {
    Pt p{0, 0, 0};
    for (int k = 0; k < dim; ++k) p[k] = boundary[i * dim + k];
    return p;
}

void PointSet::export_csv(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ConfigError("cannot open " + path + " for writing");
    std::fprintf(f, dim == 2 ? "x,y,kind\n" : "x,y,z,kind\n");
    for (int i = 0; i < n_interior(); ++i) {
        for (int k = 0; k < dim; ++k)
            std::fprintf(f, "%.17g,", interior[i * dim + k]);
        std::fprintf(f, "interior\n");
    }
    for (int i = 0; i < n_boundary(); ++i) {
        for (int k = 0; k < dim; ++k)
            std::fprintf(f, "%.17g,", boundary[i * dim + k]);
        std::fprintf(f, "boundary\n");
    }
    std::fclose(f);
}

PointSet sample(const BoxDomain& domain, const InterfaceSet& interfaces, int n_interior,
                int n_boundary, std::uint64_t seed) {
    if (n_interior < 1 || n_boundary < 1)
        throw ConfigError("sample: need at least one interior and one boundary point");
    PointSet ps;
    ps.dim = domain.dim;
    ps.seed = seed;
    ps.interior.reserve(static_cast<std::size_t>(n_interior) * domain.dim);
    ps.boundary.reserve(static_cast<std::size_t>(n_boundary) * domain.dim);

    SplitMix64 rng(seed);
    const int d = domain.dim;

    for (int i = 0; i < n_interior; ++i) {
        for (;;) {
            Pt p{0, 0, 0};
            for (int k = 0; k < d; ++k)
                p[k] = domain.lo[k] + rng.next_unit() * domain.extent(k);
            if (!domain.strictly_inside(p)) continue;
            if (!interfaces.empty() && interfaces.min_distance(p) <= kOnInterfaceTol) continue;
            for (int k = 0; k < d; ++k) ps.interior.push_back(p[k]);
            break;
        }
    }

    // faces weighted by their measure
    const int n_faces = 2 * d;
    std::vector<double> weight(n_faces);
    double total = 0.0;
    for (int f = 0; f < n_faces; ++f) {
        const int axis = f / 2;
        double area = 1.0;
        for (int k = 0; k < d; ++k)
            if (k != axis) area *= domain.extent(k);
        weight[f] = area;
        total += area;
    }
    for (int i = 0; i < n_boundary; ++i) {
        double r = rng.next_unit() * total;
        int face = 0;
        while (face < n_faces - 1 && r >= weight[face]) {
            r -= weight[face];
            ++face;
        }
        const int axis = face / 2;
        Pt p{0, 0, 0};
        for (int k = 0; k < d; ++k)
            p[k] = domain.lo[k] + rng.next_unit() * domain.extent(k);
        p[axis] = (face % 2 == 0) ? domain.lo[axis] : domain.hi[axis];
        for (int k = 0; k < d; ++k) ps.boundary.push_back(p[k]);
    }
    return ps;
}

std::vector<double> eval_grid(const BoxDomain& domain, int resolution) {
    if (resolution < 2) throw ConfigError("eval_grid: resolution must be >= 2");
    const int d = domain.dim;
    std::vector<double> axis_nodes(static_cast<std::size_t>(d) * resolution);
    for (int k = 0; k < d; ++k) {
        const double h = domain.extent(k) / (resolution - 1);
        for (int i = 0; i < resolution; ++i)
            axis_nodes[k * resolution + i] =
                (i == resolution - 1) ? domain.hi[k] : domain.lo[k] + i * h;
    }
    std::size_t n = 1;
    for (int k = 0; k < d; ++k) n *= resolution;
    std::vector<double> pts;
    pts.reserve(n * d);
    if (d == 2) {
        for (int iy = 0; iy < resolution; ++iy)
            for (int ix = 0; ix < resolution; ++ix) {
                pts.push_back(axis_nodes[ix]);
                pts.push_back(axis_nodes[resolution + iy]);
            }
    } else {
        for (int iz = 0; iz < resolution; ++iz)
            for (int iy = 0; iy < resolution; ++iy)
                for (int ix = 0; ix < resolution; ++ix) {
                    pts.push_back(axis_nodes[ix]);
                    pts.push_back(axis_nodes[resolution + iy]);
                    pts.push_back(axis_nodes[2 * resolution + iz]);
                }
    }
    return pts;
}

} // namespace fopinn
