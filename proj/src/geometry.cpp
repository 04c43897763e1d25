#include "fopinn/geometry.hpp"

#include <algorithm>
#include <limits>

namespace fopinn {

BoxDomain::BoxDomain(int d, Pt lo_, Pt hi_) : dim(d), lo(lo_), hi(hi_) {
    if (dim != 2 && dim != 3) throw DimensionMismatchError("BoxDomain: dim must be 2 or 3");
    for (int k = 0; k < dim; ++k) {
        if (!(lo[k] < hi[k])) throw ConfigError("BoxDomain: lo must be < hi on every axis");
    }
    for (int k = dim; k < 3; ++k) { lo[k] = 0.0; hi[k] = 0.0; }
}

bool BoxDomain::contains(const Pt& x) const {
    for (int k = 0; k < dim; ++k)
        if (x[k] < lo[k] || x[k] > hi[k]) return false;
    return true;
}

bool BoxDomain::strictly_inside(const Pt& x) const {
    for (int k = 0; k < dim; ++k)
        if (x[k] <= lo[k] || x[k] >= hi[k]) return false;
    return true;
}

double BoxDomain::diameter() const {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += extent(k) * extent(k);
    return std::sqrt(s);
}

Interface Interface::axis_plane(int axis, double offset) {
    Interface it;
    it.kind_ = Kind::AxisPlane;
    it.axis_ = axis;
    it.offset_ = offset;
    return it;
}

Interface Interface::segment(const Pt& a, const Pt& b) {
    Interface it;
    it.kind_ = Kind::Segment;
    it.a_ = a;
    it.b_ = b;
    return it;
}

Interface Interface::analytic(std::function<double(const Pt&)> distance,
                              std::function<int(const Pt&)> side) {
    Interface it;
    it.kind_ = Kind::Analytic;
    it.dist_fn_ = std::move(distance);
    it.side_fn_ = std::move(side);
    return it;
}

double Interface::distance(const Pt& x) const {
    switch (kind_) {
        case Kind::AxisPlane:
            return std::abs(x[axis_] - offset_);
        case Kind::Segment: {
            double abx = b_[0] - a_[0], aby = b_[1] - a_[1], abz = b_[2] - a_[2];
            double apx = x[0] - a_[0], apy = x[1] - a_[1], apz = x[2] - a_[2];
            const double len2 = abx * abx + aby * aby + abz * abz;
            double t = len2 > 0.0 ? (apx * abx + apy * aby + apz * abz) / len2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            const double dx = apx - t * abx, dy = apy - t * aby, dz = apz - t * abz;
            return std::sqrt(dx * dx + dy * dy + dz * dz);
        }
        case Kind::Analytic:
            return dist_fn_(x);
    }
    return 0.0;
}

int Interface::side(const Pt& x) const {
    switch (kind_) {
        case Kind::AxisPlane:
            return x[axis_] > offset_ ? 1 : 0;
        case Kind::Segment: {
            // sign of the 2D cross product of (b-a) and (x-a)
            const double c = (b_[0] - a_[0]) * (x[1] - a_[1]) - (b_[1] - a_[1]) * (x[0] - a_[0]);
            return c > 0.0 ? 1 : 0;
        }
        case Kind::Analytic:
            return side_fn_ ? (side_fn_(x) > 0 ? 1 : 0) : 0;
    }
    return 0;
}

double distance_to(const Interface& interface, const Pt& x) { return interface.distance(x); }

double InterfaceSet::min_distance(const Pt& x) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& it : items) d = std::min(d, it.distance(x));
    return d;
}

int InterfaceSet::subdomain_of(const Pt& x) const {
    for (const auto& it : items) {
        if (it.distance(x) <= kOnInterfaceTol)
            throw OnInterfaceError("subdomain_of: point lies on an interface");
    }
    return subdomain_of_unchecked(x);
}

int InterfaceSet::subdomain_of_unchecked(const Pt& x) const {
    int label = 0;
    for (std::size_t i = 0; i < items.size(); ++i)
        label |= items[i].side(x) << i;
    return label;
}

} // namespace fopinn
