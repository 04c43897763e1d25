#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "fopinn/errors.hpp"

namespace fopinn {

/// Point in up to three dimensions; unused trailing components are zero.
using Pt = std::array<double, 3>;

inline Pt make_pt(double x, double y = 0.0, double z = 0.0) { return {x, y, z}; }

inline double dist2(const Pt& a, const Pt& b, int dim) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

/// Axis-aligned box, the only supported domain shape. dim is 2 or 3.
struct BoxDomain {
    int dim = 2;
    Pt lo{0.0, 0.0, 0.0};
    Pt hi{1.0, 1.0, 1.0};

    BoxDomain() = default;
    BoxDomain(int d, Pt lo_, Pt hi_);

    static BoxDomain unit_square() { return BoxDomain(2, {0, 0, 0}, {1, 1, 0}); }
    static BoxDomain unit_cube() { return BoxDomain(3, {0, 0, 0}, {1, 1, 1}); }

    bool contains(const Pt& x) const;
    bool strictly_inside(const Pt& x) const;
    double diameter() const;
    double extent(int axis) const { return hi[axis] - lo[axis]; }
};

/// A single discontinuity interface. Axis planes and segments have exact
/// distance; analytic interfaces bring their own distance function
/// (absolute accuracy contract 1e-10) and optionally a side classifier.
class Interface {
  public:
    enum class Kind { AxisPlane, Segment, Analytic };

    static Interface axis_plane(int axis, double offset);
    static Interface segment(const Pt& a, const Pt& b);
    static Interface analytic(std::function<double(const Pt&)> distance,
                              std::function<int(const Pt&)> side = nullptr);

    Kind kind() const { return kind_; }
    int axis() const { return axis_; }
    double offset() const { return offset_; }
    const Pt& seg_a() const { return a_; }
    const Pt& seg_b() const { return b_; }

    double distance(const Pt& x) const;
    /// Side of the interface: 0 or 1 (0 when the interface cannot classify).
    int side(const Pt& x) const;

  private:
    Kind kind_ = Kind::AxisPlane;
    int axis_ = 0;
    double offset_ = 0.0;
    Pt a_{}, b_{};
    std::function<double(const Pt&)> dist_fn_;
    std::function<int(const Pt&)> side_fn_;
};

constexpr double kOnInterfaceTol = 1e-12;

struct InterfaceSet {
    std::vector<Interface> items;

    bool empty() const { return items.empty(); }
    std::size_t size() const { return items.size(); }

    /// Minimum Euclidean distance to the union of interfaces; +inf when empty.
    double min_distance(const Pt& x) const;

    /// Stable label of the smooth region containing x (bitmask of interface
    /// sides). Throws OnInterfaceError when x is within 1e-12 of an interface.
    int subdomain_of(const Pt& x) const;

    /// Same labelling without the on-interface guard (used by callers that
    /// have already checked the distance).
    int subdomain_of_unchecked(const Pt& x) const;
};

/// The interface mask of the weighted first-order formulation:
/// dist/(dist+epsilon) inside the transition band, 1/2 beyond it.
struct WeightFn {
    InterfaceSet interfaces;
    double epsilon = 0.01;

    double zeta(const Pt& x) const {
        if (interfaces.empty()) return 0.5;
        const double d = interfaces.min_distance(x);
        if (d >= epsilon) return 0.5;
        return d / (d + epsilon);
    }
};

double distance_to(const Interface& interface, const Pt& x);

} // namespace fopinn
