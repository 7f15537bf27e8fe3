#pragma once

#include <stdexcept>

#include "rhjb/vec.hpp"

namespace rhjb {

// Two-domain flat geometry: Omega1 = {x_N > 0}, Omega2 = {x_N < 0} and the
// interface {x_N = 0}. The last coordinate is the normal coordinate; the
// outward normals are constant, so their Lipschitz constant is zero.

enum class RegionLabel { Omega1, Omega2, Interface };

struct GeometryConstants {
    int dimension = 1;
    double interface_tolerance = 0.0;

    static GeometryConstants make(int dimension, double domain_diameter) {
        return {dimension, 1e-9 * domain_diameter};
    }
};

// Signed distance to the interface, positive in Omega1.
inline double signed_distance(const Vec& x) { return x.back(); }

inline RegionLabel classify(const Vec& x, double tol) {
    const double d = signed_distance(x);
    if (d > tol) return RegionLabel::Omega1;
    if (d < -tol) return RegionLabel::Omega2;
    return RegionLabel::Interface;
}

// Outward unit normal of the given side region.
inline Vec normal(RegionLabel region, int dimension) {
    Vec e = unit(dimension, dimension - 1);
    switch (region) {
        case RegionLabel::Omega1:
            return -1.0 * e;
        case RegionLabel::Omega2:
            return e;
        case RegionLabel::Interface:
            break;
    }
    throw std::invalid_argument("normal: interface label has no outward normal");
}

inline const char* region_name(RegionLabel r) {
    switch (r) {
        case RegionLabel::Omega1: return "omega1";
        case RegionLabel::Omega2: return "omega2";
        case RegionLabel::Interface: return "interface";
    }
    return "?";
}

}  // namespace rhjb
