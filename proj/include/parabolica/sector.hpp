#pragma once

#include <cmath>

#include "parabolica/error.hpp"
#include "parabolica/types.hpp"

namespace parabolica {

/// One connected component Pi_r^i of { |x^k - r| < r }, optionally narrowed
/// to the aperture |Im x^k| <= gamma Re x^k, |x^k| < rho, with a u-ball of
/// radius c for product sectors.
struct SectorDomain {
    int k = 1;
    double r = 0.0;
    int i = 1;          // component index, 1..k
    double gamma = 0.0; // 0 = full component
    double rho = 0.0;   // used only when gamma > 0
    double c = 0.0;     // u-ball radius, 0 = x-plane sector only

    double central_angle() const { return 2.0 * kPi * (i - 1) / k; }

    /// Nearest-ray component index for arg x (rays at 2 pi (j-1)/k).
    static int component_index(Complex x, int k) {
        double a = std::arg(x);
        if (a < 0) a += 2.0 * kPi;
        int j = int(std::floor(a * k / (2.0 * kPi) + 0.5)) % k;
        return j + 1;
    }

    /// Continuous argument on this component, equal to the central angle on
    /// the central ray. Single-valued because the component avoids a cut.
    double branch_arg(Complex x) const {
        double base = central_angle();
        Complex rotated = x * std::polar(1.0, -base);
        return base + std::arg(rotated);
    }

    /// log x with the component's branch of the argument.
    Complex log_branch(Complex x) const {
        return {std::log(std::abs(x)), branch_arg(x)};
    }

    bool contains(Complex x) const {
        if (x == Complex(0.0)) return false;
        Complex xk = std::pow(x, k);
        if (std::abs(xk - r) >= r) return false;
        if (component_index(x, k) != i) return false;
        if (gamma > 0.0) {
            if (std::abs(xk.imag()) > gamma * xk.real()) return false;
            if (std::abs(xk) >= rho) return false;
        }
        return true;
    }

    bool contains(Complex x, const CVec& u) const {
        if (!contains(x)) return false;
        if (c > 0.0 && norm2(u) > c) return false;
        return true;
    }

    /// Point on the bisector ray with |x| = t.
    Complex bisector_point(double t) const { return std::polar(t, central_angle()); }

    /// Largest |x| on the bisector ray, i.e. (2r)^(1/k).
    double bisector_radius() const { return std::pow(2.0 * r, 1.0 / k); }
};

inline void require_in_sector(Complex x, const SectorDomain& s) {
    if (!s.contains(x)) fail(ErrorCode::PointOutsideSector, "point outside sector component");
}

} // namespace parabolica
