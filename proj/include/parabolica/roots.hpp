#pragma once

#include <algorithm>
#include <vector>

#include "parabolica/polynomial.hpp"
#include "parabolica/smallmatrix.hpp"
#include "parabolica/types.hpp"

namespace parabolica {

inline Complex poly1_eval(const CVec& coeffs, Complex z) {
    Complex v = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) v = v * z + coeffs[i];
    return v;
}

inline CVec poly1_derivative(const CVec& coeffs) {
    CVec d;
    for (std::size_t i = 1; i < coeffs.size(); ++i) d.push_back(coeffs[i] * double(i));
    return d;
}

struct RootSolveResult {
    CVec roots;
    bool converged = true;
};

/// All complex roots of a univariate polynomial (coefficients ascending) by
/// Aberth-Ehrlich simultaneous iteration.
inline RootSolveResult aberth_roots(CVec coeffs, double tol = 1e-13, int max_sweeps = 200) {
    // Strip negligible leading coefficients.
    double cap = 0.0;
    for (const auto& c : coeffs) cap = std::max(cap, std::abs(c));
    if (cap == 0.0) return {{}, true};
    while (coeffs.size() > 1 && std::abs(coeffs.back()) <= 1e-300 + 0.0 * cap &&
           std::abs(coeffs.back()) == 0.0)
        coeffs.pop_back();
    while (coeffs.size() > 1 && std::abs(coeffs.back()) < 1e-15 * cap) coeffs.pop_back();
    int deg = int(coeffs.size()) - 1;
    if (deg <= 0) return {{}, true};

    // Exact zero roots split off first.
    CVec roots;
    while (!coeffs.empty() && std::abs(coeffs.front()) <= 1e-300) {
        roots.push_back(0.0);
        coeffs.erase(coeffs.begin());
        --deg;
    }
    if (deg <= 0) return {roots, true};
    if (deg == 1) {
        roots.push_back(-coeffs[0] / coeffs[1]);
        return {roots, true};
    }

    CVec dcoeffs = poly1_derivative(coeffs);
    double r0 = std::pow(std::abs(coeffs[0] / coeffs[deg]), 1.0 / deg);
    if (!(r0 > 1e-6)) r0 = 1e-6;
    if (!(r0 < 1e6)) r0 = 1.0;
    CVec z(deg);
    for (int j = 0; j < deg; ++j) {
        double th = 2.0 * kPi * j / deg + 0.4;
        z[j] = r0 * Complex(std::cos(th), std::sin(th));
    }

    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        converged = true;
        for (int j = 0; j < deg; ++j) {
            Complex p = poly1_eval(coeffs, z[j]);
            Complex dp = poly1_eval(dcoeffs, z[j]);
            Complex w;
            if (dp == Complex(0.0)) {
                w = 1e-8 * (std::abs(z[j]) + 1.0);
            } else {
                Complex newton = p / dp;
                Complex rep = 0.0;
                for (int i = 0; i < deg; ++i)
                    if (i != j) rep += 1.0 / (z[j] - z[i]);
                Complex den = 1.0 - newton * rep;
                w = (std::abs(den) < 1e-30) ? newton : newton / den;
            }
            z[j] -= w;
            if (std::abs(w) > tol * std::max(1.0, std::abs(z[j]))) converged = false;
        }
    }

    // Newton polish.
    for (int j = 0; j < deg; ++j)
        for (int it = 0; it < 4; ++it) {
            Complex dp = poly1_eval(dcoeffs, z[j]);
            if (std::abs(dp) < 1e-300) break;
            z[j] -= poly1_eval(coeffs, z[j]) / dp;
        }

    roots.insert(roots.end(), z.begin(), z.end());
    return {roots, converged};
}

struct RootWithMultiplicity {
    Complex value;
    int multiplicity = 1;
};

/// Merge roots clustered within `merge_tol`, assigning summed multiplicity,
/// and sort by (Re desc, Im desc).
inline std::vector<RootWithMultiplicity> cluster_roots(const CVec& roots,
                                                       double merge_tol = 1e-7) {
    std::vector<RootWithMultiplicity> out;
    CVec sorted = roots;
    std::sort(sorted.begin(), sorted.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    for (const auto& r : sorted) {
        bool merged = false;
        for (auto& c : out) {
            if (std::abs(c.value - r) <= merge_tol) {
                c.value = (c.value * double(c.multiplicity) + r) / double(c.multiplicity + 1);
                c.multiplicity += 1;
                merged = true;
                break;
            }
        }
        if (!merged) out.push_back({r, 1});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
        return a.value.imag() > b.value.imag();
    });
    return out;
}

/// Damped Newton iteration on a square polynomial system r(u) = 0.
/// Returns true when ||r|| falls below `tol`.
inline bool newton_polysystem(const std::vector<MultiPoly>& r,
                              const std::vector<std::vector<MultiPoly>>& jac, CVec& u,
                              double tol = 1e-12, int max_iter = 80) {
    int n = int(r.size());
    auto residual_norm = [&](const CVec& pt) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += std::norm(r[i].eval(pt));
        return std::sqrt(s);
    };
    double res = residual_norm(u);
    for (int it = 0; it < max_iter; ++it) {
        if (res <= tol) return true;
        SmallMatrix J(n, n), rhs(n, 1), step;
        for (int i = 0; i < n; ++i) {
            rhs(i, 0) = -r[i].eval(u);
            for (int j = 0; j < n; ++j) J(i, j) = jac[i][j].eval(u);
        }
        Complex det = J.solve(rhs, step);
        if (det == Complex(0.0)) return false;
        double damp = 1.0;
        for (int back = 0; back < 30; ++back) {
            CVec cand = u;
            for (int i = 0; i < n; ++i) cand[i] += damp * step(i, 0);
            double cres = residual_norm(cand);
            if (cres < res || cres <= tol) {
                u = cand;
                res = cres;
                break;
            }
            damp *= 0.5;
            if (back == 29) return res <= tol;
        }
    }
    return res <= tol;
}

} // namespace parabolica
