#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace parabolica {

using Complex = std::complex<double>;
using CVec = std::vector<Complex>;

constexpr double kPi = 3.14159265358979323846;

inline bool is_finite(Complex z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline bool is_finite(const CVec& v) {
    for (const auto& z : v)
        if (!is_finite(z)) return false;
    return true;
}

inline double norm2(const CVec& v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

inline Complex dot_conj(const CVec& a, const CVec& b) {
    Complex s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

/// Chordal distance between projective points, d([a],[b]) = sqrt(2 - 2|<a^,b^>|).
inline double projective_distance(const CVec& a, const CVec& b) {
    double na = norm2(a), nb = norm2(b);
    if (na == 0.0 || nb == 0.0) return std::sqrt(2.0);
    double c = std::abs(dot_conj(a, b)) / (na * nb);
    if (c > 1.0) c = 1.0;
    return std::sqrt(2.0 - 2.0 * c);
}

/// Neumaier compensated accumulator, applied per real component.
struct CompensatedSum {
    double sum = 0.0, comp = 0.0;

    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }

    double value() const { return sum + comp; }
};

struct ComplexCompensatedSum {
    CompensatedSum re, im;

    void add(Complex z) {
        re.add(z.real());
        im.add(z.imag());
    }

    Complex value() const { return {re.value(), im.value()}; }
};

/// splitmix64: tiny deterministic generator, identical on every platform.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0,1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [a,b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform(), u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    Complex complex_normal() { return {normal(), normal()}; }

    /// Random unit vector in C^p.
    CVec unit_vector(int p) {
        CVec v(p);
        double n = 0.0;
        do {
            for (auto& z : v) z = complex_normal();
            n = norm2(v);
        } while (n < 1e-6);
        for (auto& z : v) z /= n;
        return v;
    }
};

} // namespace parabolica
