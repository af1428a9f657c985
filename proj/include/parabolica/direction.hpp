#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "parabolica/germ.hpp"
#include "parabolica/roots.hpp"
#include "parabolica/smallmatrix.hpp"

namespace parabolica {

enum class DirectionClass { attracting, non_attracting, mixed, degenerate };

inline const char* direction_class_name(DirectionClass c) {
    switch (c) {
    case DirectionClass::attracting: return "attracting";
    case DirectionClass::non_attracting: return "non-attracting";
    case DirectionClass::mixed: return "mixed";
    case DirectionClass::degenerate: return "degenerate";
    }
    return "?";
}

struct DirectionSolveConfig {
    double positivity_margin = 1e-9;
    double dedupe_tol = 1e-8;
    double residual_tol = 1e-10;
    double degenerate_lambda_tol = 1e-9;
    double root_tol = 1e-13;
    int aberth_sweeps = 200;
    int newton_starts_per_dim = 200;
    double newton_radius = 3.0;
    double eigen_merge_tol = 1e-7;
};

struct DirectionReport {
    CVec direction;      // unit representative, largest component rotated real-positive
    Complex lambda = 0.0;
    bool degenerate = false;
    int chart_index = 0; // 0-based coordinate index with v_j != 0
    SmallMatrix director_matrix;
    std::vector<RootWithMultiplicity> directors;
    DirectionClass classification = DirectionClass::degenerate;
    int d_plus = 0;
    double residual = 0.0;
    double chart_condition = 0.0; // ||r'(u0)|| / |k p(1,u0)|, reported only
    bool chart_family = false;    // r == 0 in the chart: a continuum of directions
};

struct DirectionSearchResult {
    std::vector<DirectionReport> reports;
    bool complete = true;
    std::string message;
};

/// Attracting directions of f(z) = z + a z^{k+1} + ...: the k-th roots of -|a|/a.
inline CVec attracting_directions_1d(int k, Complex a) {
    if (a == Complex(0.0)) fail(ErrorCode::BadInput, "leading coefficient must be nonzero");
    Complex w = -std::abs(a) / a;
    CVec roots(k);
    double base = std::arg(w);
    for (int j = 0; j < k; ++j) roots[j] = std::polar(1.0, (base + 2.0 * kPi * j) / k);
    return roots;
}

namespace detail {

/// Substitute the chart point (u_0,..,1 at slot j,..,u_{p-2}) into a
/// p-variable polynomial, producing a polynomial in p-1 variables.
inline MultiPoly chart_restrict(const MultiPoly& poly, int j, int trunc) {
    int p = poly.dim();
    std::vector<MultiPoly> args;
    args.reserve(p);
    int slot = 0;
    for (int i = 0; i < p; ++i) {
        if (i == j)
            args.push_back(MultiPoly::constant(std::max(p - 1, 1), trunc, 1.0));
        else
            args.push_back(MultiPoly::variable(std::max(p - 1, 1), trunc, slot++));
    }
    return poly.substitute(args, trunc);
}

struct ChartSystem {
    MultiPoly p_chart;                       // j-th component on the chart
    std::vector<MultiPoly> q_chart;          // remaining components
    std::vector<MultiPoly> r;                // r_i = q_i - p * u_i
    std::vector<std::vector<MultiPoly>> jac; // Jacobian of r
};

inline ChartSystem chart_system(const std::vector<MultiPoly>& P, int j) {
    int p = int(P.size());
    int du = p - 1;
    int trunc = P[0].trunc() + 2; // r picks up one extra u-degree
    ChartSystem cs;
    cs.p_chart = chart_restrict(P[j], j, trunc);
    int slot = 0;
    for (int i = 0; i < p; ++i) {
        if (i == j) continue;
        MultiPoly qi = chart_restrict(P[i], j, trunc);
        cs.q_chart.push_back(qi);
        MultiPoly ui = MultiPoly::variable(std::max(du, 1), trunc, slot);
        cs.r.push_back(qi - cs.p_chart * ui);
        ++slot;
    }
    cs.jac.resize(du);
    for (int i = 0; i < du; ++i)
        for (int m = 0; m < du; ++m) cs.jac[i].push_back(cs.r[i].derivative(m));
    return cs;
}

inline CVec univariate_coeffs(const MultiPoly& poly) {
    CVec coeffs(poly.max_degree() + 1, 0.0);
    for (const auto& [m, c] : poly.terms()) coeffs[m.degree()] = c;
    return coeffs;
}

/// Canonical representative: divide by the largest-modulus component (so it
/// becomes real positive) and normalize to unit length.
inline CVec canonical_direction(CVec v, int& pivot) {
    pivot = 0;
    for (int i = 1; i < int(v.size()); ++i)
        if (std::abs(v[i]) > std::abs(v[pivot])) pivot = i;
    Complex d = v[pivot];
    for (auto& z : v) z /= d;
    double n = norm2(v);
    for (auto& z : v) z /= n;
    return v;
}

} // namespace detail

inline std::vector<RootWithMultiplicity> directors(const SmallMatrix& A,
                                                   double merge_tol = 1e-7) {
    if (A.rows() != A.cols()) fail(ErrorCode::BadInput, "directors need a square matrix");
    if (A.rows() == 0) return {};
    CVec cp = characteristic_polynomial(A);
    auto res = aberth_roots(cp);
    return cluster_roots(res.roots, merge_tol);
}

inline std::pair<DirectionClass, int> classify_directors(
    const std::vector<RootWithMultiplicity>& ds, double margin = 1e-9) {
    int pos = 0, total = 0;
    for (const auto& d : ds) {
        total += d.multiplicity;
        if (d.value.real() > margin) pos += d.multiplicity;
    }
    if (pos == total) return {DirectionClass::attracting, pos};
    if (pos == 0) return {DirectionClass::non_attracting, 0};
    return {DirectionClass::mixed, pos};
}

/// Director matrix A(v) = r'(u0) / (k p_{k+1}(1,u0)) in the report's chart.
inline SmallMatrix director_matrix(const GermMap& F, const DirectionReport& report) {
    if (report.degenerate)
        fail(ErrorCode::DegenerateDirection, "director matrix needs a non-degenerate direction");
    GermOrder order = germ_order(F);
    auto P = homogeneous_part(F, order.nu0);
    int p = F.dim();
    if (p == 1) return SmallMatrix(0, 0);
    int j = report.chart_index;
    auto cs = detail::chart_system(P, j);
    CVec u0;
    for (int i = 0; i < p; ++i)
        if (i != j) u0.push_back(report.direction[i] / report.direction[j]);
    Complex pv = cs.p_chart.eval(u0);
    if (std::abs(pv) < 1e-14)
        fail(ErrorCode::DegenerateLeadingTerm, "p_{k+1}(1,u0) vanishes in this chart");
    SmallMatrix A(p - 1, p - 1);
    for (int i = 0; i < p - 1; ++i)
        for (int m = 0; m < p - 1; ++m) A(i, m) = cs.jac[i][m].eval(u0) / (double(order.k) * pv);
    return A;
}

inline DirectionSearchResult characteristic_directions(const GermMap& F,
                                                       const DirectionSolveConfig& cfg = {}) {
    GermOrder order = germ_order(F);
    auto P = homogeneous_part(F, order.nu0);
    int p = F.dim();
    DirectionSearchResult result;

    if (p == 1) {
        Monomial m(1);
        m.e[0] = order.nu0;
        Complex a = P[0].coeff(m);
        for (Complex v : attracting_directions_1d(order.k, a)) {
            DirectionReport rep;
            rep.direction = {v};
            rep.lambda = P[0].eval(CVec{v}) / v;
            rep.degenerate = false;
            rep.chart_index = 0;
            rep.director_matrix = SmallMatrix(0, 0);
            rep.classification = DirectionClass::attracting;
            rep.residual = 0.0;
            result.reports.push_back(std::move(rep));
        }
        return result;
    }

    struct Candidate {
        CVec v;
        int chart;
        double rnorm;
        bool family;
    };
    std::vector<Candidate> candidates;

    for (int j = 0; j < p; ++j) {
        auto cs = detail::chart_system(P, j);
        int du = p - 1;
        std::vector<CVec> chart_roots;
        bool family = false;

        bool r_zero = true;
        for (const auto& ri : cs.r)
            if (!ri.is_zero()) r_zero = false;

        if (r_zero) {
            // Every chart direction is characteristic; report the chart axis
            // and flag the continuum (completeness documented best-effort).
            chart_roots.push_back(CVec(du, 0.0));
            family = true;
        } else if (du == 1) {
            CVec coeffs = detail::univariate_coeffs(cs.r[0]);
            auto res = aberth_roots(coeffs, cfg.root_tol, cfg.aberth_sweeps);
            if (!res.converged) {
                result.complete = false;
                result.message = "Aberth iteration did not converge in chart " + std::to_string(j);
            }
            for (Complex root : res.roots) chart_roots.push_back(CVec{root});
        } else {
            Rng rng(0x9E3779B97F4A7C15ULL);
            int starts = cfg.newton_starts_per_dim * du;
            for (int s = 0; s < starts; ++s) {
                CVec u(du);
                for (auto& z : u) {
                    double rad = cfg.newton_radius * std::sqrt(rng.uniform());
                    double th = rng.uniform(0.0, 2.0 * kPi);
                    z = std::polar(rad, th);
                }
                if (newton_polysystem(cs.r, cs.jac, u, 1e-12)) chart_roots.push_back(u);
            }
        }

        for (const auto& u : chart_roots) {
            CVec v;
            int slot = 0;
            for (int i = 0; i < p; ++i)
                v.push_back(i == j ? Complex(1.0) : u[slot++]);
            double rnorm = 0.0;
            for (const auto& ri : cs.r) rnorm = std::max(rnorm, std::abs(ri.eval(u)));
            candidates.push_back({std::move(v), j, rnorm, family});
        }
    }

    for (auto& cand : candidates) {
        int pivot = 0;
        CVec v = detail::canonical_direction(cand.v, pivot);
        CVec Pv = eval_homogeneous(P, v);
        Complex lambda = dot_conj(v, Pv);
        double residual = 0.0;
        {
            CVec diff = Pv;
            for (int i = 0; i < p; ++i) diff[i] -= lambda * v[i];
            residual = std::max(norm2(diff), cand.rnorm);
        }
        bool degenerate = std::abs(lambda) <= cfg.degenerate_lambda_tol;

        bool dup = false;
        for (auto& rep : result.reports) {
            if (projective_distance(rep.direction, v) < cfg.dedupe_tol) {
                dup = true;
                if (residual < rep.residual) {
                    rep.direction = v;
                    rep.lambda = lambda;
                    rep.residual = residual;
                    rep.chart_index = pivot;
                }
                break;
            }
        }
        if (dup) continue;

        DirectionReport rep;
        rep.direction = std::move(v);
        rep.lambda = lambda;
        rep.degenerate = degenerate;
        rep.chart_index = pivot;
        rep.residual = residual;
        rep.chart_family = cand.family;
        result.reports.push_back(std::move(rep));
    }

    for (auto& rep : result.reports) {
        if (rep.degenerate) {
            rep.classification = DirectionClass::degenerate;
            continue;
        }
        rep.director_matrix = director_matrix(F, rep);
        rep.directors = directors(rep.director_matrix, cfg.eigen_merge_tol);
        auto [cls, dplus] = classify_directors(rep.directors, cfg.positivity_margin);
        rep.classification = cls;
        rep.d_plus = dplus;
        Complex pv;
        {
            auto cs = detail::chart_system(P, rep.chart_index);
            CVec u0;
            for (int i = 0; i < p; ++i)
                if (i != rep.chart_index) u0.push_back(rep.direction[i] / rep.direction[rep.chart_index]);
            double jn = 0.0;
            for (int i = 0; i < p - 1; ++i)
                for (int m = 0; m < p - 1; ++m) jn = std::max(jn, std::abs(cs.jac[i][m].eval(u0)));
            pv = cs.p_chart.eval(u0);
            rep.chart_condition = jn / std::max(std::abs(double(germ_order(F).k) * std::abs(pv)), 1e-300);
        }
    }

    std::sort(result.reports.begin(), result.reports.end(),
              [](const DirectionReport& a, const DirectionReport& b) {
                  if (a.degenerate != b.degenerate) return !a.degenerate;
                  if (a.lambda.real() != b.lambda.real()) return a.lambda.real() > b.lambda.real();
                  if (a.lambda.imag() != b.lambda.imag()) return a.lambda.imag() > b.lambda.imag();
                  for (std::size_t i = 0; i < a.direction.size(); ++i) {
                      if (a.direction[i].real() != b.direction[i].real())
                          return a.direction[i].real() > b.direction[i].real();
                      if (a.direction[i].imag() != b.direction[i].imag())
                          return a.direction[i].imag() > b.direction[i].imag();
                  }
                  return false;
              });
    return result;
}

/// Hausdorff distance between two finite multisets in C.
inline double hausdorff_distance(const CVec& a, const CVec& b) {
    if (a.empty() && b.empty()) return 0.0;
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    auto one_sided = [](const CVec& xs, const CVec& ys) {
        double worst = 0.0;
        for (const auto& x : xs) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& y : ys) best = std::min(best, std::abs(x - y));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_sided(a, b), one_sided(b, a));
}

inline CVec directors_flat(const std::vector<RootWithMultiplicity>& ds) {
    CVec out;
    for (const auto& d : ds)
        for (int m = 0; m < d.multiplicity; ++m) out.push_back(d.value);
    return out;
}

struct ConjugationComparison {
    DirectionReport original;
    DirectionReport conjugated;
    double director_distance = 0.0;
};

/// Conjugate by an invertible linear map and compare director multisets at
/// the transported direction.
inline ConjugationComparison conjugate_and_compare(const GermMap& F, const std::vector<CVec>& L,
                                                   const CVec& v,
                                                   const DirectionSolveConfig& cfg = {}) {
    int p = F.dim();
    SmallMatrix Lm(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) Lm(i, j) = L[i][j];
    if (std::abs(Lm.determinant()) <= 1e-12)
        fail(ErrorCode::BadInput, "conjugation matrix is numerically singular");
    SmallMatrix Li = Lm.inverse();
    std::vector<CVec> Linv(p, CVec(p));
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) Linv[i][j] = Li(i, j);

    GermMap Fstar = conjugate_linear(F, L, Linv);
    CVec vstar = Li.apply(v);

    auto pick = [&](const GermMap& G, const CVec& dir) {
        auto res = characteristic_directions(G, cfg);
        const DirectionReport* best = nullptr;
        double bestd = std::numeric_limits<double>::infinity();
        for (const auto& rep : res.reports) {
            double d = projective_distance(rep.direction, dir);
            if (d < bestd) {
                bestd = d;
                best = &rep;
            }
        }
        if (!best) fail(ErrorCode::RootSolveFailed, "no characteristic direction found");
        return *best;
    };

    ConjugationComparison out;
    out.original = pick(F, v);
    out.conjugated = pick(Fstar, vstar);
    out.director_distance = hausdorff_distance(directors_flat(out.original.directors),
                                               directors_flat(out.conjugated.directors));
    return out;
}

} // namespace parabolica
