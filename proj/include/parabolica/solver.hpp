#pragma once

#include <vector>

#include "parabolica/logpoly.hpp"
#include "parabolica/normal_form.hpp"
#include "parabolica/sector.hpp"
#include "parabolica/smallmatrix.hpp"

namespace parabolica {

/// x^{kA} = exp(kA log x) with the sector's log branch.
struct MatrixPower {
    SmallMatrix A;
    int k = 1;
    SectorDomain sector;

    SmallMatrix eval(Complex x) const {
        require_in_sector(x, sector);
        return eval_with_log(sector.log_branch(x));
    }

    SmallMatrix eval_with_log(Complex logx) const {
        return expm(double(k) * logx * A);
    }
};

inline SmallMatrix matrix_power_eval(const MatrixPower& M, Complex x) { return M.eval(x); }

/// H(x,u) = u - x^{kA} x1^{-kA} u1 with (x1,u1) one germ step. The two
/// matrix powers are combined into exp(kA (log x - log x1)), which stays
/// well-conditioned because the log increment is O(x^k).
inline CVec operator_H(const BlownGerm& B, Complex x, const CVec& u_val,
                       const SectorDomain& sector) {
    require_in_sector(x, sector);
    auto [x1, u1] = B.step(x, u_val);
    Complex dlog = std::log(x / x1); // principal: x1/x = 1 + O(x^k)
    SmallMatrix M = expm(double(B.k) * dlog * B.A);
    CVec out(u_val.size());
    CVec Mu = M.apply(u1);
    for (std::size_t i = 0; i < u_val.size(); ++i) out[i] = u_val[i] - Mu[i];
    return out;
}

namespace detail {

/// Householder least squares for complex column-major A (m x n, m >= n)
/// with multiple right-hand sides. Returns the n x r solution.
inline std::vector<CVec> least_squares(std::vector<CVec> cols, std::vector<CVec> rhs) {
    int n = int(cols.size());
    int m = n ? int(cols[0].size()) : 0;
    int r = int(rhs.size());
    std::vector<CVec> vs; // householder vectors
    CVec diag(n);
    for (int j = 0; j < n; ++j) {
        CVec v(cols[j].begin() + j, cols[j].end());
        double nv = norm2(v);
        if (nv == 0.0) fail(ErrorCode::BadInput, "rank-deficient least squares column");
        Complex alpha = (std::abs(v[0]) > 0.0) ? -(v[0] / std::abs(v[0])) * nv : Complex(-nv);
        v[0] -= alpha;
        double nv2 = norm2(v);
        if (nv2 > 0.0)
            for (auto& z : v) z /= nv2;
        diag[j] = alpha;
        // apply to remaining columns and rhs
        auto reflect = [&](CVec& col) {
            Complex s = 0.0;
            for (int i = j; i < m; ++i) s += std::conj(v[i - j]) * col[i];
            s *= 2.0;
            for (int i = j; i < m; ++i) col[i] -= s * v[i - j];
        };
        for (int jj = j + 1; jj < n; ++jj) reflect(cols[jj]);
        for (int t = 0; t < r; ++t) reflect(rhs[t]);
        vs.push_back(std::move(v));
    }
    std::vector<CVec> X(r, CVec(n));
    for (int t = 0; t < r; ++t)
        for (int i = n - 1; i >= 0; --i) {
            Complex s = rhs[t][i];
            for (int jj = i + 1; jj < n; ++jj) s -= cols[jj][i] * X[t][jj];
            X[t][i] = s / diag[i];
        }
    return X;
}

} // namespace detail

struct CurveSolveConfig {
    int N = 12;              // representation degree
    int M = 36;              // collocation points
    double r = 1e-2;         // sector radius
    int h = 0;               // T-operator grading; 0 = ceil(lambda) + 1
    double picard_tol = 1e-12;
    int max_picard = 60;
    double residual_tol = 1e-8;
    double term_cutoff = 1e-16; // orbit-series truncation (normal convergence)
    long max_orbit = 2000000;
    int validation_points = 50;
};

struct CurveSolution {
    LogPolynomial coefficients;  // full curve, formal part included
    CVec collocation_points;
    double residual_sup = 0.0;
    int iterations = 0;
    std::vector<double> picard_deltas; // coefficient-change sequence (contraction observable)
    std::vector<double> tu_ball_C;     // per iteration: max ||Tu(x_j)|| / |x_j|^{kh-1}
    int subtraction_order = 0;         // orders <= this come from the formal recursion
    SectorDomain sector;
};

namespace detail {

struct LogBasis {
    std::vector<std::pair<int, int>> items; // (degree, log power)
};

inline LogBasis curve_basis(int from_deg, int to_deg, bool resonant, int m) {
    LogBasis b;
    for (int d = from_deg; d <= to_deg; ++d) {
        b.items.push_back({d, 0});
        if (resonant)
            for (int t = 1; m * t <= d; ++t) b.items.push_back({d, t});
    }
    return b;
}

} // namespace detail

/// Numerical parabolic curve as the fixed point of Hakim's operator
///   T u(x) = x^{kA} sum_n x_n^{-kA} H(x_n, u(x_n)).
/// The formal curve is subtracted to order k h - 1 first so the remainder
/// lies in the Banach ball where T contracts, Picard-iterated on collocation
/// values along the bisector ray, and refit by least squares.
inline CurveSolution solve_parabolic_curve(const BlownGerm& B, int sector_index,
                                           const CurveSolveConfig& cfg = {}) {
    detail::require_normalized(B);
    if (B.dim_u < 1) fail(ErrorCode::BadInput, "no transverse coordinates to solve for");
    int k = B.k;
    int du = B.dim_u;

    auto ds = directors(B.A);
    double lambda = -std::numeric_limits<double>::infinity();
    for (const auto& d : ds) lambda = std::max(lambda, d.value.real());
    int h = cfg.h > 0 ? cfg.h : int(std::ceil(lambda)) + 1;
    if (!(double(h) > lambda))
        fail(ErrorCode::BadInput, "grading h must exceed the largest director real part");
    int m_sub = k * h - 1;
    if (cfg.N <= m_sub)
        fail(ErrorCode::BadInput, "cfg.N must exceed the subtraction order k h - 1");

    FormalCurve P = formal_curve(B, m_sub);
    bool resonant = (P.kind == CurveKind::resonant);
    int reso_m = 0;
    if (resonant) reso_m = int(std::lround((double(k) * P.alpha[0]).real()));

    SectorDomain sector{k, cfg.r, sector_index, 0.0, 0.0, 0.0};
    detail::LogBasis basis = detail::curve_basis(m_sub + 1, cfg.N, resonant, std::max(reso_m, 1));
    int nb = int(basis.items.size());

    CVec xs(cfg.M);
    for (int j = 0; j < cfg.M; ++j) {
        double t = double(j) / (cfg.M - 1);
        double rad = (cfg.r / 100.0) * std::pow(50.0, t);
        xs[j] = sector.bisector_point(rad);
    }

    // curve terms(P) evaluated with the sector branch
    auto eval_P = [&](Complex x, Complex logx) { return P.series.eval(x, logx); };

    // current remainder coefficients: nb x du
    std::vector<CVec> coeffs(nb, CVec(du, 0.0));
    auto eval_U = [&](Complex x, Complex logx) {
        CVec out(du, 0.0);
        for (int b = 0; b < nb; ++b) {
            auto [d, t] = basis.items[b];
            Complex mono = 1.0;
            for (int i = 0; i < d; ++i) mono *= x;
            for (int i = 0; i < t; ++i) mono *= logx;
            for (int c = 0; c < du; ++c) out[c] += coeffs[b][c] * mono;
        }
        return out;
    };

    bool scalarA = (du == 1);
    Complex alphaA = scalarA ? B.A(0, 0) : Complex(0.0);

    // one evaluation of (T U)(x0)
    auto apply_T = [&](Complex x0) -> CVec {
        Complex x = x0;
        Complex logx = sector.log_branch(x0);
        Complex L0 = logx;
        CVec sum(du, 0.0);
        SmallMatrix Mn = SmallMatrix::identity(du);
        Complex mn_scalar = 1.0;
        int below = 0;
        for (long n = 0; n < cfg.max_orbit; ++n) {
            CVec U = eval_U(x, logx);
            CVec ufull = eval_P(x, logx);
            for (int c = 0; c < du; ++c) ufull[c] += U[c];
            CVec pt(1 + du);
            pt[0] = x;
            for (int c = 0; c < du; ++c) pt[1 + c] = ufull[c];
            Complex x1 = B.f.eval(pt);
            CVec psi(du);
            for (int c = 0; c < du; ++c) psi[c] = B.psi[c].eval(pt);
            Complex dlog = std::log(x1 / x); // principal, O(x^k)
            Complex logx1 = logx + dlog;

            // shifted-germ step: U1 = Psi(x, P(x)+U) - P(x1)
            CVec Px1 = eval_P(x1, logx1);
            CVec U1(du);
            for (int c = 0; c < du; ++c) U1[c] = psi[c] - Px1[c];

            // H~ = U - exp(kA (logx - logx1)) U1; term = exp(kA (L0 - logx)) H~
            CVec term(du);
            if (scalarA) {
                Complex e_step = std::exp(double(k) * alphaA * (-dlog));
                Complex Ht = U[0] - e_step * U1[0];
                term[0] = mn_scalar * Ht;
                mn_scalar *= e_step; // exp(kA (L0 - logx1))
            } else {
                SmallMatrix Estep = expm((double(k) * -dlog) * B.A);
                CVec Ht = Estep.apply(U1);
                for (int c = 0; c < du; ++c) Ht[c] = U[c] - Ht[c];
                term = Mn.apply(Ht);
                Mn = Mn * Estep;
            }
            for (int c = 0; c < du; ++c) sum[c] += term[c];
            if (!is_finite(sum)) fail(ErrorCode::PicardDiverged, "T-orbit overflowed");
            if (norm2(term) < cfg.term_cutoff) {
                if (++below >= 2) break;
            } else {
                below = 0;
            }
            x = x1;
            logx = logx1;
            (void)L0;
        }
        return sum;
    };

    // column-scaled design matrix (fixed across iterations)
    std::vector<CVec> cols(nb, CVec(cfg.M));
    CVec col_scale(nb);
    for (int b = 0; b < nb; ++b) {
        auto [d, t] = basis.items[b];
        double scale = 0.0;
        for (int j = 0; j < cfg.M; ++j) {
            Complex logx = sector.log_branch(xs[j]);
            Complex mono = 1.0;
            for (int i = 0; i < d; ++i) mono *= xs[j];
            for (int i = 0; i < t; ++i) mono *= logx;
            cols[b][j] = mono;
            scale = std::max(scale, std::abs(mono));
        }
        col_scale[b] = scale > 0.0 ? scale : 1.0;
        for (int j = 0; j < cfg.M; ++j) cols[b][j] /= col_scale[b];
    }

    CurveSolution sol;
    sol.collocation_points = xs;
    sol.subtraction_order = m_sub;
    sol.sector = sector;

    int grow_streak = 0;
    double prev_delta = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int it = 0; it < cfg.max_picard; ++it) {
        std::vector<CVec> rhs(du, CVec(cfg.M));
        double ballC = 0.0;
        for (int j = 0; j < cfg.M; ++j) {
            CVec v = apply_T(xs[j]);
            for (int c = 0; c < du; ++c) rhs[c][j] = v[c];
            ballC = std::max(ballC, norm2(v) / std::pow(std::abs(xs[j]), k * h - 1));
        }
        sol.tu_ball_C.push_back(ballC);
        auto X = detail::least_squares(cols, rhs);
        double delta = 0.0;
        for (int b = 0; b < nb; ++b)
            for (int c = 0; c < du; ++c) {
                Complex nc = X[c][b] / col_scale[b];
                delta = std::max(delta, std::abs(nc - coeffs[b][c]));
                coeffs[b][c] = nc;
            }
        sol.picard_deltas.push_back(delta);
        sol.iterations = it + 1;
        if (delta < cfg.picard_tol) {
            converged = true;
            break;
        }
        if (delta > prev_delta) {
            if (++grow_streak >= 3)
                fail(ErrorCode::PicardDiverged, "coefficient change grew 3 iterations in a row");
        } else {
            grow_streak = 0;
        }
        prev_delta = delta;
    }
    (void)converged; // reaching max_picard is a legitimate stop per the solve contract

    // assemble full curve = P + U
    LogPolynomial full(du, cfg.N);
    for (int c = 0; c < du; ++c) {
        full.component(c) = P.series.component(c).with_max_s(cfg.N);
        for (int b = 0; b < nb; ++b) {
            auto [d, t] = basis.items[b];
            full.component(c).add_term(d, t, coeffs[b][c]);
        }
        full.component(c).prune(1e-18);
    }
    full.set_branch_index(sector_index);
    sol.coefficients = full;

    // validation on a disjoint geometric set
    double worst = 0.0;
    for (int j = 0; j < cfg.validation_points; ++j) {
        double t = (j + 0.5) / cfg.validation_points;
        double rad = (cfg.r / 100.0) * std::pow(50.0, t);
        Complex x = sector.bisector_point(rad);
        Complex logx = sector.log_branch(x);
        CVec ux = full.eval(x, logx);
        CVec pt(1 + du);
        pt[0] = x;
        for (int c = 0; c < du; ++c) pt[1 + c] = ux[c];
        Complex x1 = B.f.eval(pt);
        Complex logx1 = logx + std::log(x1 / x);
        CVec lhs = full.eval(x1, logx1);
        double dev = 0.0;
        for (int c = 0; c < du; ++c) dev = std::max(dev, std::abs(lhs[c] - B.psi[c].eval(pt)));
        worst = std::max(worst, dev);
    }
    sol.residual_sup = worst;
#ifndef PARABOLICA_SOLVER_NO_RESIDUAL_CHECK
    if (worst > cfg.residual_tol)
        fail(ErrorCode::ResidualTooLarge,
             "validation residual " + std::to_string(worst) + " exceeds tolerance");
#endif
    return sol;
}

struct FixedPointAudit {
    double max_deviation = 0.0;
    int seeds = 0;
};

/// Checks Psi(x_n, u(x_n)) = u(f(x_n, u(x_n))) along orbits of f_u.
inline FixedPointAudit fixed_point_identity_audit(const BlownGerm& B,
                                                  const LogPolynomial& curve,
                                                  const SectorDomain& sector, int seeds = 20,
                                                  int steps = 100) {
    FixedPointAudit audit;
    audit.seeds = seeds;
    int du = B.dim_u;
    for (int s = 0; s < seeds; ++s) {
        double t = (s + 1.0) / (seeds + 1.0);
        double rad = 0.3 * sector.bisector_radius() * (0.2 + 0.8 * t);
        Complex x = sector.bisector_point(rad);
        Complex logx = sector.log_branch(x);
        for (int n = 0; n < steps; ++n) {
            CVec ux = curve.eval(x, logx);
            CVec pt(1 + du);
            pt[0] = x;
            for (int c = 0; c < du; ++c) pt[1 + c] = ux[c];
            Complex x1 = B.f.eval(pt);
            Complex logx1 = logx + std::log(x1 / x);
            CVec unext = curve.eval(x1, logx1);
            for (int c = 0; c < du; ++c)
                audit.max_deviation =
                    std::max(audit.max_deviation, std::abs(B.psi[c].eval(pt) - unext[c]));
            x = x1;
            logx = logx1;
        }
    }
    return audit;
}

} // namespace parabolica
