#pragma once

#include <optional>
#include <vector>

#include "parabolica/direction.hpp"
#include "parabolica/germ.hpp"
#include "parabolica/logpoly.hpp"
#include "parabolica/smallmatrix.hpp"

namespace parabolica {

/// A germ in blow-up coordinates (x, u) in C x C^{p-1}. Monomials x^c u^b are
/// truncated by total degree, which equals their order in x once a curve
/// u = u(x) = O(x) is substituted.
struct BlownGerm {
    int k = 1;
    int dim_u = 0;
    MultiPoly f;                 // first component, dim 1 + dim_u
    std::vector<MultiPoly> psi;  // remaining components
    SmallMatrix A;               // director matrix, filled by normalization
    bool normalized = false;
    std::optional<LogPolynomial> log_terms; // resonant corrections already applied

    int trunc() const { return f.trunc(); }
    int dim_total() const { return 1 + dim_u; }

    GermMap to_map() const {
        GermMap g(dim_total(), trunc());
        g.set_component(0, f);
        for (int i = 0; i < dim_u; ++i) g.set_component(1 + i, psi[i]);
        return g;
    }

    static BlownGerm from_map(const GermMap& g, int k) {
        BlownGerm b;
        b.k = k;
        b.dim_u = g.dim() - 1;
        b.f = g.component(0);
        b.psi.assign(g.components().begin() + 1, g.components().end());
        return b;
    }

    /// One application of the blown germ.
    std::pair<Complex, CVec> step(Complex x, const CVec& u) const {
        CVec pt(dim_total());
        pt[0] = x;
        for (int i = 0; i < dim_u; ++i) pt[1 + i] = u[i];
        Complex x1 = f.eval(pt);
        CVec u1(dim_u);
        for (int i = 0; i < dim_u; ++i) u1[i] = psi[i].eval(pt);
        return {x1, u1};
    }

    /// u-free coefficient of x^j in the first component.
    Complex f_pure_coeff(int j) const {
        Monomial m(dim_total());
        m.e[0] = j;
        return f.coeff(m);
    }
};

namespace detail {

/// Completion of `v` to a basis as the columns of L, with L e_1 = v. The
/// other columns are the coordinate axes away from the pivot of v.
inline void direction_basis(const CVec& v, std::vector<CVec>& L, std::vector<CVec>& Linv) {
    int p = int(v.size());
    int pivot = 0;
    for (int i = 1; i < p; ++i)
        if (std::abs(v[i]) > std::abs(v[pivot])) pivot = i;
    SmallMatrix M(p, p);
    for (int i = 0; i < p; ++i) M(i, 0) = v[i];
    int col = 1;
    for (int j = 0; j < p; ++j) {
        if (j == pivot) continue;
        M(j, col) = 1.0;
        ++col;
    }
    SmallMatrix Mi = M.inverse();
    L.assign(p, CVec(p));
    Linv.assign(p, CVec(p));
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
            L[i][j] = M(i, j);
            Linv[i][j] = Mi(i, j);
        }
}

} // namespace detail

/// Lift of F to the blow-up chart y = u x around a non-degenerate direction,
/// truncated at total degree N (N <= trunc(F) - 1, one order is lost dividing
/// the u-components by x).
inline BlownGerm blow_up_chart(const GermMap& F, const DirectionReport& report, int N) {
    if (report.degenerate)
        fail(ErrorCode::DegenerateDirection, "blow-up needs a non-degenerate direction");
    GermOrder order = germ_order(F);
    int p = F.dim();
    if (N < order.nu0) fail(ErrorCode::BadInput, "blow-up truncation too small");
    if (N > F.trunc() - 1)
        fail(ErrorCode::BadInput, "blow-up truncation exceeds germ accuracy (need N <= trunc-1)");

    GermMap G = F;
    if (p > 1) {
        std::vector<CVec> L, Linv;
        detail::direction_basis(report.direction, L, Linv);
        G = conjugate_linear(F, L, Linv);
    }

    BlownGerm b;
    b.k = order.k;
    b.dim_u = p - 1;

    if (p == 1) {
        std::vector<MultiPoly> args{MultiPoly::variable(1, N, 0)};
        b.f = G.component(0).substitute(args, N);
        return b;
    }

    // args: z_1 -> x, z_{i+1} -> u_i x
    std::vector<MultiPoly> args;
    args.push_back(MultiPoly::variable(p, N + 1, 0));
    for (int i = 1; i < p; ++i)
        args.push_back(MultiPoly::variable(p, N + 1, 0) * MultiPoly::variable(p, N + 1, i));

    b.f = G.component(0).substitute(args, N);

    MultiPoly fb = G.component(0).substitute(args, N + 1);
    MultiPoly s(p, N);
    for (const auto& [m, c] : fb.terms()) {
        Monomial d = m;
        d.e[0] -= 1; // every blown monomial carries x^deg >= x^1
        if (d.e[0] < 0) fail(ErrorCode::BadInput, "blow-up: first component not divisible by x");
        if (d.degree() <= N) s.add_term(d, c);
    }
    Monomial one(p);
    s.add_term(one, -1.0); // s = f/x - 1, positive order

    MultiPoly inv = MultiPoly::constant(p, N, 1.0);
    MultiPoly spow = s;
    for (int m = 1; m <= N && !spow.is_zero(); ++m) {
        inv += ((m % 2) ? -1.0 : 1.0) * spow;
        spow = spow * s;
    }

    for (int i = 1; i < p; ++i) {
        MultiPoly gi_full = G.component(i).substitute(args, N + 1);
        MultiPoly gi(p, N);
        for (const auto& [m, c] : gi_full.terms()) {
            Monomial d = m;
            d.e[0] -= 1;
            if (d.e[0] < 0) fail(ErrorCode::BadInput, "blow-up: component not divisible by x");
            if (d.degree() <= N) gi.add_term(d, c);
        }
        MultiPoly ui = gi * inv;
        // r(u0) = 0: the u-free coefficients of x^j, j <= k, vanish up to the
        // direction-solve residual; snap them to zero.
        for (int j = 0; j <= b.k; ++j) {
            Monomial m(p);
            m.e[0] = j;
            Complex c = ui.coeff(m);
            if (std::abs(c) > 1e-8)
                fail(ErrorCode::BadInput, "blow-up: direction is not characteristic");
            ui.set_coeff(m, 0.0);
        }
        ui.prune();
        b.psi.push_back(std::move(ui));
    }
    return b;
}

/// Conjugate a blown germ by a tangent-to-identity polynomial change phi of
/// (x,u)-space: returns phi o B o phi^{-1}.
inline BlownGerm conjugate_blown(const BlownGerm& B, const GermMap& phi) {
    int n = B.trunc();
    GermMap inv = germ_inverse(phi, n);
    GermMap out = germ_compose(phi.with_truncation(n), germ_compose(B.to_map(), inv, n), n);
    BlownGerm r = BlownGerm::from_map(out, B.k);
    r.A = B.A;
    r.normalized = B.normalized;
    r.log_terms = B.log_terms;
    return r;
}

/// Principal k-th root, argument in (-pi/k, pi/k].
inline Complex principal_root(Complex w, int k) {
    return std::polar(std::pow(std::abs(w), 1.0 / k), std::arg(w) / k);
}

/// Scaling + Beardon-style eliminations: produces f = x - x^{k+1}/k with
/// u-free coefficients of x^{k+2}..x^{2k} removed, and stores A.
inline BlownGerm normalize_first_component(const BlownGerm& B) {
    int k = B.k;
    int p = B.dim_total();
    int n = B.trunc();
    Complex p0 = B.f_pure_coeff(k + 1);
    if (std::abs(p0) < 1e-14)
        fail(ErrorCode::DegenerateLeadingTerm, "p_{k+1}(1,u0) vanishes");

    BlownGerm cur = B;

    // Scaling x -> c x, exact linear conjugation.
    Complex c = principal_root(-double(k) * p0, k);
    {
        std::vector<MultiPoly> args;
        args.push_back(MultiPoly::variable(p, n, 0, 1.0 / c));
        for (int i = 1; i < p; ++i) args.push_back(MultiPoly::variable(p, n, i));
        MultiPoly fnew = cur.f.substitute(args, n) * c;
        std::vector<MultiPoly> psinew;
        for (const auto& q : cur.psi) psinew.push_back(q.substitute(args, n));
        cur.f = std::move(fnew);
        cur.psi = std::move(psinew);
    }

    // Eliminate u-free x^{k+2}..x^{2k} with g(x) = x + beta x^{h+1}.
    for (int h = 1; h <= k - 1; ++h) {
        Complex bh = cur.f_pure_coeff(k + h + 1);
        if (bh == Complex(0.0)) continue;
        Complex beta = bh / (double(k - h) * Complex(-1.0 / k));
        GermMap g = GermMap::identity(p, n);
        Monomial m(p);
        m.e[0] = h + 1;
        MultiPoly comp = g.component(0);
        comp.add_term(m, beta);
        g.set_component(0, comp);
        cur = conjugate_blown(cur, g);
    }

    // Read A from psi = (I - x^k A) u + ...
    SmallMatrix A(cur.dim_u, cur.dim_u);
    for (int i = 0; i < cur.dim_u; ++i)
        for (int j = 0; j < cur.dim_u; ++j) {
            Monomial m(p);
            m.e[0] = k;
            m.e[1 + j] = 1;
            A(i, j) = -cur.psi[i].coeff(m);
        }
    cur.A = A;
    cur.normalized = true;
    return cur;
}

enum class CurveKind { nonresonant, resonant };

struct FormalCurve {
    CurveKind kind = CurveKind::nonresonant;
    LogPolynomial series;     // vector-valued in x (dimension p-1)
    int order_achieved = 0;   // residual is O(x^{order+k+1}) up to logs
    CVec alpha;               // director(s) driving the recursion
};

/// Residual Psi(x,u(x)) - u(f(x,u(x))) through x-order N, log terms included.
/// Built from composition only; the module's independent oracle.
inline LogPolynomial residual_series(const BlownGerm& B, const LogPolynomial& u, int N) {
    if (u.dim() != B.dim_u) fail(ErrorCode::DimensionMismatch, "residual_series curve dimension");
    std::vector<LogSeries> comps;
    for (int i = 0; i < B.dim_u; ++i) comps.push_back(u.component(i).with_max_s(N));
    LogSeries fhat = substitute_log(B.f, comps, N);
    LogPolynomial out(B.dim_u, N, u.branch_index());
    for (int i = 0; i < B.dim_u; ++i) {
        LogSeries a = substitute_log(B.psi[i], comps, N);
        LogSeries b2 = compose_log(comps[i], fhat);
        out.component(i) = a - b2;
        out.component(i).prune();
    }
    return out;
}

namespace detail {

inline void require_normalized(const BlownGerm& B) {
    if (!B.normalized)
        fail(ErrorCode::BadInput, "formal curve recursion needs a normalized blown germ");
}

inline void require_curve_order(const BlownGerm& B, int N) {
    if (B.trunc() < N + B.k)
        fail(ErrorCode::BadInput, "blown germ truncation too small for requested curve order");
}

/// Solve (kalpha - h) Q(t) - Q'(t) = k R(t) by descending back-substitution.
inline CVec solve_log_ode(const CVec& R, double kalpha_minus_h, int k) {
    int d = int(R.size()) - 1;
    CVec Q(d + 1, 0.0);
    for (int j = d; j >= 0; --j) {
        Complex rhs = double(k) * R[j];
        if (j + 1 <= d) rhs += double(j + 1) * Q[j + 1];
        Q[j] = rhs / kalpha_minus_h;
    }
    return Q;
}

} // namespace detail

/// Unique formal curve when k*alpha avoids 1..N (p = 2).
inline FormalCurve formal_curve_nonresonant(const BlownGerm& B, int N) {
    detail::require_normalized(B);
    detail::require_curve_order(B, N);
    if (B.dim_u != 1) fail(ErrorCode::BadInput, "formal_curve_nonresonant is the p=2 recursion");
    Complex alpha = B.A(0, 0);
    int k = B.k;
    Complex ka = double(k) * alpha;
    for (int h = 1; h <= N; ++h)
        if (std::abs(ka - double(h)) <= 1e-8) {
            Error e(ErrorCode::ResonanceDetected,
                    "k*alpha within 1e-8 of " + std::to_string(h));
            e.detail = h;
            throw e;
        }

    LogPolynomial P(1, N);
    for (int h = 0; h < N; ++h) {
        LogPolynomial res = residual_series(B, P, h + k + 1);
        Complex psi0 = res.component(0).coeff(h + k + 1, 0);
        Complex c = double(k) * psi0 / (ka - double(h + 1));
        P.component(0).add_term(h + 1, 0, c);
    }
    FormalCurve out;
    out.kind = CurveKind::nonresonant;
    out.series = P;
    out.order_achieved = N;
    out.alpha = {alpha};
    return out;
}

/// Resonant curve (p = 2, k*alpha a positive integer): degrees below k*alpha
/// follow the non-resonant formula, degree k*alpha contributes
/// c x^{k alpha} log x with c = -k psi_{k alpha}(0), and higher degrees solve
/// the triangular log-ODE.
inline FormalCurve formal_curve_resonant(const BlownGerm& B, int N) {
    detail::require_normalized(B);
    detail::require_curve_order(B, N);
    if (B.dim_u != 1) fail(ErrorCode::BadInput, "formal_curve_resonant is the p=2 recursion");
    Complex alpha = B.A(0, 0);
    int k = B.k;
    Complex ka = double(k) * alpha;
    int m = int(std::lround(ka.real()));
    if (m < 1 || std::abs(ka - double(m)) > 1e-8)
        fail(ErrorCode::BadInput, "k*alpha is not a positive integer within 1e-8");

    LogPolynomial P(1, N);
    for (int h = 1; h <= N; ++h) {
        LogPolynomial res = residual_series(B, P, h + k);
        if (h < m) {
            Complex psi0 = res.component(0).coeff(h + k, 0);
            P.component(0).add_term(h, 0, double(k) * psi0 / (ka - double(h)));
        } else if (h == m) {
            Complex psi0 = res.component(0).coeff(m + k, 0);
            P.component(0).add_term(m, 1, -double(k) * psi0);
        } else {
            int tmax = res.component(0).max_log_power();
            if (tmax > h + 2)
                fail(ErrorCode::LogDegreeOverflow,
                     "resonant recursion produced log degree beyond the documented cap");
            CVec R(tmax + 1, 0.0);
            for (int t = 0; t <= tmax; ++t) R[t] = res.component(0).coeff(h + k, t);
            CVec Q = detail::solve_log_ode(R, (ka - double(h)).real(), k);
            for (int t = 0; t < int(Q.size()); ++t) P.component(0).add_term(h, t, Q[t]);
        }
    }
    FormalCurve out;
    out.kind = CurveKind::resonant;
    out.series = P;
    out.order_achieved = N;
    out.alpha = {alpha};
    return out;
}

struct EigenDecomposition {
    CVec values;     // per coordinate after diagonalization
    SmallMatrix V;   // columns are eigenvectors
    SmallMatrix Vinv;
    double condition = 0.0;
};

inline EigenDecomposition diagonalize(const SmallMatrix& A, double cond_bound = 1e6) {
    int n = A.rows();
    EigenDecomposition ed;
    auto eig = directors(A);
    SmallMatrix V(n, n);
    int col = 0;
    for (const auto& e : eig) {
        SmallMatrix shifted = A - e.value * SmallMatrix::identity(n);
        auto basis = null_space(shifted, 1e-8);
        if (int(basis.size()) < e.multiplicity)
            fail(ErrorCode::NonDiagonalizable, "eigenvector basis is incomplete");
        for (int b = 0; b < e.multiplicity; ++b) {
            for (int i = 0; i < n; ++i) V(i, col) = basis[b][i];
            ed.values.push_back(e.value);
            ++col;
        }
    }
    SmallMatrix Vi;
    Complex det = V.solve(SmallMatrix::identity(n), Vi);
    if (det == Complex(0.0)) fail(ErrorCode::NonDiagonalizable, "eigenvector matrix singular");
    ed.condition = V.norm_fro() * Vi.norm_fro();
    if (ed.condition > cond_bound)
        fail(ErrorCode::NonDiagonalizable, "eigenvector basis condition bound exceeded");
    ed.V = V;
    ed.Vinv = Vi;
    return ed;
}

/// Non-resonant formal curve for p > 2 with diagonalizable A: scalar
/// recursion per eigencoordinate, coupled through the full residual.
inline FormalCurve formal_curve_multidim(const BlownGerm& B, int N) {
    detail::require_normalized(B);
    detail::require_curve_order(B, N);
    int k = B.k;
    int du = B.dim_u;
    EigenDecomposition ed;
    try {
        ed = diagonalize(B.A);
    } catch (const Error& err) {
        if (err.code() == ErrorCode::NonDiagonalizable) {
            for (const auto& e : directors(B.A)) {
                Complex ka = double(k) * e.value;
                int m = int(std::lround(ka.real()));
                if (m >= 1 && std::abs(ka - double(m)) <= 1e-8)
                    fail(ErrorCode::UnsupportedResonantJordan,
                         "resonant director with a nontrivial Jordan block");
            }
        }
        throw;
    }
    for (int h = 1; h <= N; ++h)
        for (const auto& a : ed.values)
            if (std::abs(double(k) * a - double(h)) <= 1e-8) {
                Error e(ErrorCode::ResonanceDetected,
                        "k*alpha_j within 1e-8 of " + std::to_string(h));
                e.detail = h;
                throw e;
            }

    // Conjugate u-coordinates by V.
    int p = B.dim_total();
    int n = B.trunc();
    auto lin = [&](const SmallMatrix& M) {
        std::vector<CVec> rows(p, CVec(p, 0.0));
        rows[0][0] = 1.0;
        for (int i = 0; i < du; ++i)
            for (int j = 0; j < du; ++j) rows[1 + i][1 + j] = M(i, j);
        return GermMap::linear(p, n, rows);
    };
    GermMap change = lin(ed.Vinv), change_back = lin(ed.V);
    GermMap conj = germ_compose(change, germ_compose(B.to_map(), change_back, n), n);
    BlownGerm Bd = BlownGerm::from_map(conj, k);
    Bd.A = ed.Vinv * B.A * ed.V;
    Bd.normalized = true;

    LogPolynomial P(du, N);
    for (int h = 0; h < N; ++h) {
        LogPolynomial res = residual_series(Bd, P, h + k + 1);
        for (int j = 0; j < du; ++j) {
            Complex psi0 = res.component(j).coeff(h + k + 1, 0);
            Complex c = double(k) * psi0 / (double(k) * ed.values[j] - double(h + 1));
            P.component(j).add_term(h + 1, 0, c);
        }
    }

    // Back to the original u-coordinates.
    LogPolynomial out_series(du, N);
    for (int i = 0; i < du; ++i) {
        LogSeries acc(N);
        for (int j = 0; j < du; ++j) {
            if (ed.V(i, j) == Complex(0.0)) continue;
            acc += P.component(j) * ed.V(i, j);
        }
        out_series.component(i) = acc;
    }

    FormalCurve out;
    out.kind = CurveKind::nonresonant;
    out.series = out_series;
    out.order_achieved = N;
    out.alpha = ed.values;
    return out;
}

/// Dispatch on the directors: resonant p=2 germs route to the log recursion.
inline FormalCurve formal_curve(const BlownGerm& B, int N) {
    if (B.dim_u == 0) fail(ErrorCode::BadInput, "no transverse coordinates");
    if (B.dim_u == 1) {
        Complex ka = double(B.k) * B.A(0, 0);
        int m = int(std::lround(ka.real()));
        if (m >= 1 && std::abs(ka - double(m)) <= 1e-8) return formal_curve_resonant(B, N);
        return formal_curve_nonresonant(B, N);
    }
    return formal_curve_multidim(B, N);
}

/// Conjugacy defect ||F o phi - phi o Fstar|| over coefficients through `through`.
inline double conjugacy_defect(const GermMap& F, const GermMap& phi, const GermMap& Fstar,
                               int through) {
    GermMap lhs = germ_compose(F, phi, through);
    GermMap rhs = germ_compose(phi, Fstar, through);
    double d = 0.0;
    for (int i = 0; i < F.dim(); ++i)
        d = std::max(d, MultiPoly::coeff_distance(lhs.component(i), rhs.component(i), through));
    return d;
}

} // namespace parabolica
