#pragma once

#include <vector>

#include "parabolica/polynomial.hpp"
#include "parabolica/types.hpp"

namespace parabolica {

/// Truncated polynomial self-map of (C^p, 0).
class GermMap {
public:
    GermMap() = default;
    GermMap(int dim, int trunc) : dim_(dim), trunc_(trunc) {
        components_.assign(dim, MultiPoly(dim, trunc));
    }

    static GermMap identity(int dim, int trunc) {
        GermMap g(dim, trunc);
        for (int i = 0; i < dim; ++i)
            g.components_[i] = MultiPoly::variable(dim, trunc, i);
        return g;
    }

    /// Linear germ z -> L z (L row-major, dim x dim).
    static GermMap linear(int dim, int trunc, const std::vector<CVec>& rows) {
        GermMap g(dim, trunc);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                if (rows[i][j] != Complex(0.0))
                    g.components_[i] += MultiPoly::variable(dim, trunc, j, rows[i][j]);
        return g;
    }

    int dim() const { return dim_; }
    int trunc() const { return trunc_; }
    const MultiPoly& component(int i) const { return components_[i]; }
    MultiPoly& component(int i) { return components_[i]; }
    const std::vector<MultiPoly>& components() const { return components_; }

    void set_component(int i, MultiPoly p) { components_[i] = std::move(p); }

    CVec eval(const CVec& z) const {
        CVec w(dim_);
        for (int i = 0; i < dim_; ++i) w[i] = components_[i].eval(z);
        return w;
    }

    GermMap with_truncation(int n) const {
        GermMap g(dim_, n);
        for (int i = 0; i < dim_; ++i) g.components_[i] = components_[i].with_truncation(n);
        return g;
    }

    bool vanishes_at_origin(double tol = 0.0) const {
        for (const auto& comp : components_)
            if (std::abs(comp.coeff(Monomial(dim_))) > tol) return false;
        return true;
    }

    /// Max deviation of the linear part from the identity matrix.
    double linear_part_identity_defect() const {
        double d = 0.0;
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) {
                Monomial m(dim_);
                m.e[j] = 1;
                Complex want = (i == j) ? 1.0 : 0.0;
                d = std::max(d, std::abs(components_[i].coeff(m) - want));
            }
        return d;
    }

    friend bool operator==(const GermMap& a, const GermMap& b) {
        if (a.dim_ != b.dim_) return false;
        for (int i = 0; i < a.dim_; ++i)
            if (a.components_[i].terms() != b.components_[i].terms()) return false;
        return true;
    }

private:
    int dim_ = 0;
    int trunc_ = 0;
    std::vector<MultiPoly> components_;
};

/// F o G truncated at total degree n.
inline GermMap germ_compose(const GermMap& F, const GermMap& G, int n) {
    if (F.dim() != G.dim()) fail(ErrorCode::DimensionMismatch, "germ_compose dimensions");
    if (n < 1) fail(ErrorCode::BadInput, "germ_compose truncation must be >= 1");
    int p = F.dim();
    std::vector<int> max_exp(p, 0);
    for (int i = 0; i < p; ++i)
        for (const auto& [m, c] : F.component(i).terms())
            for (int j = 0; j < p; ++j) max_exp[j] = std::max(max_exp[j], m.e[j]);
    MultiPoly::PowerTable table(G.components(), max_exp, n);
    GermMap r(p, n);
    for (int i = 0; i < p; ++i)
        r.set_component(i, F.component(i).substitute(G.components(), n, table));
    return r;
}

/// Degree-d homogeneous part of each component.
inline std::vector<MultiPoly> homogeneous_part(const GermMap& F, int d) {
    std::vector<MultiPoly> parts;
    parts.reserve(F.dim());
    for (int i = 0; i < F.dim(); ++i) parts.push_back(F.component(i).homogeneous(d));
    return parts;
}

inline CVec eval_homogeneous(const std::vector<MultiPoly>& parts, const CVec& v) {
    CVec w(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) w[i] = parts[i].eval(v);
    return w;
}

struct GermOrder {
    int nu0 = 0;          // order: minimal nu >= 2 with P_nu != 0
    int k = 0;            // nu0 - 1
    bool nondegenerate = false;
};

/// Sampling oracle for non-degeneracy of the leading homogeneous part:
/// 1000 seeded pseudo-random unit vectors plus the coordinate axes.
inline bool leading_part_nondegenerate(const std::vector<MultiPoly>& parts, int p,
                                       double tol = 1e-12) {
    Rng rng(0xC0FFEEULL);
    for (int i = 0; i < p; ++i) {
        CVec axis(p, 0.0);
        axis[i] = 1.0;
        if (norm2(eval_homogeneous(parts, axis)) <= tol) return false;
    }
    for (int s = 0; s < 1000; ++s) {
        CVec v = rng.unit_vector(p);
        if (norm2(eval_homogeneous(parts, v)) <= tol) return false;
    }
    return true;
}

inline GermOrder germ_order(const GermMap& F) {
    if (F.linear_part_identity_defect() > 1e-12)
        fail(ErrorCode::NotTangent, "germ linear part is not the identity");
    for (int d = 2; d <= F.trunc(); ++d) {
        auto parts = homogeneous_part(F, d);
        bool nonzero = false;
        for (const auto& part : parts)
            if (!part.is_zero()) nonzero = true;
        if (nonzero) {
            GermOrder o;
            o.nu0 = d;
            o.k = d - 1;
            o.nondegenerate = leading_part_nondegenerate(parts, F.dim());
            return o;
        }
    }
    fail(ErrorCode::IdentityGerm, "all nonlinear parts vanish within truncation");
}

/// Conjugate by an invertible linear map: returns Linv o F o L.
inline GermMap conjugate_linear(const GermMap& F, const std::vector<CVec>& L,
                                const std::vector<CVec>& Linv) {
    int n = F.trunc();
    GermMap gl = GermMap::linear(F.dim(), n, L);
    GermMap gli = GermMap::linear(F.dim(), n, Linv);
    return germ_compose(gli, germ_compose(F, gl, n), n);
}

/// Truncated compositional inverse of a tangent-to-identity germ:
/// G with F o G = id through total degree n, built degree by degree.
inline GermMap germ_inverse(const GermMap& F, int n) {
    if (F.linear_part_identity_defect() > 1e-12)
        fail(ErrorCode::NotTangent, "germ_inverse needs a tangent-to-identity germ");
    GermMap G = GermMap::identity(F.dim(), n);
    for (int d = 2; d <= n; ++d) {
        GermMap R = germ_compose(F.with_truncation(n), G, d);
        for (int i = 0; i < F.dim(); ++i) {
            MultiPoly corr = R.component(i).homogeneous(d);
            if (i < F.dim()) {
                MultiPoly g = G.component(i);
                g -= corr.with_truncation(n);
                G.set_component(i, g);
            }
        }
    }
    return G;
}

} // namespace parabolica
