#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "parabolica/error.hpp"
#include "parabolica/types.hpp"

namespace parabolica {

/// Exponent vector of a monomial in p variables.
struct Monomial {
    std::vector<int> e;

    Monomial() = default;
    explicit Monomial(int dim) : e(dim, 0) {}
    Monomial(std::initializer_list<int> il) : e(il) {}

    int dim() const { return int(e.size()); }

    int degree() const {
        int d = 0;
        for (int x : e) d += x;
        return d;
    }

    Monomial operator*(const Monomial& o) const {
        Monomial r(*this);
        for (std::size_t i = 0; i < e.size(); ++i) r.e[i] += o.e[i];
        return r;
    }

    bool operator==(const Monomial& o) const { return e == o.e; }
    bool operator<(const Monomial& o) const { return e < o.e; }
};

/// Sparse multivariate polynomial over C with a hard total-degree cap.
/// Terms are held in an ordered map so every iteration (and hence every
/// floating-point reduction) happens in one fixed, reproducible order.
class MultiPoly {
public:
    MultiPoly() : dim_(1), trunc_(1) {}
    MultiPoly(int dim, int trunc) : dim_(dim), trunc_(trunc) {
        if (dim < 1) fail(ErrorCode::BadInput, "polynomial dimension must be >= 1");
        if (trunc < 1) fail(ErrorCode::BadInput, "truncation degree must be >= 1");
    }

    static MultiPoly constant(int dim, int trunc, Complex c) {
        MultiPoly p(dim, trunc);
        p.set_coeff(Monomial(dim), c);
        return p;
    }

    static MultiPoly variable(int dim, int trunc, int i, Complex scale = 1.0) {
        MultiPoly p(dim, trunc);
        Monomial m(dim);
        m.e[i] = 1;
        p.set_coeff(m, scale);
        return p;
    }

    int dim() const { return dim_; }
    int trunc() const { return trunc_; }
    const std::map<Monomial, Complex>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    Complex coeff(const Monomial& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? Complex(0.0) : it->second;
    }

    void set_coeff(const Monomial& m, Complex c) {
        if (int(m.e.size()) != dim_) fail(ErrorCode::DimensionMismatch, "monomial dimension");
        if (m.degree() > trunc_) return;
        if (c == Complex(0.0))
            terms_.erase(m);
        else
            terms_[m] = c;
    }

    void add_term(const Monomial& m, Complex c) {
        if (m.degree() > trunc_) return;
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            if (c != Complex(0.0)) terms_.emplace(m, c);
        } else {
            it->second += c;
            if (it->second == Complex(0.0)) terms_.erase(it);
        }
    }

    /// Lowest total degree among stored terms (trunc+1 when zero).
    int min_degree() const {
        int d = trunc_ + 1;
        for (const auto& [m, c] : terms_) d = std::min(d, m.degree());
        return d;
    }

    int max_degree() const {
        int d = 0;
        for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
        return d;
    }

    double max_abs_coeff() const {
        double v = 0.0;
        for (const auto& [m, c] : terms_) v = std::max(v, std::abs(c));
        return v;
    }

    /// Coefficient-map sup distance, ignoring truncation mismatch above `through`.
    static double coeff_distance(const MultiPoly& a, const MultiPoly& b, int through) {
        double d = 0.0;
        for (const auto& [m, c] : a.terms_)
            if (m.degree() <= through) d = std::max(d, std::abs(c - b.coeff(m)));
        for (const auto& [m, c] : b.terms_)
            if (m.degree() <= through) d = std::max(d, std::abs(c - a.coeff(m)));
        return d;
    }

    MultiPoly with_truncation(int n) const {
        MultiPoly r(dim_, n);
        for (const auto& [m, c] : terms_)
            if (m.degree() <= n) r.terms_.emplace(m, c);
        return r;
    }

    /// Drop coefficients below rel_eps * (largest coefficient).
    void prune(double rel_eps = 1e-14) {
        double cap = max_abs_coeff() * rel_eps;
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (std::abs(it->second) <= cap)
                it = terms_.erase(it);
            else
                ++it;
        }
    }

    MultiPoly& operator+=(const MultiPoly& o) {
        check_dim(o);
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }

    MultiPoly& operator-=(const MultiPoly& o) {
        check_dim(o);
        for (const auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }

    MultiPoly& operator*=(Complex s) {
        if (s == Complex(0.0)) {
            terms_.clear();
            return *this;
        }
        for (auto& [m, c] : terms_) c *= s;
        return *this;
    }

    friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
    friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }
    friend MultiPoly operator*(MultiPoly a, Complex s) { return a *= s; }
    friend MultiPoly operator*(Complex s, MultiPoly a) { return a *= s; }

    friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
        a.check_dim(b);
        MultiPoly r(a.dim_, std::min(a.trunc_, b.trunc_));
        for (const auto& [ma, ca] : a.terms_) {
            int da = ma.degree();
            if (da > r.trunc_) continue;
            for (const auto& [mb, cb] : b.terms_) {
                if (da + mb.degree() > r.trunc_) continue;
                r.add_term(ma * mb, ca * cb);
            }
        }
        r.prune();
        return r;
    }

    /// Direct term-by-term evaluation with compensated accumulation.
    Complex eval(std::span<const Complex> z) const {
        if (int(z.size()) != dim_) fail(ErrorCode::DimensionMismatch, "poly_eval point dimension");
        ComplexCompensatedSum acc;
        for (const auto& [m, c] : terms_) {
            Complex t = c;
            for (int i = 0; i < dim_; ++i)
                for (int k = 0; k < m.e[i]; ++k) t *= z[i];
            acc.add(t);
        }
        return acc.value();
    }

    Complex eval(const CVec& z) const { return eval(std::span<const Complex>(z)); }

    MultiPoly derivative(int var) const {
        MultiPoly r(dim_, trunc_);
        for (const auto& [m, c] : terms_) {
            if (m.e[var] == 0) continue;
            Monomial d = m;
            d.e[var] -= 1;
            r.add_term(d, c * double(m.e[var]));
        }
        return r;
    }

    /// Degree-d homogeneous slice.
    MultiPoly homogeneous(int d) const {
        MultiPoly r(dim_, trunc_);
        for (const auto& [m, c] : terms_)
            if (m.degree() == d) r.terms_.emplace(m, c);
        return r;
    }

    /// Substitute polynomials for the variables, truncating at `n`.
    /// Powers of the arguments are cached by the caller via PowerTable.
    struct PowerTable {
        std::vector<std::vector<MultiPoly>> pw; // pw[i][k] = args[i]^k

        PowerTable(const std::vector<MultiPoly>& args, const std::vector<int>& max_exp, int n) {
            pw.resize(args.size());
            for (std::size_t i = 0; i < args.size(); ++i) {
                pw[i].reserve(max_exp[i] + 1);
                MultiPoly one = MultiPoly::constant(args[i].dim(), n, 1.0);
                pw[i].push_back(one);
                for (int k = 1; k <= max_exp[i]; ++k)
                    pw[i].push_back(pw[i].back() * args[i].with_truncation(n));
            }
        }
    };

    MultiPoly substitute(const std::vector<MultiPoly>& args, int n, const PowerTable& table) const {
        if (int(args.size()) != dim_) fail(ErrorCode::DimensionMismatch, "substitute arity");
        int adim = args.empty() ? dim_ : args[0].dim();
        MultiPoly r(adim, n);
        for (const auto& [m, c] : terms_) {
            MultiPoly t = MultiPoly::constant(adim, n, c);
            for (int i = 0; i < dim_; ++i)
                if (m.e[i] > 0) t = t * table.pw[i][m.e[i]];
            r += t;
        }
        r.prune();
        return r;
    }

    MultiPoly substitute(const std::vector<MultiPoly>& args, int n) const {
        std::vector<int> max_exp(dim_, 0);
        for (const auto& [m, c] : terms_)
            for (int i = 0; i < dim_; ++i) max_exp[i] = std::max(max_exp[i], m.e[i]);
        PowerTable table(args, max_exp, n);
        return substitute(args, n, table);
    }

private:
    void check_dim(const MultiPoly& o) const {
        if (o.dim_ != dim_) fail(ErrorCode::DimensionMismatch, "polynomial dimensions differ");
    }

    int dim_;
    int trunc_;
    std::map<Monomial, Complex> terms_;
};

} // namespace parabolica
