#pragma once

#include <map>
#include <utility>
#include <vector>

#include "parabolica/polynomial.hpp"
#include "parabolica/sector.hpp"
#include "parabolica/types.hpp"

namespace parabolica {

/// Scalar finite sum  sum c_{s,t} x^s (log x)^t  with a hard cap on the
/// x-order s. The log degree is bounded by construction in every use here;
/// max_log_degree is a guard against runaway recursions.
class LogSeries {
public:
    using Key = std::pair<int, int>; // (s, t)

    LogSeries() : max_s_(0) {}
    explicit LogSeries(int max_s) : max_s_(max_s) {}

    static LogSeries monomial(int max_s, int s, int t, Complex c) {
        LogSeries r(max_s);
        r.add_term(s, t, c);
        return r;
    }

    static LogSeries log_x(int max_s) { return monomial(max_s, 0, 1, 1.0); }

    int max_s() const { return max_s_; }
    const std::map<Key, Complex>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    Complex coeff(int s, int t) const {
        auto it = terms_.find({s, t});
        return it == terms_.end() ? Complex(0.0) : it->second;
    }

    void add_term(int s, int t, Complex c) {
        if (s > max_s_ || c == Complex(0.0)) return;
        if (t > max_log_degree)
            fail(ErrorCode::LogDegreeOverflow, "log degree exceeded the guard cap");
        auto it = terms_.find({s, t});
        if (it == terms_.end())
            terms_.emplace(Key{s, t}, c);
        else {
            it->second += c;
            if (it->second == Complex(0.0)) terms_.erase(it);
        }
    }

    /// Lowest x-order present (max_s+1 when zero).
    int min_order() const {
        int d = max_s_ + 1;
        for (const auto& [k, c] : terms_) d = std::min(d, k.first);
        return d;
    }

    int max_log_power() const {
        int t = 0;
        for (const auto& [k, c] : terms_) t = std::max(t, k.second);
        return t;
    }

    double max_abs_coeff() const {
        double v = 0.0;
        for (const auto& [k, c] : terms_) v = std::max(v, std::abs(c));
        return v;
    }

    /// Largest |coefficient| among terms with x-order <= s.
    double max_abs_through_order(int s) const {
        double v = 0.0;
        for (const auto& [k, c] : terms_)
            if (k.first <= s) v = std::max(v, std::abs(c));
        return v;
    }

    void prune(double rel_eps = 1e-14) {
        double cap = max_abs_coeff() * rel_eps;
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (std::abs(it->second) <= cap)
                it = terms_.erase(it);
            else
                ++it;
        }
    }

    LogSeries with_max_s(int n) const {
        LogSeries r(n);
        for (const auto& [k, c] : terms_)
            if (k.first <= n) r.terms_.emplace(k, c);
        return r;
    }

    /// Divide by x^j (requires every term to have order >= j).
    LogSeries shifted(int j) const {
        LogSeries r(max_s_ - j);
        for (const auto& [k, c] : terms_) {
            if (k.first - j < 0) fail(ErrorCode::BadInput, "LogSeries shift below order 0");
            if (k.first - j <= r.max_s_) r.terms_.emplace(Key{k.first - j, k.second}, c);
        }
        return r;
    }

    LogSeries& operator+=(const LogSeries& o) {
        for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, c);
        return *this;
    }

    LogSeries& operator-=(const LogSeries& o) {
        for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, -c);
        return *this;
    }

    LogSeries& operator*=(Complex sc) {
        if (sc == Complex(0.0))
            terms_.clear();
        else
            for (auto& [k, c] : terms_) c *= sc;
        return *this;
    }

    friend LogSeries operator+(LogSeries a, const LogSeries& b) { return a += b; }
    friend LogSeries operator-(LogSeries a, const LogSeries& b) { return a -= b; }
    friend LogSeries operator*(LogSeries a, Complex s) { return a *= s; }
    friend LogSeries operator*(Complex s, LogSeries a) { return a *= s; }

    friend LogSeries operator*(const LogSeries& a, const LogSeries& b) {
        LogSeries r(std::min(a.max_s_, b.max_s_));
        for (const auto& [ka, ca] : a.terms_) {
            if (ka.first > r.max_s_) continue;
            for (const auto& [kb, cb] : b.terms_) {
                if (ka.first + kb.first > r.max_s_) continue;
                r.add_term(ka.first + kb.first, ka.second + kb.second, ca * cb);
            }
        }
        r.prune();
        return r;
    }

    LogSeries pow(int e) const {
        LogSeries r = monomial(max_s_, 0, 0, 1.0);
        LogSeries base = *this;
        while (e > 0) {
            if (e & 1) r = r * base;
            base = base * base;
            e >>= 1;
        }
        return r;
    }

    /// log(1 + w) for a series w of positive order.
    static LogSeries log1p(const LogSeries& w) {
        if (!w.is_zero() && w.min_order() < 1)
            fail(ErrorCode::BadInput, "log1p needs a series of positive order");
        LogSeries sum(w.max_s());
        LogSeries wp = w;
        int m = 1;
        while (!wp.is_zero() && m <= w.max_s()) {
            sum += wp * Complex(((m % 2) ? 1.0 : -1.0) / double(m));
            wp = wp * w;
            ++m;
        }
        return sum;
    }

    Complex eval(Complex x, Complex logx) const {
        ComplexCompensatedSum acc;
        for (const auto& [k, c] : terms_) {
            Complex t = c;
            for (int i = 0; i < k.first; ++i) t *= x;
            for (int i = 0; i < k.second; ++i) t *= logx;
            acc.add(t);
        }
        return acc.value();
    }

    static constexpr int max_log_degree = 64;

private:
    int max_s_;
    std::map<Key, Complex> terms_;
};

/// Vector-valued log polynomial in C^m: the container for P_h, Q_h, R_h and
/// psi_h data. branch_index fixes which sector component evaluates log x.
class LogPolynomial {
public:
    LogPolynomial() = default;
    LogPolynomial(int m, int max_s, int branch_index = 1)
        : branch_index_(branch_index), comp_(m, LogSeries(max_s)) {}

    int dim() const { return int(comp_.size()); }
    int branch_index() const { return branch_index_; }
    void set_branch_index(int i) { branch_index_ = i; }

    LogSeries& component(int i) { return comp_[i]; }
    const LogSeries& component(int i) const { return comp_[i]; }

    bool has_log_terms() const {
        for (const auto& s : comp_)
            if (s.max_log_power() > 0) return true;
        return false;
    }

    bool is_zero() const {
        for (const auto& s : comp_)
            if (!s.is_zero()) return false;
        return true;
    }

    int min_order() const {
        int d = comp_.empty() ? 0 : comp_[0].max_s() + 1;
        for (const auto& s : comp_) d = std::min(d, s.min_order());
        return d;
    }

    /// Map view (s,t) -> coefficient vector, in deterministic key order.
    std::map<std::pair<int, int>, CVec> term_map() const {
        std::map<std::pair<int, int>, CVec> out;
        for (int i = 0; i < dim(); ++i)
            for (const auto& [k, c] : comp_[i].terms()) {
                auto it = out.find(k);
                if (it == out.end()) {
                    CVec v(dim(), 0.0);
                    v[i] = c;
                    out.emplace(k, std::move(v));
                } else {
                    it->second[i] = c;
                }
            }
        return out;
    }

    CVec eval(Complex x, Complex logx) const {
        CVec v(dim());
        for (int i = 0; i < dim(); ++i) v[i] = comp_[i].eval(x, logx);
        return v;
    }

    /// Evaluation with the sector's log branch; x must lie in the sector.
    CVec eval(Complex x, const SectorDomain& sector) const {
        require_in_sector(x, sector);
        return eval(x, sector.log_branch(x));
    }

private:
    int branch_index_ = 1;
    std::vector<LogSeries> comp_;
};

/// Substitute u_i(x) (log series) for the u-variables of g(x, u_1..u_du),
/// where variable 0 of g is x itself. Result truncated at x-order max_s.
inline LogSeries substitute_log(const MultiPoly& g, const std::vector<LogSeries>& u, int max_s) {
    int du = int(u.size());
    if (g.dim() != du + 1) fail(ErrorCode::DimensionMismatch, "substitute_log arity");
    std::vector<int> max_exp(du, 0);
    for (const auto& [m, c] : g.terms())
        for (int i = 0; i < du; ++i) max_exp[i] = std::max(max_exp[i], m.e[i + 1]);
    std::vector<std::vector<LogSeries>> pw(du);
    for (int i = 0; i < du; ++i) {
        pw[i].push_back(LogSeries::monomial(max_s, 0, 0, 1.0));
        for (int k = 1; k <= max_exp[i]; ++k) pw[i].push_back(pw[i].back() * u[i]);
    }
    LogSeries r(max_s);
    for (const auto& [m, c] : g.terms()) {
        if (m.e[0] > max_s) continue;
        LogSeries t = LogSeries::monomial(max_s, m.e[0], 0, c);
        for (int i = 0; i < du; ++i)
            if (m.e[i + 1] > 0) t = t * pw[i][m.e[i + 1]];
        r += t;
    }
    r.prune();
    return r;
}

/// u(f) for a scalar log series u(x) and an inner series f = x(1 + w) of
/// order exactly 1 in x. Handles the log terms via log f = log x + log(1+w).
inline LogSeries compose_log(const LogSeries& u, const LogSeries& f) {
    int max_s = std::min(u.max_s(), f.max_s());
    if (!f.is_zero() && f.min_order() < 1)
        fail(ErrorCode::BadInput, "compose_log needs an inner series of order >= 1");
    LogSeries w = f.shifted(1).with_max_s(max_s); // f/x
    w.add_term(0, 0, -1.0);                       // w = f/x - 1
    LogSeries L = LogSeries::log1p(w);

    int max_pow = 0, max_t = 0;
    for (const auto& [k, c] : u.terms()) {
        max_pow = std::max(max_pow, k.first);
        max_t = std::max(max_t, k.second);
    }
    std::vector<LogSeries> fpow{LogSeries::monomial(max_s, 0, 0, 1.0)};
    for (int e = 1; e <= max_pow; ++e) fpow.push_back(fpow.back() * f.with_max_s(max_s));
    std::vector<LogSeries> Lpow{LogSeries::monomial(max_s, 0, 0, 1.0)};
    for (int e = 1; e <= max_t; ++e) Lpow.push_back(Lpow.back() * L);

    // binomials
    std::vector<std::vector<double>> choose(max_t + 1, std::vector<double>(max_t + 1, 0.0));
    for (int n = 0; n <= max_t; ++n) {
        choose[n][0] = 1.0;
        for (int j = 1; j <= n; ++j)
            choose[n][j] = choose[n - 1][j - 1] + ((j <= n - 1) ? choose[n - 1][j] : 0.0);
    }

    LogSeries r(max_s);
    for (const auto& [k, c] : u.terms()) {
        // (log f)^t = sum_j C(t,j) (log x)^(t-j) L^j
        for (int j = 0; j <= k.second; ++j) {
            LogSeries t = fpow[k.first] * Lpow[j];
            t *= c * choose[k.second][j];
            // multiply by (log x)^(t-j): shift log powers
            LogSeries shifted(max_s);
            for (const auto& [kk, cc] : t.terms())
                shifted.add_term(kk.first, kk.second + (k.second - j), cc);
            r += shifted;
        }
    }
    r.prune();
    return r;
}

} // namespace parabolica
