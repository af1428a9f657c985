#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "parabolica/direction.hpp"
#include "parabolica/germ.hpp"
#include "parabolica/logpoly.hpp"
#include "parabolica/normal_form.hpp"
#include "parabolica/sector.hpp"

namespace parabolica {

/// Anything the orbit engine can iterate: a polynomial germ, a blown germ,
/// or an exact automorphism wrapped in a closure. The into-buffer interface
/// keeps long orbits allocation-free; copies of an EvaluableMap are
/// independent, so hand each thread its own copy.
struct EvaluableMap {
    int dim = 0;
    bool blown_coords = false; // state is (x, u) rather than a point of C^p
    std::function<void(const CVec&, CVec&)> apply_into;

    CVec apply(const CVec& z) const {
        CVec out(dim);
        apply_into(z, out);
        return out;
    }

    static EvaluableMap from_germ(const GermMap& F) {
        EvaluableMap m;
        m.dim = F.dim();
        m.apply_into = [F](const CVec& z, CVec& out) {
            for (int i = 0; i < F.dim(); ++i) out[i] = F.component(i).eval(z);
        };
        return m;
    }

    static EvaluableMap from_blown(const BlownGerm& B) {
        EvaluableMap m;
        m.dim = B.dim_total();
        m.blown_coords = true;
        m.apply_into = [B](const CVec& z, CVec& out) {
            out[0] = B.f.eval(z);
            for (int i = 1; i < int(z.size()); ++i) out[i] = B.psi[i - 1].eval(z);
        };
        return m;
    }
};

/// Distance between convergence directions. In C^p (p >= 2) this is the
/// chordal metric on projective points; in C it is the distance of the
/// circle directions z/|z| (the projective quotient would be trivial there).
inline double direction_error(const CVec& X, const CVec& v) {
    if (X.size() == 1) {
        double nx = std::abs(X[0]), nv = std::abs(v[0]);
        if (nx == 0.0 || nv == 0.0) return std::sqrt(2.0);
        return std::abs(X[0] / nx - v[0] / nv);
    }
    return projective_distance(X, v);
}

enum class StopReason { converged, escaped, max_iter, left_sector };

inline const char* stop_reason_name(StopReason r) {
    switch (r) {
    case StopReason::converged: return "converged";
    case StopReason::escaped: return "escaped";
    case StopReason::max_iter: return "max_iter";
    case StopReason::left_sector: return "left_sector";
    }
    return "?";
}

struct StoppingConfig {
    double converge_eps = 1e-12;
    double escape_R = 10.0;
    long max_n = 1000000;
    std::optional<SectorDomain> sector; // stop on exit (tested on the x slot)
    std::optional<CVec> direction;      // enables the direction-error diagnostic
    int k = 0;                          // enables the n |x_n|^k diagnostic
};

struct OrbitTrace {
    std::vector<CVec> points;
    StopReason stopped_reason = StopReason::max_iter;
    std::vector<double> abs_x;     // |x_n|
    std::vector<double> rate;      // n |x_n|^k (when k was supplied)
    std::vector<double> u_norm;    // transverse size (y/x for germs, u for blown)
    std::vector<double> dir_error; // chordal distance to the direction (when supplied)
};

inline OrbitTrace iterate_orbit(const EvaluableMap& map, CVec X0,
                                const StoppingConfig& stop = {}) {
    if (!is_finite(X0)) fail(ErrorCode::NonFiniteState, "non-finite initial state");
    OrbitTrace tr;
    auto push = [&](const CVec& X, long n) {
        tr.points.push_back(X);
        double ax = std::abs(X[0]);
        tr.abs_x.push_back(ax);
        tr.rate.push_back(stop.k > 0 ? double(n) * std::pow(ax, stop.k) : 0.0);
        double un = 0.0;
        if (map.blown_coords) {
            for (std::size_t i = 1; i < X.size(); ++i) un += std::norm(X[i]);
            un = std::sqrt(un);
        } else if (X.size() > 1 && ax > 0.0) {
            for (std::size_t i = 1; i < X.size(); ++i) un += std::norm(X[i] / X[0]);
            un = std::sqrt(un);
        }
        tr.u_norm.push_back(un);
        tr.dir_error.push_back(stop.direction ? direction_error(X, *stop.direction) : 0.0);
    };

    CVec X = std::move(X0), Y(map.dim);
    push(X, 0);
    for (long n = 0; n < stop.max_n; ++n) {
        double nx = norm2(X);
        if (nx <= stop.converge_eps) {
            tr.stopped_reason = StopReason::converged;
            return tr;
        }
        if (nx >= stop.escape_R) {
            tr.stopped_reason = StopReason::escaped;
            return tr;
        }
        if (stop.sector && !stop.sector->contains(X[0])) {
            tr.stopped_reason = StopReason::left_sector;
            return tr;
        }
        map.apply_into(X, Y);
        X.swap(Y);
        if (!is_finite(X)) fail(ErrorCode::NonFiniteState, "orbit overflowed");
        push(X, n + 1);
    }
    tr.stopped_reason = StopReason::max_iter;
    return tr;
}

struct RateEstimate {
    Complex limit = 0.0;          // lim n x_n^k
    double error_estimate = 0.0;  // spread of the last extrapolants
};

/// Richardson-extrapolated limit of n x_n^k over the tail of the trace.
inline RateEstimate asymptotic_rate(const OrbitTrace& trace, int k) {
    long n = long(trace.points.size()) - 1;
    if (n < 100) fail(ErrorCode::InsufficientTrace, "need at least 100 orbit points");
    auto s = [&](long m) {
        Complex xk = 1.0;
        for (int i = 0; i < k; ++i) xk *= trace.points[m][0];
        return double(m) * xk;
    };
    auto richardson = [&](long m) { return 2.0 * s(m) - s(m / 2); };
    Complex r0 = richardson(n);
    Complex r1 = richardson(n - n / 8);
    Complex r2 = richardson(n - n / 4);
    RateEstimate est;
    est.limit = r0;
    est.error_estimate =
        std::max({std::abs(r0 - r1), std::abs(r0 - r2), std::abs(r1 - r2)});
    return est;
}

struct AuditCheck {
    std::string name;
    bool pass = true;
    double worst_margin = 0.0; // min(bound/actual) - 1 over the orbit
};

struct OrbitAuditConfig {
    long n_max = 2000;
    double summability_C_max = 10.0; // empirical threshold, documented
    double fd_step_rel = 1e-6;
    double slack = 1e-9;
};

struct OrbitAuditReport {
    std::vector<AuditCheck> checks;
    double empirical_C_q0 = 0.0;
    double empirical_C_q1 = 0.0;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Quantitative orbit estimates as runtime checks along the orbit of
/// f_u(x) = f(x, u(x)): the |x_n| bound, the weighted summability bound, and
/// the derivative bound via central differences.
inline OrbitAuditReport orbit_inequality_audit(const BlownGerm& B, const LogPolynomial& u_fn,
                                               Complex x0, const SectorDomain& sector,
                                               const OrbitAuditConfig& cfg = {}) {
    int k = B.k;
    auto u_at = [&](Complex x) -> CVec {
        if (B.dim_u == 0) return {};
        return u_fn.eval(x, sector.log_branch(x));
    };
    auto step = [&](Complex x) {
        auto [x1, u1] = B.step(x, u_at(x));
        (void)u1;
        return x1;
    };

    std::vector<Complex> xs{x0};
    for (long n = 0; n < cfg.n_max; ++n) {
        Complex x1 = step(xs.back());
        if (!is_finite(x1)) fail(ErrorCode::NonFiniteState, "audit orbit overflowed");
        xs.push_back(x1);
    }

    OrbitAuditReport rep;

    // (a) |x_n| <= 2^{1/k} |x| / |1 + n x^k|^{1/k}
    {
        AuditCheck chk{"abs_x_bound", true, std::numeric_limits<double>::infinity()};
        Complex x0k = std::pow(x0, k);
        for (std::size_t n = 0; n < xs.size(); ++n) {
            double bound = std::pow(2.0, 1.0 / k) * std::abs(x0) /
                           std::pow(std::abs(1.0 + double(n) * x0k), 1.0 / k);
            double actual = std::abs(xs[n]);
            if (actual > bound * (1.0 + cfg.slack)) chk.pass = false;
            if (actual > 0.0) chk.worst_margin = std::min(chk.worst_margin, bound / actual - 1.0);
        }
        rep.checks.push_back(chk);
    }

    // (b) sum |x_n|^mu |log x_n|^q <= C |x|^{mu-k} |log|x||^q, (mu,q) = (k+2,0),(k+2,1)
    {
        double mu = k + 2;
        for (int q = 0; q <= 1; ++q) {
            CompensatedSum sum;
            for (const auto& x : xs) {
                double t = std::pow(std::abs(x), mu);
                if (q == 1) t *= std::abs(sector.log_branch(x));
                sum.add(t);
            }
            double rhs = std::pow(std::abs(x0), mu - k);
            if (q == 1) rhs *= std::abs(std::log(std::abs(x0)));
            double C = sum.value() / rhs;
            AuditCheck chk{q == 0 ? "summability_q0" : "summability_q1",
                           C <= cfg.summability_C_max, cfg.summability_C_max / C - 1.0};
            if (q == 0)
                rep.empirical_C_q0 = C;
            else
                rep.empirical_C_q1 = C;
            rep.checks.push_back(chk);
        }
    }

    // (c) |dx_n/dx| <= 2 |x_n|^{k+1} / |x|^{k+1} by central differences
    {
        AuditCheck chk{"derivative_bound", true, std::numeric_limits<double>::infinity()};
        double h = cfg.fd_step_rel * std::abs(x0);
        Complex xp = x0 + h, xm = x0 - h;
        for (std::size_t n = 0; n < xs.size(); ++n) {
            double deriv = std::abs(xp - xm) / (2.0 * h);
            double bound = 2.0 * std::pow(std::abs(xs[n]) / std::abs(x0), k + 1);
            if (deriv > bound * (1.0 + 1e-5)) chk.pass = false;
            if (deriv > 0.0) chk.worst_margin = std::min(chk.worst_margin, bound / deriv - 1.0);
            if (n + 1 < xs.size()) {
                xp = step(xp);
                xm = step(xm);
            }
        }
        rep.checks.push_back(chk);
    }

    return rep;
}

struct SectorCertificate {
    SectorDomain sector;
    int halvings = 0;
    int samples_checked = 0;
    double worst_contraction = 0.0; // min of (1 - ||u1||/||u||) / |x|^k over the shell
};

struct AttractingSectorConfig {
    double gamma = 0.5;
    double rho = 5e-3;
    double c = 0.1;
    int max_halvings = 20;
    int grid = 11;
};

/// Searches for an invariant product sector A^i_{gamma,rho,c} by halving the
/// parameters until a one-step invariance certificate passes on a grid.
inline SectorCertificate attracting_sector(const BlownGerm& B, int sector_index,
                                           const AttractingSectorConfig& cfg = {}) {
    auto ds = directors(B.A);
    double lambda_min = std::numeric_limits<double>::infinity();
    for (const auto& d : ds) lambda_min = std::min(lambda_min, d.value.real());
    if (B.dim_u == 0) lambda_min = 1.0; // pure petal case: no u-contraction needed
    if (!(lambda_min > 0.0))
        fail(ErrorCode::CertificateFailed, "directors are not all attracting");

    int k = B.k;
    for (int attempt = 0; attempt <= cfg.max_halvings; ++attempt) {
        double scale = std::ldexp(1.0, -attempt);
        double gamma = cfg.gamma * scale, rho = cfg.rho * scale, c = cfg.c * scale;
        SectorDomain S{k, rho, sector_index, gamma, rho, c};

        // u samples: origin, mid shell, outer shell
        std::vector<CVec> us;
        us.push_back(CVec(B.dim_u, 0.0));
        if (B.dim_u >= 1) {
            Rng rng(0xA11CE5ULL);
            int m = (B.dim_u == 1) ? 8 : 16;
            for (double shell : {0.5, 1.0}) {
                for (int t = 0; t < m; ++t) {
                    CVec u = (B.dim_u == 1)
                                 ? CVec{std::polar(1.0, 2.0 * kPi * t / m)}
                                 : rng.unit_vector(B.dim_u);
                    for (auto& z : u) z *= shell * c;
                    us.push_back(std::move(u));
                }
            }
        }

        bool ok = true;
        int checked = 0;
        double worst = std::numeric_limits<double>::infinity();
        double phi_max = std::atan(gamma);
        for (int a = 0; a < cfg.grid && ok; ++a) {
            for (int b = 0; b < cfg.grid && ok; ++b) {
                double t = rho * double(a + 1) / cfg.grid;
                double phi = phi_max * (2.0 * b / (cfg.grid - 1) - 1.0);
                Complex xk = std::polar(t, phi);
                Complex x = std::polar(std::pow(t, 1.0 / k),
                                       (phi + 2.0 * kPi * (sector_index - 1)) / k);
                (void)xk;
                for (const auto& u : us) {
                    auto [x1, u1] = B.step(x, u);
                    ++checked;
                    if (!S.contains(x1, u1)) {
                        ok = false;
                        break;
                    }
                    double un = norm2(u);
                    if (un >= 0.999 * c) {
                        // the proof's shell inequality ||u1|| <= ||u||(1 - l |x|^k)
                        double ratio = (un - norm2(u1)) / (un * std::pow(std::abs(x), k));
                        worst = std::min(worst, ratio);
                        if (!(norm2(u1) <= un * (1.0 - 0.5 * lambda_min * std::pow(std::abs(x), k)))) {
                            ok = false;
                            break;
                        }
                    }
                }
            }
        }
        if (ok) {
            SectorCertificate cert;
            cert.sector = S;
            cert.halvings = attempt;
            cert.samples_checked = checked;
            cert.worst_contraction = (worst == std::numeric_limits<double>::infinity()) ? 0.0
                                                                                        : worst;
            return cert;
        }
    }
    fail(ErrorCode::CertificateFailed,
         "no invariant sector found within the halving budget (directors too close to 0 "
         "or truncation too coarse)");
}

enum class BasinVerdict { in_basin, not_in_basin, undecided };

inline const char* basin_verdict_name(BasinVerdict v) {
    switch (v) {
    case BasinVerdict::in_basin: return "in_basin";
    case BasinVerdict::not_in_basin: return "not_in_basin";
    case BasinVerdict::undecided: return "undecided";
    }
    return "?";
}

struct BasinTolerance {
    double r_small = 1e-2;
    double dir_eps = 1e-3;
    int confirm = 50;
    double escape_R = 10.0;
};

struct BasinResult {
    BasinVerdict verdict = BasinVerdict::undecided;
    long n_converge = 0; // first step of the confirmed window
    long steps = 0;
};

/// Membership in the attractive basin toward [v]: the orbit must enter
/// ||X|| <= r_small with projective distance to [v] <= dir_eps and stay for
/// `confirm` consecutive steps. Verdicts are about the supplied map, which
/// for truncated germs is the polynomial model.
inline BasinResult basin_membership(const EvaluableMap& map, CVec X, const CVec& v,
                                    const BasinTolerance& tol = {}, long n_max = 1000000) {
    BasinResult res;
    if (norm2(X) == 0.0) {
        res.verdict = BasinVerdict::not_in_basin; // the basin lives in C^p \ {0}
        return res;
    }
    long window = 0, window_start = 0;
    CVec Y(map.dim);
    for (long n = 0; n <= n_max; ++n) {
        double nx = norm2(X);
        if (nx == 0.0) {
            res.verdict = BasinVerdict::not_in_basin;
            res.steps = n;
            return res;
        }
        if (nx >= tol.escape_R) {
            res.verdict = BasinVerdict::not_in_basin;
            res.steps = n;
            return res;
        }
        if (nx <= tol.r_small && direction_error(X, v) <= tol.dir_eps) {
            if (window == 0) window_start = n;
            ++window;
            if (window >= tol.confirm) {
                res.verdict = BasinVerdict::in_basin;
                res.n_converge = window_start;
                res.steps = n;
                return res;
            }
        } else {
            window = 0;
        }
        map.apply_into(X, Y);
        X.swap(Y);
        if (!is_finite(X)) fail(ErrorCode::NonFiniteState, "basin orbit overflowed");
    }
    res.verdict = BasinVerdict::undecided;
    res.steps = n_max;
    return res;
}

struct BasinClassification {
    int direction = -1; // index into the supplied direction list, -1 = none
    BasinVerdict verdict = BasinVerdict::undecided;
    long n_converge = 0;
    bool double_claim = false; // state ever sat within dir_eps of two directions
};

/// One orbit, classified against every candidate direction at once.
inline BasinClassification basin_classify(const EvaluableMap& map, CVec X,
                                          const std::vector<CVec>& dirs,
                                          const BasinTolerance& tol = {},
                                          long n_max = 1000000) {
    BasinClassification res;
    if (norm2(X) == 0.0) {
        res.verdict = BasinVerdict::not_in_basin;
        return res;
    }
    std::vector<long> window(dirs.size(), 0), window_start(dirs.size(), 0);
    CVec Y(map.dim);
    for (long n = 0; n <= n_max; ++n) {
        double nx = norm2(X);
        if (nx == 0.0 || nx >= tol.escape_R) {
            res.verdict = BasinVerdict::not_in_basin;
            return res;
        }
        if (nx <= tol.r_small) {
            int hits = 0;
            for (std::size_t d = 0; d < dirs.size(); ++d) {
                if (direction_error(X, dirs[d]) <= tol.dir_eps) {
                    ++hits;
                    if (window[d] == 0) window_start[d] = n;
                    ++window[d];
                    if (window[d] >= tol.confirm) {
                        res.direction = int(d);
                        res.verdict = BasinVerdict::in_basin;
                        res.n_converge = window_start[d];
                        return res;
                    }
                } else {
                    window[d] = 0;
                }
            }
            if (hits > 1) res.double_claim = true;
        } else {
            for (auto& w : window) w = 0;
        }
        map.apply_into(X, Y);
        X.swap(Y);
        if (!is_finite(X)) fail(ErrorCode::NonFiniteState, "basin orbit overflowed");
    }
    return res;
}

/// Least-squares slope of log||u_n|| against log|x_n| over the tail.
inline double asymptotic_u_decay(const OrbitTrace& trace, int k, double mu) {
    (void)k;
    (void)mu;
    std::size_t n = trace.points.size();
    if (n < 16) fail(ErrorCode::InsufficientTrace, "trace too short for a decay fit");
    std::size_t lo = n / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t i = lo; i < n; ++i) {
        double un = trace.u_norm[i], ax = trace.abs_x[i];
        if (!(un > 1e-250) || !(ax > 0.0)) continue;
        double X = std::log(ax), Y = std::log(un);
        sx += X;
        sy += Y;
        sxx += X * X;
        sxy += X * Y;
        ++m;
    }
    if (m < 8) fail(ErrorCode::DegenerateFit, "transverse coordinate is identically ~0");
    double denom = double(m) * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) fail(ErrorCode::DegenerateFit, "no spread in |x_n|");
    return (double(m) * sxy - sx * sy) / denom;
}

} // namespace parabolica
