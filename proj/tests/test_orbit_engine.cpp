#include <gtest/gtest.h>

#include "parabolica/orbit.hpp"
#include "test_util.hpp"

using namespace parabolica;

namespace {

BlownGerm blown(const GermMap& F, const CVec& v, int N) {
    auto res = characteristic_directions(F);
    for (const auto& rep : res.reports)
        if (projective_distance(rep.direction, v) < 1e-8)
            return normalize_first_component(blow_up_chart(F, rep, N));
    throw std::runtime_error("direction not found");
}

} // namespace

TEST(SectorMembership, Examples) {
    SectorDomain s1{1, 0.5, 1, 0.0, 0.0, 0.0};
    EXPECT_TRUE(s1.contains(Complex(0.5)));

    double r = 0.3;
    SectorDomain s2{2, r, 1, 0.0, 0.0, 0.0};
    EXPECT_FALSE(s2.contains(Complex(0.0, std::sqrt(r)))); // |x^2 - r| = 2r

    SectorDomain s3{2, r, 2, 0.0, 0.0, 0.0};
    EXPECT_TRUE(s3.contains(Complex(-std::sqrt(r / 2.0)))); // component 2

    // aperture narrowing
    SectorDomain s4{1, 0.5, 1, 0.1, 0.2, 0.0};
    EXPECT_TRUE(s4.contains(Complex(0.1)));
    EXPECT_FALSE(s4.contains(Complex(0.1, 0.05))); // |Im| > gamma Re
}

TEST(SectorMembership, LogBranchPerComponent) {
    SectorDomain s{2, 0.3, 2, 0.0, 0.0, 0.0};
    Complex x(-0.4, 0.0);
    ASSERT_TRUE(s.contains(x));
    Complex lx = s.log_branch(x);
    EXPECT_NEAR(lx.imag(), kPi, 1e-12); // continuous argument = pi on the ray
}

TEST(IterateOrbit, OneStepAndMonotonicity) {
    GermMap F = ptest::germ_1d(1, -1.0, 8); // z - z^2
    auto map = EvaluableMap::from_germ(F);
    StoppingConfig stop;
    stop.max_n = 200;
    OrbitTrace tr = iterate_orbit(map, {Complex(0.1)}, stop);
    EXPECT_NEAR(std::abs(tr.points[1][0] - Complex(0.09)), 0.0, 1e-15);
    for (std::size_t n = 1; n < tr.points.size(); ++n) {
        Complex z = tr.points[n][0];
        EXPECT_NEAR(z.imag(), 0.0, 1e-18);
        EXPECT_GT(z.real(), 0.0);
        EXPECT_LT(z.real(), tr.points[n - 1][0].real());
    }
}

TEST(IterateOrbit, ConvergesWithDirectionError) {
    GermMap F = ptest::germ_Fa(3.0);
    auto map = EvaluableMap::from_germ(F);
    StoppingConfig stop;
    stop.converge_eps = 2e-4;
    stop.max_n = 100000;
    stop.direction = CVec{1.0, 0.0};
    stop.k = 1;
    OrbitTrace tr = iterate_orbit(map, {Complex(0.05), Complex(0.01)}, stop);
    EXPECT_EQ(tr.stopped_reason, StopReason::converged);
    EXPECT_LT(tr.dir_error.back(), 1e-4);
}

TEST(AsymptoticRate, LeauFatouConstants) {
    {
        GermMap F = ptest::germ_1d(1, -1.0, 8); // z - z^2, limit 1
        StoppingConfig stop;
        stop.converge_eps = 0.0;
        stop.max_n = 10000;
        OrbitTrace tr = iterate_orbit(EvaluableMap::from_germ(F), {Complex(0.1)}, stop);
        RateEstimate est = asymptotic_rate(tr, 1);
        EXPECT_NEAR(std::abs(est.limit), 1.0, 0.01);
    }
    {
        // z + a z^4, k = 3, a = -1/3: n |z_n|^3 -> 1/(k|a|) = 1
        GermMap F = ptest::germ_1d(3, Complex(-1.0 / 3.0), 8);
        StoppingConfig stop;
        stop.converge_eps = 0.0;
        stop.max_n = 100000;
        OrbitTrace tr = iterate_orbit(EvaluableMap::from_germ(F), {Complex(0.2)}, stop);
        RateEstimate est = asymptotic_rate(tr, 3);
        EXPECT_NEAR(std::abs(est.limit), 1.0, 0.02);
    }
    {
        OrbitTrace tiny;
        tiny.points.assign(10, CVec{Complex(0.1)});
        EXPECT_THROW(asymptotic_rate(tiny, 1), Error);
    }
}

TEST(AsymptoticRate, MatchesLeadingCoefficientOracle) {
    // limit = -1/(k p_{k+1}(1,u0)) from the germ-analysis side
    GermMap F = ptest::germ_Fa(3.0);
    StoppingConfig stop;
    stop.converge_eps = 0.0;
    stop.max_n = 20000;
    OrbitTrace tr =
        iterate_orbit(EvaluableMap::from_germ(F), {Complex(0.05), Complex(0.001)}, stop);
    RateEstimate est = asymptotic_rate(tr, 1);
    EXPECT_NEAR(std::abs(est.limit - Complex(1.0)), 0.0, 0.02); // -1/(1 * -1)
}

TEST(OrbitAudit, ModelGermAllChecksPass) {
    GermMap F = ptest::germ_1d(1, -1.0, 10); // z - z^2
    auto res = characteristic_directions(F);
    BlownGerm B = normalize_first_component(blow_up_chart(F, res.reports[0], 8));
    SectorDomain sector{1, 1e-2, 1, 0.0, 0.0, 0.0};
    LogPolynomial zero(0, 4);
    OrbitAuditReport rep = orbit_inequality_audit(B, zero, Complex(0.05), sector);
    for (const auto& chk : rep.checks) {
        EXPECT_TRUE(chk.pass) << chk.name;
    }
    EXPECT_GT(rep.empirical_C_q0, 0.0);
    EXPECT_LT(rep.empirical_C_q0, 10.0);
}

TEST(OrbitAudit, ExactlySolvableDerivativeMargin) {
    // x1 = x/(1+x) truncated: dx_n/dx = (1+nx)^{-2}; margin >= 1
    std::vector<std::vector<ptest::Term>> terms(1);
    double sign = -1.0;
    for (int d = 2; d <= 12; ++d) {
        terms[0].push_back({{d}, sign});
        sign = -sign;
    }
    GermMap F = ptest::make_germ(1, 12, terms);
    auto res = characteristic_directions(F);
    BlownGerm B = normalize_first_component(blow_up_chart(F, res.reports[0], 10));
    SectorDomain sector{1, 1e-2, 1, 0.0, 0.0, 0.0};
    LogPolynomial zero(0, 4);
    OrbitAuditConfig cfg;
    cfg.n_max = 500;
    OrbitAuditReport rep = orbit_inequality_audit(B, zero, Complex(0.02), sector, cfg);
    for (const auto& chk : rep.checks)
        if (chk.name == "derivative_bound") {
            EXPECT_TRUE(chk.pass);
            EXPECT_GE(chk.worst_margin, 0.99);
        }
}

TEST(AttractingSector, CertificateForFa) {
    GermMap F = ptest::germ_Fa(3.0);
    BlownGerm B = blown(F, {1.0, 0.0}, 10);
    SectorCertificate cert = attracting_sector(B, 1);
    EXPECT_GT(cert.samples_checked, 0);
    EXPECT_GT(cert.sector.rho, 0.0);
    EXPECT_GT(cert.worst_contraction, 0.0);

    // every sampled interior point is attracted along [1:0]
    auto map = EvaluableMap::from_germ(F);
    BasinTolerance tol;
    Rng rng(7);
    for (int t = 0; t < 50; ++t) {
        double s = cert.sector.rho * (0.2 + 0.8 * rng.uniform());
        double phi = std::atan(cert.sector.gamma) * (2.0 * rng.uniform() - 1.0);
        Complex x = std::polar(s, phi);
        Complex uu = std::polar(cert.sector.c * rng.uniform(), rng.uniform(0.0, 2.0 * kPi));
        CVec X{x, uu * x};
        auto res = basin_membership(map, X, {1.0, 0.0}, tol, 200000);
        EXPECT_EQ(res.verdict, BasinVerdict::in_basin);
    }
}

TEST(AttractingSector, FailsForNonAttracting) {
    GermMap F = ptest::germ_Fa(0.5); // director -1/2
    BlownGerm B = blown(F, {1.0, 0.0}, 10);
    try {
        attracting_sector(B, 1);
        FAIL() << "certificate must fail";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CertificateFailed);
    }
}

TEST(AttractingSector, OneDimensionalPetal) {
    GermMap F = ptest::germ_1d(1, -1.0, 10);
    auto res = characteristic_directions(F);
    BlownGerm B = normalize_first_component(blow_up_chart(F, res.reports[0], 8));
    SectorCertificate cert = attracting_sector(B, 1);
    EXPECT_GE(cert.halvings, 0);
}

TEST(BasinMembership, Verdicts) {
    GermMap F = ptest::germ_Fa(3.0);
    auto map = EvaluableMap::from_germ(F);
    BasinTolerance tol;

    // the fixed point itself is excluded by definition
    auto zero = basin_membership(map, {Complex(0.0), Complex(0.0)}, {1.0, 0.0}, tol);
    EXPECT_EQ(zero.verdict, BasinVerdict::not_in_basin);

    auto onpetal = basin_membership(map, {Complex(0.05), Complex(0.0005)}, {1.0, 0.0}, tol);
    EXPECT_EQ(onpetal.verdict, BasinVerdict::in_basin);

    auto repelling = basin_membership(map, {Complex(-0.05), Complex(0.0)}, {1.0, 0.0}, tol);
    EXPECT_EQ(repelling.verdict, BasinVerdict::not_in_basin);
}

TEST(AsymptoticUDecay, SlopeAndDegenerates) {
    GermMap F = ptest::germ_Fa(3.0);
    StoppingConfig stop;
    stop.converge_eps = 0.0;
    stop.max_n = 30000;
    OrbitTrace tr =
        iterate_orbit(EvaluableMap::from_germ(F), {Complex(0.05), Complex(0.002)}, stop);
    double slope = asymptotic_u_decay(tr, 1, 0.9);
    EXPECT_GE(slope, 0.8); // contract: slope >= k mu - 0.1 for mu < 2

    // invariant axis: u == 0 all along
    OrbitTrace axis =
        iterate_orbit(EvaluableMap::from_germ(F), {Complex(0.05), Complex(0.0)}, stop);
    EXPECT_THROW(asymptotic_u_decay(axis, 1, 0.9), Error);

    // 1D germ: no transverse coordinate at all
    GermMap g = ptest::germ_1d(1, -1.0, 8);
    StoppingConfig s1;
    s1.converge_eps = 0.0;
    s1.max_n = 1000;
    OrbitTrace tr1 = iterate_orbit(EvaluableMap::from_germ(g), {Complex(0.05)}, s1);
    EXPECT_THROW(asymptotic_u_decay(tr1, 1, 0.9), Error);
}

TEST(PetalCoverage, ForwardAndBackwardPetalsCoverCircle) {
    // f(z) = z + z^3 (k = 2): forward petals toward +-i, backward toward +-1.
    GermMap F = ptest::germ_1d(2, 1.0, 12);
    GermMap Finv = germ_inverse(F, 12);
    auto fwd = EvaluableMap::from_germ(F);
    auto bwd = EvaluableMap::from_germ(Finv);
    CVec fdirs = attracting_directions_1d(2, 1.0);  // +-i
    CVec bdirs = attracting_directions_1d(2, -1.0); // +-1

    BasinTolerance tol;
    tol.r_small = 5e-3;
    tol.dir_eps = 1e-2;
    tol.confirm = 50;

    std::vector<CVec> fdir_list, bdir_list;
    for (Complex v : fdirs) fdir_list.push_back({v});
    for (Complex v : bdirs) bdir_list.push_back({v});

    int samples = 72; // the acceptance suite runs the full 360
    for (int j = 0; j < samples; ++j) {
        Complex z = std::polar(0.01, 2.0 * kPi * j / samples);
        auto forward = basin_classify(fwd, {z}, fdir_list, tol, 3000000);
        EXPECT_FALSE(forward.double_claim) << "sample " << j << " claimed twice";
        bool covered = forward.verdict == BasinVerdict::in_basin;
        if (!covered) {
            auto backward = basin_classify(bwd, {z}, bdir_list, tol, 3000000);
            covered = backward.verdict == BasinVerdict::in_basin;
        }
        EXPECT_TRUE(covered) << "sample " << j << " in no petal";
    }
}
