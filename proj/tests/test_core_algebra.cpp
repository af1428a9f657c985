#include <gtest/gtest.h>

#include "parabolica/germ.hpp"
#include "parabolica/logpoly.hpp"
#include "parabolica/polynomial.hpp"
#include "test_util.hpp"

using namespace parabolica;
using ptest::make_germ;

namespace {

MultiPoly poly2(std::initializer_list<std::pair<std::vector<int>, Complex>> terms, int trunc = 8) {
    MultiPoly p(2, trunc);
    for (const auto& [e, c] : terms) {
        Monomial m(2);
        m.e = e;
        p.add_term(m, c);
    }
    return p;
}

} // namespace

TEST(PolyEval, DirectSubstitution) {
    // f = x^2 - y at (2, 1) -> 3
    MultiPoly f = poly2({{{2, 0}, 1.0}, {{0, 1}, -1.0}});
    EXPECT_NEAR(std::abs(f.eval(CVec{2.0, 1.0}) - Complex(3.0)), 0.0, 1e-15);

    // zero polynomial
    MultiPoly z(2, 8);
    EXPECT_EQ(z.eval(CVec{5.0, -3.0}), Complex(0.0));

    // f = -x^2 at (1, 5) -> -1
    MultiPoly g = poly2({{{2, 0}, -1.0}});
    EXPECT_NEAR(std::abs(g.eval(CVec{1.0, 5.0}) - Complex(-1.0)), 0.0, 1e-15);
}

TEST(PolyEval, DimensionMismatch) {
    MultiPoly f = poly2({{{2, 0}, 1.0}});
    EXPECT_THROW(f.eval(CVec{1.0}), Error);
}

TEST(GermCompose, IdentityCase) {
    GermMap F = ptest::germ_1d(1, 1.0, 8); // z + z^2
    GermMap I = GermMap::identity(1, 8);
    GermMap FI = germ_compose(F, I, 3);
    EXPECT_EQ(FI, F.with_truncation(3));
}

TEST(GermCompose, SelfComposeFrozen) {
    // (z+z^2) o (z+z^2) = z + 2z^2 + 2z^3 + O(z^4)
    GermMap F = ptest::germ_1d(1, 1.0, 8);
    GermMap FF = germ_compose(F, F, 3);
    Monomial m1{1}, m2{2}, m3{3};
    EXPECT_NEAR(std::abs(FF.component(0).coeff(m1) - Complex(1.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(FF.component(0).coeff(m2) - Complex(2.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(FF.component(0).coeff(m3) - Complex(2.0)), 0.0, 1e-15);
}

TEST(GermCompose, LinearMapsMultiply) {
    std::vector<CVec> L{{Complex(1.0), Complex(2.0)}, {Complex(0.0), Complex(1.0)}};
    std::vector<CVec> M{{Complex(3.0), Complex(0.0)}, {Complex(1.0), Complex(1.0)}};
    GermMap gl = GermMap::linear(2, 4, L), gm = GermMap::linear(2, 4, M);
    GermMap lm = germ_compose(gl, gm, 4);
    // product L*M
    Monomial ex{1, 0}, ey{0, 1};
    EXPECT_NEAR(std::abs(lm.component(0).coeff(ex) - Complex(5.0)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(lm.component(0).coeff(ey) - Complex(2.0)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(lm.component(1).coeff(ex) - Complex(1.0)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(lm.component(1).coeff(ey) - Complex(1.0)), 0.0, 1e-14);
}

TEST(GermCompose, Errors) {
    GermMap F = ptest::germ_1d(1, 1.0, 8);
    GermMap G = GermMap::identity(2, 8);
    EXPECT_THROW(germ_compose(F, G, 3), Error);
    EXPECT_THROW(germ_compose(F, F, 0), Error);
}

TEST(HomogeneousPart, Extraction) {
    GermMap F = ptest::germ_Fa(3.0, 8); // (x - x^2, y - 3xy)
    auto p2 = homogeneous_part(F, 2);
    EXPECT_NEAR(std::abs(p2[0].coeff(Monomial{2, 0}) - Complex(-1.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(p2[1].coeff(Monomial{1, 1}) - Complex(-3.0)), 0.0, 1e-15);
    auto p3 = homogeneous_part(F, 3);
    EXPECT_TRUE(p3[0].is_zero());
    EXPECT_TRUE(p3[1].is_zero());

    GermMap G = ptest::germ_1d(3, Complex(0.0, 2.0), 8); // z + 2i z^4
    auto p4 = homogeneous_part(G, 4);
    EXPECT_NEAR(std::abs(p4[0].coeff(Monomial{4}) - Complex(0.0, 2.0)), 0.0, 1e-15);
}

TEST(GermOrder, Examples) {
    auto o1 = germ_order(ptest::germ_1d(2, 1.0, 8)); // z + z^3
    EXPECT_EQ(o1.nu0, 3);
    EXPECT_EQ(o1.k, 2);
    EXPECT_TRUE(o1.nondegenerate);

    auto o2 = germ_order(ptest::germ_Fa(3.0, 8)); // P_2(0,1) = 0
    EXPECT_EQ(o2.nu0, 2);
    EXPECT_EQ(o2.k, 1);
    EXPECT_FALSE(o2.nondegenerate);

    try {
        germ_order(GermMap::identity(2, 6));
        FAIL() << "identity germ must be rejected";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IdentityGerm);
    }

    // linear part != id
    GermMap L = GermMap::linear(1, 6, {{Complex(2.0)}});
    try {
        germ_order(L);
        FAIL() << "non-tangent germ must be rejected";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotTangent);
    }
}

TEST(LogPolyEval, BranchAndReduction) {
    SectorDomain sector{1, 0.5, 1, 0.0, 0.0, 0.0};

    // P = -x log x at x = 0.1 -> 0.230259
    LogPolynomial P(1, 4);
    P.component(0).add_term(1, 1, -1.0);
    CVec v = P.eval(0.1, sector);
    EXPECT_NEAR(v[0].real(), -0.1 * std::log(0.1), 1e-12);
    EXPECT_NEAR(v[0].imag(), 0.0, 1e-15);

    // log-free terms agree with plain evaluation
    LogPolynomial Q(1, 4);
    Q.component(0).add_term(2, 0, 1.0);
    EXPECT_NEAR(Q.eval(0.5, sector)[0].real(), 0.25, 1e-15);

    // outside the sector
    EXPECT_THROW(P.eval(Complex(-0.1), sector), Error);
}

TEST(Invariants, CompositionAssociativity) {
    Rng rng(12345);
    for (int trial = 0; trial < 8; ++trial) {
        int p = 1 + int(rng.next_u64() % 3);
        int N = 4;
        auto random_germ = [&]() {
            GermMap g = GermMap::identity(p, 2 * N);
            for (int i = 0; i < p; ++i) {
                MultiPoly comp = g.component(i);
                for (int t = 0; t < 6; ++t) {
                    Monomial m(p);
                    int deg = 0;
                    for (int v = 0; v < p; ++v) {
                        m.e[v] = int(rng.next_u64() % 3);
                        deg += m.e[v];
                    }
                    if (deg < 2) continue; // keep tangent to identity
                    comp.add_term(m, 0.5 * rng.complex_normal());
                }
                g.set_component(i, comp);
            }
            return g;
        };
        GermMap F = random_germ(), G = random_germ(), H = random_germ();
        GermMap a = germ_compose(germ_compose(F, G, N), H, N);
        GermMap b = germ_compose(F, germ_compose(G, H, N), N);
        for (int i = 0; i < p; ++i)
            EXPECT_LE(MultiPoly::coeff_distance(a.component(i), b.component(i), N), 1e-10);
    }
}

TEST(Invariants, HomogeneousReconstruction) {
    GermMap F = ptest::germ_with_curve(4.0, 10);
    GermMap sum(2, 10);
    for (int d = 1; d <= 10; ++d) {
        auto parts = homogeneous_part(F, d);
        for (int i = 0; i < 2; ++i) {
            MultiPoly comp = sum.component(i);
            comp += parts[i];
            sum.set_component(i, comp);
        }
    }
    EXPECT_EQ(sum, F);
}

TEST(Invariants, ComposeAgainstPointwiseOracle) {
    Rng rng(777);
    GermMap F = ptest::germ_with_curve(4.0, 10);
    GermMap G = ptest::germ_Fa(2.0, 10);
    int N = 10;
    GermMap FG = germ_compose(F, G, N);
    for (int t = 0; t < 50; ++t) {
        CVec z = rng.unit_vector(2);
        double scale = 0.1 * rng.uniform();
        for (auto& c : z) c *= scale;
        CVec lhs = FG.eval(z);
        CVec rhs = F.eval(G.eval(z));
        double err = 0.0;
        for (int i = 0; i < 2; ++i) err = std::max(err, std::abs(lhs[i] - rhs[i]));
        double bound = 1e-9 * (1.0 + std::pow(norm2(z), 2.0 * N));
        EXPECT_LE(err, bound);
    }
}

TEST(GermInverse, TruncatedInverse) {
    GermMap F = ptest::germ_1d(2, 1.0, 12); // z + z^3
    GermMap G = germ_inverse(F, 9);
    GermMap FG = germ_compose(F.with_truncation(9), G, 9);
    GermMap I = GermMap::identity(1, 9);
    EXPECT_LE(MultiPoly::coeff_distance(FG.component(0), I.component(0), 9), 1e-12);
    // z - z^3 + 3 z^5 - 12 z^7 ... classical reversion coefficients
    EXPECT_NEAR(std::abs(G.component(0).coeff(Monomial{3}) - Complex(-1.0)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(G.component(0).coeff(Monomial{5}) - Complex(3.0)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(G.component(0).coeff(Monomial{7}) - Complex(-12.0)), 0.0, 1e-12);
}
