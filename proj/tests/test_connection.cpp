#include <gtest/gtest.h>

#include "test_util.hpp"
#include "treealg/connection.hpp"

using namespace treealg;
using testutil::Rng;

namespace {

// Rank-one connection sum_{i<j} a_ij dlog(z_i - z_j).
Connection abelian_dlog(int n, const std::map<DivisorPair, Rational>& coeffs)
{
    Connection c(n, 1);
    for (const auto& [pair, a] : coeffs) {
        auto [i, j] = pair;
        c.mats[i](0, 0) += RatFunc::diag_inverse(n, i, j).scaled(a);
        c.mats[j](0, 0) += RatFunc::diag_inverse(n, j, i).scaled(a);
    }
    return c;
}

GaugeMap scalar_power_gauge(int n, int rank, int i, int j, int m)
{
    RatFunc u = RatFunc::diag(n, i, j).pow(m);
    return GaugeMap(Rational(m), rf_identity(n, rank).scaled(u));
}

TEST(Curvature, ZeroConnection)
{
    Connection e = Connection::zero(3, 2);
    CurvatureParts parts = curvature(e);
    for (const auto& [p, m] : parts.curl)
        EXPECT_TRUE(m.is_zero());
    for (const auto& [p, m] : parts.bracket)
        EXPECT_TRUE(m.is_zero());
    EXPECT_TRUE(is_flat_both(e));
}

TEST(Curvature, DirectDifferentiation)
{
    // E_1 = z_2, E_2 = 0: curl part dE_2/dz_1 - dE_1/dz_2 = -1.
    Connection e(2, 1);
    e.mats[0](0, 0) = RatFunc::var(2, 0 + 1);
    CurvatureParts parts = curvature(e);
    EXPECT_EQ(parts.curl.at({0, 1})(0, 0), RatFunc::constant(2, rat(-1)));
    EXPECT_TRUE(parts.bracket.at({0, 1}).is_zero());
    FlatnessReport rep = is_flat(e, FlatnessConvention::standard);
    EXPECT_FALSE(rep.flat);
    EXPECT_EQ(rep.witness_pair, std::make_pair(0, 1));
    EXPECT_FALSE(is_flat(e, FlatnessConvention::paper).flat);
}

TEST(Curvature, DlogIsClosed)
{
    Connection e = abelian_dlog(3, {{{0, 1}, rat(2, 3)}, {{1, 2}, rat(-1, 2)}});
    CurvatureParts parts = curvature(e);
    for (const auto& [p, m] : parts.curl)
        EXPECT_TRUE(m.is_zero()) << p.first << "," << p.second;
    for (const auto& [p, m] : parts.bracket)
        EXPECT_TRUE(m.is_zero());
    EXPECT_TRUE(is_flat_both(e));
}

TEST(ConnDegree, Examples)
{
    Connection e = abelian_dlog(3, {{{0, 1}, rat(5)}, {{0, 2}, rat(5)}, {{1, 2}, rat(5)}});
    EXPECT_EQ(conn_degree(e, e), rat(0));
    // a * sum_{i<j} dlog has degree a * n(n-1)/2.
    EXPECT_EQ(conn_degree(e), rat(15));
    // Non-flat input violates the precondition.
    Connection bad(2, 1);
    bad.mats[0](0, 0) = RatFunc::var(2, 1);
    EXPECT_THROW(conn_degree(bad), domain_error);
    // Scalar function must be a literal constant: z-dependent diagonal fails.
    Connection mixed = abelian_dlog(2, {{{0, 1}, rat(1)}});
    EXPECT_EQ(conn_degree(mixed), rat(1));
}

TEST(ConnDegree, InhomogeneousDiagonalRejected)
{
    // E_1 = 1 (degree -1 slot violated): not homogeneous.
    Connection e(2, 1);
    e.mats[0](0, 0) = RatFunc::one(2);
    EXPECT_FALSE(e.is_homogeneous());
}

TEST(Gauge, IdentityFixesConnection)
{
    Connection e = abelian_dlog(2, {{{0, 1}, rat(3, 4)}});
    EXPECT_EQ(gauge_transform(e, GaugeMap::identity(2, 1)), e);
}

TEST(Gauge, MonomialUnitGauge)
{
    // E = 0 gauged by (z1-z2)^m Id gives m dlog(z1-z2) Id, flat of degree m.
    const int m = 3;
    Connection zero = Connection::zero(2, 2);
    GaugeMap g = scalar_power_gauge(2, 2, 0, 1, m);
    ASSERT_TRUE(g.is_homogeneous(zero.basis_degrees));
    ASSERT_TRUE(g.is_invertible());
    Connection gauged = gauge_transform(zero, g);
    Connection expect(2, 2);
    for (int d = 0; d < 2; ++d) {
        expect.mats[0](d, d) = RatFunc::diag_inverse(2, 0, 1).scaled(rat(m));
        expect.mats[1](d, d) = RatFunc::diag_inverse(2, 1, 0).scaled(rat(m));
    }
    EXPECT_EQ(gauged, expect);
    EXPECT_TRUE(is_flat_both(gauged));
    EXPECT_EQ(conn_degree(gauged), rat(m));
}

TEST(Gauge, RoundTrip)
{
    Connection e = abelian_dlog(2, {{{0, 1}, rat(1, 5)}});
    GaugeMap g = scalar_power_gauge(2, 1, 0, 1, 2);
    GaugeMap ginv(-g.degree, *ring_inverse(g.mat));
    EXPECT_EQ(gauge_transform(gauge_transform(e, g), ginv), e);
}

TEST(Gauge, FlatnessIsGaugeInvariant)
{
    Rng rng(211);
    std::uniform_int_distribution<int> coeff(-3, 3), expo(-2, 2);
    for (int k = 0; k < 8; ++k) {
        Connection e = abelian_dlog(
            3, {{{0, 1}, rat(coeff(rng))}, {{0, 2}, rat(coeff(rng))}, {{1, 2}, rat(coeff(rng))}});
        RatFunc u = RatFunc::diag(3, 0, 1).pow(expo(rng)) * RatFunc::diag(3, 1, 2).pow(expo(rng));
        auto udeg = u.grading_degree();
        GaugeMap g(rat(*udeg), rf_identity(3, 1).scaled(u));
        Connection f = gauge_transform(e, g);
        for (auto conv : {FlatnessConvention::standard, FlatnessConvention::paper})
            EXPECT_EQ(is_flat(e, conv).flat, is_flat(f, conv).flat);
        // Lemma-style degree shift: deg(f) = deg(e) + deg(g).
        EXPECT_EQ(*conn_degree(f), *conn_degree(e) + g.degree);
    }
}

TEST(SameMonodromy, GaugeWitness)
{
    Connection e = abelian_dlog(2, {{{0, 1}, rat(2)}});
    GaugeMap g = scalar_power_gauge(2, 1, 0, 1, 1);
    Connection f = gauge_transform(e, g);
    EXPECT_TRUE(same_monodromy(e, f, g));
    // F = E + dlog(z1-z2) Id with g = (z1-z2) Id.
    Connection f2 = abelian_dlog(2, {{{0, 1}, rat(3)}});
    EXPECT_TRUE(same_monodromy(e, f2, g));
    EXPECT_FALSE(same_monodromy(e, e, g));
}

TEST(SameMonodromy, NonDlogDifferenceHasNoUnitGauge)
{
    // F = E + z1 dz1 Id is not reached from E by any monomial unit gauge
    // with exponents bounded by 2.
    Connection e = abelian_dlog(2, {{{0, 1}, rat(1)}});
    Connection f = e;
    f.mats[0](0, 0) += RatFunc::var(2, 0);
    for (int m = -2; m <= 2; ++m)
        for (int c_num = 1; c_num <= 3; ++c_num) {
            RatFunc u = RatFunc::diag(2, 0, 1).pow(m).scaled(rat(c_num));
            GaugeMap g(rat(m), rf_identity(2, 1).scaled(u));
            EXPECT_FALSE(same_monodromy(e, f, g));
        }
}

TEST(TensorConn, KroneckerEmbedding)
{
    Connection e = abelian_dlog(2, {{{0, 1}, rat(7)}});
    Connection triv = Connection::zero(1, 1);
    Connection t = tensor_conn({e, triv});
    EXPECT_EQ(t.n_vars, 3);
    EXPECT_EQ(t.rank, 1);
    // Coefficients of the first block variables match the lifted originals.
    EXPECT_EQ(t.mats[0](0, 0), RatFunc::diag_inverse(3, 0, 1).scaled(rat(7)));
    EXPECT_TRUE(t.mats[2].is_zero());
}

TEST(TensorConn, DegreeAdds)
{
    Connection a = abelian_dlog(2, {{{0, 1}, rat(2, 3)}});
    Connection b = abelian_dlog(2, {{{0, 1}, rat(5, 4)}});
    Connection t = tensor_conn({a, b});
    EXPECT_TRUE(is_flat_both(t));
    EXPECT_EQ(*conn_degree(t), rat(2, 3) + rat(5, 4));
}

TEST(TensorConn, FlatnessPreservedRandomAbelian)
{
    Rng rng(223);
    std::uniform_int_distribution<int> coeff(-4, 4);
    for (int k = 0; k < 6; ++k) {
        Connection a = abelian_dlog(2, {{{0, 1}, rat(coeff(rng), 3)}});
        Connection b =
            abelian_dlog(3, {{{0, 1}, rat(coeff(rng))}, {{1, 2}, rat(coeff(rng), 2)}});
        EXPECT_TRUE(is_flat_both(tensor_conn({a, b})));
    }
}

TEST(Pushforward, IdentityPermutation)
{
    Connection e = abelian_dlog(3, {{{0, 1}, rat(1)}, {{1, 2}, rat(2)}});
    EXPECT_EQ(pushforward_perm(e, {0, 1, 2}), e);
}

TEST(Pushforward, PermutationsCompose)
{
    Connection e = abelian_dlog(3, {{{0, 1}, rat(1)}, {{0, 2}, rat(-2)}});
    std::vector<int> sigma = {1, 2, 0}, tau = {2, 0, 1};
    std::vector<int> composite(3);
    for (int i = 0; i < 3; ++i)
        composite[i] = tau[sigma[i]];
    EXPECT_EQ(pushforward_perm(pushforward_perm(e, sigma), tau),
              pushforward_perm(e, composite));
}

TEST(Pushforward, CoaugmentationPlacesSlots)
{
    Connection e = abelian_dlog(2, {{{0, 1}, rat(3)}});
    Connection out = pushforward_coaug(e, {1, 2}, 3);
    EXPECT_TRUE(out.mats[0].is_zero());
    EXPECT_EQ(out.mats[1](0, 0), RatFunc::diag_inverse(3, 1, 2).scaled(rat(3)));
}

TEST(Pushforward, StructureMapOrderZeroIsOuterDlog)
{
    // dlog(z_1 - z_3) with the variables split (2,1): at order zero the
    // cross-block coefficient becomes the outer dlog(z_1 - z_2).
    Connection e = abelian_dlog(3, {{{0, 2}, rat(4)}});
    TruncConnection tc = pushforward_structure(e, {2, 1}, 0);
    std::vector<int> p = {2, 1};
    // dt_{1,1} coefficient: 4/(z1 - z2) at order 0.
    EXPECT_EQ(tc.t_mats[0](0, 0),
              TruncTensor::embed_outer(p, 0, RatFunc::diag_inverse(2, 0, 1).scaled(rat(4))));
    // in-block variable t_{1,2} carries nothing.
    EXPECT_TRUE(tc.t_mats[1](0, 0).is_zero());
    // dz_1 coefficient equals the block sum; dz_2 the opposite sign.
    EXPECT_EQ(tc.z_mats[0](0, 0),
              TruncTensor::embed_outer(p, 0, RatFunc::diag_inverse(2, 0, 1).scaled(rat(4))));
    EXPECT_EQ(tc.z_mats[1](0, 0),
              TruncTensor::embed_outer(p, 0, RatFunc::diag_inverse(2, 1, 0).scaled(rat(4))));
}

TEST(RingInverse, UnitDeterminant)
{
    // Upper triangular with unit diagonal entries.
    RMatrix g = rf_identity(2, 2);
    g(0, 0) = RatFunc::diag(2, 0, 1);
    g(0, 1) = RatFunc::var(2, 0);
    g(1, 1) = RatFunc::diag_inverse(2, 0, 1).scaled(rat(2));
    auto inv = ring_inverse(g);
    ASSERT_TRUE(inv.has_value());
    EXPECT_EQ(g * (*inv), rf_identity(2, 2));
    // Non-unit determinant has no inverse over the ring.
    RMatrix h = rf_identity(2, 2);
    h(0, 0) = RatFunc::var(2, 0);
    EXPECT_FALSE(ring_inverse(h).has_value());
}

} // namespace
