#include <gtest/gtest.h>

#include "treealg/liealg.hpp"

using namespace treealg;

namespace {

std::shared_ptr<const LieAlgebraData> alg()
{
    static auto a = std::make_shared<const LieAlgebraData>(sl2());
    return a;
}

TEST(LieAlgebra, KillingFormOfSl2)
{
    auto a = alg();
    // Oracle: recompute traces of ad-composites directly.
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            EXPECT_EQ(a->killing()(i, j), (a->ad(i) * a->ad(j)).trace());
    // e, f, h ordering: K(h,h) = 8, K(e,f) = 4, all other pairings zero.
    EXPECT_EQ(a->killing()(2, 2), rat(8));
    EXPECT_EQ(a->killing()(0, 1), rat(4));
    EXPECT_EQ(a->killing()(1, 0), rat(4));
    EXPECT_EQ(a->killing()(0, 0), rat(0));
    EXPECT_EQ(a->killing()(1, 1), rat(0));
    EXPECT_EQ(a->killing()(0, 2), rat(0));
    EXPECT_EQ(a->killing()(1, 2), rat(0));
    EXPECT_EQ(a->h_dual_coxeter(), rat(2));
}

TEST(LieAlgebra, DualBasisOfSl2)
{
    auto a = alg();
    // e* = f/4, f* = e/4, h* = h/8.
    EXPECT_EQ(a->dual_coeff(1, 0), rat(1, 4)); // g^e has f-coefficient 1/4
    EXPECT_EQ(a->dual_coeff(0, 1), rat(1, 4)); // g^f has e-coefficient 1/4
    EXPECT_EQ(a->dual_coeff(2, 2), rat(1, 8)); // g^h has h-coefficient 1/8
    EXPECT_EQ(a->dual_coeff(0, 0), rat(0));
    // Defining property K(g^i, x_j) = delta.
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Rational pair = 0;
            for (int s = 0; s < 3; ++s)
                pair += a->dual_coeff(s, i) * a->killing()(s, j);
            EXPECT_EQ(pair, i == j ? rat(1) : rat(0));
        }
}

TEST(LieAlgebra, JacobiViolationRejected)
{
    // Antisymmetric but non-Jacobi: [e,f] = e, [h,e] = f, [h,f] = e.
    std::vector<std::vector<std::vector<Rational>>> c(
        3, std::vector<std::vector<Rational>>(3, std::vector<Rational>(3, Rational(0))));
    auto set = [&](int i, int j, int k, long v) {
        c[i][j][k] = v;
        c[j][i][k] = -v;
    };
    set(0, 1, 0, 1);
    set(2, 0, 1, 1);
    set(2, 1, 0, 1);
    EXPECT_THROW(LieAlgebraData(c, 2), domain_error);
}

TEST(LieAlgebra, NotSemisimpleRejected)
{
    // Abelian 2-dimensional algebra: Killing form vanishes.
    std::vector<std::vector<std::vector<Rational>>> c(
        2, std::vector<std::vector<Rational>>(2, std::vector<Rational>(2, Rational(0))));
    EXPECT_THROW(LieAlgebraData(c, 1), domain_error);
}

TEST(Reps, BracketHomomorphismExact)
{
    for (long m : {0L, 1L, 2L, 3L})
        EXPECT_NO_THROW(sl2_rep(alg(), m).validate());
}

TEST(Reps, CasimirEigenvalues)
{
    EXPECT_EQ(casimir_eigenvalue(trivial_rep(alg())), rat(0));
    // Killing-normalized: C(m) = m(m+2)/8.
    EXPECT_EQ(casimir_eigenvalue(sl2_rep(alg(), 1)), rat(3, 8));
    EXPECT_EQ(casimir_eigenvalue(sl2_rep(alg(), 2)), rat(1));
    EXPECT_EQ(casimir_eigenvalue(sl2_rep(alg(), 3)), rat(15, 8));
}

TEST(Reps, CasimirRejectsReducible)
{
    // A direct sum of two different irreducibles as block matrices.
    Rep a = sl2_rep(alg(), 0), b = sl2_rep(alg(), 2);
    Rep sum;
    sum.algebra = alg();
    sum.dim = a.dim + b.dim;
    for (int k = 0; k < 3; ++k) {
        QMatrix m = qmat(sum.dim, sum.dim);
        for (int i = 0; i < a.dim; ++i)
            for (int j = 0; j < a.dim; ++j)
                m(i, j) = a.rho[k](i, j);
        for (int i = 0; i < b.dim; ++i)
            for (int j = 0; j < b.dim; ++j)
                m(a.dim + i, a.dim + j) = b.rho[k](i, j);
        sum.rho.push_back(std::move(m));
    }
    sum.validate();
    EXPECT_FALSE(is_irreducible(sum));
    EXPECT_THROW(casimir_eigenvalue(sum), domain_error);
}

TEST(CasimirPair, SymmetricInSlots)
{
    std::vector<Rep> reps = {sl2_rep(alg(), 1), sl2_rep(alg(), 2), sl2_rep(alg(), 1)};
    EXPECT_EQ(casimir_pair(reps, 0, 2), casimir_pair(reps, 2, 0));
    EXPECT_EQ(casimir_pair(reps, 0, 1), casimir_pair(reps, 1, 0));
    EXPECT_THROW(casimir_pair(reps, 1, 1), input_error);
}

TEST(CasimirPair, ChannelEigenvalues)
{
    // On the lambda-channel of spin-1/2 x spin-1/2, Omega_12 acts by
    // (C(lambda) - 2 C(1/2)) / 2: -3/8 on the singlet, 1/8 on the triplet.
    std::vector<Rep> reps = {sl2_rep(alg(), 1), sl2_rep(alg(), 1)};
    QMatrix omega = casimir_pair(reps, 0, 1);
    for (long m_inf : {0L, 2L}) {
        Rep target = sl2_rep(alg(), m_inf);
        auto maps = invariant_maps(reps, target);
        ASSERT_EQ(maps.size(), 1u);
        Rational mu = (casimir_eigenvalue(target) - casimir_eigenvalue(reps[0]) -
                       casimir_eigenvalue(reps[1])) /
                      2;
        EXPECT_EQ(maps[0] * omega, maps[0].scaled(mu));
        EXPECT_EQ(mu, m_inf == 0 ? rat(-3, 8) : rat(1, 8));
    }
}

TEST(CasimirPair, InvarianceOfSplitCasimir)
{
    std::vector<Rep> reps = {sl2_rep(alg(), 1), sl2_rep(alg(), 2)};
    QMatrix omega = casimir_pair(reps, 0, 1);
    for (int a = 0; a < 3; ++a) {
        QMatrix act = tensor_action(reps, a);
        EXPECT_EQ(act * omega, omega * act);
    }
}

TEST(CasimirPair, InfinitesimalBraidRelations)
{
    std::vector<Rep> reps = {sl2_rep(alg(), 1), sl2_rep(alg(), 1), sl2_rep(alg(), 2)};
    QMatrix o12 = casimir_pair(reps, 0, 1);
    QMatrix o13 = casimir_pair(reps, 0, 2);
    QMatrix o23 = casimir_pair(reps, 1, 2);
    QMatrix s = o13 + o23;
    EXPECT_EQ(o12 * s, s * o12);
    // Disjoint pairs commute.
    std::vector<Rep> four = {sl2_rep(alg(), 1), sl2_rep(alg(), 1), sl2_rep(alg(), 1),
                             sl2_rep(alg(), 1)};
    EXPECT_EQ(casimir_pair(four, 0, 1) * casimir_pair(four, 2, 3),
              casimir_pair(four, 2, 3) * casimir_pair(four, 0, 1));
}

TEST(InvariantMaps, ClassicalDimensions)
{
    Rep half = sl2_rep(alg(), 1);
    EXPECT_EQ(invariant_maps({half, half}, sl2_rep(alg(), 0)).size(), 1u);
    EXPECT_EQ(invariant_maps({half}, half).size(), 1u);
    EXPECT_EQ(invariant_maps({half, half}, half).size(), 0u);
    EXPECT_EQ(invariant_maps({half, half, half}, half).size(), 2u);
    // Empty source tuple: invariant vectors of the target.
    EXPECT_EQ(invariant_maps({}, sl2_rep(alg(), 0)).size(), 1u);
    EXPECT_EQ(invariant_maps({}, half).size(), 0u);
}

TEST(InvariantMaps, IntertwinerProperty)
{
    std::vector<Rep> reps = {sl2_rep(alg(), 1), sl2_rep(alg(), 2)};
    Rep target = sl2_rep(alg(), 1);
    auto maps = invariant_maps(reps, target);
    ASSERT_FALSE(maps.empty());
    for (const auto& f : maps)
        for (int a = 0; a < 3; ++a)
            EXPECT_EQ(target.rho[a] * f, f * tensor_action(reps, a));
}

} // namespace
