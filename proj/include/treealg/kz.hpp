#pragma once

#include "treealg/connection.hpp"
#include "treealg/liealg.hpp"

namespace treealg {

// ---------------------------------------------------------------------------
// The Knizhnik-Zamolodchikov connection on M(n)-modules built from tensor
// products of representations.
//
// Normal form: nabla = d + sum_l E_l dz_l with
//   E_l = -1/(k + h_dual) * sum_{p != l} Omega_{lp} / (z_l - z_p),
// acting on maps by precomposition with the Casimir insertions. The
// trailing differential of the defining formula is read as dz_l, the only
// reading for which the connection is flat; the CLI prints this convention.
// ---------------------------------------------------------------------------

struct KZChannel {
    long weight = 0;             // lambda_inf
    std::vector<QMatrix> basis;  // invariant maps tensor(L(lambda_i)) -> L(lambda_inf)
    Connection conn;             // restricted connection on that basis
};

struct KZData {
    std::shared_ptr<const LieAlgebraData> algebra;
    std::vector<Rep> reps;
    Rational level = 0;
    Connection full;
    std::vector<KZChannel> channels;

    const KZChannel* channel(long weight) const
    {
        for (const auto& c : channels)
            if (c.weight == weight)
                return &c;
        return nullptr;
    }
};

inline Rational kz_prefactor(const LieAlgebraData& alg, const Rational& level)
{
    Rational kappa = level + alg.h_dual_coxeter();
    if (kappa == 0)
        throw domain_error("singular level: k + h_dual_coxeter vanishes");
    return -1 / kappa;
}

// Full KZ connection matrices on the tensor product module (trivial basis,
// degrees zero). Simple poles along the diagonals only.
inline Connection kz_full_connection(const std::vector<Rep>& reps, const Rational& level)
{
    if (reps.empty())
        throw input_error("kz: at least one representation required");
    const LieAlgebraData& alg = *reps[0].algebra;
    Rational pref = kz_prefactor(alg, level);
    int n = static_cast<int>(reps.size());
    int r = tensor_dim(reps);
    Connection conn(n, r);
    for (int l = 0; l < n; ++l)
        for (int p = 0; p < n; ++p) {
            if (p == l)
                continue;
            QMatrix omega = casimir_pair(reps, l, p);
            RatFunc pole = RatFunc::diag_inverse(n, l, p).scaled(pref);
            for (int a = 0; a < r; ++a)
                for (int b = 0; b < r; ++b)
                    if (omega(a, b) != 0)
                        conn.mats[l](a, b) += pole.scaled(omega(a, b));
        }
    return conn;
}

// Matrix of precomposition with Omega_{lp} on a basis of invariant maps:
// f_a . Omega = sum_b R_{ba} f_b. The invariant space is preserved exactly
// because the split Casimir commutes with the diagonal action.
inline QMatrix restrict_precomposition(const std::vector<QMatrix>& basis, const QMatrix& omega)
{
    int r = static_cast<int>(basis.size());
    if (r == 0)
        return qmat(0, 0);
    int rows = basis[0].rows(), cols = basis[0].cols();
    QMatrix stacked(rows * cols, r, Rational(0));
    for (int b = 0; b < r; ++b)
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                stacked(i * cols + j, b) = basis[b](i, j);
    QMatrix result = qmat(r, r);
    for (int a = 0; a < r; ++a) {
        QMatrix image = basis[a] * omega;
        std::vector<Rational> rhs(rows * cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                rhs[i * cols + j] = image(i, j);
        auto x = solve(stacked, rhs);
        if (!x)
            throw domain_error("restriction is not closed on the invariant space");
        for (int b = 0; b < r; ++b)
            result(b, a) = (*x)[b];
    }
    return result;
}

// Restricted KZ connection on a given invariant-map basis.
inline Connection kz_restrict_on_basis(const std::vector<Rep>& reps, const Rational& level,
                                       const std::vector<QMatrix>& basis)
{
    const LieAlgebraData& alg = *reps[0].algebra;
    Rational pref = kz_prefactor(alg, level);
    int n = static_cast<int>(reps.size());
    int r = static_cast<int>(basis.size());
    Connection conn(n, r);
    if (r == 0)
        return conn;
    for (int l = 0; l < n; ++l)
        for (int p = 0; p < n; ++p) {
            if (p == l)
                continue;
            QMatrix rmat = restrict_precomposition(basis, casimir_pair(reps, l, p));
            RatFunc pole = RatFunc::diag_inverse(n, l, p).scaled(pref);
            for (int a = 0; a < r; ++a)
                for (int b = 0; b < r; ++b)
                    if (rmat(a, b) != 0)
                        conn.mats[l](a, b) += pole.scaled(rmat(a, b));
        }
    return conn;
}

// Builds the full connection plus every nonzero restricted channel. For
// sl2 the reachable lambda_inf weights have the parity of the total weight
// and are bounded by it.
inline KZData kz_build(std::shared_ptr<const LieAlgebraData> alg, const std::vector<long>& weights,
                       const Rational& level)
{
    KZData kz;
    kz.algebra = alg;
    kz.level = level;
    for (long m : weights)
        kz.reps.push_back(sl2_rep(alg, m));
    kz.full = kz_full_connection(kz.reps, level);
    long total = 0;
    for (long m : weights)
        total += m;
    for (long m_inf = total % 2; m_inf <= total; m_inf += 2) {
        KZChannel ch;
        ch.weight = m_inf;
        ch.basis = invariant_maps(kz.reps, sl2_rep(alg, m_inf));
        if (ch.basis.empty())
            continue;
        ch.conn = kz_restrict_on_basis(kz.reps, level, ch.basis);
        kz.channels.push_back(std::move(ch));
    }
    return kz;
}

// Restriction to one channel; an empty invariant space gives the rank-zero
// connection, not an error.
inline Connection kz_restrict(const KZData& kz, long lambda_inf)
{
    if (const KZChannel* ch = kz.channel(lambda_inf))
        return ch->conn;
    return Connection(static_cast<int>(kz.reps.size()), 0);
}

// Conformal shift of a label: alpha_lambda = C(lambda) / (2 (k + h_dual)),
// stored exactly (no reduction mod 1).
inline Rational conformal_shift(const Rep& rep, const Rational& level)
{
    Rational kappa = level + rep.algebra->h_dual_coxeter();
    if (kappa == 0)
        throw domain_error("singular level");
    return casimir_eigenvalue(rep) / (2 * kappa);
}

struct DegreeIdentity {
    Rational computed;
    Rational predicted;
};

// Degree of the restricted connection against the trivial reference,
// checked against (sum_i C(lambda_i) - C(lambda_inf)) / (2 (k + h_dual)).
inline DegreeIdentity kz_degree_identity(const KZData& kz, long lambda_inf)
{
    const KZChannel* ch = kz.channel(lambda_inf);
    if (!ch || ch->conn.rank == 0)
        throw domain_error("empty channel has no degree");
    auto computed = conn_degree(ch->conn);
    if (!computed)
        throw domain_error("restricted connection has no degree");
    Rational kappa = kz.level + kz.algebra->h_dual_coxeter();
    Rational sum = 0;
    for (const auto& r : kz.reps)
        sum += casimir_eigenvalue(r);
    Rational predicted = (sum - casimir_eigenvalue(sl2_rep(kz.algebra, lambda_inf))) / (2 * kappa);
    if (*computed != predicted)
        throw domain_error("degree identity violated: computed " + to_string(*computed) +
                           " vs predicted " + to_string(predicted));
    return {*computed, predicted};
}

// Permutation matrix of tensor factors: sigma[i] is the new slot of old
// factor i; maps the lambda-ordered product to the sigma(lambda)-ordered
// one.
inline QMatrix tensor_perm_matrix(const std::vector<int>& dims, const std::vector<int>& sigma)
{
    int n = static_cast<int>(dims.size());
    int total = 1;
    for (int d : dims)
        total *= d;
    std::vector<int> new_dims(n);
    for (int i = 0; i < n; ++i)
        new_dims[sigma[i]] = dims[i];
    QMatrix s = qmat(total, total);
    std::vector<int> idx(n, 0);
    for (int flat = 0; flat < total; ++flat) {
        // Decompose flat in lambda order (row-major, factor 0 slowest).
        int rest = flat;
        for (int i = n - 1; i >= 0; --i) {
            idx[i] = rest % dims[i];
            rest /= dims[i];
        }
        int target = 0;
        for (int j = 0; j < n; ++j) {
            int old_slot = -1;
            for (int i = 0; i < n; ++i)
                if (sigma[i] == j)
                    old_slot = i;
            target = target * new_dims[j] + idx[old_slot];
        }
        s(target, flat) = 1;
    }
    return s;
}

} // namespace treealg
