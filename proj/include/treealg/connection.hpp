#pragma once

#include "treealg/cooperad.hpp"
#include "treealg/matrix.hpp"
#include "treealg/parallel.hpp"

namespace treealg {

using RMatrix = Matrix<RatFunc>;

inline RMatrix rf_zero_matrix(int n_vars, int rows, int cols)
{
    return RMatrix(rows, cols, RatFunc::zero(n_vars));
}

inline RMatrix rf_identity(int n_vars, int r)
{
    return RMatrix::identity(r, RatFunc::zero(n_vars), RatFunc::one(n_vars));
}

inline RMatrix rf_partial(const RMatrix& m, int i)
{
    RMatrix r = m;
    for (int a = 0; a < m.rows(); ++a)
        for (int b = 0; b < m.cols(); ++b)
            r(a, b) = m(a, b).partial(i);
    return r;
}

// Inverse over the configuration-space ring: defined exactly when det is a
// unit (a constant times diagonal divisors). Faddeev-LeVerrier needs only
// integer divisions, which are exact here.
inline std::optional<RMatrix> ring_inverse(const RMatrix& g)
{
    int n_vars = g.zero_proto().n_vars();
    auto res = faddeev_leverrier<RatFunc>(
        g, RatFunc::zero(n_vars), RatFunc::one(n_vars),
        [](const RatFunc& v, long k) { return v.scaled(rat(1, k)); });
    const RatFunc& cn = res.coeffs.back();
    if (cn.is_zero() || !cn.is_unit())
        return std::nullopt;
    return res.m_n.scaled(-cn.unit_inverse());
}

// ---------------------------------------------------------------------------
// Homogeneous connections on free graded modules.
//
// Sections are column vectors over the chosen basis; the covariant
// derivative is nabla = d + sum_i E_i dz_i. Entry (E_i)_{jk} of a
// homogeneous connection is zero or homogeneous of degree
// basis_degree[k] - basis_degree[j] - 1.
// ---------------------------------------------------------------------------

struct Connection {
    int n_vars = 0;
    int rank = 0;
    std::vector<Rational> basis_degrees;
    std::vector<RMatrix> mats; // one rank x rank matrix per variable

    Connection() = default;

    Connection(int n, int r)
        : n_vars(n), rank(r), basis_degrees(r, Rational(0)),
          mats(n, rf_zero_matrix(n, r, r))
    {
    }

    static Connection zero(int n, int r) { return Connection(n, r); }

    void validate() const
    {
        if (static_cast<int>(basis_degrees.size()) != rank)
            throw input_error("connection: one basis degree per rank required");
        if (static_cast<int>(mats.size()) != n_vars)
            throw input_error("connection: one matrix per variable required");
        for (const auto& m : mats)
            if (m.rows() != rank || m.cols() != rank)
                throw input_error("connection: matrix shape mismatch");
    }

    bool is_homogeneous() const
    {
        for (const auto& m : mats)
            for (int j = 0; j < rank; ++j)
                for (int k = 0; k < rank; ++k) {
                    const RatFunc& e = m(j, k);
                    if (e.is_zero())
                        continue;
                    auto deg = e.grading_degree();
                    if (!deg)
                        return false;
                    if (Rational(*deg) != basis_degrees[k] - basis_degrees[j] - 1)
                        return false;
                }
        return true;
    }

    friend bool operator==(const Connection& a, const Connection& b)
    {
        return a.n_vars == b.n_vars && a.rank == b.rank &&
               a.basis_degrees == b.basis_degrees && a.mats == b.mats;
    }
};

// Orientation constant: the curl part is C_ij = dE_j/dz_i - dE_i/dz_j for
// i < j; the bracket part is [E_i, E_j].
struct CurvatureParts {
    std::map<std::pair<int, int>, RMatrix> curl;
    std::map<std::pair<int, int>, RMatrix> bracket;
};

inline CurvatureParts curvature(const Connection& e)
{
    e.validate();
    CurvatureParts parts;
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < e.n_vars; ++i)
        for (int j = i + 1; j < e.n_vars; ++j)
            pairs.emplace_back(i, j);
    std::vector<RMatrix> curls(pairs.size()), brackets(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t k) {
        auto [i, j] = pairs[k];
        curls[k] = rf_partial(e.mats[j], i) - rf_partial(e.mats[i], j);
        brackets[k] = e.mats[i] * e.mats[j] - e.mats[j] * e.mats[i];
    });
    for (size_t k = 0; k < pairs.size(); ++k) {
        parts.curl.emplace(pairs[k], std::move(curls[k]));
        parts.bracket.emplace(pairs[k], std::move(brackets[k]));
    }
    return parts;
}

enum class FlatnessConvention {
    paper,    // dE_i/dz_j - dE_j/dz_i = -(1/2)[E_i, E_j]
    standard, // curl + bracket = 0
};

struct FlatnessReport {
    bool flat = true;
    std::pair<int, int> witness_pair{-1, -1};
    RMatrix witness;
};

inline FlatnessReport is_flat(const Connection& e, FlatnessConvention conv)
{
    CurvatureParts parts = curvature(e);
    for (const auto& [pair, curl] : parts.curl) {
        const RMatrix& bracket = parts.bracket.at(pair);
        RMatrix defect = conv == FlatnessConvention::standard
                             ? curl + bracket
                             : -curl + bracket.scaled(RatFunc::constant(e.n_vars, rat(1, 2)));
        if (!defect.is_zero())
            return {false, pair, defect};
    }
    return {};
}

inline bool is_flat_both(const Connection& e)
{
    return is_flat(e, FlatnessConvention::paper).flat &&
           is_flat(e, FlatnessConvention::standard).flat;
}

// Degree of E - reference: the scalar k with sum_i (E_i - ref_i) z_i = k Id.
// Defined for flat homogeneous inputs; the extracted scalar is verified to
// be a literal constant, not merely constant at sample points.
inline std::optional<Rational> conn_degree(const Connection& e, const Connection& ref)
{
    if (e.n_vars != ref.n_vars || e.rank != ref.rank)
        throw input_error("conn_degree: shape mismatch");
    for (const Connection* c : {&e, &ref}) {
        if (!c->is_homogeneous())
            throw domain_error("conn_degree requires homogeneous connections");
        if (!is_flat(*c, FlatnessConvention::standard).flat &&
            !is_flat(*c, FlatnessConvention::paper).flat)
            throw domain_error("conn_degree requires flat connections");
    }
    RMatrix s = rf_zero_matrix(e.n_vars, e.rank, e.rank);
    for (int i = 0; i < e.n_vars; ++i)
        s = s + (e.mats[i] - ref.mats[i]).scaled(RatFunc::var(e.n_vars, i));
    std::optional<Rational> k;
    for (int a = 0; a < e.rank; ++a)
        for (int b = 0; b < e.rank; ++b) {
            const RatFunc& v = s(a, b);
            if (a != b) {
                if (!v.is_zero())
                    return std::nullopt;
                continue;
            }
            if (!v.is_constant())
                return std::nullopt;
            Rational c = v.constant_value();
            if (!k)
                k = c;
            else if (*k != c)
                return std::nullopt;
        }
    return k;
}

inline std::optional<Rational> conn_degree(const Connection& e)
{
    return conn_degree(e, Connection::zero(e.n_vars, e.rank));
}

// ---------------------------------------------------------------------------
// Gauge transformations.
// ---------------------------------------------------------------------------

struct GaugeMap {
    Rational degree = 0;
    RMatrix mat;

    GaugeMap() = default;
    GaugeMap(Rational deg, RMatrix m) : degree(std::move(deg)), mat(std::move(m)) {}

    static GaugeMap identity(int n_vars, int rank)
    {
        return GaugeMap(0, rf_identity(n_vars, rank));
    }

    // Homogeneity relative to the basis degrees of the module acted on:
    // deg g_{jk} = basis[k] + degree - basis[j].
    bool is_homogeneous(const std::vector<Rational>& basis_degrees) const
    {
        for (int j = 0; j < mat.rows(); ++j)
            for (int k = 0; k < mat.cols(); ++k) {
                const RatFunc& v = mat(j, k);
                if (v.is_zero())
                    continue;
                auto d = v.grading_degree();
                if (!d || Rational(*d) != basis_degrees[k] + degree - basis_degrees[j])
                    return false;
            }
        return true;
    }

    bool is_invertible() const { return ring_inverse(mat).has_value(); }
};

inline Connection gauge_transform(const Connection& e, const GaugeMap& g)
{
    e.validate();
    if (g.mat.rows() != e.rank || g.mat.cols() != e.rank)
        throw input_error("gauge shape mismatch");
    auto inv = ring_inverse(g.mat);
    if (!inv)
        throw domain_error("gauge matrix is not invertible over the ring");
    Connection out = e;
    for (int i = 0; i < e.n_vars; ++i)
        out.mats[i] = (*inv) * e.mats[i] * g.mat + (*inv) * rf_partial(g.mat, i);
    return out;
}

// Verifies that F is E moved by the candidate gauge g (the two then have
// the same monodromy). The search for g is out of scope; this is the
// verification direction only.
inline bool same_monodromy(const Connection& e, const Connection& f, const GaugeMap& g)
{
    if (e.n_vars != f.n_vars || e.rank != f.rank)
        throw input_error("same_monodromy: shape mismatch");
    return gauge_transform(e, g) == f;
}

// ---------------------------------------------------------------------------
// Tensor and pushforward constructions.
// ---------------------------------------------------------------------------

// Connection on the tensor product over juxtaposed variable blocks:
// E(v_1 x ... x v_k) = sum_i v_1 x ... E_i(v_i) ... x v_k. Basis degrees
// add; the degree of the connection adds as well.
inline Connection tensor_conn(const std::vector<Connection>& parts)
{
    if (parts.empty())
        throw input_error("tensor_conn needs at least one factor");
    int n_total = 0, r_total = 1;
    for (const auto& c : parts) {
        c.validate();
        n_total += c.n_vars;
        r_total *= c.rank;
    }
    Connection out(n_total, r_total);
    // Basis degrees: row-major Kronecker order.
    for (int idx = 0; idx < r_total; ++idx) {
        int rest = idx;
        Rational deg = 0;
        for (int p = static_cast<int>(parts.size()) - 1; p >= 0; --p) {
            deg += parts[p].basis_degrees[rest % parts[p].rank];
            rest /= parts[p].rank;
        }
        out.basis_degrees[idx] = deg;
    }
    int var_off = 0;
    for (size_t p = 0; p < parts.size(); ++p) {
        const Connection& c = parts[p];
        std::vector<int> slots(c.n_vars);
        for (int i = 0; i < c.n_vars; ++i)
            slots[i] = var_off + i;
        for (int i = 0; i < c.n_vars; ++i) {
            // I x ... x E_i^{(p)} x ... x I with entries moved to the union
            // variable set.
            RMatrix lifted = c.mats[i].map<RatFunc>(
                RatFunc::zero(n_total),
                [&](const RatFunc& v) { return coaugment(v, slots, n_total); });
            RMatrix big = rf_identity(n_total, 1);
            for (size_t q = 0; q < parts.size(); ++q)
                big = kron(big, q == p ? lifted : rf_identity(n_total, parts[q].rank));
            out.mats[var_off + i] = std::move(big);
        }
        var_off += c.n_vars;
    }
    return out;
}

// Pushforward along a permutation of the variables: sigma[i] is the new
// index of old variable i. The group action convention is
// (sigma . E)_{sigma(i)} = sigma_*(E_i).
inline Connection pushforward_perm(const Connection& e, const std::vector<int>& sigma)
{
    e.validate();
    if (static_cast<int>(sigma.size()) != e.n_vars)
        throw input_error("permutation size mismatch");
    Connection out(e.n_vars, e.rank);
    out.basis_degrees = e.basis_degrees;
    for (int i = 0; i < e.n_vars; ++i)
        out.mats[sigma[i]] = e.mats[i].map<RatFunc>(
            RatFunc::zero(e.n_vars),
            [&](const RatFunc& v) { return coaugment(v, sigma, e.n_vars); });
    return out;
}

// Pushforward along the co-augmentation into chosen slots of a larger
// variable set; coefficients of the untouched variables vanish.
inline Connection pushforward_coaug(const Connection& e, const std::vector<int>& positions,
                                    int n_target)
{
    e.validate();
    if (static_cast<int>(positions.size()) != e.n_vars)
        throw input_error("one position per variable required");
    Connection out(n_target, e.rank);
    out.basis_degrees = e.basis_degrees;
    for (int i = 0; i < e.n_vars; ++i)
        out.mats[positions[i]] = e.mats[i].map<RatFunc>(
            RatFunc::zero(n_target),
            [&](const RatFunc& v) { return coaugment(v, positions, n_target); });
    return out;
}

// A connection with truncated-tensor coefficients in the variables
// {t_{ij}} and {z_i}: the pushforward of a connection along the structure
// map. dz_{(i,p)} = dt_{ip} + dz_i, so the dt coefficient is the
// cocomposed source coefficient and the dz_i coefficient is the sum over
// the block.
struct TruncConnection {
    std::vector<int> partition;
    long order = 0;
    int rank = 0;
    std::vector<Matrix<TruncTensor>> t_mats; // block-major (i, p)
    std::vector<Matrix<TruncTensor>> z_mats; // one per outer variable

    int n_blocks() const { return static_cast<int>(partition.size()); }
};

inline Matrix<TruncTensor> tt_zero_matrix(const std::vector<int>& partition, long order, int rows,
                                          int cols)
{
    return Matrix<TruncTensor>(rows, cols, TruncTensor::zero(partition, order));
}

inline TruncConnection pushforward_structure(const Connection& e,
                                             const std::vector<int>& partition, long order)
{
    e.validate();
    TruncConnection out;
    out.partition = partition;
    out.order = order;
    out.rank = e.rank;
    int total = 0;
    for (int m : partition)
        total += m;
    if (total != e.n_vars)
        throw input_error("partition does not match the connection's variables");
    std::vector<Matrix<TruncTensor>> per_var;
    per_var.reserve(e.n_vars);
    for (int v = 0; v < e.n_vars; ++v)
        per_var.push_back(e.mats[v].map<TruncTensor>(
            TruncTensor::zero(partition, order),
            [&](const RatFunc& f) { return cocompose(f, partition, order); }));
    out.t_mats = std::move(per_var);
    int v = 0;
    for (size_t i = 0; i < partition.size(); ++i) {
        Matrix<TruncTensor> sum = tt_zero_matrix(partition, order, e.rank, e.rank);
        for (int p = 0; p < partition[i]; ++p, ++v)
            sum = sum + out.t_mats[v];
        out.z_mats.push_back(std::move(sum));
    }
    return out;
}

} // namespace treealg
