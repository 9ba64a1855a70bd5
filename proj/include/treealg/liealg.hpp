#pragma once

#include <memory>
#include <string>

#include "treealg/matrix.hpp"

namespace treealg {

// ---------------------------------------------------------------------------
// Finite-dimensional Lie algebras over exact rationals, the bilinear form
// being the Killing form K(x,y) = tr(ad x ad y). The dual basis g^i is
// characterized by K(g^i, x_j) = delta_ij, i.e. g^i = sum_j (K^{-1})_{ji} x_j.
// ---------------------------------------------------------------------------

class LieAlgebraData {
public:
    // c[i][j][k]: [x_i, x_j] = sum_k c[i][j][k] x_k. The dual Coxeter
    // number comes from the classical table for named types, otherwise
    // from the caller.
    LieAlgebraData(std::vector<std::vector<std::vector<Rational>>> c, Rational h_dual,
                   std::string type_tag = "custom")
        : c_(std::move(c)), h_dual_(std::move(h_dual)), tag_(std::move(type_tag))
    {
        dim_ = static_cast<int>(c_.size());
        for (const auto& row : c_) {
            if (static_cast<int>(row.size()) != dim_)
                throw input_error("structure constants must be a cube");
            for (const auto& col : row)
                if (static_cast<int>(col.size()) != dim_)
                    throw input_error("structure constants must be a cube");
        }
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j)
                for (int k = 0; k < dim_; ++k)
                    if (c_[i][j][k] != -c_[j][i][k])
                        throw domain_error("structure constants are not antisymmetric");
        ad_.reserve(dim_);
        for (int i = 0; i < dim_; ++i) {
            QMatrix a = qmat(dim_, dim_);
            for (int j = 0; j < dim_; ++j)
                for (int k = 0; k < dim_; ++k)
                    a(k, j) = c_[i][j][k];
            ad_.push_back(std::move(a));
        }
        // Jacobi in the equivalent form ad[x_i, x_j] = [ad x_i, ad x_j].
        for (int i = 0; i < dim_; ++i)
            for (int j = i + 1; j < dim_; ++j) {
                QMatrix lhs = qmat(dim_, dim_);
                for (int k = 0; k < dim_; ++k)
                    lhs = lhs + ad_[k].scaled(c_[i][j][k]);
                if (!(lhs == ad_[i] * ad_[j] - ad_[j] * ad_[i]))
                    throw domain_error("Jacobi identity fails");
            }
        killing_ = qmat(dim_, dim_);
        for (int i = 0; i < dim_; ++i)
            for (int j = i; j < dim_; ++j)
                killing_(i, j) = killing_(j, i) = (ad_[i] * ad_[j]).trace();
        auto inv = field_inverse(killing_);
        if (!inv)
            throw domain_error("degenerate Killing form: algebra is not semisimple");
        killing_inv_ = std::move(*inv);
    }

    int dim() const { return dim_; }
    const Rational& h_dual_coxeter() const { return h_dual_; }
    const std::string& type_tag() const { return tag_; }
    const QMatrix& killing() const { return killing_; }
    const QMatrix& ad(int i) const { return ad_[i]; }
    const Rational& structure(int i, int j, int k) const { return c_[i][j][k]; }

    // Coefficients of g^a in the basis (x_j).
    Rational dual_coeff(int j, int a) const { return killing_inv_(j, a); }

private:
    std::vector<std::vector<std::vector<Rational>>> c_;
    Rational h_dual_;
    std::string tag_;
    int dim_ = 0;
    std::vector<QMatrix> ad_;
    QMatrix killing_, killing_inv_;
};

// sl_2 with ordered basis (e, f, h): [e,f] = h, [h,e] = 2e, [h,f] = -2f.
inline LieAlgebraData sl2()
{
    int E = 0, F = 1, H = 2;
    std::vector<std::vector<std::vector<Rational>>> c(
        3, std::vector<std::vector<Rational>>(3, std::vector<Rational>(3, Rational(0))));
    auto set = [&](int i, int j, int k, long v) {
        c[i][j][k] = v;
        c[j][i][k] = -v;
    };
    set(E, F, H, 1);
    set(H, E, E, 2);
    set(H, F, F, -2);
    return LieAlgebraData(std::move(c), 2, "sl2");
}

// ---------------------------------------------------------------------------
// Representations: explicit exact matrices.
// ---------------------------------------------------------------------------

struct Rep {
    std::shared_ptr<const LieAlgebraData> algebra;
    int dim = 0;
    std::vector<QMatrix> rho; // one matrix per algebra basis element
    long weight = -1;         // sl2 tag: twice the spin; -1 for custom reps

    void validate() const
    {
        if (static_cast<int>(rho.size()) != algebra->dim())
            throw input_error("rep: one matrix per basis element required");
        for (const auto& m : rho)
            if (m.rows() != dim || m.cols() != dim)
                throw input_error("rep: matrix shape mismatch");
        for (int i = 0; i < algebra->dim(); ++i)
            for (int j = i + 1; j < algebra->dim(); ++j) {
                QMatrix lhs = qmat(dim, dim);
                for (int k = 0; k < algebra->dim(); ++k)
                    lhs = lhs + rho[k].scaled(algebra->structure(i, j, k));
                if (!(lhs == rho[i] * rho[j] - rho[j] * rho[i]))
                    throw domain_error("rep does not respect the bracket");
            }
    }

    // rho(g^a) in the Killing-dual basis.
    QMatrix rho_dual(int a) const
    {
        QMatrix m = qmat(dim, dim);
        for (int j = 0; j < algebra->dim(); ++j)
            m = m + rho[j].scaled(algebra->dual_coeff(j, a));
        return m;
    }
};

inline Rep trivial_rep(std::shared_ptr<const LieAlgebraData> alg)
{
    Rep r;
    r.algebra = std::move(alg);
    r.dim = 1;
    r.rho.assign(r.algebra->dim(), qmat(1, 1));
    r.weight = 0;
    return r;
}

// Irreducible sl2 representation of highest weight m (spin m/2) on the
// weight basis v_0..v_m: h v_k = (m-2k) v_k, f v_k = v_{k+1},
// e v_k = k(m+1-k) v_{k-1}.
inline Rep sl2_rep(std::shared_ptr<const LieAlgebraData> alg, long m)
{
    if (alg->type_tag() != "sl2")
        throw input_error("sl2_rep needs the sl2 algebra");
    if (m < 0)
        throw input_error("highest weight must be >= 0");
    Rep r;
    r.algebra = std::move(alg);
    r.dim = static_cast<int>(m) + 1;
    r.weight = m;
    QMatrix e = qmat(r.dim, r.dim), f = qmat(r.dim, r.dim), h = qmat(r.dim, r.dim);
    for (long k = 0; k <= m; ++k) {
        h(k, k) = m - 2 * k;
        if (k < m)
            f(k + 1, k) = 1;
        if (k > 0)
            e(k - 1, k) = k * (m + 1 - k);
    }
    r.rho = {std::move(e), std::move(f), std::move(h)};
    r.validate();
    return r;
}

// ---------------------------------------------------------------------------
// Casimir insertions and invariant maps.
// ---------------------------------------------------------------------------

inline int tensor_dim(const std::vector<Rep>& reps)
{
    int d = 1;
    for (const auto& r : reps)
        d *= r.dim;
    return d;
}

// Operator acting as `op` at one slot of the tensor product.
inline QMatrix insert_at(const std::vector<Rep>& reps, int slot, const QMatrix& op)
{
    QMatrix m = qeye(1);
    for (size_t s = 0; s < reps.size(); ++s)
        m = kron(m, static_cast<int>(s) == slot ? op : qeye(reps[s].dim));
    return m;
}

// rho_tensor(x_a) = sum_slots 1 x ... rho(x_a) ... x 1.
inline QMatrix tensor_action(const std::vector<Rep>& reps, int a)
{
    QMatrix m = qmat(tensor_dim(reps), tensor_dim(reps));
    for (size_t s = 0; s < reps.size(); ++s)
        m = m + insert_at(reps, static_cast<int>(s), reps[s].rho[a]);
    return m;
}

// The split Casimir Omega_{lp} = sum_a rho_l(g^a) (x) rho_p(x_a), embedded
// in the full tensor product. Symmetric in l <-> p.
inline QMatrix casimir_pair(const std::vector<Rep>& reps, int l, int p)
{
    if (l == p)
        throw input_error("casimir_pair needs two distinct slots");
    int n = static_cast<int>(reps.size());
    if (l < 0 || l >= n || p < 0 || p >= n)
        throw input_error("casimir_pair: slot out of range");
    const LieAlgebraData& alg = *reps[0].algebra;
    QMatrix sum = qmat(tensor_dim(reps), tensor_dim(reps));
    for (int a = 0; a < alg.dim(); ++a)
        sum = sum + insert_at(reps, l, reps[l].rho_dual(a)) * insert_at(reps, p, reps[p].rho[a]);
    return sum;
}

// Basis of Hom_g(source_1 x ... x source_n, target) as dim(target) x
// prod(dim) matrices, from the exact kernel of the intertwining system.
inline std::vector<QMatrix> invariant_maps(const std::vector<Rep>& sources, const Rep& target)
{
    const LieAlgebraData& alg = *target.algebra;
    int d_src = tensor_dim(sources);
    int d_tgt = target.dim;
    int unknowns = d_tgt * d_src;
    QMatrix system = qmat(alg.dim() * unknowns, unknowns);
    int row = 0;
    for (int a = 0; a < alg.dim(); ++a) {
        QMatrix src_act = sources.empty() ? qmat(1, 1) : tensor_action(sources, a);
        // rho_t(x) X - X rho_src(x) = 0, unknowns X(r, c) flattened row-major.
        for (int r = 0; r < d_tgt; ++r)
            for (int c = 0; c < d_src; ++c, ++row) {
                for (int s = 0; s < d_tgt; ++s)
                    system(row, s * d_src + c) += target.rho[a](r, s);
                for (int s = 0; s < d_src; ++s)
                    system(row, r * d_src + s) -= src_act(s, c);
            }
    }
    std::vector<QMatrix> basis;
    for (const auto& v : kernel_basis(system)) {
        QMatrix x = qmat(d_tgt, d_src);
        for (int r = 0; r < d_tgt; ++r)
            for (int c = 0; c < d_src; ++c)
                x(r, c) = v[r * d_src + c];
        basis.push_back(std::move(x));
    }
    return basis;
}

inline bool is_irreducible(const Rep& r)
{
    return invariant_maps({r}, r).size() == 1;
}

// The scalar by which sum_a rho(g^a) rho(x_a) acts on an irreducible rep.
inline Rational casimir_eigenvalue(const Rep& rep)
{
    const LieAlgebraData& alg = *rep.algebra;
    QMatrix c = qmat(rep.dim, rep.dim);
    for (int a = 0; a < alg.dim(); ++a)
        c = c + rep.rho_dual(a) * rep.rho[a];
    Rational lambda = c(0, 0);
    if (!(c == qeye(rep.dim).scaled(lambda)))
        throw domain_error("Casimir does not act as a scalar: rep is not irreducible");
    return lambda;
}

} // namespace treealg
