#pragma once

#include <deque>

#include "treealg/axioms.hpp"

namespace treealg {

// ---------------------------------------------------------------------------
// The WZW instance: tree-functor and pre-tree-algebra data assembled from
// classical invariant spaces and restricted KZ connections.
//
// The requested spins generate the instance; intermediate channels of
// their splits can leave the generating set (classical fusion of two
// spin-1/2 factors meets spin 1), so the builder stores the finite channel
// closure: every tuple reachable as a block or channel of a stored tuple,
// together with its permutations. All channel supports are then complete
// and every composition isomorphism is square.
//
// Module bases for tuples containing the unit label are lifted from the
// stripped tuple (the flattened matrices coincide since trivial factors
// are one-dimensional), which makes the identity matrix a valid axiom-2
// certificate. Composition isomorphisms are the constant change of basis
// into composed intertwiners.
// ---------------------------------------------------------------------------

struct WZWInstance {
    std::shared_ptr<const LieAlgebraData> algebra;
    Rational level = 0;
    PreTreeAlgebraData pta; // pta.tf is the tree-functor data

    TreeFunctorData& tf() { return pta.tf; }
    const TreeFunctorData& tf() const { return pta.tf; }
};

namespace detail {

inline void enumerate_tuples(const Labels& labels, int n, const std::function<void(Labels)>& fn)
{
    Labels cur(n);
    std::function<void(int)> rec = [&](int pos) {
        if (pos == n) {
            fn(cur);
            return;
        }
        for (long l : labels) {
            cur[pos] = l;
            rec(pos + 1);
        }
    };
    rec(0);
}

inline void enumerate_compositions(int total, const std::function<void(std::vector<int>)>& fn)
{
    std::vector<int> cur;
    std::function<void(int)> rec = [&](int rest) {
        if (rest == 0) {
            fn(cur);
            return;
        }
        for (int part = 1; part <= rest; ++part) {
            cur.push_back(part);
            rec(rest - part);
            cur.pop_back();
        }
    };
    rec(total);
}

inline void enumerate_permutations(int n, const std::function<void(std::vector<int>)>& fn)
{
    std::vector<int> sigma(n);
    std::iota(sigma.begin(), sigma.end(), 0);
    do {
        fn(sigma);
    } while (std::next_permutation(sigma.begin(), sigma.end()));
}

inline std::vector<Rational> flatten_qmatrix(const QMatrix& m)
{
    std::vector<Rational> v;
    v.reserve(static_cast<size_t>(m.rows()) * m.cols());
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            v.push_back(m(r, c));
    return v;
}

// Coordinates of `targets` in the span of `basis`, as the matrix X with
// target_a = sum_b X(b, a) basis_b. Throws when a target leaves the span.
inline QMatrix coordinates_in_basis(const std::vector<QMatrix>& basis,
                                    const std::vector<QMatrix>& targets)
{
    int r = static_cast<int>(basis.size());
    QMatrix x(r, static_cast<int>(targets.size()), Rational(0));
    if (targets.empty())
        return x;
    if (r == 0)
        throw domain_error("cannot express targets in an empty basis");
    int rows = basis[0].rows(), cols = basis[0].cols();
    QMatrix stacked(rows * cols, r, Rational(0));
    for (int b = 0; b < r; ++b) {
        auto flat = flatten_qmatrix(basis[b]);
        for (size_t k = 0; k < flat.size(); ++k)
            stacked(static_cast<int>(k), b) = flat[k];
    }
    for (size_t a = 0; a < targets.size(); ++a) {
        auto sol = solve(stacked, flatten_qmatrix(targets[a]));
        if (!sol)
            throw domain_error("target map is outside the module span");
        for (int b = 0; b < r; ++b)
            x(b, static_cast<int>(a)) = (*sol)[b];
    }
    return x;
}

// Classically reachable sl2 highest weights of a tensor product.
inline std::set<long> fusion_reach(const Labels& labels)
{
    std::set<long> cur = {0};
    for (long l : labels) {
        std::set<long> next;
        for (long m : cur)
            for (long r = std::labs(m - l); r <= m + l; r += 2)
                next.insert(r);
        cur = std::move(next);
    }
    return cur;
}

} // namespace detail

inline WZWInstance wzw_instance(std::shared_ptr<const LieAlgebraData> alg, const Labels& base,
                                const Rational& level, int max_points)
{
    if (std::find(base.begin(), base.end(), 0L) == base.end())
        throw input_error("the trivial label (weight 0) must be included");
    for (long l : base)
        if (l < 0)
            throw input_error("labels are nonnegative sl2 weights");

    WZWInstance inst;
    inst.algebra = alg;
    inst.level = level;
    TreeFunctorData& tf = inst.pta.tf;
    tf.unit_label = 0;
    tf.degree_sign = -1;
    tf.max_points = max_points;

    std::map<long, Rep> reps;
    auto rep_of = [&](long l) -> const Rep& {
        auto it = reps.find(l);
        if (it == reps.end())
            it = reps.emplace(l, sl2_rep(alg, l)).first;
        return it->second;
    };

    std::map<TupleKey, std::vector<QMatrix>> bases;
    std::function<const std::vector<QMatrix>&(const TupleKey&)> basis_of =
        [&](const TupleKey& key) -> const std::vector<QMatrix>& {
        auto it = bases.find(key);
        if (it != bases.end())
            return it->second;
        Labels stripped;
        for (long l : key.in)
            if (l != tf.unit_label)
                stripped.push_back(l);
        std::vector<QMatrix> basis;
        if (stripped.size() != key.in.size()) {
            // Same matrix data: trivial factors are one-dimensional, so the
            // flattened index spaces agree.
            basis = basis_of(TupleKey{stripped, key.out});
        } else {
            std::vector<Rep> source;
            for (long l : key.in)
                source.push_back(rep_of(l));
            basis = invariant_maps(source, rep_of(key.out));
        }
        return bases.emplace(key, std::move(basis)).first->second;
    };

    // Worklist closure over blocks, channels and permutations.
    std::set<TupleKey> queued;
    std::deque<TupleKey> work;
    auto enqueue = [&](TupleKey key) {
        if (queued.insert(key).second)
            work.push_back(std::move(key));
    };
    for (int n = 0; n <= max_points; ++n)
        detail::enumerate_tuples(base, n, [&](Labels in) {
            for (long out : base)
                enqueue(TupleKey{in, out});
            for (long out : detail::fusion_reach(in))
                enqueue(TupleKey{in, out});
        });

    while (!work.empty()) {
        TupleKey key = std::move(work.front());
        work.pop_front();
        const auto& basis = basis_of(key);
        TupleData data;
        data.rank = static_cast<int>(basis.size());
        int n = static_cast<int>(key.in.size());
        if (n == 0 || data.rank == 0) {
            data.conn = Connection(n, data.rank);
        } else {
            std::vector<Rep> source;
            for (long l : key.in)
                source.push_back(rep_of(l));
            data.conn = kz_restrict_on_basis(source, level, basis);
        }
        data.unit_cert = qeye(data.rank);

        if (data.rank > 0) {
            // Permutation closure.
            if (n >= 2)
                detail::enumerate_permutations(n, [&](std::vector<int> sigma) {
                    Labels permuted(n);
                    for (int i = 0; i < n; ++i)
                        permuted[sigma[i]] = key.in[i];
                    enqueue(TupleKey{permuted, key.out});
                });
            // Splits with complete channel supports; the trivial split of a
            // one-point tuple is kept as the unit square.
            detail::enumerate_compositions(n, [&](std::vector<int> partition) {
                SplitData split;
                split.partition = partition;
                auto blocks = detail::block_labels(key, partition);
                int nb = static_cast<int>(partition.size());
                std::vector<std::vector<long>> mid_candidates(nb);
                for (int i = 0; i < nb; ++i) {
                    auto reach = detail::fusion_reach(blocks[i]);
                    mid_candidates[i].assign(reach.begin(), reach.end());
                }
                std::vector<QMatrix> composites;
                std::vector<int> pick(nb, 0);
                while (true) {
                    Labels mids(nb);
                    for (int i = 0; i < nb; ++i)
                        mids[i] = mid_candidates[i][pick[i]];
                    TupleKey okey{mids, key.out};
                    const auto& outer = basis_of(okey);
                    int dim = static_cast<int>(outer.size());
                    std::vector<const std::vector<QMatrix>*> inner(nb);
                    for (int i = 0; i < nb && dim > 0; ++i) {
                        inner[i] = &basis_of(TupleKey{blocks[i], mids[i]});
                        dim *= static_cast<int>(inner[i]->size());
                    }
                    if (dim > 0) {
                        split.channels.push_back(mids);
                        enqueue(okey);
                        for (int i = 0; i < nb; ++i)
                            enqueue(TupleKey{blocks[i], mids[i]});
                        // Channel index: inner factors row-major, outer last.
                        std::vector<int> idx(nb, 0);
                        while (true) {
                            QMatrix inner_k = qeye(1);
                            for (int i = 0; i < nb; ++i)
                                inner_k = kron(inner_k, (*inner[i])[idx[i]]);
                            for (const auto& g : outer)
                                composites.push_back(g * inner_k);
                            int i = nb - 1;
                            while (i >= 0 && ++idx[i] == static_cast<int>(inner[i]->size())) {
                                idx[i] = 0;
                                --i;
                            }
                            if (i < 0)
                                break;
                        }
                    }
                    int i = nb - 1;
                    while (i >= 0 && ++pick[i] == static_cast<int>(mid_candidates[i].size())) {
                        pick[i] = 0;
                        --i;
                    }
                    if (i < 0)
                        break;
                }
                // Big coordinates to composite coordinates.
                split.iso = detail::coordinates_in_basis(composites, basis);
                data.splits.push_back(std::move(split));
            });
        }
        tf.tuples.emplace(std::move(key), std::move(data));
    }

    // Permutation certificates between stored tuples.
    for (auto& [key, data] : tf.tuples) {
        int n = static_cast<int>(key.in.size());
        if (n < 2 || data.rank == 0)
            continue;
        std::vector<int> dims;
        for (long l : key.in)
            dims.push_back(rep_of(l).dim);
        detail::enumerate_permutations(n, [&](std::vector<int> sigma) {
            bool identity = true;
            for (int i = 0; i < n; ++i)
                identity = identity && sigma[i] == i;
            if (identity)
                return;
            Labels permuted(n);
            for (int i = 0; i < n; ++i)
                permuted[sigma[i]] = key.in[i];
            QMatrix s = tensor_perm_matrix(dims, sigma);
            std::vector<QMatrix> pulled;
            for (const auto& f : basis_of(TupleKey{permuted, key.out}))
                pulled.push_back(f * s);
            data.perm_certs.emplace(sigma, detail::coordinates_in_basis(basis_of(key), pulled));
        });
    }

    // Labels, conformal shifts, and the pre-tree algebra realization
    // phi(f) = f x 1 on the lowest graded pieces.
    std::set<long> all_labels(base.begin(), base.end());
    for (const auto& [key, data] : tf.tuples) {
        all_labels.insert(key.out);
        for (long l : key.in)
            all_labels.insert(l);
    }
    tf.labels.assign(all_labels.begin(), all_labels.end());
    for (long l : tf.labels) {
        tf.alpha[l] = conformal_shift(rep_of(l), level);
        inst.pta.v_dims[l] = rep_of(l).dim;
    }
    for (const auto& [key, data] : tf.tuples)
        if (data.rank > 0)
            inst.pta.phi.emplace(key, basis_of(key));

    return inst;
}

} // namespace treealg
