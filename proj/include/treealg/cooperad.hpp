#pragma once

#include <numeric>

#include "treealg/ratfunc.hpp"

namespace treealg {

// ---------------------------------------------------------------------------
// Sorted coefficient rings.
//
// The target of an iterated co-operad structure map is a tensor product of
// configuration-space rings, completed in the outer direction. We realize
// a truncation of it as one big RatFunc whose variables are grouped into
// "sorts" (one sort per tensor factor), with denominators confined to
// diagonal pairs inside a single sort. Each sort carries a truncation
// class; terms whose degree in a bounded class exceeds the bound are
// dropped. Class 0 is reserved for the outermost factor and is never
// bounded.
// ---------------------------------------------------------------------------

using SortLabel = std::vector<int>;

struct Sort {
    SortLabel label;
    int trunc_class = 0;
    int size = 0;

    friend bool operator==(const Sort& a, const Sort& b) = default;
};

// Extensions come before their prefix, otherwise lexicographic. This puts
// inner factors before the factor they were split from, uniformly for all
// iteration orders.
inline bool sort_label_less(const SortLabel& a, const SortLabel& b)
{
    size_t k = std::min(a.size(), b.size());
    for (size_t i = 0; i < k; ++i)
        if (a[i] != b[i])
            return a[i] < b[i];
    return a.size() > b.size();
}

struct VarLayout {
    std::vector<Sort> sorts;

    int total_vars() const
    {
        int t = 0;
        for (const auto& s : sorts)
            t += s.size;
        return t;
    }

    int sort_offset(int s) const
    {
        int off = 0;
        for (int k = 0; k < s; ++k)
            off += sorts[k].size;
        return off;
    }

    int sort_of_var(int v) const
    {
        int off = 0;
        for (size_t s = 0; s < sorts.size(); ++s) {
            off += sorts[s].size;
            if (v < off)
                return static_cast<int>(s);
        }
        throw input_error("variable index outside layout");
    }

    int find_sort(const SortLabel& label) const
    {
        for (size_t s = 0; s < sorts.size(); ++s)
            if (sorts[s].label == label)
                return static_cast<int>(s);
        return -1;
    }

    friend bool operator==(const VarLayout& a, const VarLayout& b) = default;
};

// An element of a truncated sorted ring.
class SortedElem {
public:
    SortedElem() = default;

    SortedElem(VarLayout layout, std::map<int, long> bounds, RatFunc value)
        : layout_(std::move(layout)), bounds_(std::move(bounds)), value_(std::move(value))
    {
        if (value_.n_vars() != layout_.total_vars())
            throw input_error("value does not match layout");
        for (const auto& [p, m] : value_.den())
            if (layout_.sort_of_var(p.first) != layout_.sort_of_var(p.second))
                throw input_error("denominator crosses sorts");
        truncate_in_place();
    }

    static SortedElem zero(VarLayout layout, std::map<int, long> bounds)
    {
        RatFunc z(layout.total_vars());
        return SortedElem(std::move(layout), std::move(bounds), std::move(z));
    }

    const VarLayout& layout() const { return layout_; }
    const std::map<int, long>& bounds() const { return bounds_; }
    const RatFunc& value() const { return value_; }
    bool is_zero() const { return value_.is_zero(); }

    // Degree of a numerator monomial in the variables of one truncation
    // class, denominator exponents subtracted.
    long class_degree(const Exponents& e, int cls) const
    {
        long d = 0;
        int off = 0;
        for (const auto& s : layout_.sorts) {
            if (s.trunc_class == cls)
                for (int v = off; v < off + s.size; ++v)
                    d += e[v];
            off += s.size;
        }
        for (const auto& [p, m] : value_.den())
            if (layout_.sorts[layout_.sort_of_var(p.first)].trunc_class == cls)
                d -= m;
        return d;
    }

    friend SortedElem operator+(const SortedElem& a, const SortedElem& b)
    {
        check_compatible(a, b);
        return SortedElem(a.layout_, merge_bounds(a.bounds_, b.bounds_), a.value_ + b.value_);
    }

    friend SortedElem operator-(const SortedElem& a, const SortedElem& b)
    {
        check_compatible(a, b);
        return SortedElem(a.layout_, merge_bounds(a.bounds_, b.bounds_), a.value_ - b.value_);
    }

    // Multiplication drops over-bound terms pair-by-pair, before the
    // product polynomial is ever materialized or normalized.
    friend SortedElem operator*(const SortedElem& a, const SortedElem& b)
    {
        check_compatible(a, b);
        std::map<int, long> bounds = merge_bounds(a.bounds_, b.bounds_);
        if (bounds.empty() || a.value_.is_zero() || b.value_.is_zero())
            return SortedElem(a.layout_, std::move(bounds), a.value_ * b.value_);

        std::map<DivisorPair, int> den = a.value_.den();
        for (const auto& [p, m] : b.value_.den())
            den[p] += m;
        // Class offsets from the combined denominator.
        std::vector<int> cls_of_var(a.layout_.total_vars());
        for (int v = 0; v < a.layout_.total_vars(); ++v)
            cls_of_var[v] = a.layout_.sorts[a.layout_.sort_of_var(v)].trunc_class;
        std::map<int, long> den_off;
        for (const auto& [p, m] : den)
            den_off[cls_of_var[p.first]] += m;
        std::vector<std::pair<int, long>> limits; // class -> numerator bound
        for (const auto& [cls, bound] : bounds) {
            auto it = den_off.find(cls);
            limits.emplace_back(cls, bound + (it == den_off.end() ? 0 : it->second));
        }
        auto class_degrees = [&](const Exponents& e) {
            std::vector<long> d(limits.size(), 0);
            for (int v = 0; v < static_cast<int>(e.size()); ++v) {
                if (e[v] == 0)
                    continue;
                for (size_t k = 0; k < limits.size(); ++k)
                    if (cls_of_var[v] == limits[k].first)
                        d[k] += e[v];
            }
            return d;
        };
        std::vector<std::pair<const Exponents*, std::vector<long>>> a_terms, b_terms;
        for (const auto& [e, c] : a.value_.num().terms)
            a_terms.emplace_back(&e, class_degrees(e));
        for (const auto& [e, c] : b.value_.num().terms)
            b_terms.emplace_back(&e, class_degrees(e));
        Poly prod(a.layout_.total_vars());
        int n_vars = a.layout_.total_vars();
        size_t ia = 0;
        for (const auto& [ea, ca] : a.value_.num().terms) {
            const auto& da = a_terms[ia++].second;
            size_t ib = 0;
            for (const auto& [eb, cb] : b.value_.num().terms) {
                const auto& db = b_terms[ib++].second;
                bool keep = true;
                for (size_t k = 0; k < limits.size(); ++k)
                    if (da[k] + db[k] > limits[k].second) {
                        keep = false;
                        break;
                    }
                if (!keep)
                    continue;
                Exponents e(n_vars);
                for (int v = 0; v < n_vars; ++v)
                    e[v] = ea[v] + eb[v];
                prod.add_term(e, ca * cb);
            }
        }
        return SortedElem(a.layout_, std::move(bounds), RatFunc(std::move(prod), std::move(den)));
    }

    SortedElem operator-() const { return SortedElem(layout_, bounds_, -value_); }

    SortedElem scaled(const Rational& c) const
    {
        return SortedElem(layout_, bounds_, value_.scaled(c));
    }

    SortedElem partial(int v) const { return SortedElem(layout_, bounds_, value_.partial(v)); }

    friend bool operator==(const SortedElem& a, const SortedElem& b)
    {
        return a.layout_ == b.layout_ && a.value_ == b.value_;
    }

    // Re-truncation with (possibly) tighter bounds.
    SortedElem truncated(std::map<int, long> new_bounds) const
    {
        return SortedElem(layout_, merge_bounds(bounds_, new_bounds), value_);
    }

    // Keeps only terms with class_degree(., cls) <= bound for every entry of
    // `limits`; used for comparisons at a stated order without changing the
    // element's own bounds.
    SortedElem filtered(const std::map<int, long>& limits) const
    {
        Poly kept(value_.num().n);
        for (const auto& [e, c] : value_.num().terms) {
            bool keep = true;
            for (const auto& [cls, bound] : limits)
                if (class_degree(e, cls) > bound) {
                    keep = false;
                    break;
                }
            if (keep)
                kept.add_term(e, c);
        }
        return SortedElem(layout_, bounds_, RatFunc(std::move(kept), value_.den()));
    }

    // Lowest class degree present (for exactness bookkeeping in callers).
    std::optional<long> min_class_degree(int cls) const
    {
        std::optional<long> best;
        for (const auto& [e, c] : value_.num().terms) {
            long d = class_degree(e, cls);
            if (!best || d < *best)
                best = d;
        }
        return best;
    }

    // Reorders sorts into the canonical label order.
    SortedElem canonical() const
    {
        std::vector<int> order(layout_.sorts.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return sort_label_less(layout_.sorts[a].label, layout_.sorts[b].label);
        });
        VarLayout new_layout;
        std::vector<int> var_map(layout_.total_vars());
        int pos = 0;
        for (int s : order) {
            int off = layout_.sort_offset(s);
            for (int k = 0; k < layout_.sorts[s].size; ++k)
                var_map[off + k] = pos + k;
            pos += layout_.sorts[s].size;
            new_layout.sorts.push_back(layout_.sorts[s]);
        }
        return SortedElem(std::move(new_layout), bounds_, remap_vars(value_, var_map));
    }

    // Sets every variable of one sort to zero and removes the sort (the
    // co-unit direction). The sort must not appear in any denominator.
    SortedElem with_sort_set_zero(const SortLabel& label) const
    {
        int s = layout_.find_sort(label);
        if (s < 0)
            throw input_error("no such sort");
        int off = layout_.sort_offset(s);
        int len = layout_.sorts[s].size;
        for (const auto& [p, m] : value_.den())
            if (layout_.sort_of_var(p.first) == s)
                throw domain_error("sort appears in a denominator; cannot set to zero");
        Poly kept(value_.n_vars() - len);
        for (const auto& [e, c] : value_.num().terms) {
            bool hit = false;
            for (int v = off; v < off + len; ++v)
                if (e[v] > 0) {
                    hit = true;
                    break;
                }
            if (hit)
                continue;
            Exponents shrunk;
            shrunk.reserve(e.size() - len);
            for (int v = 0; v < static_cast<int>(e.size()); ++v)
                if (v < off || v >= off + len)
                    shrunk.push_back(e[v]);
            kept.add_term(shrunk, c);
        }
        std::map<DivisorPair, int> new_den;
        for (const auto& [p, m] : value_.den()) {
            auto shift = [&](int v) { return v >= off + len ? v - len : v; };
            new_den[{shift(p.first), shift(p.second)}] = m;
        }
        VarLayout new_layout = layout_;
        new_layout.sorts.erase(new_layout.sorts.begin() + s);
        return SortedElem(std::move(new_layout), bounds_,
                          RatFunc(std::move(kept), std::move(new_den)));
    }

    // -----------------------------------------------------------------
    // The structure map: replaces one sort (of size m1+...+mb) by child
    // sorts of sizes m1,...,mb plus a base sort of size b. Variable p of
    // block j maps to t_{j,p} + u_j; intra-block divisors map to divisors
    // of the child sort; cross-block inverses are expanded in increasing
    // child-class powers. Exact for all terms within the stated bounds.
    // -----------------------------------------------------------------
    SortedElem expand_sort(const SortLabel& which, const std::vector<int>& partition,
                           const std::vector<SortLabel>& child_labels, int child_class,
                           int base_class, long child_bound) const
    {
        int s = layout_.find_sort(which);
        if (s < 0)
            throw input_error("no such sort");
        const Sort& src = layout_.sorts[s];
        long psum = std::accumulate(partition.begin(), partition.end(), 0L);
        if (psum != src.size)
            throw input_error("partition does not match sort size");
        if (child_labels.size() != partition.size())
            throw input_error("one label per block required");
        for (int m : partition)
            if (m < 0)
                throw input_error("negative block size");

        if (child_class == 0)
            throw input_error("child sorts must carry a bounded truncation class");

        int b = static_cast<int>(partition.size());
        int src_off = layout_.sort_offset(s);

        // Target layout: children then base, in place of the source sort.
        VarLayout target;
        for (int k = 0; k < static_cast<int>(layout_.sorts.size()); ++k) {
            if (k == s) {
                for (int j = 0; j < b; ++j)
                    target.sorts.push_back(Sort{child_labels[j], child_class, partition[j]});
                target.sorts.push_back(Sort{src.label, base_class, b});
            } else {
                target.sorts.push_back(layout_.sorts[k]);
            }
        }
        int nt = target.total_vars();

        // Index helpers in the target layout.
        std::vector<int> child_off(b), block_of(src.size), pos_in_block(src.size);
        int toff = src_off;
        for (int j = 0; j < b; ++j) {
            child_off[j] = toff;
            toff += partition[j];
        }
        int base_off = toff;
        for (int j = 0, p = 0; j < b; ++j)
            for (int q = 0; q < partition[j]; ++q, ++p) {
                block_of[p] = j;
                pos_in_block[p] = q;
            }

        auto map_other = [&](int v) {
            // Variables outside the expanded sort keep their order; those
            // after it shift by (b new base vars - 0) since children replace
            // the same count of variables.
            return v < src_off ? v : v + b;
        };
        auto t_var = [&](int p) { return child_off[block_of[p]] + pos_in_block[p]; };
        auto u_var = [&](int j) { return base_off + j; };

        if (base_class == child_class)
            throw input_error("base and child truncation classes must differ");

        std::map<int, long> new_bounds = bounds_;
        // The source class bound was a joint statement over all sorts of
        // that class; expanding one of them moves degree compensation into
        // the new sorts, so the old bound no longer filters correctly.
        new_bounds.erase(src.trunc_class);
        {
            auto it = new_bounds.find(child_class);
            new_bounds[child_class] =
                it == new_bounds.end() ? child_bound : std::min(it->second, child_bound);
        }

        // Exact denominator part: carried-over sorts and intra-block pairs.
        std::map<DivisorPair, int> exact_den;
        std::vector<std::tuple<int, int, int>> expansions; // (u_j, u_j', m) with j<j'
        for (const auto& [p, m] : value_.den()) {
            if (layout_.sort_of_var(p.first) != s) {
                exact_den[{map_other(p.first), map_other(p.second)}] += m;
                continue;
            }
            int pa = p.first - src_off, pb = p.second - src_off;
            if (block_of[pa] == block_of[pb]) {
                exact_den[{t_var(pa), t_var(pb)}] += m; // order preserved inside a block
            } else {
                expansions.emplace_back(pa, pb, m);
            }
        }

        // Working bounds for the intermediate chain: each bounded class is
        // widened by the denominator exponents that have not been attached
        // yet (the exact part at the end, the expansion part during the
        // factor products), so no term is dropped before its compensating
        // denominator arrives. The final construction with new_bounds and
        // the full denominator enforces the exact truncation.
        std::vector<int> cls_of_var(nt);
        for (int v = 0; v < nt; ++v)
            cls_of_var[v] = target.sorts[target.sort_of_var(v)].trunc_class;
        std::map<int, long> pending; // class -> denominator degree still to come
        for (const auto& [p, m] : exact_den)
            pending[cls_of_var[p.first]] += m;
        long kmax = 0;
        {
            auto it = new_bounds.find(child_class);
            long base = it == new_bounds.end() ? 0 : it->second;
            auto pit = pending.find(child_class);
            kmax = std::max<long>(base + (pit == pending.end() ? 0 : pit->second), 0);
        }
        for (const auto& [pa, pb, m] : expansions) {
            (void)pa;
            (void)pb;
            pending[base_class] += kmax + m;
        }
        std::map<int, long> chain_bounds = new_bounds;
        for (auto& [cls, bound] : chain_bounds) {
            auto it = pending.find(cls);
            if (it != pending.end())
                bound += it->second;
        }
        const std::map<int, long>& caps = chain_bounds; // numerator degree caps
        // Cap slot per variable: index into the flat caps list, or -1.
        std::vector<std::pair<int, long>> cap_list(caps.begin(), caps.end());
        std::vector<int> slot_of_var(nt, -1);
        for (int v = 0; v < nt; ++v)
            for (size_t k = 0; k < cap_list.size(); ++k)
                if (cls_of_var[v] == cap_list[k].first)
                    slot_of_var[v] = static_cast<int>(k);
        Poly num_image(nt);
        {
            struct PTerm {
                Exponents e;
                Rational c;
                std::array<long, 8> cdeg{};
            };
            if (cap_list.size() > 8)
                throw input_error("too many truncation classes");
            std::vector<PTerm> batch, next;
            for (const auto& [e, c] : value_.num().terms) {
                batch.clear();
                batch.push_back(PTerm{Exponents(nt, 0), c, {}});
                for (int v = 0; v < value_.n_vars() && !batch.empty(); ++v) {
                    if (e[v] == 0)
                        continue;
                    if (layout_.sort_of_var(v) != s) {
                        int w = map_other(v);
                        int slot = slot_of_var[w];
                        for (size_t k = 0; k < batch.size();) {
                            auto& term = batch[k];
                            term.e[w] += e[v];
                            if (slot >= 0 && (term.cdeg[slot] += e[v]) > cap_list[slot].second) {
                                term = std::move(batch.back());
                                batch.pop_back();
                            } else {
                                ++k;
                            }
                        }
                    } else {
                        int p = v - src_off;
                        int tv = t_var(p), uv = u_var(block_of[p]);
                        int tslot = slot_of_var[tv], uslot = slot_of_var[uv];
                        next.clear();
                        for (const auto& term : batch) {
                            Rational binom = 1;
                            for (int j = 0; j <= e[v]; ++j) {
                                bool ok = true;
                                std::array<long, 8> cd = term.cdeg;
                                if (tslot >= 0 && (cd[tslot] += j) > cap_list[tslot].second)
                                    ok = false;
                                if (ok && uslot >= 0 &&
                                    (cd[uslot] += e[v] - j) > cap_list[uslot].second)
                                    ok = false;
                                if (ok) {
                                    PTerm nt2;
                                    nt2.e = term.e;
                                    nt2.e[tv] += j;
                                    nt2.e[uv] += e[v] - j;
                                    nt2.cdeg = cd;
                                    nt2.c = term.c * binom;
                                    next.push_back(std::move(nt2));
                                }
                                binom = binom * Rational(e[v] - j) / Rational(j + 1);
                            }
                        }
                        batch.swap(next);
                    }
                }
                for (auto& term : batch)
                    num_image.add_term(term.e, term.c);
            }
        }

        // Multiply the numerator image by every cross-block expansion at the
        // working bound, then attach the exact denominators and truncate.
        const std::map<int, long>& work_bounds = chain_bounds;
        SortedElem acc(target, work_bounds, RatFunc(num_image, {}));
        for (const auto& [pa, pb, m] : expansions) {
            // (z_pa - z_pb)^{-m} with pa < pb, blocks j < j':
            //   sum_k binom(m+k-1, k) (-1)^k (t_a - t_b)^k (u_j - u_j')^{-m-k}.
            Poly dt = Poly::variable(nt, t_var(pa)) - Poly::variable(nt, t_var(pb));
            Poly du = Poly::variable(nt, u_var(block_of[pa])) - Poly::variable(nt, u_var(block_of[pb]));
            std::vector<Poly> du_pow(kmax + 1, Poly::constant(nt, 1));
            for (long k = 1; k <= kmax; ++k)
                du_pow[k] = du_pow[k - 1] * du;
            Poly series(nt);
            Rational binom = 1; // binom(m+k-1, k), starts at k = 0
            Poly dt_pow = Poly::constant(nt, 1);
            for (long k = 0; k <= kmax; ++k) {
                Rational coeff = (k % 2 == 0) ? binom : -binom;
                series += (dt_pow * du_pow[kmax - k]).scaled(coeff);
                binom = binom * Rational(m + k) / Rational(k + 1);
                dt_pow *= dt;
            }
            std::map<DivisorPair, int> dden;
            dden[{u_var(block_of[pa]), u_var(block_of[pb])}] = static_cast<int>(kmax) + m;
            acc = acc * SortedElem(target, work_bounds, RatFunc(series, std::move(dden)));
        }
        RatFunc with_exact(acc.value().num(), [&] {
            auto dd = acc.value().den();
            for (const auto& [p, m] : exact_den)
                dd[p] += m;
            return dd;
        }());
        return SortedElem(target, new_bounds, std::move(with_exact));
    }

private:
    VarLayout layout_;
    std::map<int, long> bounds_;
    RatFunc value_;

    static void check_compatible(const SortedElem& a, const SortedElem& b)
    {
        if (a.layout_ != b.layout_)
            throw input_error("sorted elements over different layouts");
    }

    static std::map<int, long> merge_bounds(const std::map<int, long>& a,
                                            const std::map<int, long>& b)
    {
        std::map<int, long> r = a;
        for (const auto& [c, v] : b) {
            auto it = r.find(c);
            r[c] = it == r.end() ? v : std::min(it->second, v);
        }
        return r;
    }

    static RatFunc remap_vars(const RatFunc& f, const std::vector<int>& var_map)
    {
        int n = f.n_vars();
        Poly p(n);
        for (const auto& [e, c] : f.num().terms) {
            Exponents ne(n, 0);
            for (int v = 0; v < n; ++v)
                ne[var_map[v]] = e[v];
            p.add_term(ne, c);
        }
        std::map<DivisorPair, int> den;
        Rational sign_fix = 1;
        for (const auto& [pr, m] : f.den()) {
            int a = var_map[pr.first], b = var_map[pr.second];
            if (a < b) {
                den[{a, b}] += m;
            } else {
                den[{b, a}] += m;
                if (m % 2 == 1)
                    sign_fix = -sign_fix;
            }
        }
        return RatFunc(p.scaled(sign_fix), std::move(den));
    }

    void truncate_in_place()
    {
        if (bounds_.empty() || value_.is_zero())
            return;
        Poly kept(value_.n_vars());
        bool dropped = false;
        for (const auto& [e, c] : value_.num().terms) {
            bool keep = true;
            for (const auto& [cls, bound] : bounds_)
                if (class_degree(e, cls) > bound) {
                    keep = false;
                    break;
                }
            if (keep)
                kept.add_term(e, c);
            else
                dropped = true;
        }
        if (dropped)
            value_ = RatFunc(std::move(kept), value_.den());
    }
};

// ---------------------------------------------------------------------------
// TruncTensor: order-N truncation of an element of
//   (M(m_1) x ... x M(m_n))  completed-tensor  M(n).
// Child sorts carry truncation class 1, the outer sort class 0.
// ---------------------------------------------------------------------------

class TruncTensor {
public:
    static constexpr int kOuterClass = 0;
    static constexpr int kInnerClass = 1;

    TruncTensor() = default;

    TruncTensor(std::vector<int> partition, long order, SortedElem elem)
        : partition_(std::move(partition)), order_(order), elem_(std::move(elem))
    {
        if (elem_.layout() != standard_layout(partition_))
            throw input_error("TruncTensor layout mismatch");
    }

    static VarLayout standard_layout(const std::vector<int>& partition)
    {
        VarLayout lay;
        for (size_t j = 0; j < partition.size(); ++j)
            lay.sorts.push_back(Sort{{static_cast<int>(j) + 1}, kInnerClass, partition[j]});
        lay.sorts.push_back(Sort{{}, kOuterClass, static_cast<int>(partition.size())});
        return lay;
    }

    static std::map<int, long> standard_bounds(long order)
    {
        return {{kInnerClass, order}};
    }

    static TruncTensor zero(const std::vector<int>& partition, long order)
    {
        return TruncTensor(partition, order,
                           SortedElem::zero(standard_layout(partition), standard_bounds(order)));
    }

    static TruncTensor one(const std::vector<int>& partition, long order)
    {
        auto lay = standard_layout(partition);
        RatFunc v = RatFunc::one(lay.total_vars());
        return TruncTensor(partition, order, SortedElem(lay, standard_bounds(order), v));
    }

    // f_1 x ... x f_n  tensor  g as one element; inner factor j lives in
    // the block-j variables, g in the outer variables.
    static TruncTensor from_factors(const std::vector<int>& partition, long order,
                                    const std::vector<RatFunc>& inner, const RatFunc& outer)
    {
        if (inner.size() != partition.size())
            throw input_error("one inner factor per block required");
        TruncTensor r = one(partition, order);
        for (size_t j = 0; j < inner.size(); ++j)
            r = r * embed_inner(partition, order, static_cast<int>(j), inner[j]);
        return r * embed_outer(partition, order, outer);
    }

    static TruncTensor embed_inner(const std::vector<int>& partition, long order, int block,
                                   const RatFunc& f)
    {
        if (block < 0 || block >= static_cast<int>(partition.size()))
            throw input_error("block index out of range");
        if (f.n_vars() != partition[block])
            throw input_error("inner factor over wrong variable count");
        auto lay = standard_layout(partition);
        int off = lay.sort_offset(block);
        return TruncTensor(partition, order,
                           SortedElem(lay, standard_bounds(order), shift_vars(f, off, lay.total_vars())));
    }

    static TruncTensor embed_outer(const std::vector<int>& partition, long order, const RatFunc& g)
    {
        if (g.n_vars() != static_cast<int>(partition.size()))
            throw input_error("outer factor over wrong variable count");
        auto lay = standard_layout(partition);
        int off = lay.sort_offset(static_cast<int>(partition.size()));
        return TruncTensor(partition, order,
                           SortedElem(lay, standard_bounds(order), shift_vars(g, off, lay.total_vars())));
    }

    const std::vector<int>& partition() const { return partition_; }
    long order() const { return order_; }
    const SortedElem& elem() const { return elem_; }
    bool is_zero() const { return elem_.is_zero(); }

    int n_blocks() const { return static_cast<int>(partition_.size()); }
    int inner_vars() const { return std::accumulate(partition_.begin(), partition_.end(), 0); }
    int total_vars() const { return inner_vars() + n_blocks(); }

    friend TruncTensor operator+(const TruncTensor& a, const TruncTensor& b)
    {
        check_partition(a, b);
        return TruncTensor(a.partition_, std::min(a.order_, b.order_), a.elem_ + b.elem_);
    }

    friend TruncTensor operator-(const TruncTensor& a, const TruncTensor& b)
    {
        check_partition(a, b);
        return TruncTensor(a.partition_, std::min(a.order_, b.order_), a.elem_ - b.elem_);
    }

    friend TruncTensor operator*(const TruncTensor& a, const TruncTensor& b)
    {
        check_partition(a, b);
        return TruncTensor(a.partition_, std::min(a.order_, b.order_), a.elem_ * b.elem_);
    }

    TruncTensor operator-() const { return TruncTensor(partition_, order_, -elem_); }

    TruncTensor scaled(const Rational& c) const
    {
        return TruncTensor(partition_, order_, elem_.scaled(c));
    }

    friend bool operator==(const TruncTensor& a, const TruncTensor& b)
    {
        return a.partition_ == b.partition_ && a.elem_ == b.elem_;
    }

    TruncTensor truncate(long new_order) const
    {
        long o = std::min(order_, new_order);
        return TruncTensor(partition_, o, elem_.truncated(standard_bounds(o)));
    }

    // Partial derivative by a t-variable (block, pos) or by an outer z_i.
    TruncTensor partial_inner(int block, int pos) const
    {
        int v = elem_.layout().sort_offset(block) + pos;
        return TruncTensor(partition_, order_, elem_.partial(v));
    }

    TruncTensor partial_outer(int i) const
    {
        int v = elem_.layout().sort_offset(n_blocks()) + i;
        return TruncTensor(partition_, order_, elem_.partial(v));
    }

    // Sets all t-variables to zero: the counit in the inner direction.
    // Only valid when no inner denominators are present.
    RatFunc counit_inner() const
    {
        SortedElem e = elem_;
        for (int j = n_blocks(); j-- > 0;)
            e = e.with_sort_set_zero({j + 1});
        return e.value();
    }

private:
    std::vector<int> partition_;
    long order_ = 0;
    SortedElem elem_;

    static void check_partition(const TruncTensor& a, const TruncTensor& b)
    {
        if (a.partition_ != b.partition_)
            throw input_error("partition mismatch");
    }

    static RatFunc shift_vars(const RatFunc& f, int offset, int n_total)
    {
        Poly p(n_total);
        for (const auto& [e, c] : f.num().terms) {
            Exponents ne(n_total, 0);
            for (int v = 0; v < f.n_vars(); ++v)
                ne[offset + v] = e[v];
            p.add_term(ne, c);
        }
        std::map<DivisorPair, int> den;
        for (const auto& [pr, m] : f.den())
            den[{pr.first + offset, pr.second + offset}] = m;
        return RatFunc(std::move(p), std::move(den));
    }
};

// ---------------------------------------------------------------------------
// Structure-map operations.
// ---------------------------------------------------------------------------

// Expansion of (t_{ij} + (z_i - z_{i'}) - t_{i'j'})^{-1} at order N:
//   sum_{m=0..N} (-1)^m (t_{ij} - t_{i'j'})^m (z_i - z_{i'})^{-m-1}.
// Blocks are 0-based; i != i' is required (inside one block the inverse
// stays rational and needs no expansion).
inline TruncTensor expand_inverse(const std::vector<int>& partition, int i, int j, int i2,
                                  int j2, long order)
{
    if (i == i2)
        throw domain_error("no expansion needed: indices lie in one block");
    int nb = static_cast<int>(partition.size());
    if (i < 0 || i >= nb || i2 < 0 || i2 >= nb)
        throw input_error("block index out of range");
    if (j < 0 || j >= partition[i] || j2 < 0 || j2 >= partition[i2])
        throw input_error("position index out of range");
    if (order < 0)
        throw input_error("order must be >= 0");
    auto lay = TruncTensor::standard_layout(partition);
    int nt = lay.total_vars();
    int tv = lay.sort_offset(i) + j;
    int tv2 = lay.sort_offset(i2) + j2;
    int zv = lay.sort_offset(nb) + i;
    int zv2 = lay.sort_offset(nb) + i2;
    Poly dt = Poly::variable(nt, tv) - Poly::variable(nt, tv2);
    Poly dz = Poly::variable(nt, zv) - Poly::variable(nt, zv2);
    Poly series(nt);
    Poly dt_pow = Poly::constant(nt, 1);
    for (long m = 0; m <= order; ++m) {
        series += (dt_pow * dz.pow(order - m)).scaled(m % 2 == 0 ? 1 : -1);
        dt_pow *= dt;
    }
    std::map<DivisorPair, int> den;
    den[make_pair_sorted(zv, zv2)] = static_cast<int>(order) + 1;
    if (zv > zv2 && order % 2 == 0)
        series = -series; // (z_i - z_{i'})^{-(order+1)} against the sorted divisor
    return TruncTensor(partition, order,
                       SortedElem(lay, TruncTensor::standard_bounds(order), RatFunc(series, den)));
}

// The co-operad structure map at truncation order N: substitutes
// z_{ij} = t_{ij} + z_i, keeps intra-block differences rational and expands
// cross-block inverses. A graded ring homomorphism; degree is preserved
// summand-wise.
inline TruncTensor cocompose(const RatFunc& f, const std::vector<int>& partition, long order)
{
    long total = std::accumulate(partition.begin(), partition.end(), 0L);
    if (total != f.n_vars())
        throw input_error("partition does not sum to the variable count");
    if (order < 0)
        throw input_error("order must be >= 0");
    VarLayout src;
    src.sorts.push_back(Sort{{}, 0, f.n_vars()});
    SortedElem start(src, {}, f);
    std::vector<SortLabel> child_labels;
    for (size_t j = 0; j < partition.size(); ++j)
        child_labels.push_back({static_cast<int>(j) + 1});
    SortedElem out = start.expand_sort({}, partition, child_labels, TruncTensor::kInnerClass,
                                       TruncTensor::kOuterClass, order)
                         .canonical();
    return TruncTensor(partition, order, std::move(out));
}

// Co-augmentation: re-indexes an element of M(n-i) into chosen slots of
// M(n); `positions` lists the target slot of each old variable and must be
// injective. Grading is preserved.
inline RatFunc coaugment(const RatFunc& f, const std::vector<int>& positions, int n_target)
{
    if (static_cast<int>(positions.size()) != f.n_vars())
        throw input_error("one position per variable required");
    std::vector<bool> used(n_target, false);
    std::vector<RatFunc> images;
    images.reserve(positions.size());
    for (int p : positions) {
        if (p < 0 || p >= n_target || used[p])
            throw input_error("positions must be injective into the target slots");
        used[p] = true;
        images.push_back(RatFunc::var(n_target, p));
    }
    return f.subst(images, n_target);
}

} // namespace treealg
