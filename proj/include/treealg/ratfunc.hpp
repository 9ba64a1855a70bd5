#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "treealg/rational.hpp"

namespace treealg {

// Exponent vector of a monomial: fixed-capacity, trivially copyable, with
// a lexicographic order that compiles to flat integer compares. Sixteen
// variables cover every configuration space handled here; the constructor
// rejects more.
class Exponents {
public:
    static constexpr int kMaxVars = 16;

    Exponents() = default;

    explicit Exponents(int n, int fill = 0) : n_(check_size(n))
    {
        for (int i = 0; i < n; ++i)
            v_[i] = static_cast<uint16_t>(fill);
    }

    Exponents(std::initializer_list<int> init) : n_(check_size(static_cast<int>(init.size())))
    {
        int i = 0;
        for (int x : init)
            v_[i++] = static_cast<uint16_t>(x);
    }

    template <class It>
    Exponents(It first, It last)
    {
        for (It it = first; it != last; ++it)
            push_back(static_cast<int>(*it));
    }

    uint16_t& operator[](int i) { return v_[i]; }
    uint16_t operator[](int i) const { return v_[i]; }

    int size() const { return n_; }
    void reserve(size_t) {}

    void push_back(int x)
    {
        check_size(n_ + 1);
        v_[n_++] = static_cast<uint16_t>(x);
    }

    const uint16_t* begin() const { return v_.data(); }
    const uint16_t* end() const { return v_.data() + n_; }

    friend bool operator==(const Exponents& a, const Exponents& b)
    {
        return a.n_ == b.n_ && a.v_ == b.v_;
    }

    friend bool operator<(const Exponents& a, const Exponents& b)
    {
        if (a.v_ != b.v_)
            return a.v_ < b.v_;
        return a.n_ < b.n_;
    }

private:
    static int check_size(int n)
    {
        if (n < 0 || n > kMaxVars)
            throw input_error("exponent vector supports at most 16 variables");
        return n;
    }

    std::array<uint16_t, kMaxVars> v_{};
    int n_ = 0;
};

// Unordered pair {i,j} of variable indices stored with i < j. The stored
// order fixes the sign of the divisor z_i - z_j once and for all.
using DivisorPair = std::pair<int, int>;

inline DivisorPair make_pair_sorted(int i, int j)
{
    if (i == j)
        throw input_error("divisor pair needs distinct indices");
    return i < j ? DivisorPair{i, j} : DivisorPair{j, i};
}

// ---------------------------------------------------------------------------
// Sparse multivariate polynomial with exact rational coefficients.
// ---------------------------------------------------------------------------

struct Poly {
    int n = 0;
    std::map<Exponents, Rational> terms; // nonzero coefficients only

    Poly() = default;
    explicit Poly(int n_vars) : n(n_vars) {}

    static Poly constant(int n_vars, const Rational& c)
    {
        Poly p(n_vars);
        if (c != 0)
            p.terms.emplace(Exponents(n_vars, 0), c);
        return p;
    }

    static Poly variable(int n_vars, int i)
    {
        if (i < 0 || i >= n_vars)
            throw input_error("variable index out of range");
        Poly p(n_vars);
        Exponents e(n_vars, 0);
        e[i] = 1;
        p.terms.emplace(std::move(e), Rational(1));
        return p;
    }

    bool is_zero() const { return terms.empty(); }

    void add_term(const Exponents& e, const Rational& c)
    {
        if (c == 0)
            return;
        auto it = terms.lower_bound(e);
        if (it != terms.end() && it->first == e) {
            it->second += c;
            if (it->second == 0)
                terms.erase(it);
        } else {
            terms.emplace_hint(it, e, c);
        }
    }

    Poly& operator+=(const Poly& other)
    {
        for (const auto& [e, c] : other.terms)
            add_term(e, c);
        return *this;
    }

    friend Poly operator+(Poly a, const Poly& b) { return a += b; }

    Poly operator-() const
    {
        Poly r(n);
        for (const auto& [e, c] : terms)
            r.terms.emplace(e, -c);
        return r;
    }

    friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

    friend Poly operator*(const Poly& a, const Poly& b)
    {
        Poly r(a.n);
        for (const auto& [ea, ca] : a.terms)
            for (const auto& [eb, cb] : b.terms) {
                Exponents e(a.n);
                for (int v = 0; v < a.n; ++v)
                    e[v] = ea[v] + eb[v];
                r.add_term(e, ca * cb);
            }
        return r;
    }

    Poly& operator*=(const Poly& other) { return *this = *this * other; }

    Poly scaled(const Rational& c) const
    {
        Poly r(n);
        if (c == 0)
            return r;
        for (const auto& [e, k] : terms)
            r.terms.emplace(e, k * c);
        return r;
    }

    friend bool operator==(const Poly& a, const Poly& b)
    {
        return a.n == b.n && a.terms == b.terms;
    }

    Poly pow(long e) const
    {
        if (e < 0)
            throw input_error("negative polynomial power");
        Poly r = Poly::constant(n, 1), b = *this;
        while (e > 0) {
            if (e & 1)
                r *= b;
            b *= b;
            e >>= 1;
        }
        return r;
    }

    Poly partial(int i) const
    {
        Poly r(n);
        for (const auto& [e, c] : terms) {
            if (e[i] == 0)
                continue;
            Exponents d = e;
            d[i] -= 1;
            r.add_term(d, c * e[i]);
        }
        return r;
    }

    static long total_degree(const Exponents& e)
    {
        long d = 0;
        for (int v : e)
            d += v;
        return d;
    }

    // Substitutes images[v] for variable v; images live in n_target variables.
    Poly subst(const std::vector<Poly>& images, int n_target) const
    {
        Poly r(n_target);
        for (const auto& [e, c] : terms) {
            Poly m = Poly::constant(n_target, c);
            for (int v = 0; v < n; ++v)
                if (e[v] > 0)
                    m *= images[v].pow(e[v]);
            r += m;
        }
        return r;
    }

    Complex eval(const std::vector<Complex>& point) const
    {
        Complex sum = 0.0;
        for (const auto& [e, c] : terms) {
            Complex m = to_double(c);
            for (int v = 0; v < n; ++v)
                for (int k = 0; k < e[v]; ++k)
                    m *= point[v];
            sum += m;
        }
        return sum;
    }

    // Exact division by (z_i - z_j), i != j. Returns the quotient when the
    // remainder vanishes, nothing otherwise. Synthetic division in z_i with
    // the remainder given by the substitution z_i -> z_j.
    std::optional<Poly> divide_diag(int i, int j) const
    {
        // Cheap failure path: the remainder is the substitution z_i -> z_j,
        // computable without the quotient.
        {
            std::map<Exponents, Rational> rem;
            for (const auto& [e, c] : terms) {
                Exponents m = e;
                m[j] += m[i];
                m[i] = 0;
                auto it = rem.lower_bound(m);
                if (it != rem.end() && it->first == m) {
                    it->second += c;
                    if (it->second == 0)
                        rem.erase(it);
                } else {
                    rem.emplace_hint(it, std::move(m), c);
                }
            }
            if (!rem.empty())
                return std::nullopt;
        }
        // Coefficients of powers of z_i.
        std::map<int, Poly> by_deg;
        int dmax = 0;
        for (const auto& [e, c] : terms) {
            int k = e[i];
            dmax = std::max(dmax, k);
            Exponents rest = e;
            rest[i] = 0;
            auto it = by_deg.find(k);
            if (it == by_deg.end())
                it = by_deg.emplace(k, Poly(n)).first;
            it->second.add_term(rest, c);
        }
        auto coeff = [&](int k) -> Poly {
            auto it = by_deg.find(k);
            return it == by_deg.end() ? Poly(n) : it->second;
        };
        Poly zj = Poly::variable(n, j);
        // P = sum_k c_k z_i^k = Q (z_i - z_j) + R with q_{k-1} = c_k + z_j q_k.
        Poly quotient(n);
        Poly carry(n); // q_k while descending
        for (int k = dmax; k >= 1; --k) {
            carry = coeff(k) + zj * carry;
            for (const auto& [e, c] : carry.terms) {
                Exponents full = e;
                full[i] += k - 1;
                quotient.add_term(full, c);
            }
        }
        Poly remainder = coeff(0) + zj * carry;
        if (!remainder.is_zero())
            return std::nullopt;
        return quotient;
    }
};

// ---------------------------------------------------------------------------
// RatFunc: an element of the coefficient ring of ordered configuration
// space -- a polynomial with exact rational coefficients divided by a
// product of diagonal divisors (z_i - z_j)^m.
//
// Canonical form: for every pair with positive denominator exponent the
// numerator is not divisible by that divisor, and zero has an empty
// numerator and no denominators. Equality is structural equality of
// canonical forms. Values are immutable after construction.
// ---------------------------------------------------------------------------

class RatFunc {
public:
    RatFunc() = default;
    explicit RatFunc(int n_vars) : n_(n_vars), num_(n_vars) {}

    RatFunc(Poly num, std::map<DivisorPair, int> den)
        : n_(num.n), num_(std::move(num)), den_(std::move(den))
    {
        validate_pairs();
        normalize();
    }

    static RatFunc zero(int n_vars) { return RatFunc(n_vars); }

    static RatFunc one(int n_vars) { return constant(n_vars, 1); }

    static RatFunc constant(int n_vars, const Rational& c)
    {
        return RatFunc(Poly::constant(n_vars, c), {});
    }

    static RatFunc var(int n_vars, int i)
    {
        return RatFunc(Poly::variable(n_vars, i), {});
    }

    // (z_i - z_j) as a polynomial; the stored sign convention is i < j.
    static RatFunc diag(int n_vars, int i, int j)
    {
        Poly p = Poly::variable(n_vars, i) - Poly::variable(n_vars, j);
        return RatFunc(std::move(p), {});
    }

    // (z_i - z_j)^{-m}, canonical sign: for i > j this is (-1)^m (z_j - z_i)^{-m}.
    static RatFunc diag_inverse(int n_vars, int i, int j, int m = 1)
    {
        if (m < 0)
            throw input_error("diag_inverse needs m >= 0");
        auto pair = make_pair_sorted(i, j);
        Rational sign = (i < j || m % 2 == 0) ? 1 : -1;
        std::map<DivisorPair, int> den;
        if (m > 0)
            den.emplace(pair, m);
        return RatFunc(Poly::constant(n_vars, sign), std::move(den));
    }

    int n_vars() const { return n_; }
    const Poly& num() const { return num_; }
    const std::map<DivisorPair, int>& den() const { return den_; }

    bool is_zero() const { return num_.is_zero(); }

    bool is_constant() const
    {
        if (is_zero())
            return true;
        return den_.empty() && num_.terms.size() == 1 &&
               Poly::total_degree(num_.terms.begin()->first) == 0;
    }

    // The constant value; input must be constant.
    Rational constant_value() const
    {
        if (is_zero())
            return Rational(0);
        if (!is_constant())
            throw domain_error("RatFunc is not constant");
        return num_.terms.begin()->second;
    }

    long den_degree() const
    {
        long d = 0;
        for (const auto& [p, m] : den_)
            d += m;
        return d;
    }

    friend bool operator==(const RatFunc& a, const RatFunc& b)
    {
        return a.n_ == b.n_ && a.den_ == b.den_ && a.num_ == b.num_;
    }

    friend RatFunc operator+(const RatFunc& a, const RatFunc& b)
    {
        check_same_vars(a, b);
        std::map<DivisorPair, int> den;
        for (const auto& [p, m] : a.den_)
            den[p] = m;
        for (const auto& [p, m] : b.den_)
            den[p] = std::max(den.count(p) ? den[p] : 0, m);
        Poly lift_a = a.num_ * cofactor(a.n_, den, a.den_);
        Poly lift_b = b.num_ * cofactor(b.n_, den, b.den_);
        return RatFunc(lift_a + lift_b, std::move(den));
    }

    friend RatFunc operator-(const RatFunc& a, const RatFunc& b) { return a + (-b); }

    RatFunc operator-() const
    {
        RatFunc r = *this;
        r.num_ = -r.num_;
        return r;
    }

    friend RatFunc operator*(const RatFunc& a, const RatFunc& b)
    {
        check_same_vars(a, b);
        if (a.is_zero() || b.is_zero())
            return RatFunc(a.n_);
        std::map<DivisorPair, int> den = a.den_;
        for (const auto& [p, m] : b.den_)
            den[p] += m;
        return RatFunc(a.num_ * b.num_, std::move(den));
    }

    RatFunc scaled(const Rational& c) const
    {
        if (c == 0)
            return RatFunc(n_);
        RatFunc r = *this;
        r.num_ = r.num_.scaled(c);
        return r;
    }

    RatFunc& operator+=(const RatFunc& other) { return *this = *this + other; }
    RatFunc& operator-=(const RatFunc& other) { return *this = *this - other; }
    RatFunc& operator*=(const RatFunc& other) { return *this = *this * other; }

    // Exact partial derivative; lowers the degree of homogeneous input by one.
    RatFunc partial(int i) const
    {
        if (i < 0 || i >= n_)
            throw input_error("partial: variable index out of range");
        RatFunc result(RatFunc(num_.partial(i), den_));
        for (const auto& [p, m] : den_) {
            int sign = (p.first == i) ? 1 : (p.second == i ? -1 : 0);
            if (sign == 0)
                continue;
            std::map<DivisorPair, int> d = den_;
            d[p] += 1;
            result += RatFunc(num_.scaled(Rational(-sign * m)), std::move(d));
        }
        return result;
    }

    // Sum_i z_i d/dz_i, the Euler vector field.
    RatFunc euler_apply() const
    {
        RatFunc r(n_);
        for (int i = 0; i < n_; ++i)
            r += RatFunc::var(n_, i) * partial(i);
        return r;
    }

    // Grading degree k (f(tz) = t^k f(z)) found via the Euler operator:
    // returns k with euler_apply() == k * f, nothing if f is inhomogeneous.
    // Zero input has no well-defined degree.
    std::optional<Rational> euler_degree() const
    {
        if (is_zero())
            throw domain_error("euler_degree of zero is undefined");
        RatFunc ef = euler_apply();
        const auto& lead = num_.terms.begin()->first;
        Rational k = 0;
        if (!ef.is_zero() && ef.den_ == den_) {
            auto it = ef.num_.terms.find(lead);
            if (it != ef.num_.terms.end())
                k = it->second / num_.terms.begin()->second;
        }
        if (ef == scaled(k))
            return k;
        return std::nullopt;
    }

    // Structural grading degree, no derivative: all numerator monomials must
    // share one total degree.
    std::optional<long> grading_degree() const
    {
        if (is_zero())
            return std::nullopt;
        long d = Poly::total_degree(num_.terms.begin()->first);
        for (const auto& [e, c] : num_.terms)
            if (Poly::total_degree(e) != d)
                return std::nullopt;
        return d - den_degree();
    }

    bool is_homogeneous() const { return is_zero() || grading_degree().has_value(); }

    // Decomposition into homogeneous components, keyed by degree.
    std::map<long, RatFunc> components() const
    {
        std::map<long, Poly> pieces;
        for (const auto& [e, c] : num_.terms) {
            long d = Poly::total_degree(e);
            auto it = pieces.find(d);
            if (it == pieces.end())
                it = pieces.emplace(d, Poly(n_)).first;
            it->second.add_term(e, c);
        }
        std::map<long, RatFunc> result;
        long dden = den_degree();
        for (auto& [d, p] : pieces)
            result.emplace(d - dden, RatFunc(std::move(p), den_));
        return result;
    }

    // Composite f(images[0], ..., images[n-1]) over n_target variables.
    // Images must be polynomials; each substituted divisor must stay a
    // (scaled) diagonal divisor or a nonzero constant.
    RatFunc subst(const std::vector<RatFunc>& images, int n_target) const
    {
        if (static_cast<int>(images.size()) != n_)
            throw input_error("subst: wrong number of images");
        std::vector<Poly> polys;
        polys.reserve(images.size());
        for (const auto& f : images) {
            if (!f.den_.empty())
                throw substitution_error("subst images must be polynomials");
            if (f.n_vars() != n_target)
                throw input_error("subst image over wrong variable count");
            polys.push_back(f.num_);
        }
        Poly new_num = num_.subst(polys, n_target);
        std::map<DivisorPair, int> new_den;
        Rational scale = 1;
        for (const auto& [p, m] : den_) {
            Poly h = polys[p.first] - polys[p.second];
            if (h.is_zero())
                throw substitution_error("substitution collapses a divisor to zero");
            if (h.terms.size() == 1 && Poly::total_degree(h.terms.begin()->first) == 0) {
                scale *= pow_rational(h.terms.begin()->second, -static_cast<long>(m));
                continue;
            }
            auto linear = as_scaled_diag(h, n_target);
            if (!linear)
                throw substitution_error("substituted divisor leaves the diagonal class");
            auto [pair, c] = *linear;
            scale *= pow_rational(c, -static_cast<long>(m));
            new_den[pair] += m;
        }
        return RatFunc(new_num.scaled(scale), std::move(new_den));
    }

    // Evaluation at a point with pairwise distinct coordinates. Monomials
    // are evaluated in double-precision complex arithmetic with the exact
    // rational coefficient converted last.
    Complex eval(const std::vector<Complex>& point) const
    {
        if (static_cast<int>(point.size()) != n_)
            throw input_error("eval: wrong point dimension");
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j)
                if (point[i] == point[j])
                    throw pole_error("eval at coincident coordinates");
        Complex value = num_.eval(point);
        for (const auto& [p, m] : den_) {
            Complex d = point[p.first] - point[p.second];
            for (int k = 0; k < m; ++k)
                value /= d;
        }
        return value;
    }

    // Units of the ring are c * prod (z_i - z_j)^{a_ij}, a_ij in Z.
    bool is_unit() const { return static_cast<bool>(unit_parts()); }

    RatFunc unit_inverse() const
    {
        auto parts = unit_parts();
        if (!parts)
            throw domain_error("RatFunc is not a unit");
        auto [c, factors] = *parts;
        // Inverse: (1/c) * prod (z_i-z_j)^{den - factors}.
        Poly p = Poly::constant(n_, 1 / c);
        std::map<DivisorPair, int> new_den;
        std::map<DivisorPair, int> exps = den_;
        for (const auto& [pair, a] : factors)
            exps[pair] -= a;
        for (const auto& [pair, e] : exps) {
            if (e > 0)
                p *= (Poly::variable(n_, pair.first) - Poly::variable(n_, pair.second)).pow(e);
        }
        for (const auto& [pair, e] : factors) {
            int net = e - (den_.count(pair) ? den_.at(pair) : 0);
            if (net > 0)
                new_den[pair] = net;
        }
        return RatFunc(std::move(p), std::move(new_den));
    }

    RatFunc pow(long e) const
    {
        if (e < 0)
            return unit_inverse().pow(-e);
        RatFunc r = RatFunc::one(n_), b = *this;
        while (e > 0) {
            if (e & 1)
                r *= b;
            b *= b;
            e >>= 1;
        }
        return r;
    }

private:
    int n_ = 0;
    Poly num_;
    std::map<DivisorPair, int> den_;

    void validate_pairs() const
    {
        for (const auto& [p, m] : den_) {
            if (p.first < 0 || p.second >= n_ || p.first >= p.second)
                throw input_error("bad divisor pair");
            if (m < 0)
                throw input_error("negative divisor exponent");
        }
    }

    static void check_same_vars(const RatFunc& a, const RatFunc& b)
    {
        if (a.n_ != b.n_)
            throw input_error("operands over different variable counts");
    }

    // prod over target pairs of (z_i - z_j)^(target[p] - have[p]).
    static Poly cofactor(int n, const std::map<DivisorPair, int>& target,
                         const std::map<DivisorPair, int>& have)
    {
        Poly r = Poly::constant(n, 1);
        for (const auto& [p, m] : target) {
            int k = m - (have.count(p) ? have.at(p) : 0);
            if (k > 0)
                r *= (Poly::variable(n, p.first) - Poly::variable(n, p.second)).pow(k);
        }
        return r;
    }

    // Recognizes c*(w_a - w_b); returns the sorted pair and the coefficient
    // of the sorted orientation.
    static std::optional<std::pair<DivisorPair, Rational>> as_scaled_diag(const Poly& h, int n)
    {
        if (h.terms.size() != 2)
            return std::nullopt;
        auto it = h.terms.begin();
        auto jt = std::next(it);
        const auto& [e1, c1] = *it;
        const auto& [e2, c2] = *jt;
        if (c1 != -c2)
            return std::nullopt;
        auto var_of = [&](const Exponents& e) -> int {
            int found = -1;
            for (int v = 0; v < n; ++v) {
                if (e[v] == 1 && found < 0)
                    found = v;
                else if (e[v] != 0)
                    return -2;
            }
            return found;
        };
        int a = var_of(e1), b = var_of(e2);
        if (a < 0 || b < 0)
            return std::nullopt;
        // h = c1*w_a + c2*w_b = c1*(w_a - w_b).
        if (a < b)
            return std::make_pair(DivisorPair{a, b}, c1);
        return std::make_pair(DivisorPair{b, a}, c2);
    }

    // c and exponents with num == c * prod (z_i-z_j)^{a_ij}, if of that shape.
    std::optional<std::pair<Rational, std::map<DivisorPair, int>>> unit_parts() const
    {
        if (num_.is_zero())
            return std::nullopt;
        Poly p = num_;
        std::map<DivisorPair, int> factors;
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j) {
                while (true) {
                    auto q = p.divide_diag(i, j);
                    if (!q)
                        break;
                    p = std::move(*q);
                    factors[{i, j}] += 1;
                }
            }
        if (p.terms.size() != 1 || Poly::total_degree(p.terms.begin()->first) != 0)
            return std::nullopt;
        return std::make_pair(p.terms.begin()->second, std::move(factors));
    }

    // Divisor-wise exact division until the defining invariant holds.
    void normalize()
    {
        if (num_.is_zero()) {
            den_.clear();
            return;
        }
        for (auto it = den_.begin(); it != den_.end();) {
            auto& [pair, m] = *it;
            while (m > 0) {
                auto q = num_.divide_diag(pair.first, pair.second);
                if (!q)
                    break;
                num_ = std::move(*q);
                m -= 1;
            }
            if (m == 0)
                it = den_.erase(it);
            else
                ++it;
        }
    }
};

// A 1-form: n RatFunc coefficients of dz_1, ..., dz_n.
struct OneForm {
    std::vector<RatFunc> components;

    explicit OneForm(int n_vars) : components(n_vars, RatFunc(n_vars)) {}

    int n_vars() const { return static_cast<int>(components.size()); }
};

// The universal differentiation d f = sum_i (df/dz_i) dz_i.
inline OneForm d(const RatFunc& f)
{
    OneForm w(f.n_vars());
    for (int i = 0; i < f.n_vars(); ++i)
        w.components[i] = f.partial(i);
    return w;
}

} // namespace treealg
