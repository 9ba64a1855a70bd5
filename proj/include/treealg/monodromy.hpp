#pragma once

#include <cmath>
#include <random>

#include "treealg/connection.hpp"

namespace treealg {

// ---------------------------------------------------------------------------
// Paths in complex configuration space: piecewise-linear, waypoint list,
// no segment may touch a diagonal. The intersection test treats the float
// coordinates as exact rationals, so it is a decision, not an estimate.
// ---------------------------------------------------------------------------

struct Path {
    std::vector<std::vector<Complex>> points;

    int n_vars() const { return points.empty() ? 0 : static_cast<int>(points[0].size()); }

    bool is_closed() const
    {
        return points.size() >= 2 && points.front() == points.back();
    }

    void validate() const
    {
        if (points.size() < 2)
            throw input_error("path needs at least two waypoints");
        size_t n = points[0].size();
        for (const auto& p : points)
            if (p.size() != n)
                throw input_error("inconsistent waypoint dimension");
        for (size_t k = 0; k + 1 < points.size(); ++k) {
            if (points[k] == points[k + 1])
                throw input_error("consecutive waypoints coincide");
            for (size_t i = 0; i < n; ++i)
                for (size_t j = i + 1; j < n; ++j)
                    if (segment_hits_diagonal(points[k], points[k + 1], i, j))
                        throw pole_error("segment " + std::to_string(k) +
                                         " crosses the diagonal z_" + std::to_string(i + 1) +
                                         " = z_" + std::to_string(j + 1));
        }
    }

    // Exact test for c + s d = 0 with s in [0,1], where c, d are Gaussian
    // rationals built from the double data.
    static bool segment_hits_diagonal(const std::vector<Complex>& p, const std::vector<Complex>& q,
                                      size_t i, size_t j)
    {
        Rational cr = Rational(p[i].real()) - Rational(p[j].real());
        Rational ci = Rational(p[i].imag()) - Rational(p[j].imag());
        Rational dr = Rational(q[i].real()) - Rational(q[j].real()) - cr;
        Rational di = Rational(q[i].imag()) - Rational(q[j].imag()) - ci;
        auto in_range = [](const Rational& s) { return s >= 0 && s <= 1; };
        if (dr == 0 && di == 0)
            return cr == 0 && ci == 0;
        if (dr != 0) {
            Rational s = -cr / dr;
            return ci + s * di == 0 && in_range(s);
        }
        // dr == 0, di != 0: the real part must vanish identically.
        if (cr != 0)
            return false;
        Rational s = -ci / di;
        return in_range(s);
    }
};

// Circle of z_i around z_j, every other coordinate held fixed; radius
// defaults to 1/8 of the minimum distance from z_j to the others.
inline Path loop_around_pair(const std::vector<Complex>& base, int i, int j, int segments = 32,
                             double radius = 0.0, int windings = 1)
{
    int n = static_cast<int>(base.size());
    if (i < 0 || i >= n || j < 0 || j >= n || i == j)
        throw input_error("loop_around_pair: bad indices");
    if (radius <= 0.0) {
        double dmin = std::numeric_limits<double>::infinity();
        for (int k = 0; k < n; ++k)
            if (k != j && k != i)
                dmin = std::min(dmin, std::abs(base[k] - base[j]));
        radius = std::isfinite(dmin) ? dmin / 8.0 : 0.125;
    }
    Path path;
    for (int s = 0; s <= segments * windings; ++s) {
        double theta = 2.0 * M_PI * s / segments;
        std::vector<Complex> pt = base;
        pt[i] = base[j] + std::polar(radius, theta);
        path.points.push_back(std::move(pt));
    }
    // Close exactly.
    path.points.back() = path.points.front();
    return path;
}

// ---------------------------------------------------------------------------
// Parallel transport: integrates Y'(s) = -(sum_i E_i(z(s)) z_i'(s)) Y(s),
// Y(0) = Id, along the path, so the columns of Y are parallel sections of
// nabla = d + sum E_i dz_i. Dormand-Prince 5(4) embedded pair with local
// error control; step rejection on error, hard failure when the step
// underflows or the state drifts inside the pole guard distance.
// ---------------------------------------------------------------------------

struct TransportOptions {
    double tol = 1e-12;
    double pole_guard = 1e-6; // minimum distance to any diagonal
    double h_init = 0.05;
    long max_steps = 2000000;
};

struct MonodromyResult {
    Matrix<Complex> matrix;
    long step_count = 0;
    double error_estimate = 0.0;
};

namespace detail {

inline Matrix<Complex> eval_rhs(const Connection& e, const std::vector<Complex>& z,
                                const std::vector<Complex>& dz, double pole_guard)
{
    int n = e.n_vars;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(z[i] - z[j]) < pole_guard)
                throw pole_error("transport state within the pole guard of a diagonal");
    Matrix<Complex> a(e.rank, e.rank, Complex(0));
    for (int i = 0; i < n; ++i) {
        if (dz[i] == Complex(0))
            continue;
        for (int r = 0; r < e.rank; ++r)
            for (int c = 0; c < e.rank; ++c) {
                const RatFunc& f = e.mats[i](r, c);
                if (!f.is_zero())
                    a(r, c) += f.eval(z) * dz[i];
            }
    }
    for (int r = 0; r < e.rank; ++r)
        for (int c = 0; c < e.rank; ++c)
            a(r, c) = -a(r, c);
    return a;
}

inline double max_abs(const Matrix<Complex>& m)
{
    double v = 0;
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            v = std::max(v, std::abs(m(r, c)));
    return v;
}

} // namespace detail

inline MonodromyResult transport(const Connection& e, const Path& path,
                                 const TransportOptions& opts = {})
{
    e.validate();
    path.validate();
    if (path.n_vars() != e.n_vars)
        throw input_error("path dimension does not match the connection");
    if (opts.tol <= 0)
        throw input_error("tolerance must be positive");

    // Dormand-Prince 5(4) tableau.
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    MonodromyResult result;
    result.matrix = Matrix<Complex>::identity(e.rank, Complex(0), Complex(1));

    for (size_t seg = 0; seg + 1 < path.points.size(); ++seg) {
        const auto& p = path.points[seg];
        const auto& q = path.points[seg + 1];
        std::vector<Complex> dz(e.n_vars);
        for (int i = 0; i < e.n_vars; ++i)
            dz[i] = q[i] - p[i];
        auto at = [&](double s) {
            std::vector<Complex> z(e.n_vars);
            for (int i = 0; i < e.n_vars; ++i)
                z[i] = p[i] + s * dz[i];
            return z;
        };
        auto rhs = [&](double s, const Matrix<Complex>& y) {
            return detail::eval_rhs(e, at(s), dz, opts.pole_guard) * y;
        };
        double s = 0.0, h = std::min(opts.h_init, 1.0);
        while (s < 1.0) {
            h = std::min(h, 1.0 - s);
            if (h < 1e-14)
                throw pole_error("step underflow on segment " + std::to_string(seg));
            const Matrix<Complex>& y = result.matrix;
            Matrix<Complex> k1 = rhs(s, y);
            Matrix<Complex> k2 = rhs(s + c2 * h, y + k1.scaled(a21 * h));
            Matrix<Complex> k3 = rhs(s + c3 * h, y + k1.scaled(a31 * h) + k2.scaled(a32 * h));
            Matrix<Complex> k4 =
                rhs(s + c4 * h, y + k1.scaled(a41 * h) + k2.scaled(a42 * h) + k3.scaled(a43 * h));
            Matrix<Complex> k5 = rhs(s + c5 * h, y + k1.scaled(a51 * h) + k2.scaled(a52 * h) +
                                                     k3.scaled(a53 * h) + k4.scaled(a54 * h));
            Matrix<Complex> k6 =
                rhs(s + h, y + k1.scaled(a61 * h) + k2.scaled(a62 * h) + k3.scaled(a63 * h) +
                               k4.scaled(a64 * h) + k5.scaled(a65 * h));
            Matrix<Complex> y5 = y + (k1.scaled(b1) + k3.scaled(b3) + k4.scaled(b4) +
                                      k5.scaled(b5) + k6.scaled(b6))
                                         .scaled(h);
            Matrix<Complex> k7 = rhs(s + h, y5);
            Matrix<Complex> err_mat = (k1.scaled(e1) + k3.scaled(e3) + k4.scaled(e4) +
                                       k5.scaled(e5) + k6.scaled(e6) + k7.scaled(e7))
                                          .scaled(h);
            double err = detail::max_abs(err_mat);
            double scale = std::max(1.0, detail::max_abs(y5));
            if (err <= opts.tol * scale) {
                result.matrix = std::move(y5);
                result.error_estimate += err;
                s += h;
                ++result.step_count;
                if (result.step_count > opts.max_steps)
                    throw domain_error("transport exceeded the step budget");
                double grow = err > 0 ? 0.9 * std::pow(opts.tol * scale / err, 0.2) : 5.0;
                h *= std::min(5.0, std::max(0.2, grow));
            } else {
                h *= std::max(0.2, 0.9 * std::pow(opts.tol * scale / err, 0.2));
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Residues and pole orders along a diagonal divisor.
// ---------------------------------------------------------------------------

struct ResidueReport {
    RMatrix residue;    // coefficient of (z_i - z_j)^{-1} in E_i, on the divisor
    int max_pole_order = 0;
    bool constant = false; // every residue entry is a constant
};

// Laurent coefficient of order -1 of f along z_i - z_j -> 0, as a function
// of the remaining variables (z_i is substituted by z_j in the result).
inline RatFunc residue_entry(const RatFunc& f, int i, int j, int* pole_order = nullptr)
{
    auto pair = make_pair_sorted(i, j);
    auto it = f.den().find(pair);
    int m = it == f.den().end() ? 0 : it->second;
    if (pole_order)
        *pole_order = m;
    if (m == 0)
        return RatFunc::zero(f.n_vars());
    // c_{-1} = (1/(m-1)!) d^{m-1}/dz_i^{m-1} [ (z_i - z_j)^m f ] at z_i = z_j.
    RatFunc g = f * RatFunc::diag(f.n_vars(), i, j).pow(m);
    Rational fact = 1;
    for (int k = 1; k < m; ++k) {
        g = g.partial(i);
        fact *= k;
    }
    std::vector<RatFunc> images;
    for (int v = 0; v < f.n_vars(); ++v)
        images.push_back(RatFunc::var(f.n_vars(), v == i ? j : v));
    return g.subst(images, f.n_vars()).scaled(1 / fact);
}

inline ResidueReport residue(const Connection& e, int i, int j)
{
    e.validate();
    if (i < 0 || i >= e.n_vars || j < 0 || j >= e.n_vars || i == j)
        throw input_error("residue: bad divisor pair");
    ResidueReport rep;
    rep.residue = rf_zero_matrix(e.n_vars, e.rank, e.rank);
    rep.constant = true;
    for (int r = 0; r < e.rank; ++r)
        for (int c = 0; c < e.rank; ++c) {
            int order = 0;
            rep.residue(r, c) = residue_entry(e.mats[i](r, c), i, j, &order);
            rep.max_pole_order = std::max(rep.max_pole_order, order);
            if (!rep.residue(r, c).is_constant())
                rep.constant = false;
        }
    return rep;
}

// Constant residue as a rational matrix; requires rep.constant.
inline QMatrix residue_matrix(const ResidueReport& rep)
{
    QMatrix m = qmat(rep.residue.rows(), rep.residue.cols());
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            m(r, c) = rep.residue(r, c).constant_value();
    return m;
}

// ---------------------------------------------------------------------------
// Regularity probe: restriction to pseudo-random affine lines z(u) = a + u b
// with exact rational data; reports the pole order at every finite singular
// point and at infinity. The moderate-growth condition itself is not
// tested; this pole-order probe is the implemented surrogate.
// ---------------------------------------------------------------------------

struct UniPoly {
    // Univariate polynomial over Q, dense coefficients c[k] u^k.
    std::vector<Rational> c;

    void trim()
    {
        while (!c.empty() && c.back() == 0)
            c.pop_back();
    }
    bool is_zero() const { return c.empty(); }
    long deg() const { return static_cast<long>(c.size()) - 1; }

    Rational eval(const Rational& u) const
    {
        Rational v = 0;
        for (size_t k = c.size(); k-- > 0;)
            v = v * u + c[k];
        return v;
    }

    // Exact division by (u - r) when the remainder vanishes.
    std::optional<UniPoly> divide_root(const Rational& r) const
    {
        if (is_zero())
            return *this;
        if (eval(r) != 0)
            return std::nullopt;
        UniPoly q;
        q.c.assign(c.size() - 1, Rational(0));
        Rational carry = 0;
        for (size_t k = c.size(); k-- > 1;) {
            carry = c[k] + r * carry;
            q.c[k - 1] = carry;
        }
        q.trim();
        return q;
    }

    friend UniPoly operator*(const UniPoly& a, const UniPoly& b)
    {
        UniPoly r;
        if (a.is_zero() || b.is_zero())
            return r;
        r.c.assign(a.c.size() + b.c.size() - 1, Rational(0));
        for (size_t i = 0; i < a.c.size(); ++i)
            for (size_t j = 0; j < b.c.size(); ++j)
                r.c[i + j] += a.c[i] * b.c[j];
        return r;
    }

    friend UniPoly operator+(const UniPoly& a, const UniPoly& b)
    {
        UniPoly r;
        r.c.assign(std::max(a.c.size(), b.c.size()), Rational(0));
        for (size_t i = 0; i < a.c.size(); ++i)
            r.c[i] += a.c[i];
        for (size_t i = 0; i < b.c.size(); ++i)
            r.c[i] += b.c[i];
        r.trim();
        return r;
    }
};

struct LineRestriction {
    // Entry (r,c) of the restricted 1-form sum_i E_i(z(u)) b_i du as
    // num / prod (u - root)^mult, up to a nonzero constant.
    Matrix<UniPoly> nums{0, 0, UniPoly{}};
    std::map<Rational, int> den; // roots with multiplicity
};

// Exact restriction of the connection 1-form to the line z(u) = a + u b.
inline LineRestriction restrict_to_line(const Connection& e, const std::vector<Rational>& a,
                                        const std::vector<Rational>& b)
{
    e.validate();
    int n = e.n_vars;
    if (static_cast<int>(a.size()) != n || static_cast<int>(b.size()) != n)
        throw input_error("line data dimension mismatch");
    // Common denominator: every divisor that can vanish on the line.
    std::map<DivisorPair, std::pair<Rational, Rational>> lin; // pair -> (c, d): c + d u
    std::map<DivisorPair, int> need;
    for (int i = 0; i < n; ++i)
        for (int r = 0; r < e.rank; ++r)
            for (int c = 0; c < e.rank; ++c)
                for (const auto& [pair, mult] : e.mats[i](r, c).den()) {
                    lin[pair] = {a[pair.first] - a[pair.second], b[pair.first] - b[pair.second]};
                    need[pair] = std::max(need[pair], mult);
                }
    for (const auto& [pair, cd] : lin)
        if (cd.first == 0 && cd.second == 0)
            throw domain_error("line lies inside a diagonal divisor");

    LineRestriction out;
    out.nums = Matrix<UniPoly>(e.rank, e.rank, UniPoly{});
    std::map<Rational, int> roots;
    for (const auto& [pair, mult] : need) {
        const auto& [c0, d0] = lin[pair];
        if (d0 != 0)
            roots[-c0 / d0] += mult;
    }
    out.den = roots;

    for (int i = 0; i < n; ++i) {
        if (b[i] == 0)
            continue;
        for (int r = 0; r < e.rank; ++r)
            for (int c = 0; c < e.rank; ++c) {
                const RatFunc& f = e.mats[i](r, c);
                if (f.is_zero())
                    continue;
                // numerator(u) substituted, times b_i, times the cofactor of
                // the common denominator.
                UniPoly acc;
                for (const auto& [expv, coeff] : f.num().terms) {
                    UniPoly term;
                    term.c = {coeff * b[i]};
                    for (int v = 0; v < n; ++v)
                        for (int k = 0; k < expv[v]; ++k) {
                            UniPoly lin_v;
                            lin_v.c = {a[v], b[v]};
                            lin_v.trim();
                            term = term * lin_v;
                        }
                    acc = acc + term;
                }
                Rational const_scale = 1;
                std::map<Rational, int> f_roots;
                for (const auto& [pair, mult] : f.den()) {
                    const auto& [c0, d0] = lin[pair];
                    if (d0 == 0)
                        const_scale *= pow_rational(c0, -static_cast<long>(mult));
                    else {
                        const_scale *= pow_rational(d0, -static_cast<long>(mult));
                        f_roots[-c0 / d0] += mult;
                    }
                }
                UniPoly cof;
                cof.c = {const_scale};
                for (const auto& [root, mult] : roots) {
                    int have = f_roots.count(root) ? f_roots[root] : 0;
                    for (int k = 0; k < mult - have; ++k) {
                        UniPoly lin_r;
                        lin_r.c = {-root, Rational(1)};
                        cof = cof * lin_r;
                    }
                }
                out.nums(r, c) = out.nums(r, c) + acc * cof;
            }
    }
    return out;
}

struct LineReport {
    std::vector<Rational> a, b;
    std::map<Rational, int> finite_orders; // singular point -> max pole order
    int infinity_order = 0;
    bool pass = true;
};

inline LineReport analyze_line(const Connection& e, const std::vector<Rational>& a,
                               const std::vector<Rational>& b)
{
    LineRestriction lr = restrict_to_line(e, a, b);
    LineReport rep;
    rep.a = a;
    rep.b = b;
    for (int r = 0; r < e.rank; ++r)
        for (int c = 0; c < e.rank; ++c) {
            UniPoly num = lr.nums(r, c);
            if (num.is_zero())
                continue;
            long den_deg = 0;
            for (const auto& [root, mult] : lr.den) {
                UniPoly reduced = num;
                int divisions = 0;
                while (divisions < mult) {
                    auto q = reduced.divide_root(root);
                    if (!q)
                        break;
                    reduced = std::move(*q);
                    ++divisions;
                }
                int order = mult - divisions;
                auto it = rep.finite_orders.find(root);
                if (it == rep.finite_orders.end() || it->second < order)
                    rep.finite_orders[root] = order;
                den_deg += mult;
            }
            // Order at infinity of (num/den) du via u -> 1/u.
            int inf_order = static_cast<int>(2 + num.deg() - den_deg);
            rep.infinity_order = std::max(rep.infinity_order, inf_order);
        }
    for (const auto& [root, order] : rep.finite_orders)
        if (order > 1)
            rep.pass = false;
    if (rep.infinity_order > 1)
        rep.pass = false;
    return rep;
}

struct RegularityReport {
    bool pass = true;
    int max_order = 0;
    std::vector<LineReport> lines;
};

// Probes E on `samples` pseudo-random affine lines (flat input assumed);
// PASS iff every pole order, finite and infinite, is at most one.
inline RegularityReport regularity_probe(const Connection& e, int samples, unsigned long seed)
{
    e.validate();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> coord(-8, 8);
    RegularityReport rep;
    for (int s = 0; s < samples; ++s) {
        std::vector<Rational> a(e.n_vars), b(e.n_vars);
        bool ok = false;
        while (!ok) {
            for (int i = 0; i < e.n_vars; ++i) {
                a[i] = rat(coord(rng), 2);
                b[i] = rat(coord(rng), 2);
            }
            ok = true;
            // Resample lines inside a diagonal or with a degenerate direction.
            bool all_parallel = true;
            for (int i = 0; ok && i < e.n_vars; ++i)
                for (int j = i + 1; ok && j < e.n_vars; ++j) {
                    if (a[i] == a[j] && b[i] == b[j])
                        ok = false;
                    if (b[i] != b[j])
                        all_parallel = false;
                }
            if (ok && all_parallel)
                ok = false; // restriction would be constant in u
        }
        LineReport line = analyze_line(e, a, b);
        for (const auto& [root, order] : line.finite_orders)
            rep.max_order = std::max(rep.max_order, order);
        rep.max_order = std::max(rep.max_order, line.infinity_order);
        if (!line.pass)
            rep.pass = false;
        rep.lines.push_back(std::move(line));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Eigenvalues of small complex matrices: characteristic polynomial by
// Faddeev-LeVerrier, roots by Durand-Kerner iteration.
// ---------------------------------------------------------------------------

inline std::vector<Complex> eigenvalues(const Matrix<Complex>& m)
{
    int n = m.rows();
    auto cp = faddeev_leverrier<Complex>(
        m, Complex(0), Complex(1),
        [](const Complex& v, long k) { return v / static_cast<double>(k); });
    std::vector<Complex> roots(n);
    for (int k = 0; k < n; ++k)
        roots[k] = std::pow(Complex(0.4, 0.9), k + 1);
    for (int iter = 0; iter < 200; ++iter) {
        double shift = 0;
        for (int k = 0; k < n; ++k) {
            Complex p = 0;
            for (int j = 0; j <= n; ++j)
                p = p * roots[k] + cp.coeffs[j];
            Complex q = 1;
            for (int j = 0; j < n; ++j)
                if (j != k)
                    q *= roots[k] - roots[j];
            Complex delta = p / q;
            roots[k] -= delta;
            shift = std::max(shift, std::abs(delta));
        }
        if (shift < 1e-14)
            break;
    }
    return roots;
}

// Matrix exponential by scaling and squaring with a plain Taylor series;
// adequate for the small matrices handled here.
inline Matrix<Complex> matrix_exp(const Matrix<Complex>& m)
{
    double norm = detail::max_abs(m) * m.rows();
    int squarings = 0;
    while (norm > 0.5) {
        norm /= 2;
        ++squarings;
    }
    double scale = std::ldexp(1.0, -squarings);
    Matrix<Complex> x = m.scaled(Complex(scale, 0));
    Matrix<Complex> sum = Matrix<Complex>::identity(m.rows(), Complex(0), Complex(1));
    Matrix<Complex> term = sum;
    for (int k = 1; k <= 24; ++k) {
        term = (term * x).scaled(Complex(1.0 / k, 0));
        sum = sum + term;
    }
    for (int k = 0; k < squarings; ++k)
        sum = sum * sum;
    return sum;
}

// ---------------------------------------------------------------------------
// Local Riemann-Hilbert comparison: for a small loop of z_i around z_j,
// monodromy eigenvalues against exp(-2 pi i sigma) over residue eigenvalues
// sigma. The sign is the calibrated transport constant: with the parallel-
// section convention above, an abelian a dlog(z_i - z_j) connection
// transports to exp(-2 pi i a).
// ---------------------------------------------------------------------------

struct MonodromyResidueReport {
    bool supported = true; // false when the residue is not constant
    MonodromyResult monodromy;
    std::vector<Complex> monodromy_eigenvalues;
    std::vector<Complex> predicted; // exp(-2 pi i sigma)
    double max_mismatch = 0.0;
    // Conjugation-invariant comparison, robust under repeated eigenvalues:
    // characteristic polynomial of the monodromy against that of
    // exp(-2 pi i residue).
    double charpoly_mismatch = 0.0;
};

inline MonodromyResidueReport monodromy_vs_residue(const Connection& e, int i, int j,
                                                   std::vector<Complex> basepoint = {},
                                                   const TransportOptions& opts = {})
{
    ResidueReport res = residue(e, i, j);
    if (basepoint.empty()) {
        basepoint.resize(e.n_vars);
        for (int k = 0; k < e.n_vars; ++k)
            basepoint[k] = Complex(k, 0);
    }
    Path loop = loop_around_pair(basepoint, i, j);
    MonodromyResidueReport rep;
    rep.monodromy = transport(e, loop, opts);
    rep.monodromy_eigenvalues = eigenvalues(rep.monodromy.matrix);
    if (!res.constant) {
        rep.supported = false;
        return rep;
    }
    QMatrix rm = residue_matrix(res);
    Matrix<Complex> rc(rm.rows(), rm.cols(), Complex(0));
    for (int r = 0; r < rm.rows(); ++r)
        for (int c = 0; c < rm.cols(); ++c)
            rc(r, c) = Complex(to_double(rm(r, c)), 0);
    for (Complex sigma : eigenvalues(rc))
        rep.predicted.push_back(std::exp(Complex(0, -2 * M_PI) * sigma));
    {
        Matrix<Complex> expected = matrix_exp(rc.scaled(Complex(0, -2 * M_PI)));
        auto div = [](const Complex& v, long k) { return v / static_cast<double>(k); };
        auto cp_m = faddeev_leverrier<Complex>(rep.monodromy.matrix, Complex(0), Complex(1), div);
        auto cp_e = faddeev_leverrier<Complex>(expected, Complex(0), Complex(1), div);
        for (size_t k = 0; k < cp_m.coeffs.size(); ++k)
            rep.charpoly_mismatch =
                std::max(rep.charpoly_mismatch, std::abs(cp_m.coeffs[k] - cp_e.coeffs[k]));
    }
    // Greedy nearest matching.
    std::vector<bool> used(rep.predicted.size(), false);
    for (Complex ev : rep.monodromy_eigenvalues) {
        double best = std::numeric_limits<double>::infinity();
        int best_k = -1;
        for (size_t k = 0; k < rep.predicted.size(); ++k)
            if (!used[k] && std::abs(ev - rep.predicted[k]) < best) {
                best = std::abs(ev - rep.predicted[k]);
                best_k = static_cast<int>(k);
            }
        if (best_k >= 0)
            used[best_k] = true;
        rep.max_mismatch = std::max(rep.max_mismatch, best);
    }
    return rep;
}

} // namespace treealg
