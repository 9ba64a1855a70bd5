#pragma once

#include <json.hpp>

#include "treealg/axioms.hpp"
#include "treealg/kz.hpp"
#include "treealg/monodromy.hpp"

namespace treealg {

// Stable UTF-8 text formats. Insertion order is preserved so that
// serialize -> parse -> serialize is byte-identical; variable and divisor
// indices are 1-based on the wire.
using Json = nlohmann::ordered_json;

// --------------------------------------------------------------------------
// RatFunc: { "n": int, "num": [[ "p/q", [e1..en] ], ...],
//            "den": [[ i, j, m ], ...] } with i < j.
// --------------------------------------------------------------------------

inline Json to_json(const RatFunc& f)
{
    Json num = Json::array();
    for (const auto& [e, c] : f.num().terms) {
        Json exps = Json::array();
        for (int v : e)
            exps.push_back(v);
        num.push_back(Json::array({to_string(c), exps}));
    }
    Json den = Json::array();
    for (const auto& [p, m] : f.den())
        den.push_back(Json::array({p.first + 1, p.second + 1, m}));
    return Json{{"n", f.n_vars()}, {"num", num}, {"den", den}};
}

inline RatFunc ratfunc_from_json(const Json& j)
{
    if (!j.is_object() || !j.contains("n") || !j.contains("num") || !j.contains("den"))
        throw input_error("RatFunc: expected {n, num, den}");
    int n = j.at("n").get<int>();
    Poly num(n);
    for (const auto& term : j.at("num")) {
        if (!term.is_array() || term.size() != 2)
            throw input_error("RatFunc: numerator term must be [coeff, exponents]");
        Rational c = parse_rational(term[0].get<std::string>());
        std::vector<int> raw = term[1].get<std::vector<int>>();
        if (static_cast<int>(raw.size()) != n)
            throw input_error("RatFunc: exponent vector length mismatch");
        for (int v : raw)
            if (v < 0)
                throw input_error("RatFunc: negative exponent");
        num.add_term(Exponents(raw.begin(), raw.end()), c);
    }
    std::map<DivisorPair, int> den;
    for (const auto& d : j.at("den")) {
        if (!d.is_array() || d.size() != 3)
            throw input_error("RatFunc: denominator entry must be [i, j, m]");
        int i = d[0].get<int>() - 1, jj = d[1].get<int>() - 1, m = d[2].get<int>();
        if (i >= jj)
            throw input_error("RatFunc: denominator pair must have i < j");
        den[{i, jj}] += m;
    }
    return RatFunc(std::move(num), std::move(den));
}

// --------------------------------------------------------------------------
// TruncTensor: { "partition": [...], "order": N,
//                "terms": [ { "inner": [RatFunc...], "outer": RatFunc } ] }.
// Each stored monomial becomes one separated term.
// --------------------------------------------------------------------------

inline Json to_json(const TruncTensor& t)
{
    Json terms = Json::array();
    const RatFunc& v = t.elem().value();
    int nb = t.n_blocks();
    const auto& layout = t.elem().layout();
    // Split the common denominator by sort.
    std::vector<std::map<DivisorPair, int>> dens(nb + 1);
    for (const auto& [p, m] : v.den()) {
        int s = layout.sort_of_var(p.first);
        int off = layout.sort_offset(s);
        dens[s][{p.first - off, p.second - off}] = m;
    }
    for (const auto& [e, c] : v.num().terms) {
        Json inner = Json::array();
        bool first = true;
        for (int b = 0; b < nb; ++b) {
            int off = layout.sort_offset(b);
            Poly mono(t.partition()[b]);
            Exponents sub(e.begin() + off, e.begin() + off + t.partition()[b]);
            mono.add_term(sub, first ? c : Rational(1));
            first = false;
            inner.push_back(to_json(RatFunc(std::move(mono), dens[b])));
        }
        int off = layout.sort_offset(nb);
        Poly mono(nb);
        Exponents sub(e.begin() + off, e.begin() + off + nb);
        mono.add_term(sub, first ? c : Rational(1));
        Json outer = to_json(RatFunc(std::move(mono), dens[nb]));
        terms.push_back(Json{{"inner", inner}, {"outer", outer}});
    }
    return Json{{"partition", t.partition()}, {"order", t.order()}, {"terms", terms}};
}

inline TruncTensor trunctensor_from_json(const Json& j)
{
    if (!j.is_object() || !j.contains("partition") || !j.contains("order") || !j.contains("terms"))
        throw input_error("TruncTensor: expected {partition, order, terms}");
    std::vector<int> partition = j.at("partition").get<std::vector<int>>();
    long order = j.at("order").get<long>();
    TruncTensor sum = TruncTensor::zero(partition, order);
    for (const auto& term : j.at("terms")) {
        std::vector<RatFunc> inner;
        for (const auto& f : term.at("inner"))
            inner.push_back(ratfunc_from_json(f));
        RatFunc outer = ratfunc_from_json(term.at("outer"));
        sum = sum + TruncTensor::from_factors(partition, order, inner, outer);
    }
    return sum;
}

// --------------------------------------------------------------------------
// Connection: { "n", "rank", "basis_degrees": ["p/q"...],
//               "E": [ matrix-of-RatFunc per variable ] }.
// --------------------------------------------------------------------------

inline Json to_json(const Connection& c)
{
    Json degrees = Json::array();
    for (const auto& d : c.basis_degrees)
        degrees.push_back(to_string(d));
    Json mats = Json::array();
    for (const auto& m : c.mats) {
        Json rows = Json::array();
        for (int r = 0; r < m.rows(); ++r) {
            Json row = Json::array();
            for (int col = 0; col < m.cols(); ++col)
                row.push_back(to_json(m(r, col)));
            rows.push_back(row);
        }
        mats.push_back(rows);
    }
    return Json{{"n", c.n_vars}, {"rank", c.rank}, {"basis_degrees", degrees}, {"E", mats}};
}

inline Connection connection_from_json(const Json& j)
{
    if (!j.is_object() || !j.contains("n") || !j.contains("rank") || !j.contains("E"))
        throw input_error("Connection: expected {n, rank, basis_degrees, E}");
    Connection c(j.at("n").get<int>(), j.at("rank").get<int>());
    if (j.contains("basis_degrees")) {
        const auto& degrees = j.at("basis_degrees");
        if (static_cast<int>(degrees.size()) != c.rank)
            throw input_error("Connection: one basis degree per rank");
        for (int k = 0; k < c.rank; ++k)
            c.basis_degrees[k] = parse_rational(degrees[k].get<std::string>());
    }
    const auto& mats = j.at("E");
    if (static_cast<int>(mats.size()) != c.n_vars)
        throw input_error("Connection: one matrix per variable");
    for (int v = 0; v < c.n_vars; ++v) {
        const auto& rows = mats[v];
        if (static_cast<int>(rows.size()) != c.rank)
            throw input_error("Connection: matrix row count mismatch");
        for (int r = 0; r < c.rank; ++r) {
            if (static_cast<int>(rows[r].size()) != c.rank)
                throw input_error("Connection: matrix column count mismatch");
            for (int col = 0; col < c.rank; ++col) {
                RatFunc f = ratfunc_from_json(rows[r][col]);
                if (f.n_vars() != c.n_vars)
                    throw input_error("Connection: entry over wrong variable count");
                c.mats[v](r, col) = std::move(f);
            }
        }
    }
    c.validate();
    return c;
}

// --------------------------------------------------------------------------
// GaugeMap: { "degree": "p/q", "g": matrix-of-RatFunc }.
// --------------------------------------------------------------------------

inline Json to_json(const GaugeMap& g)
{
    Json rows = Json::array();
    for (int r = 0; r < g.mat.rows(); ++r) {
        Json row = Json::array();
        for (int c = 0; c < g.mat.cols(); ++c)
            row.push_back(to_json(g.mat(r, c)));
        rows.push_back(row);
    }
    return Json{{"degree", to_string(g.degree)}, {"g", rows}};
}

inline GaugeMap gauge_from_json(const Json& j)
{
    if (!j.is_object() || !j.contains("degree") || !j.contains("g"))
        throw input_error("GaugeMap: expected {degree, g}");
    const auto& rows = j.at("g");
    int rank = static_cast<int>(rows.size());
    if (rank == 0)
        throw input_error("GaugeMap: empty matrix");
    int n = ratfunc_from_json(rows[0][0]).n_vars();
    RMatrix m = rf_zero_matrix(n, rank, rank);
    for (int r = 0; r < rank; ++r) {
        if (static_cast<int>(rows[r].size()) != rank)
            throw input_error("GaugeMap: matrix must be square");
        for (int c = 0; c < rank; ++c)
            m(r, c) = ratfunc_from_json(rows[r][c]);
    }
    return GaugeMap(parse_rational(j.at("degree").get<std::string>()), std::move(m));
}

// --------------------------------------------------------------------------
// Path: { "points": [ [ [re, im], ... n coords ], ... ] }.
// --------------------------------------------------------------------------

inline Json to_json(const Path& p)
{
    Json pts = Json::array();
    for (const auto& wp : p.points) {
        Json coords = Json::array();
        for (const auto& z : wp)
            coords.push_back(Json::array({z.real(), z.imag()}));
        pts.push_back(coords);
    }
    return Json{{"points", pts}};
}

inline Path path_from_json(const Json& j)
{
    if (!j.is_object() || !j.contains("points"))
        throw input_error("Path: expected {points}");
    Path p;
    for (const auto& wp : j.at("points")) {
        std::vector<Complex> coords;
        for (const auto& z : wp)
            coords.emplace_back(z[0].get<double>(), z[1].get<double>());
        p.points.push_back(std::move(coords));
    }
    return p;
}

inline Json to_json(const MonodromyResult& r)
{
    Json rows = Json::array();
    for (int a = 0; a < r.matrix.rows(); ++a) {
        Json row = Json::array();
        for (int b = 0; b < r.matrix.cols(); ++b)
            row.push_back(Json::array({r.matrix(a, b).real(), r.matrix(a, b).imag()}));
        rows.push_back(row);
    }
    return Json{{"matrix", rows}, {"step_count", r.step_count},
                {"error_estimate", r.error_estimate}};
}

// --------------------------------------------------------------------------
// KZ data: a connection plus metadata and the restricted channels.
// --------------------------------------------------------------------------

inline Json to_json(const KZData& kz)
{
    Json channels = Json::array();
    for (const auto& ch : kz.channels) {
        Json basis = Json::array();
        for (const auto& f : ch.basis) {
            Json rows = Json::array();
            for (int r = 0; r < f.rows(); ++r) {
                Json row = Json::array();
                for (int c = 0; c < f.cols(); ++c)
                    row.push_back(to_string(f(r, c)));
                rows.push_back(row);
            }
            basis.push_back(rows);
        }
        channels.push_back(Json{{"weight", ch.weight},
                                {"basis", basis},
                                {"connection", to_json(ch.conn)}});
    }
    std::vector<long> weights;
    for (const auto& r : kz.reps)
        weights.push_back(r.weight);
    return Json{{"algebra", kz.algebra->type_tag()},
                {"weights", weights},
                {"level", to_string(kz.level)},
                {"connection", to_json(kz.full)},
                {"channels", channels}};
}

inline QMatrix qmatrix_from_json(const Json& j)
{
    int rows = static_cast<int>(j.size());
    int cols = rows ? static_cast<int>(j[0].size()) : 0;
    QMatrix m(rows, cols, Rational(0));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            m(r, c) = parse_rational(j[r][c].get<std::string>());
    return m;
}

inline Json to_json(const QMatrix& m)
{
    Json rows = Json::array();
    for (int r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (int c = 0; c < m.cols(); ++c)
            row.push_back(to_string(m(r, c)));
        rows.push_back(row);
    }
    return rows;
}

inline KZData kzdata_from_json(const Json& j, std::shared_ptr<const LieAlgebraData> alg)
{
    if (!j.is_object() || !j.contains("weights") || !j.contains("level") ||
        !j.contains("connection"))
        throw input_error("KZ data: expected {algebra, weights, level, connection, channels}");
    if (j.contains("algebra") && j.at("algebra").get<std::string>() != alg->type_tag())
        throw input_error("KZ data: unsupported algebra tag");
    KZData kz;
    kz.algebra = std::move(alg);
    kz.level = parse_rational(j.at("level").get<std::string>());
    for (long w : j.at("weights").get<std::vector<long>>())
        kz.reps.push_back(sl2_rep(kz.algebra, w));
    kz.full = connection_from_json(j.at("connection"));
    if (j.contains("channels"))
        for (const auto& ch : j.at("channels")) {
            KZChannel channel;
            channel.weight = ch.at("weight").get<long>();
            for (const auto& b : ch.at("basis"))
                channel.basis.push_back(qmatrix_from_json(b));
            channel.conn = connection_from_json(ch.at("connection"));
            kz.channels.push_back(std::move(channel));
        }
    return kz;
}

// --------------------------------------------------------------------------
// Tree-functor data: a manifest plus one file per tuple.
// --------------------------------------------------------------------------

inline std::string tuple_file_name(const TupleKey& key)
{
    std::string s = "tuple";
    for (long l : key.in)
        s += "_" + std::to_string(l);
    s += "__" + std::to_string(key.out) + ".json";
    return s;
}

inline Json tuple_to_json(const TupleKey& key, const TupleData& data)
{
    Json perms = Json::array();
    for (const auto& [sigma, p] : data.perm_certs)
        perms.push_back(Json{{"sigma", sigma}, {"matrix", to_json(p)}});
    Json splits = Json::array();
    for (const auto& split : data.splits) {
        Json channels = Json::array();
        for (const auto& mids : split.channels)
            channels.push_back(mids);
        splits.push_back(Json{{"partition", split.partition},
                              {"channels", channels},
                              {"iso", to_json(split.iso)}});
    }
    Json j{{"labels", key.in},
           {"lambda_inf", key.out},
           {"rank", data.rank},
           {"connection", to_json(data.conn)},
           {"perm_certs", perms},
           {"splits", splits}};
    if (data.unit_cert)
        j["unit_cert"] = to_json(*data.unit_cert);
    return j;
}

inline void tuple_from_json(const Json& j, TupleKey& key, TupleData& data)
{
    key.in = j.at("labels").get<Labels>();
    key.out = j.at("lambda_inf").get<long>();
    data.rank = j.at("rank").get<int>();
    data.conn = connection_from_json(j.at("connection"));
    if (j.contains("unit_cert"))
        data.unit_cert = qmatrix_from_json(j.at("unit_cert"));
    for (const auto& p : j.at("perm_certs"))
        data.perm_certs.emplace(p.at("sigma").get<std::vector<int>>(),
                                qmatrix_from_json(p.at("matrix")));
    for (const auto& s : j.at("splits")) {
        SplitData split;
        split.partition = s.at("partition").get<std::vector<int>>();
        for (const auto& ch : s.at("channels"))
            split.channels.push_back(ch.get<Labels>());
        split.iso = qmatrix_from_json(s.at("iso"));
        data.splits.push_back(std::move(split));
    }
}

inline Json manifest_to_json(const TreeFunctorData& tf)
{
    Json alpha = Json::object();
    for (const auto& [l, a] : tf.alpha)
        alpha[std::to_string(l)] = to_string(a);
    Json tuples = Json::array();
    for (const auto& [key, data] : tf.tuples) {
        Json support = Json::array();
        for (const auto& split : data.splits) {
            Json channels = Json::array();
            for (const auto& mids : split.channels)
                channels.push_back(mids);
            support.push_back(Json{{"partition", split.partition}, {"channels", channels}});
        }
        tuples.push_back(Json{{"labels", key.in},
                              {"lambda_inf", key.out},
                              {"rank", data.rank},
                              {"file", tuple_file_name(key)},
                              {"support", support}});
    }
    return Json{{"labels", tf.labels},
                {"unit_label", tf.unit_label},
                {"degree_sign", tf.degree_sign},
                {"max_points", tf.max_points},
                {"alpha", alpha},
                {"tuples", tuples}};
}

// Pre-tree algebra extras: the graded window and phi matrices, stored next
// to the manifest.
inline Json pta_to_json(const PreTreeAlgebraData& pta)
{
    Json dims = Json::object();
    for (const auto& [l, d] : pta.v_dims)
        dims[std::to_string(l)] = d;
    Json phis = Json::array();
    for (const auto& [key, mats] : pta.phi) {
        Json list = Json::array();
        for (const auto& m : mats)
            list.push_back(to_json(m));
        phis.push_back(Json{{"labels", key.in}, {"lambda_inf", key.out}, {"phi", list}});
    }
    return Json{{"v_dims", dims}, {"phi", phis}};
}

inline void pta_from_json(const Json& j, PreTreeAlgebraData& pta)
{
    for (const auto& [k, v] : j.at("v_dims").items())
        pta.v_dims[std::stol(k)] = v.get<int>();
    for (const auto& entry : j.at("phi")) {
        TupleKey key;
        key.in = entry.at("labels").get<Labels>();
        key.out = entry.at("lambda_inf").get<long>();
        std::vector<QMatrix> mats;
        for (const auto& m : entry.at("phi"))
            mats.push_back(qmatrix_from_json(m));
        pta.phi.emplace(std::move(key), std::move(mats));
    }
}

} // namespace treealg
