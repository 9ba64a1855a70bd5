// Command-line driver: exact construction and checking of configuration-
// space connections, KZ systems, numerical monodromy, and the tree-functor
// axiom verifier.
//
// Exit codes: 0 all checks pass, 1 a verification failed, 2 input error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "treealg/serialize.hpp"
#include "treealg/wzw.hpp"

using namespace treealg;
namespace fs = std::filesystem;

namespace {

constexpr const char* kConventions =
    "conventions: grading deg f = k with f(tz) = t^k f(z); covariant derivative d + sum E_i dz_i;"
    " curl C_ij = dE_j/dz_i - dE_i/dz_j (i < j); flat(standard): C + [E_i,E_j] = 0;"
    " flat(paper): -C + (1/2)[E_i,E_j] = 0; KZ trailing differential read as dz_l;"
    " transport: loop monodromy of a residue sigma is exp(-2 pi i sigma)";

Json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw input_error("cannot open " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& ex) {
        throw input_error(path + ": " + ex.what());
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out)
        throw input_error("cannot write " + path);
    out << text;
    if (!text.empty() && text.back() != '\n')
        out << "\n";
}

void emit_report(const std::string& human, const Json& machine)
{
    std::cout << human;
    std::cout << "--- machine-readable ---\n" << machine.dump(2) << "\n";
}

std::shared_ptr<const LieAlgebraData> sl2_algebra()
{
    static auto alg = std::make_shared<const LieAlgebraData>(sl2());
    return alg;
}

// A connection file is either a bare Connection or a KZ bundle with
// restricted channels.
Connection load_connection(const std::string& path, std::optional<long> channel)
{
    Json j = read_json_file(path);
    if (j.contains("E")) {
        if (channel)
            throw input_error("--channel needs a KZ bundle file");
        return connection_from_json(j);
    }
    KZData kz = kzdata_from_json(j, sl2_algebra());
    if (!channel)
        return kz.full;
    const KZChannel* ch = kz.channel(*channel);
    if (!ch)
        throw input_error("no channel with weight " + std::to_string(*channel));
    return ch->conn;
}

std::vector<long> parse_longs(const std::string& csv)
{
    std::vector<long> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(std::stol(item));
    return out;
}

std::vector<int> parse_ints(const std::string& csv)
{
    std::vector<int> out;
    for (long v : parse_longs(csv))
        out.push_back(static_cast<int>(v));
    return out;
}

void write_instance_dir(const WZWInstance& inst, const std::string& dir)
{
    fs::create_directories(dir);
    write_text_file(dir + "/manifest.json", manifest_to_json(inst.tf()).dump(2));
    write_text_file(dir + "/pta.json", pta_to_json(inst.pta).dump(2));
    for (const auto& [key, data] : inst.tf().tuples)
        write_text_file(dir + "/" + tuple_file_name(key), tuple_to_json(key, data).dump(2));
}

TreeFunctorData load_instance_dir(const std::string& dir, PreTreeAlgebraData* pta = nullptr)
{
    Json manifest = read_json_file(dir + "/manifest.json");
    TreeFunctorData tf;
    tf.labels = manifest.at("labels").get<Labels>();
    tf.unit_label = manifest.at("unit_label").get<long>();
    tf.degree_sign = manifest.at("degree_sign").get<int>();
    tf.max_points = manifest.at("max_points").get<int>();
    for (const auto& [k, v] : manifest.at("alpha").items())
        tf.alpha[std::stol(k)] = parse_rational(v.get<std::string>());
    for (const auto& t : manifest.at("tuples")) {
        TupleKey key;
        TupleData data;
        tuple_from_json(read_json_file(dir + "/" + t.at("file").get<std::string>()), key, data);
        tf.tuples.emplace(std::move(key), std::move(data));
    }
    if (pta) {
        pta->tf = tf;
        pta_from_json(read_json_file(dir + "/pta.json"), *pta);
    }
    return tf;
}

Json report_to_json(const Report& rep)
{
    Json checks = Json::array();
    for (const auto& c : rep.checks) {
        const char* status = c.status == CheckStatus::pass   ? "PASS"
                             : c.status == CheckStatus::fail ? "FAIL"
                                                             : "UNVERIFIED";
        checks.push_back(Json{{"name", c.name}, {"status", status}, {"detail", c.detail}});
    }
    return Json{{"title", rep.title},
                {"pass", rep.count(CheckStatus::pass)},
                {"fail", rep.count(CheckStatus::fail)},
                {"unverified", rep.count(CheckStatus::unverified)},
                {"checks", checks},
                {"conventions", kConventions}};
}

int report_exit(const std::vector<Report>& reports)
{
    for (const auto& rep : reports) {
        std::string human = "== " + rep.title + " ==\n";
        for (const auto& c : rep.checks) {
            const char* status = c.status == CheckStatus::pass   ? "PASS"
                                 : c.status == CheckStatus::fail ? "FAIL"
                                                                 : "UNVERIFIED";
            human += std::string(status) + "  " + c.name +
                     (c.detail.empty() ? "" : "  [" + c.detail + "]") + "\n";
        }
        emit_report(human, report_to_json(rep));
    }
    for (const auto& rep : reports)
        if (!rep.passed())
            return 1;
    return 0;
}

int run(int argc, char** argv)
{
    CLI::App app{"exact tree-level connection toolkit"};
    app.require_subcommand(1);

    auto* kz_cmd = app.add_subcommand("kz", "build a KZ connection or a WZW instance directory");
    std::string kz_algebra = "sl2", kz_weights, kz_level = "1", kz_out, kz_spins, kz_instance_out;
    int kz_points = 3;
    kz_cmd->add_option("--algebra", kz_algebra, "Lie algebra (sl2)");
    kz_cmd->add_option("--weights", kz_weights, "comma-separated sl2 weights (twice the spin)");
    kz_cmd->add_option("--level", kz_level, "level k (exact rational, k + 2 != 0)");
    kz_cmd->add_option("--out", kz_out, "output KZ bundle file");
    kz_cmd->add_option("--spins", kz_spins, "generating weights for a WZW instance");
    kz_cmd->add_option("--points", kz_points, "tuple size bound for the instance");
    kz_cmd->add_option("--instance-out", kz_instance_out, "output directory for the instance");

    auto* flat_cmd = app.add_subcommand("check-flat", "flatness of a connection");
    std::string flat_file, flat_convention = "both";
    std::optional<long> flat_channel;
    flat_cmd->add_option("file", flat_file)->required();
    flat_cmd->add_option("--convention", flat_convention, "paper | standard | both");
    flat_cmd->add_option("--channel", flat_channel, "restricted channel weight of a KZ bundle");

    auto* deg_cmd = app.add_subcommand("degree", "degree of a connection against a reference");
    std::string deg_file, deg_reference;
    std::optional<long> deg_channel;
    deg_cmd->add_option("file", deg_file)->required();
    deg_cmd->add_option("--channel", deg_channel);
    deg_cmd->add_option("--reference", deg_reference, "reference connection (default trivial)");

    auto* gauge_cmd = app.add_subcommand("gauge", "apply or check a gauge transformation");
    std::string gauge_file, gauge_by, gauge_out, gauge_check;
    gauge_cmd->add_option("file", gauge_file)->required();
    gauge_cmd->add_option("--by", gauge_by, "gauge map file")->required();
    gauge_cmd->add_option("--out", gauge_out, "write the transformed connection");
    gauge_cmd->add_option("--check", gauge_check, "verify same monodromy against this connection");

    auto* co_cmd = app.add_subcommand("cocompose", "structure map of a ring element");
    std::string co_file, co_partition, co_out;
    long co_order = 1;
    co_cmd->add_option("file", co_file)->required();
    co_cmd->add_option("--partition", co_partition, "comma-separated block sizes")->required();
    co_cmd->add_option("--order", co_order, "truncation order");
    co_cmd->add_option("--out", co_out, "output file");

    auto* res_cmd = app.add_subcommand("residue", "residue along a diagonal divisor");
    std::string res_file, res_pair;
    std::optional<long> res_channel;
    res_cmd->add_option("file", res_file)->required();
    res_cmd->add_option("--pair", res_pair, "1-based pair i,j")->required();
    res_cmd->add_option("--channel", res_channel);

    auto* mon_cmd = app.add_subcommand("monodromy", "numerical parallel transport");
    std::string mon_file, mon_path, mon_pair, mon_out;
    std::optional<long> mon_channel;
    double mon_tol = 1e-12;
    bool mon_compare = false;
    mon_cmd->add_option("file", mon_file)->required();
    mon_cmd->add_option("--path", mon_path, "path file (waypoints)");
    mon_cmd->add_option("--pair", mon_pair, "auto-generate a loop around the pair i,j");
    mon_cmd->add_option("--tol", mon_tol, "local error tolerance");
    mon_cmd->add_option("--channel", mon_channel);
    mon_cmd->add_option("--out", mon_out, "write the monodromy result");
    mon_cmd->add_flag("--compare-residue", mon_compare,
                      "compare eigenvalues with exp(-2 pi i residue)");

    auto* reg_cmd = app.add_subcommand("regularity", "pole-order probe along sampled lines");
    std::string reg_file;
    std::optional<long> reg_channel;
    int reg_samples = 64;
    unsigned long reg_seed = 1;
    reg_cmd->add_option("file", reg_file)->required();
    reg_cmd->add_option("--samples", reg_samples);
    reg_cmd->add_option("--seed", reg_seed, "seed for the line sampler");
    reg_cmd->add_option("--channel", reg_channel);

    auto* ver_cmd = app.add_subcommand("verify", "tree-functor axiom verifier");
    std::string ver_what, ver_data, ver_data_b, ver_gauges;
    long ver_order = 1;
    ver_cmd->add_option("what", ver_what, "pretree | treefunctor | pta | iso | all")->required();
    ver_cmd->add_option("--data", ver_data, "instance directory")->required();
    ver_cmd->add_option("--data-b", ver_data_b, "second instance directory (iso)");
    ver_cmd->add_option("--gauges", ver_gauges, "gauge certificates file (iso)");
    ver_cmd->add_option("--order", ver_order, "truncation order");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (kz_cmd->parsed()) {
        if (kz_algebra != "sl2")
            throw input_error("only sl2 is built in");
        Rational level = parse_rational(kz_level);
        if (!kz_instance_out.empty()) {
            if (kz_spins.empty())
                throw input_error("--instance-out needs --spins");
            WZWInstance inst = wzw_instance(sl2_algebra(), parse_longs(kz_spins), level, kz_points);
            write_instance_dir(inst, kz_instance_out);
            std::cout << "instance with " << inst.tf().tuples.size() << " tuples written to "
                      << kz_instance_out << "\n" << kConventions << "\n";
            return 0;
        }
        if (kz_weights.empty() || kz_out.empty())
            throw input_error("kz needs --weights and --out (or --spins/--instance-out)");
        KZData kz = kz_build(sl2_algebra(), parse_longs(kz_weights), level);
        write_text_file(kz_out, to_json(kz).dump(2));
        std::cout << "KZ bundle with " << kz.channels.size() << " channels written to " << kz_out
                  << "\n" << kConventions << "\n";
        return 0;
    }

    if (flat_cmd->parsed()) {
        Connection conn = load_connection(flat_file, flat_channel);
        std::vector<std::pair<std::string, FlatnessReport>> results;
        if (flat_convention == "paper" || flat_convention == "both")
            results.emplace_back("paper", is_flat(conn, FlatnessConvention::paper));
        if (flat_convention == "standard" || flat_convention == "both")
            results.emplace_back("standard", is_flat(conn, FlatnessConvention::standard));
        if (results.empty())
            throw input_error("unknown convention " + flat_convention);
        std::string human;
        Json machine = Json::object();
        bool all_flat = true;
        for (const auto& [name, rep] : results) {
            all_flat = all_flat && rep.flat;
            human += std::string(rep.flat ? "PASS" : "FAIL") + "  flat(" + name + ")";
            Json entry{{"flat", rep.flat}};
            if (!rep.flat) {
                human += "  witness pair (" + std::to_string(rep.witness_pair.first + 1) + "," +
                         std::to_string(rep.witness_pair.second + 1) + ")";
                entry["witness_pair"] =
                    Json::array({rep.witness_pair.first + 1, rep.witness_pair.second + 1});
            }
            human += "\n";
            machine[name] = entry;
        }
        machine["conventions"] = kConventions;
        emit_report(human, machine);
        return all_flat ? 0 : 1;
    }

    if (deg_cmd->parsed()) {
        Connection conn = load_connection(deg_file, deg_channel);
        std::optional<Rational> k;
        if (!deg_reference.empty())
            k = conn_degree(conn, load_connection(deg_reference, std::nullopt));
        else
            k = conn_degree(conn);
        std::string human = k ? to_string(*k) + "\n" : "no degree (not a scalar multiple of Id)\n";
        Json machine{{"degree", k ? Json(to_string(*k)) : Json(nullptr)},
                     {"conventions", kConventions}};
        emit_report(human, machine);
        return k ? 0 : 1;
    }

    if (gauge_cmd->parsed()) {
        Connection conn = load_connection(gauge_file, std::nullopt);
        GaugeMap g = gauge_from_json(read_json_file(gauge_by));
        if (!gauge_check.empty()) {
            Connection other = load_connection(gauge_check, std::nullopt);
            bool ok = same_monodromy(conn, other, g);
            emit_report(std::string(ok ? "PASS" : "FAIL") + "  same-monodromy\n",
                        Json{{"same_monodromy", ok}, {"conventions", kConventions}});
            return ok ? 0 : 1;
        }
        if (gauge_out.empty())
            throw input_error("gauge needs --out or --check");
        Connection out = gauge_transform(conn, g);
        write_text_file(gauge_out, to_json(out).dump(2));
        std::cout << "gauged connection written to " << gauge_out << "\n";
        return 0;
    }

    if (co_cmd->parsed()) {
        RatFunc f = ratfunc_from_json(read_json_file(co_file));
        TruncTensor t = cocompose(f, parse_ints(co_partition), co_order);
        Json out = to_json(t);
        if (!co_out.empty()) {
            write_text_file(co_out, out.dump(2));
            std::cout << "cocomposition written to " << co_out << "\n";
        } else {
            std::cout << out.dump(2) << "\n";
        }
        return 0;
    }

    if (res_cmd->parsed()) {
        Connection conn = load_connection(res_file, res_channel);
        auto pair = parse_ints(res_pair);
        if (pair.size() != 2)
            throw input_error("--pair needs i,j");
        ResidueReport rep = residue(conn, pair[0] - 1, pair[1] - 1);
        std::string human = "max pole order " + std::to_string(rep.max_pole_order) +
                            (rep.constant ? " (constant residue)\n" : "\n");
        Json rows = Json::array();
        for (int r = 0; r < rep.residue.rows(); ++r) {
            Json row = Json::array();
            for (int c = 0; c < rep.residue.cols(); ++c)
                row.push_back(to_json(rep.residue(r, c)));
            rows.push_back(row);
        }
        emit_report(human, Json{{"max_pole_order", rep.max_pole_order},
                                {"constant", rep.constant},
                                {"residue", rows},
                                {"conventions", kConventions}});
        return 0;
    }

    if (mon_cmd->parsed()) {
        Connection conn = load_connection(mon_file, mon_channel);
        TransportOptions opts;
        opts.tol = mon_tol;
        if (mon_compare) {
            if (mon_pair.empty())
                throw input_error("--compare-residue needs --pair");
            auto pair = parse_ints(mon_pair);
            MonodromyResidueReport rep =
                monodromy_vs_residue(conn, pair[0] - 1, pair[1] - 1, {}, opts);
            std::string human = "eigenvalue mismatch " + std::to_string(rep.max_mismatch) +
                                "\ncharpoly mismatch " + std::to_string(rep.charpoly_mismatch) +
                                "\n";
            emit_report(human, Json{{"supported", rep.supported},
                                    {"max_mismatch", rep.max_mismatch},
                                    {"charpoly_mismatch", rep.charpoly_mismatch},
                                    {"monodromy", to_json(rep.monodromy)},
                                    {"conventions", kConventions}});
            return rep.supported && rep.max_mismatch < 1e-6 ? 0 : 1;
        }
        Path path;
        if (!mon_path.empty()) {
            path = path_from_json(read_json_file(mon_path));
        } else if (!mon_pair.empty()) {
            auto pair = parse_ints(mon_pair);
            std::vector<Complex> base(conn.n_vars);
            for (int k = 0; k < conn.n_vars; ++k)
                base[k] = Complex(k, 0);
            path = loop_around_pair(base, pair[0] - 1, pair[1] - 1);
        } else {
            throw input_error("monodromy needs --path or --pair");
        }
        MonodromyResult res = transport(conn, path, opts);
        Json out = to_json(res);
        out["conventions"] = kConventions;
        if (!mon_out.empty())
            write_text_file(mon_out, out.dump(2));
        emit_report("steps " + std::to_string(res.step_count) + ", accumulated error estimate " +
                        std::to_string(res.error_estimate) + "\n",
                    out);
        return 0;
    }

    if (reg_cmd->parsed()) {
        Connection conn = load_connection(reg_file, reg_channel);
        RegularityReport rep = regularity_probe(conn, reg_samples, reg_seed);
        std::string human = std::string(rep.pass ? "PASS" : "FAIL") + "  max pole order " +
                            std::to_string(rep.max_order) + " over " +
                            std::to_string(rep.lines.size()) + " lines\n";
        Json lines = Json::array();
        for (const auto& line : rep.lines) {
            Json a = Json::array(), b = Json::array(), orders = Json::array();
            for (const auto& q : line.a)
                a.push_back(to_string(q));
            for (const auto& q : line.b)
                b.push_back(to_string(q));
            for (const auto& [root, order] : line.finite_orders)
                orders.push_back(Json::array({to_string(root), order}));
            lines.push_back(Json{{"a", a},
                                 {"b", b},
                                 {"finite_orders", orders},
                                 {"infinity_order", line.infinity_order},
                                 {"pass", line.pass}});
        }
        emit_report(human, Json{{"pass", rep.pass},
                                {"max_order", rep.max_order},
                                {"seed", reg_seed},
                                {"lines", lines},
                                {"conventions", kConventions}});
        return rep.pass ? 0 : 1;
    }

    if (ver_cmd->parsed()) {
        std::vector<Report> reports;
        if (ver_what == "iso") {
            if (ver_data_b.empty() || ver_gauges.empty())
                throw input_error("verify iso needs --data-b and --gauges");
            TreeFunctorData a = load_instance_dir(ver_data);
            TreeFunctorData b = load_instance_dir(ver_data_b);
            std::map<TupleKey, GaugeMap> gauges;
            for (const auto& entry : read_json_file(ver_gauges)) {
                TupleKey key;
                key.in = entry.at("labels").get<Labels>();
                key.out = entry.at("lambda_inf").get<long>();
                gauges.emplace(std::move(key), gauge_from_json(entry.at("gauge")));
            }
            reports.push_back(verify_iso(a, b, gauges, ver_order));
        } else if (ver_what == "pretree" || ver_what == "treefunctor" || ver_what == "pta" ||
                   ver_what == "all") {
            PreTreeAlgebraData pta;
            bool need_pta = ver_what == "pta" || ver_what == "all";
            TreeFunctorData tf = load_instance_dir(ver_data, need_pta ? &pta : nullptr);
            if (ver_what == "pretree" || ver_what == "all")
                reports.push_back(verify_pretree(tf, ver_order));
            if (ver_what == "treefunctor" || ver_what == "all")
                reports.push_back(verify_treefunctor(tf, ver_order));
            if (need_pta)
                reports.push_back(verify_pta(pta, ver_order));
        } else {
            throw input_error("unknown verify target " + ver_what);
        }
        return report_exit(reports);
    }

    return 2;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const input_error& ex) {
        std::cerr << "input error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
}
