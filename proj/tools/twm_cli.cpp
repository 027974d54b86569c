#include <chrono>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "twm/engine.hpp"
#include "twm/gen.hpp"
#include "twm/io.hpp"
#include "twm/matprod.hpp"
#include "twm/minors.hpp"

namespace {

using namespace twm;

// Flag-combination problems; maps to exit code 2 like parser errors.
struct usage_error : std::runtime_error {
    explicit usage_error(const std::string& msg) : std::runtime_error(msg) {}
};

bool g_report = false;

void report(const std::string& key, const std::string& val) {
    if (g_report) std::cout << "#" << key << "=" << val << "\n";
}

void report(const std::string& key, i64 val) { report(key, std::to_string(val)); }

std::string sniff_format(const std::string& path) {
    std::ifstream f(path);
    check(f.good(), path + ": cannot open");
    std::string tok;
    f >> tok;
    return tok;
}

// Dispatches on the header: plain labels (TWD) or directed pairs (TWDD).
template <class Fn>
void with_dec(const std::string& path, Fn&& fn) {
    std::string tag = sniff_format(path);
    if (tag == "TWD")
        fn(read_dec<Fe>(path));
    else if (tag == "TWDD")
        fn(read_dec<Dv>(path));
    else
        throw validation_error(path + ": not a decomposition file");
}

bool symmetric(const Mat& g) {
    if (g.rows != g.cols) return false;
    for (int u = 0; u < g.rows; ++u)
        for (int v = u + 1; v < g.cols; ++v)
            if (g.at(u, v) != g.at(v, u)) return false;
    return true;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct ValidateArgs {
    std::string twd, ctr, graph;
};

void cmd_validate(const ValidateArgs& a) {
    if (!a.twd.empty()) {
        if (!a.ctr.empty() || !a.graph.empty())
            throw usage_error("validate takes --twd alone or --ctr with --graph");
        with_dec(a.twd, [&](const auto& D) {
            auto rep = validate_twd(D, Arith::mod(D.p));
            std::cerr << "ok: n " << D.n << ", width " << rep.width << ", " << rep.bedge_count
                      << " biclique edges\n";
            report("n", D.n);
            report("p", D.p);
            report("width", rep.width);
            report("bedges", static_cast<i64>(rep.bedge_count));
        });
        return;
    }
    if (a.ctr.empty() || a.graph.empty())
        throw usage_error("validate needs --twd, or --ctr with --graph");
    auto [g, p] = read_fqm(a.graph);
    check(g.rows == g.cols, a.graph + ": adjacency table must be square");
    ContractionSeq seq = read_ctr(a.ctr);
    int width = replay_width<Dv>(g, seq, Arith::mod(p));
    std::cerr << "ok: n " << seq.n0 << ", width " << width << "\n";
    report("n", seq.n0);
    report("p", p);
    report("width", width);
}

struct ConvertArgs {
    std::string from, to, in, out, graph;
};

void cmd_convert(const ConvertArgs& a) {
    if (a.from == "twd" && a.to == "ctr") {
        with_dec(a.in, [&](const auto& D) {
            validate_twd(D, Arith::mod(D.p));
            write_ctr(a.out, twd_to_seq(D));
            report("n", D.n);
        });
        return;
    }
    if (a.from == "ctr" && a.to == "twd") {
        if (a.graph.empty()) throw usage_error("convert --from ctr needs --graph");
        auto [g, p] = read_fqm(a.graph);
        check(g.rows == g.cols, a.graph + ": adjacency table must be square");
        ContractionSeq seq = read_ctr(a.in);
        Arith ar = Arith::mod(p);
        if (symmetric(g)) {
            auto D = seq_to_twd<Fe>(g, seq, ar);
            auto rep = validate_twd(D, ar);
            write_dec(a.out, D);
            report("width", rep.width);
            report("bedges", static_cast<i64>(rep.bedge_count));
        } else {
            auto D = seq_to_twd<Dv>(g, seq, ar);
            auto rep = validate_twd(D, ar);
            write_dec(a.out, D);
            report("width", rep.width);
            report("bedges", static_cast<i64>(rep.bedge_count));
        }
        return;
    }
    throw usage_error("supported conversions: twd->ctr and ctr->twd");
}

void cmd_liftup(const std::string& in, const std::string& out) {
    with_dec(in, [&](const auto& D) {
        validate_twd(D, Arith::mod(D.p));
        auto lifted = lift_up(D);
        auto rep = validate_twd(lifted, Arith::mod(D.p));
        write_dec(out, lifted);
        std::cerr << "ok: " << D.bedges.size() << " -> " << lifted.bedges.size()
                  << " biclique edges, width " << rep.width << "\n";
        report("bedgesIn", static_cast<i64>(D.bedges.size()));
        report("bedgesOut", static_cast<i64>(lifted.bedges.size()));
        report("width", rep.width);
    });
}

struct SquareArgs {
    std::string twd, out, diag_out;
    std::string mode = "modular";
};

void cmd_square(const SquareArgs& a) {
    std::string tag = sniff_format(a.twd);
    auto finish = [&](const auto& sq, u32 p, const Arith& ar) {
        auto rep = validate_twd(sq.dec, ar);
        write_dec(a.out, sq.dec);
        if (!a.diag_out.empty()) {
            Mat d(1, static_cast<int>(sq.diag.size()));
            for (size_t i = 0; i < sq.diag.size(); ++i)
                d.at(0, static_cast<int>(i)) = vt<std::decay_t<decltype(sq.diag[0])>>::fwd(sq.diag[i]);
            write_fqm(a.diag_out, d, p);
        }
        std::cerr << "ok: width " << rep.width << ", " << rep.bedge_count << " biclique edges\n";
        report("width", rep.width);
        report("bedges", static_cast<i64>(rep.bedge_count));
    };
    if (a.mode == "distance") {
        check(tag == "TWD", a.twd + ": distance mode needs plain 0/1 labels");
        auto D = read_dec<Fe>(a.twd);
        finish(distance_square_twd(D), D.p, Arith::sat());
    } else if (tag == "TWD") {
        auto D = read_dec<Fe>(a.twd);
        finish(modular_square_twd(D, Arith::mod(D.p)), D.p, Arith::mod(D.p));
    } else if (tag == "TWDD") {
        auto D = read_dec<Dv>(a.twd);
        finish(modular_square_twd(D, Arith::mod(D.p)), D.p, Arith::mod(D.p));
    } else {
        throw validation_error(a.twd + ": not a decomposition file");
    }
}

struct MultiplyArgs {
    std::string a, b, out, out_twd, reverse_out;
    bool dense_fallback = false, naive = false;
    int budget = 8;
    u64 seed = 1;
};

void cmd_multiply(const MultiplyArgs& a) {
    auto [A, pa] = read_fqm(a.a);
    auto [B, pb] = read_fqm(a.b);
    check(pa == pb, "operands live over different moduli");
    Arith ar = Arith::mod(pa);
    if (a.naive) {
        check(A.cols == B.rows, "inner dimensions disagree");
        write_fqm(a.out, multiply_naive(A, B, ar), pa);
        report("method", "naive");
        return;
    }
    MultiplyOptions opt;
    opt.budget = a.budget;
    opt.seed = a.seed;
    opt.dense_fallback = a.dense_fallback;
    auto res = multiply_twd(A, B, ar, opt);
    write_fqm(a.out, res.product, pa);
    if (!a.reverse_out.empty()) write_fqm(a.reverse_out, res.reverse, pa);
    if (!a.out_twd.empty()) {
        check(res.have_squared, "no decomposition to write under method " + res.method);
        write_dec(a.out_twd, res.squared.dec);
    }
    std::cerr << "ok: method " << res.method << ", width " << res.width << "\n";
    report("method", res.method);
    report("width", res.width);
    report("rows", res.product.rows);
    report("cols", res.product.cols);
}

void cmd_query(const std::string& twd, int u, int v) {
    with_dec(twd, [&](const auto& D) {
        check(u >= 0 && u < D.n && v >= 0 && v < D.n, "vertex out of range");
        using V = std::decay_t<decltype(D.bedges[0].val)>;
        Fe val = 0;
        if (u != v) {
            DecIndex<V> idx(D);
            val = vt<V>::fwd(idx.query(u, v));
        }
        std::cout << val << "\n";
        report("value", val);
    });
}

struct GenArgs {
    int n = 16, d = 2;
    u32 p = 2;
    u64 seed = 1;
    double density = 0.5;
    std::string out_prefix;
};

void cmd_gen(const GenArgs& a) {
    check(a.n >= 1, "need n >= 1");
    check(a.d >= 0, "need d >= 0");
    check(is_prime_u32(a.p) && a.p <= kMaxPrime, "p must be a small prime");
    check(a.density >= 0.0 && a.density <= 1.0, "density must lie in [0,1]");
    GenSpec spec;
    spec.n = a.n;
    spec.d = a.d;
    spec.p = a.p;
    spec.density = a.density;
    spec.seed = a.seed;
    auto out = random_twd(spec);
    write_dec(a.out_prefix + ".twd", out.dec);
    write_ctr(a.out_prefix + ".ctr", twd_to_seq(out.dec));
    if (out.graph_built) write_fqm(a.out_prefix + ".fqm", out.graph, a.p);
    std::cerr << "ok: width " << out.width << ", " << out.dec.bedges.size() << " biclique edges\n";
    report("width", out.width);
    report("bedges", static_cast<i64>(out.dec.bedges.size()));
    report("graphWritten", out.graph_built ? 1 : 0);
}

struct MinorArgs {
    std::string fqm, script, out, target, host;
    std::string mode = "parity";
};

void cmd_minor_apply(const MinorArgs& a) {
    auto [m, p] = read_fqm(a.fqm);
    MinorScript s = read_msc(a.script);
    Mat r = apply_script(m, s, Arith::mod(p));
    write_fqm(a.out, r, p);
    report("rows", r.rows);
    report("cols", r.cols);
}

void cmd_minor_check(const MinorArgs& a) {
    auto [target, pt] = read_fqm(a.target);
    auto [host, ph] = read_fqm(a.host);
    check(pt == ph, "operands live over different moduli");
    MinorMode mode;
    if (a.mode == "parity")
        mode = MinorMode::parity;
    else if (a.mode == "linear")
        mode = MinorMode::linear;
    else
        throw usage_error("--mode must be parity or linear");
    bool yes = is_minor_bruteforce(target, host, mode, Arith::mod(pt));
    std::cout << (yes ? "yes" : "no") << "\n";
    report("contained", yes ? 1 : 0);
}

void cmd_minor_extract(const MinorArgs& a) {
    auto [host, ph] = read_fqm(a.host);
    auto [target, pt] = read_fqm(a.target);
    check(pt == ph, "operands live over different moduli");
    MinorScript s = extract_from_latin(host, target, Arith::mod(ph));
    write_msc(a.out, s);
    report("ops", static_cast<i64>(s.ops.size()));
}

void cmd_stats(const std::string& fqm, bool rank_variant) {
    auto [m, p] = read_fqm(fqm);
    DivisionStats st = division_stats(m, Arith::mod(p), rank_variant);
    std::cerr << "grid number " << st.grid_number << ", mixed number " << st.mixed_number
              << ", grid rank " << st.grid_rank << "\n";
    report("gridNumber", st.grid_number);
    report("mixedNumber", st.mixed_number);
    report("gridRank", st.grid_rank);
}

struct BenchArgs {
    std::string op;
    std::string sweep;
    int d = 2;
    u32 p = 2;
    u64 seed = 1;
};

void cmd_bench(const BenchArgs& a) {
    auto dots = a.sweep.find("..");
    check(dots != std::string::npos, "--sweep wants n0..n1");
    i64 n0 = to_int(a.sweep.substr(0, dots), "--sweep");
    i64 n1 = to_int(a.sweep.substr(dots + 2), "--sweep");
    check(n0 >= 2 && n0 <= n1, "--sweep wants 2 <= n0 <= n1");
    check(is_prime_u32(a.p) && a.p <= kMaxPrime, "p must be a small prime");
    Arith ar = Arith::mod(a.p);
    std::cout << "n,d,p,op,seconds,outWidth,bedgeCount\n";
    for (i64 n = n0; n <= n1; n *= 2) {
        double secs = 0;
        int out_width = 0;
        u64 bedges = 0;
        if (a.op == "square") {
            GenSpec spec;
            spec.n = static_cast<int>(n);
            spec.d = a.d;
            spec.p = a.p;
            spec.seed = a.seed;
            auto gen = random_twd(spec);
            auto t0 = std::chrono::steady_clock::now();
            auto sq = modular_square_twd(gen.dec, ar);
            secs = seconds_since(t0);
            out_width = validate_twd(sq.dec, ar).width;
            bedges = sq.dec.bedges.size();
        } else {
            BlockSpec spec;
            spec.rows = static_cast<int>(n / 2);
            spec.inner = static_cast<int>(n - n / 2);
            spec.d = a.d;
            spec.p = a.p;
            spec.seed = a.seed;
            auto gen = random_block_twd(spec);
            auto t0 = std::chrono::steady_clock::now();
            auto sq = modular_square_twd(gen.dec, ar);
            secs = seconds_since(t0);
            out_width = validate_twd(sq.dec, ar).width;
            bedges = sq.dec.bedges.size();
        }
        std::cout << n << "," << a.d << "," << a.p << "," << a.op << "," << secs << "," << out_width
                  << "," << bedges << "\n";
    }
}

int run(int argc, char** argv) {
    CLI::App app{"twin-width decompositions: validation, squaring, products, minors"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_flag("--report", g_report, "machine-readable #key=value lines on stdout");

    ValidateArgs va;
    auto* v = app.add_subcommand("validate", "check a decomposition or a contraction sequence");
    v->add_option("--twd", va.twd, "decomposition file");
    v->add_option("--ctr", va.ctr, "contraction sequence file");
    v->add_option("--graph", va.graph, "labeled adjacency file for --ctr");
    v->callback([&] { cmd_validate(va); });

    ConvertArgs ca;
    auto* cv = app.add_subcommand("convert", "translate between sequence and decomposition form");
    cv->add_option("--from", ca.from, "source form: twd or ctr")->required();
    cv->add_option("--to", ca.to, "target form: ctr or twd")->required();
    cv->add_option("--in", ca.in, "input file")->required();
    cv->add_option("--out", ca.out, "output file")->required();
    cv->add_option("--graph", ca.graph, "labeled adjacency file (ctr -> twd)");
    cv->callback([&] { cmd_convert(ca); });

    std::string lu_in, lu_out;
    auto* lu = app.add_subcommand("liftup", "merge sibling biclique edges upward");
    lu->add_option("--twd", lu_in, "decomposition file")->required();
    lu->add_option("--out", lu_out, "output file")->required();
    lu->callback([&] { cmd_liftup(lu_in, lu_out); });

    SquareArgs sa;
    auto* sq = app.add_subcommand("square", "two-step path sums of the described graph");
    sq->add_option("--twd", sa.twd, "decomposition file")->required();
    sq->add_option("--out", sa.out, "output decomposition file")->required();
    sq->add_option("--mode", sa.mode, "modular (default) or distance");
    sq->add_option("--diag-out", sa.diag_out, "write closed sums as a single-row table");
    sq->callback([&] { cmd_square(sa); });

    MultiplyArgs ma;
    auto* mu = app.add_subcommand("multiply", "matrix product through a block decomposition");
    mu->add_option("--a", ma.a, "left operand")->required();
    mu->add_option("--b", ma.b, "right operand")->required();
    mu->add_option("--out", ma.out, "product file")->required();
    mu->add_option("--reverse-out", ma.reverse_out, "also write the opposite product");
    mu->add_option("--out-twd", ma.out_twd, "write the squared block decomposition");
    mu->add_flag("--dense-fallback", ma.dense_fallback, "fall back to the cubic product");
    mu->add_flag("--naive", ma.naive, "force the cubic product");
    mu->add_option("--budget", ma.budget, "width budget for the search");
    mu->add_option("--seed", ma.seed, "search seed");
    mu->callback([&] { cmd_multiply(ma); });

    std::string q_twd;
    int q_u = 0, q_v = 0;
    auto* qu = app.add_subcommand("query", "single entry of the described graph");
    qu->add_option("--twd", q_twd, "decomposition file")->required();
    qu->add_option("--u", q_u, "row vertex")->required();
    qu->add_option("--v", q_v, "column vertex")->required();
    qu->callback([&] { cmd_query(q_twd, q_u, q_v); });

    GenArgs ga;
    auto* ge = app.add_subcommand("gen", "random decomposition within a width target");
    ge->add_option("--n", ga.n, "leaf count")->required();
    ge->add_option("--d", ga.d, "width target")->required();
    ge->add_option("--p", ga.p, "label modulus")->required();
    ge->add_option("--seed", ga.seed, "generator seed")->required();
    ge->add_option("--density", ga.density, "biclique attachment chance");
    ge->add_option("--out-prefix", ga.out_prefix, "artifact path prefix")->required();
    ge->callback([&] { cmd_gen(ga); });

    MinorArgs mn;
    auto* mi = app.add_subcommand("minor", "script application, containment, extraction");
    mi->require_subcommand(1);
    auto* map_ = mi->add_subcommand("apply", "run a script against a table");
    map_->add_option("--fqm", mn.fqm, "input table")->required();
    map_->add_option("--script", mn.script, "operation script")->required();
    map_->add_option("--out", mn.out, "output table")->required();
    map_->callback([&] { cmd_minor_apply(mn); });
    auto* mch = mi->add_subcommand("check", "exhaustive containment at desk scale");
    mch->add_option("--target", mn.target, "candidate minor")->required();
    mch->add_option("--host", mn.host, "host table")->required();
    mch->add_option("--mode", mn.mode, "parity (default) or linear");
    mch->callback([&] { cmd_minor_check(mn); });
    auto* mex = mi->add_subcommand("extract", "script for a target inside a rank Latin host");
    mex->add_option("--host", mn.host, "rank Latin host table")->required();
    mex->add_option("--target", mn.target, "wanted table")->required();
    mex->add_option("--out", mn.out, "script file")->required();
    mex->callback([&] { cmd_minor_extract(mn); });

    std::string st_fqm;
    bool st_rank = false;
    auto* st = app.add_subcommand("stats", "division statistics of a table");
    st->add_option("--fqm", st_fqm, "input table")->required();
    st->add_flag("--rank-variant", st_rank, "use algebraic rank for the third statistic");
    st->callback([&] { cmd_stats(st_fqm, st_rank); });

    BenchArgs ba;
    auto* be = app.add_subcommand("bench", "timings over a size sweep, CSV on stdout");
    be->add_option("op", ba.op, "square or multiply")
        ->required()
        ->check(CLI::IsMember({"square", "multiply"}));
    be->add_option("--sweep", ba.sweep, "n0..n1, doubling")->required();
    be->add_option("--d", ba.d, "width target");
    be->add_option("--p", ba.p, "label modulus");
    be->add_option("--seed", ba.seed, "generator seed");
    be->callback([&] { cmd_bench(ba); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const internal_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
