// Command-line front end: generate model instances, run the three
// deduplication codecs on DSRC/DDUP containers, evaluate the closed
// form rate bounds and drive Monte-Carlo sweeps.

#include <cinttypes>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dedup/dedup.hpp"

namespace {

using namespace dedup;

LengthDistribution lengths_from_option(const std::string& desc) {
    if (desc.rfind("table-file:", 0) == 0) {
        std::string path = desc.substr(11);
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open length table: " + path);
        std::vector<LengthDistribution::Entry> entries;
        std::uint32_t len;
        double prob;
        while (in >> len >> prob) entries.push_back({len, prob});
        return LengthDistribution::table(std::move(entries));
    }
    return LengthDistribution::parse(desc);
}

int cmd_gen(const std::string& lengths, std::uint64_t A, std::uint64_t B, std::uint64_t seed,
            bool with_boundaries, bool override_checks, const std::string& out) {
    SourceParams params;
    params.alphabet_size = A;
    params.block_count = B;
    params.lengths = lengths_from_option(lengths);
    params.seed = seed;
    params.override_regime_checks = override_checks;
    for (const std::string& w : params.validate())
        std::cerr << "warning: " << w << "\n";
    SourceInstance inst = build_instance(params);
    write_dsrc_file(out, to_source_file(inst, params, with_boundaries));
    std::cout << "wrote " << out << " (l(S) = " << inst.sequence.size() << " bits, B = " << B
              << ")\n";
    return 0;
}

int cmd_encode(const std::string& scheme, std::uint32_t param, const std::string& in,
               const std::string& out) {
    SourceFile src = read_dsrc_file(in);
    EncodedStream enc = encode(src.sequence, parse_scheme(scheme), param);
    write_ddup_file(out, enc);
    std::cout << "wrote " << out << " (" << enc.payload.size() << " payload bits for "
              << src.sequence.size() << " source bits)\n";
    return 0;
}

int cmd_decode(const std::string& in, const std::string& out) {
    EncodedStream enc = read_ddup_file(in);
    BitString s = decode(enc);
    SourceFile f;
    f.sequence = s;
    f.length_descriptor = "";
    write_dsrc_file(out, f);
    std::cout << "wrote " << out << " (" << s.size() << " source bits)\n";
    return 0;
}

void print_report(const BoundReport& r, bool csv) {
    if (csv) {
        std::printf("scheme,A,B,EL,m_used,in_regime,rstar_lower,rstar_upper,gap_upper,"
                    "ratio_upper,ratio_at_m\n");
        std::printf("%s,%.10g,%.10g,%.10g,%u,%d,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                    scheme_name(r.scheme), r.A, r.B, r.EL, r.m_used, r.in_regime ? 1 : 0,
                    r.rstar_lower, r.rstar_upper, r.scheme_gap_upper, r.ratio_upper,
                    r.ratio_at_m);
        return;
    }
    std::printf("scheme            %s\n", scheme_name(r.scheme));
    std::printf("A                 %.10g\n", r.A);
    std::printf("B                 %.10g\n", r.B);
    std::printf("E(L)              %.10g\n", r.EL);
    std::printf("in regime         %s\n", r.in_regime ? "yes" : "no");
    if (r.scheme != Scheme::FixedLength)
        std::printf("anchor length M   %u (%s)\n", r.m_used,
                    r.m_numeric ? "numeric argmin" : "analytic");
    if (r.scheme == Scheme::MultiChunk && !r.mc_condition_ok)
        std::printf("warning           anchor condition log(2BE(L)) <= 2^(M-1) violated\n");
    std::printf("R* lower bound    %.10g bits\n", r.rstar_lower);
    std::printf("R* upper bound    %.10g bits\n", r.rstar_upper);
    std::printf("gap upper bound   %.10g bits\n", r.scheme_gap_upper);
    std::printf("ratio bound       %.10g (theorem form)\n", r.ratio_upper);
    std::printf("ratio at M        %.10g (gap / R* lower)\n", r.ratio_at_m);
}

int cmd_bounds(const std::string& scheme, double A, double B, double EL,
               const std::string& lengths, bool l_const, std::uint32_t M, bool numeric,
               bool csv) {
    LengthDistribution dist = LengthDistribution::constant(1);
    if (!lengths.empty()) {
        dist = lengths_from_option(lengths);
    } else {
        double rounded = std::round(EL);
        if (std::abs(rounded - EL) > 1e-9 && l_const)
            throw std::invalid_argument("--L-const requires an integer --EL");
        if (l_const || std::abs(rounded - EL) <= 1e-9)
            dist = LengthDistribution::constant(static_cast<std::uint32_t>(rounded));
        else
            throw std::invalid_argument("non-integer --EL needs an explicit --lengths");
    }
    BoundReport r = evaluate_bounds(parse_scheme(scheme), A, B, dist, numeric, M);
    print_report(r, csv);
    return 0;
}

int cmd_optimize(const std::string& scheme, double A, double B, double EL, bool numeric) {
    Scheme s = parse_scheme(scheme);
    std::uint32_t m = 0;
    if (s == Scheme::VariableLength)
        m = numeric ? optimize_m_vl_numeric(A, B, EL) : optimize_m_vl(EL);
    else if (s == Scheme::MultiChunk)
        m = numeric ? optimize_m_mc_numeric(A, B, EL) : optimize_m_mc(A, B, EL);
    else
        throw std::invalid_argument("optimize-anchor: scheme must be vl or mc");
    std::printf("%u\n", m);
    return 0;
}

struct ParsedPoint {
    SweepPoint point;
    bool tune = false;  // anchor length picked on measured pilot data
};

ParsedPoint parse_point(const std::string& text) {
    SweepPoint pt;
    bool have_scheme = false, have_a = false, have_b = false, have_len = false,
         have_param = false;
    std::string auto_param;
    std::istringstream in(text);
    std::string field;
    while (std::getline(in, field, ';')) {
        auto eq = field.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("sweep point: expected key=value, got '" + field + "'");
        std::string key = field.substr(0, eq), value = field.substr(eq + 1);
        if (key == "scheme") {
            pt.scheme = parse_scheme(value);
            have_scheme = true;
        } else if (key == "A") {
            pt.alphabet_size = std::stoull(value);
            have_a = true;
        } else if (key == "B") {
            pt.block_count = std::stoull(value);
            have_b = true;
        } else if (key == "lengths") {
            pt.lengths = lengths_from_option(value);
            have_len = true;
        } else if (key == "param") {
            if (value == "auto" || value == "auto-numeric" || value == "tune")
                auto_param = value;
            else
                pt.param = static_cast<std::uint32_t>(std::stoul(value));
            have_param = true;
        } else if (key == "override") {
            pt.override_regime_checks = value == "1" || value == "true";
        } else {
            throw std::invalid_argument("sweep point: unknown key '" + key + "'");
        }
    }
    if (!(have_scheme && have_a && have_b && have_len && have_param))
        throw std::invalid_argument(
            "sweep point needs scheme=, A=, B=, lengths= and param= fields");
    bool tune = false;
    if (!auto_param.empty()) {
        double A = static_cast<double>(pt.alphabet_size);
        double B = static_cast<double>(pt.block_count);
        double EL = pt.lengths.mean();
        bool numeric = auto_param == "auto-numeric";
        if (auto_param == "tune") {
            tune = true;  // resolved per point once the sweep seed is known
        } else if (pt.scheme == Scheme::VariableLength) {
            pt.param = numeric ? optimize_m_vl_numeric(A, B, EL) : optimize_m_vl(EL);
        } else if (pt.scheme == Scheme::MultiChunk) {
            pt.param = numeric ? optimize_m_mc_numeric(A, B, EL) : optimize_m_mc(A, B, EL);
        } else {
            pt.param = static_cast<std::uint32_t>(std::llround(EL));
        }
    }
    return {pt, tune};
}

int cmd_sweep(const std::vector<std::string>& points, std::uint64_t trials,
              std::uint64_t seed, const std::string& out, bool no_classify) {
    SweepSpec spec;
    for (std::size_t i = 0; i < points.size(); ++i) {
        ParsedPoint parsed = parse_point(points[i]);
        if (parsed.tune) {
            if (parsed.point.scheme == Scheme::FixedLength)
                throw std::invalid_argument("param=tune applies to vl and mc only");
            SourceParams params;
            params.alphabet_size = parsed.point.alphabet_size;
            params.block_count = parsed.point.block_count;
            params.lengths = parsed.point.lengths;
            params.override_regime_checks = parsed.point.override_regime_checks;
            std::uint32_t m_hi =
                static_cast<std::uint32_t>(std::ceil(std::log2(params.lengths.mean()))) + 2;
            parsed.point.param = tune_anchor_empirically(
                params, parsed.point.scheme, 1, std::max(m_hi, 2u), trials,
                hash_u64(seed ^ hash_u64(0x7E57ull + i)));
        }
        spec.grid.push_back(parsed.point);
    }
    spec.trials = trials;
    spec.master_seed = seed;
    spec.output_path = out;
    spec.measure.classify = !no_classify;
    std::vector<SweepRow> rows = run_sweep(spec);
    if (out.empty()) {
        std::printf("%s\n", kSweepCsvHeader);
        for (const SweepRow& row : rows) std::printf("%s\n", format_csv_row(row).c_str());
    } else {
        std::cout << "wrote " << out << " (" << rows.size() << " rows)\n";
    }
    return 0;
}

int cmd_entropy(const std::string& lengths, std::uint64_t A, std::uint64_t B,
                double max_outcomes) {
    LengthDistribution dist = lengths_from_option(lengths);
    double h = exact_entropy_bruteforce(A, B, dist, max_outcomes);
    std::printf("H(S) = %.12g bits\n", h);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deduplication codec laboratory"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a seeded source instance (DSRC)");
    std::uint64_t A = 2, B = 1, seed = 0;
    std::string lengths = "const:1", out_path, in_path;
    bool with_boundaries = false, override_checks = false;
    gen->add_option("--A", A, "alphabet size")->required();
    gen->add_option("--B", B, "number of source blocks")->required();
    gen->add_option("--lengths", lengths,
                    "length distribution: const:L | two-point:L | uniform:lo,hi | "
                    "table:l=p,... | table-file:path")
        ->required();
    gen->add_option("--seed", seed, "instance seed");
    gen->add_flag("--with-boundaries", with_boundaries,
                  "store the block boundary table (analysis ground truth)");
    gen->add_flag("--override-regime-checks", override_checks,
                  "demote model-regime violations to warnings");
    gen->add_option("--out", out_path, "output DSRC path")->required();

    // encode
    auto* enc = app.add_subcommand("encode", "encode a DSRC source into a DDUP stream");
    std::string scheme = "fl";
    std::uint32_t param = 1;
    enc->add_option("--scheme", scheme, "fl | vl | mc")->required();
    enc->add_option("--param", param, "chunk length D (fl) or anchor length M (vl/mc)")
        ->required();
    enc->add_option("--in", in_path, "input DSRC path")->required();
    enc->add_option("--out", out_path, "output DDUP path")->required();

    // decode
    auto* dec = app.add_subcommand("decode", "decode a DDUP stream back to a DSRC source");
    dec->add_option("--in", in_path, "input DDUP path")->required();
    dec->add_option("--out", out_path, "output DSRC path")->required();

    // bounds
    auto* bnd = app.add_subcommand("bounds", "evaluate the closed-form rate bounds");
    double dA = 2, dB = 1, dEL = 1, max_outcomes = 1e7;
    bool l_const = false, numeric = false, csv = false;
    std::uint32_t M = 0;
    std::string bounds_lengths;
    bnd->add_option("--A", dA, "alphabet size")->required();
    bnd->add_option("--B", dB, "number of source blocks")->required();
    bnd->add_option("--EL", dEL, "expected symbol length E(L)");
    bnd->add_option("--lengths", bounds_lengths, "explicit length distribution descriptor");
    bnd->add_option("--scheme", scheme, "fl | vl | mc")->required();
    bnd->add_flag("--L-const", l_const, "treat --EL as a constant symbol length");
    bnd->add_option("--M", M, "anchor length override (vl/mc)");
    bnd->add_flag("--numeric", numeric, "numeric argmin anchor length instead of analytic");
    bnd->add_flag("--csv", csv, "CSV output");

    // optimize-anchor
    auto* opt = app.add_subcommand("optimize-anchor", "anchor length choice for vl/mc");
    opt->add_option("--scheme", scheme, "vl | mc")->required();
    opt->add_option("--A", dA, "alphabet size")->required();
    opt->add_option("--B", dB, "number of source blocks")->required();
    opt->add_option("--EL", dEL, "expected symbol length")->required();
    opt->add_flag("--numeric", numeric, "numeric argmin instead of the analytic choice");

    // sweep
    auto* swp = app.add_subcommand("sweep", "Monte-Carlo rate sweep over a parameter grid");
    std::vector<std::string> points;
    std::uint64_t trials = 1;
    bool no_classify = false;
    swp->add_option("--point", points,
                    "grid point 'scheme=vl;A=16;B=64;lengths=const:64;param=auto' "
                    "(repeatable; param may be a number, auto, auto-numeric or tune)")
        ->required();
    swp->add_option("--trials", trials, "trials per grid point")->required();
    swp->add_option("--seed", seed, "master seed");
    swp->add_option("--out", out_path, "output CSV path (stdout when omitted)");
    swp->add_flag("--no-classify", no_classify, "skip boundary-chunk classification");

    // entropy-oracle
    auto* ent = app.add_subcommand("entropy-oracle", "exact H(S) by brute-force enumeration");
    ent->add_option("--A", A, "alphabet size")->required();
    ent->add_option("--B", B, "number of source blocks")->required();
    ent->add_option("--lengths", lengths, "length distribution descriptor")->required();
    ent->add_option("--max-outcomes", max_outcomes, "state-space refusal threshold");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed())
            return cmd_gen(lengths, A, B, seed, with_boundaries, override_checks, out_path);
        if (enc->parsed()) return cmd_encode(scheme, param, in_path, out_path);
        if (dec->parsed()) return cmd_decode(in_path, out_path);
        if (bnd->parsed())
            return cmd_bounds(scheme, dA, dB, dEL, bounds_lengths, l_const, M, numeric, csv);
        if (opt->parsed()) return cmd_optimize(scheme, dA, dB, dEL, numeric);
        if (swp->parsed()) return cmd_sweep(points, trials, seed, out_path, no_classify);
        if (ent->parsed()) return cmd_entropy(lengths, A, B, max_outcomes);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const dedup::StreamError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
