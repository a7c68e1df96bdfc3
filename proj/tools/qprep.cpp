// Command-line front end: code construction, property checks, one-shot
// decoding, protocol simulation, and exhaustive bound verification.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <map>

#include "qprep/run.hpp"

namespace fs = std::filesystem;
using namespace qprep;

namespace {

std::map<std::string, std::string> parse_kv(const std::string& body) {
    std::map<std::string, std::string> kv;
    std::istringstream in(body);
    std::string item;
    while (std::getline(in, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("expected key=value in '" + item + "'");
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return kv;
}

ClassicalSpec parse_classical(const std::string& text) {
    auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    auto kv = colon == std::string::npos ? std::map<std::string, std::string>{} : parse_kv(text.substr(colon + 1));
    ClassicalSpec spec;
    if (kind == "ldpc") {
        spec.type = "ldpc";
        if (kv.count("n")) spec.n = std::stoul(kv["n"]);
        if (kv.count("wc")) spec.col_deg = std::stoul(kv["wc"]);
        if (kv.count("wr")) spec.row_deg = std::stoul(kv["wr"]);
        if (kv.count("seed")) spec.seed = std::stoull(kv["seed"]);
        if (kv.count("d")) spec.require_distance = std::stoul(kv["d"]);
        if (kv.count("full_rank")) spec.require_full_rank = kv["full_rank"] == "1";
    } else if (kind == "rep") {
        spec.type = "rep";
        if (kv.count("ell")) spec.ell = std::stoul(kv["ell"]);
    } else {
        throw CLI::ValidationError("unknown classical family '" + kind + "' (expected ldpc:... or rep:...)");
    }
    return spec;
}

ThickeningSpec parse_thickening(const std::string& text) {
    auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    auto kv = colon == std::string::npos ? std::map<std::string, std::string>{} : parse_kv(text.substr(colon + 1));
    ThickeningSpec spec;
    if (kind == "rep") {
        spec.type = "rep";
        if (kv.count("ell")) spec.ell = std::stoul(kv["ell"]);
    } else if (kind == "star") {
        spec.type = "star";
        if (kv.count("z")) spec.z = std::stoul(kv["z"]);
        if (kv.count("b")) spec.branch_len = std::stoul(kv["b"]);
    } else {
        throw CLI::ValidationError("unknown thickening '" + kind + "' (expected rep:... or star:...)");
    }
    return spec;
}

MonotoneFn parse_bound_fn(const std::string& text, std::size_t upto) {
    if (text == "identity") return MonotoneFn::identity(upto);
    if (text == "cubic4") return MonotoneFn::cubic_quarter(upto);
    if (text.rfind("linear:", 0) == 0) return MonotoneFn::linear(std::stod(text.substr(7)), upto);
    if (text.rfind("table:", 0) == 0) {
        MonotoneFn f;
        std::istringstream in(text.substr(6));
        std::string v;
        while (std::getline(in, v, ',')) f.table.push_back(std::stod(v));
        return f;
    }
    throw CLI::ValidationError("unknown bound function '" + text + "'");
}

int cmd_construct(const std::string& classical, std::uint64_t seed, const std::string& thicken_s,
                  const std::string& out_dir) {
    ClassicalSpec spec = parse_classical(classical);
    if (spec.type == "ldpc") spec.seed = seed;
    BuiltCode code = build_code(spec);
    std::optional<ThickeningSpec> thick;
    if (!thicken_s.empty()) thick = parse_thickening(thicken_s);
    save_bundle(out_dir, code, thick ? &*thick : nullptr);
    std::cout << "wrote bundle " << out_dir << " (" << code.code_id << ", [[" << code.base.n << ","
              << code.base.k << "]])\n";
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int workers) {
    RunConfig cfg = config_from_json(json::parse(read_text_file(config_path)));
    if (workers > 0) cfg.workers = workers;
    RunOutput out = run_simulation(cfg);
    fs::create_directories(out_dir);
    write_text_file(out_dir + "/results.csv", out.results_csv);
    write_text_file(out_dir + "/manifest.json", out.manifest.dump(2) + "\n");
    std::ostringstream log;
    for (const auto& row : out.rows)
        log << row.experiment << " p=" << row.p << " trials=" << row.trials << " fx=" << row.failures_x
            << " fz=" << row.failures_z << " wall_ms=" << row.wall_ms << '\n';
    write_text_file(out_dir + "/run.log", log.str());
    std::cout << log.str();
    std::cout << "wrote " << out_dir << "/results.csv\n";
    return 0;
}

int cmd_check(const std::string& bundle, const std::string& what, std::size_t t, const std::string& fn_s,
              const std::string& out_csv, std::size_t cap) {
    LoadedBundle b = load_bundle(bundle);
    std::ostringstream report, csv;
    if (what == "confinement" || what == "soundness") {
        MonotoneFn f = parse_bound_fn(fn_s, std::max<std::size_t>(4 * t + 4, 16));
        if (what == "confinement") {
            auto rep = confinement_check(b.code.base.h_x, b.code.base.h_z, t, f);
            report << (rep.pass ? "PASS" : "FAIL") << " confinement on H_X at t=" << t << ": " << rep.errors_checked
                   << " errors checked, worst margin " << rep.worst_margin << "\n";
            csv << "syndrome_weight,max_reduced_weight\n";
            for (std::size_t s = 0; s < rep.frontier.size(); ++s) csv << s << ',' << rep.frontier[s] << '\n';
        } else {
            if (!b.thickening) throw CLI::ValidationError("soundness check expects a thickened bundle");
            auto thick = thicken(b.code.base, build_thickener(*b.thickening));
            auto rep = soundness_check(thick.css.h_z, thick.css.h_x, t, f);
            report << (rep.pass ? "PASS" : "FAIL") << " soundness on thickened H_Z at t=" << t << ": "
                   << rep.syndromes_checked << " valid syndromes"
                   << (rep.redundancy_absent ? " (no check redundancy: every syndrome is valid)" : "") << "\n";
            csv << "syndrome_weight,max_min_preimage_weight\n";
            for (std::size_t s = 0; s < rep.frontier.size(); ++s) csv << s << ',' << rep.frontier[s] << '\n';
        }
    } else if (what == "homology") {
        std::vector<std::size_t> dims;
        if (b.thickening) {
            auto thick = thicken(b.code.base, build_thickener(*b.thickening));
            dims = homology_dims({transpose(thick.css.h_x), thick.css.h_z, *thick.css.m_z});
        } else {
            dims = homology_dims({transpose(b.code.base.h_x), b.code.base.h_z});
        }
        report << "homology dimensions:";
        csv << "position,dim\n";
        for (std::size_t i = 0; i < dims.size(); ++i) {
            report << ' ' << dims[i];
            csv << i << ',' << dims[i] << '\n';
        }
        report << '\n';
    } else if (what == "ss-distance") {
        if (!b.thickening) throw CLI::ValidationError("ss-distance expects a thickened bundle");
        auto thick = thicken(b.code.base, build_thickener(*b.thickening));
        auto d = single_shot_distance(thick.css.h_z, *thick.css.m_z, cap);
        report << "single-shot distance: ";
        if (d.is_infinite())
            report << "infinite (every metacheck-satisfying syndrome is physical)\n";
        else if (d.is_exact())
            report << d.value << '\n';
        else
            report << "> " << d.value << " (certified bound)\n";
        csv << "kind,value\n"
            << (d.is_infinite() ? "infinite" : d.is_exact() ? "exact" : "bound") << ',' << d.value << '\n';
    } else if (what == "css-distance") {
        auto d = css_distance_exhaustive(b.code.base);
        report << "d_x = " << d.d_x.value << ", d_z = " << d.d_z.value << '\n';
        csv << "sector,value\nx," << d.d_x.value << "\nz," << d.d_z.value << '\n';
    } else {
        throw CLI::ValidationError("unknown check '" + what + "'");
    }
    std::cout << report.str();
    if (!out_csv.empty()) write_text_file(out_csv, csv.str());
    return report.str().rfind("FAIL", 0) == 0 ? 1 : 0;
}

int cmd_decode(const std::string& matrix_path, const std::string& syndrome_path, int bp_iters, int osd_depth,
               double prior, const std::string& out_path) {
    BinaryMatrix h = from_alist(read_text_file(matrix_path));
    std::string bits = read_text_file(syndrome_path);
    while (!bits.empty() && (bits.back() == '\n' || bits.back() == '\r' || bits.back() == ' ')) bits.pop_back();
    BinaryVector s = BinaryVector::from_string(bits);
    if (s.size() != h.rows())
        throw CLI::ValidationError("syndrome has " + std::to_string(s.size()) + " bits but the matrix has " +
                                   std::to_string(h.rows()) + " rows");
    BpOsdDecoder dec(h, BpConfig{bp_iters, prior, 30.0}, OsdConfig{osd_depth});
    auto t0 = std::chrono::steady_clock::now();
    DecodeResult res = dec.decode(s);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    const std::string correction = res.correction.to_string();
    if (out_path.empty())
        std::cout << correction << '\n';
    else
        write_text_file(out_path, correction + "\n");
    json metrics{{"iterations", res.iterations},
                 {"converged", res.converged},
                 {"used_osd", res.used_osd},
                 {"weight", res.correction.weight()},
                 {"wall_ms", ms}};
    std::cout << metrics.dump() << '\n';
    return 0;
}

int cmd_verify_bounds(const std::string& bundle, std::size_t samples, std::uint64_t seed) {
    LoadedBundle b = load_bundle(bundle);
    if (!b.thickening) throw CLI::ValidationError("verify-bounds expects a thickened bundle");
    auto thick = thicken(b.code.base, build_thickener(*b.thickening));
    thick.base = b.code.base;
    const std::size_t d = b.thickening->type == "rep" ? b.thickening->ell : 2 * b.thickening->branch_len;
    bool all_pass = true;
    auto run_suite = [&](const char* label, auto&& fn) {
        try {
            BoundReport rep = fn();
            std::cout << rep.summary() << '\n';
            all_pass &= rep.pass;
        } catch (const BudgetExceeded& e) {
            std::cout << "SKIP " << label << ": " << e.what() << " -- rerun on a smaller bundle or raise the budget\n";
            all_pass = false;
        } catch (const std::exception& e) {
            std::cout << "SKIP " << label << ": " << e.what() << '\n';
            all_pass = false;
        }
    };
    run_suite("stage-1 residual", [&] {
        return stage1_residual_bound(thick, d / 2, std::min<std::size_t>(d / 2 + 1, 2), samples, seed);
    });
    const std::size_t t = 2;  // below the distance of the smallest supported base codes
    run_suite("shadow residual", [&] { return shadow_residual_bound(thick.base.h_x, thick.base.h_z, t, 8, seed); });
    run_suite("collapse residual", [&] { return collapse_residual_bound(thick, t); });
    run_suite("composed protocol", [&] {
        return composed_protocol_bound(thick, 1, t, std::min<std::size_t>(samples, 200), seed);
    });
    return all_pass ? 0 : 1;
}

int cmd_plot_data(const std::string& results, const std::string& out, const std::string& group_by) {
    const std::string csv = emit_plot_data(read_text_file(results), group_by);
    if (csv.find('\n') == csv.size() - 1) std::cerr << "warning: empty results\n";
    write_text_file(out, csv);
    std::cout << "wrote " << out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hypergraph-product code construction and single-shot preparation simulator"};
    app.require_subcommand(1);

    std::string classical = "ldpc:n=18,wc=5,wr=6", thicken_s, out_dir = "bundle";
    std::uint64_t seed = 0;
    auto* construct = app.add_subcommand("construct", "build a code bundle on disk");
    std::string family = "hgp";
    construct->add_option("--family", family, "code family (hgp)")->check(CLI::IsMember({"hgp"}));
    construct->add_option("--classical", classical, "classical input, e.g. ldpc:n=18,wc=5,wr=6 or rep:ell=3");
    construct->add_option("--seed", seed, "ensemble seed");
    construct->add_option("--thicken", thicken_s, "optional thickening, e.g. rep:ell=3 or star:z=3,b=2");
    construct->add_option("--out", out_dir, "output directory")->required();

    std::string config_path, sim_out = "out";
    int workers = 0;
    auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo experiment from a JSON config");
    simulate->add_option("--config", config_path, "run configuration (or a previous manifest)")->required();
    simulate->add_option("--out", sim_out, "output directory")->required();
    simulate->add_option("--workers", workers, "worker threads (default: QPREP_WORKERS or hardware)");

    std::string bundle_dir, what = "confinement", fn_s = "identity", check_csv;
    std::size_t t = 1, cap = 6;
    auto* check = app.add_subcommand("check", "run an exhaustive property checker on a bundle");
    check->add_option("--bundle", bundle_dir, "bundle directory")->required();
    check->add_option("--what", what, "confinement | soundness | homology | ss-distance | css-distance");
    check->add_option("--t", t, "cutoff weight");
    check->add_option("--f", fn_s, "bound: identity | linear:A | cubic4 | table:v0,v1,...");
    check->add_option("--cap", cap, "search cap for distance checks");
    check->add_option("--csv", check_csv, "write worst cases as CSV");

    std::string matrix_path, syndrome_path, correction_out;
    int bp_iters = 20, osd_depth = 20;
    double prior = 0.01;
    auto* decode = app.add_subcommand("decode", "decode one syndrome against an alist matrix");
    decode->add_option("--matrix", matrix_path, "parity-check matrix (alist)")->required();
    decode->add_option("--syndrome", syndrome_path, "syndrome file (text bitstring)")->required();
    decode->add_option("--bp-iters", bp_iters, "belief-propagation iterations");
    decode->add_option("--osd-depth", osd_depth, "combination-sweep depth");
    decode->add_option("--prior", prior, "channel prior");
    decode->add_option("--out", correction_out, "write the correction here instead of stdout");

    std::string vb_bundle;
    std::size_t vb_samples = 10000;
    std::uint64_t vb_seed = 1;
    auto* verify = app.add_subcommand("verify-bounds", "exhaustive residual-bound suites on a thickened bundle");
    verify->add_option("--bundle", vb_bundle, "thickened bundle directory")->required();
    verify->add_option("--samples", vb_samples, "sampled syndrome-error patterns");
    verify->add_option("--seed", vb_seed, "sampling seed");

    std::string plot_in, plot_out = "plot.csv", group_by = "thickening";
    auto* plot = app.add_subcommand("plot-data", "reshape results into plot-ready series");
    plot->add_option("--results", plot_in, "results.csv from simulate")->required();
    plot->add_option("--out", plot_out, "output CSV")->required();
    plot->add_option("--group-by", group_by, "thickening | code");

    CLI11_PARSE(app, argc, argv);

    try {
        if (construct->parsed()) return cmd_construct(classical, seed, thicken_s, out_dir);
        if (simulate->parsed()) return cmd_simulate(config_path, sim_out, workers);
        if (check->parsed()) return cmd_check(bundle_dir, what, t, fn_s, check_csv, cap);
        if (decode->parsed()) return cmd_decode(matrix_path, syndrome_path, bp_iters, osd_depth, prior, correction_out);
        if (verify->parsed()) return cmd_verify_bounds(vb_bundle, vb_samples, vb_seed);
        if (plot->parsed()) return cmd_plot_data(plot_in, plot_out, group_by);
    } catch (const BudgetExceeded& e) {
        std::cerr << "error: " << e.what() << "\nhint: shrink the instance or raise the relevant budget flag\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
