#pragma once

// Run orchestration: configs, bundles, the simulate worker pool, result
// CSVs, and manifests.  JSON for configs and manifests, CSV for bulk
// results, alist for matrices.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "qprep/analysis.hpp"
#include "qprep/bounds.hpp"
#include "qprep/gf2_io.hpp"
#include "qprep/protocol.hpp"

namespace qprep {

using json = nlohmann::json;

constexpr const char* kResultsSchema = "qprep-results v1";

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ClassicalSpec {
    std::string type = "ldpc";  // ldpc | rep
    std::size_t n = 18;
    std::size_t col_deg = 5, row_deg = 6;
    std::uint64_t seed = 0;
    std::size_t ell = 3;             // for rep
    bool require_full_rank = false;  // advance the seed until the checks have full row rank
    std::optional<std::size_t> require_distance;  // advance the seed until this exact distance

    std::string id() const {
        if (type == "rep") return "rep" + std::to_string(ell);
        return "ldpc-n" + std::to_string(n) + "-w" + std::to_string(col_deg) + std::to_string(row_deg) + "-s" +
               std::to_string(seed);
    }
};

struct ThickeningSpec {
    std::string type = "rep";  // rep | star
    std::size_t ell = 3;
    std::size_t z = 3, branch_len = 2;

    std::string id() const {
        if (type == "star") return "star-z" + std::to_string(z) + "-b" + std::to_string(branch_len);
        return "rep" + std::to_string(ell);
    }
};

struct RunConfig {
    ClassicalSpec classical;
    std::optional<std::string> bundle_path;  // load the code from a bundle instead
    ThickeningSpec thickening;
    std::string experiment = "prepare-x";  // prepare-x | prepare-z | full | baseline
    std::vector<double> p_grid;
    std::size_t trials = 1000;
    std::uint64_t master_seed = 1;
    int bp_iters = 20;
    int osd_depth = 20;
    double llr_sat = 30.0;
    bool stage1_data_noise = false;
    int workers = 0;  // 0 = QPREP_WORKERS env or hardware concurrency

    void validate() const {
        if (p_grid.empty()) throw std::invalid_argument("config: noise grid is empty");
        for (double p : p_grid)
            if (p < 0 || p >= 0.5) throw std::invalid_argument("config: p must lie in [0, 1/2)");
        if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
        if (experiment != "prepare-x" && experiment != "prepare-z" && experiment != "full" &&
            experiment != "baseline")
            throw std::invalid_argument("config: unknown experiment '" + experiment + "'");
        if (thickening.type != "rep" && thickening.type != "star")
            throw std::invalid_argument("config: unknown thickening type '" + thickening.type + "'");
        if (experiment == "baseline" && thickening.type != "rep")
            throw std::invalid_argument("config: the baseline is defined for repetition rounds only");
    }
};

inline json to_json(const ClassicalSpec& c) {
    json j{{"type", c.type}};
    if (c.type == "rep") {
        j["ell"] = c.ell;
    } else {
        j["n"] = c.n;
        j["col_deg"] = c.col_deg;
        j["row_deg"] = c.row_deg;
        j["seed"] = c.seed;
        if (c.require_full_rank) j["require_full_rank"] = true;
        if (c.require_distance) j["require_distance"] = *c.require_distance;
    }
    return j;
}
inline ClassicalSpec classical_from_json(const json& j) {
    ClassicalSpec c;
    c.type = j.value("type", "ldpc");
    if (c.type == "rep") {
        c.ell = j.at("ell").get<std::size_t>();
    } else if (c.type == "ldpc") {
        c.n = j.at("n").get<std::size_t>();
        c.col_deg = j.value("col_deg", std::size_t{5});
        c.row_deg = j.value("row_deg", std::size_t{6});
        c.seed = j.value("seed", std::uint64_t{0});
        c.require_full_rank = j.value("require_full_rank", false);
        if (j.contains("require_distance")) c.require_distance = j.at("require_distance").get<std::size_t>();
    } else {
        throw std::invalid_argument("config: unknown classical type '" + c.type + "'");
    }
    return c;
}

inline json to_json(const ThickeningSpec& t) {
    if (t.type == "star") return json{{"type", "star"}, {"z", t.z}, {"branch_len", t.branch_len}};
    return json{{"type", "rep"}, {"ell", t.ell}};
}
inline ThickeningSpec thickening_from_json(const json& j) {
    ThickeningSpec t;
    t.type = j.value("type", "rep");
    if (t.type == "star") {
        t.z = j.at("z").get<std::size_t>();
        t.branch_len = j.at("branch_len").get<std::size_t>();
    } else {
        t.ell = j.at("ell").get<std::size_t>();
    }
    return t;
}

inline json to_json(const RunConfig& c) {
    json j;
    if (c.bundle_path)
        j["bundle"] = *c.bundle_path;
    else
        j["classical"] = to_json(c.classical);
    j["thickening"] = to_json(c.thickening);
    j["experiment"] = c.experiment;
    j["p_grid"] = c.p_grid;
    j["trials"] = c.trials;
    j["master_seed"] = c.master_seed;
    j["decoder"] = json{{"bp_iters", c.bp_iters}, {"osd_depth", c.osd_depth}, {"llr_sat", c.llr_sat}};
    j["stage1_data_noise"] = c.stage1_data_noise;
    j["workers"] = c.workers;
    return j;
}

inline RunConfig config_from_json(const json& in) {
    // a manifest embeds the config under "config"; accept both
    const json& j = in.contains("config") ? in.at("config") : in;
    RunConfig c;
    if (j.contains("bundle"))
        c.bundle_path = j.at("bundle").get<std::string>();
    else if (j.contains("classical"))
        c.classical = classical_from_json(j.at("classical"));
    else
        throw std::invalid_argument("config: need either 'classical' or 'bundle'");
    if (j.contains("thickening")) c.thickening = thickening_from_json(j.at("thickening"));
    c.experiment = j.value("experiment", std::string("prepare-x"));
    if (!j.contains("p_grid")) throw std::invalid_argument("config: missing 'p_grid'");
    c.p_grid = j.at("p_grid").get<std::vector<double>>();
    c.trials = j.value("trials", std::size_t{1000});
    c.master_seed = j.value("master_seed", std::uint64_t{1});
    if (j.contains("decoder")) {
        const json& d = j.at("decoder");
        c.bp_iters = d.value("bp_iters", 20);
        c.osd_depth = d.value("osd_depth", 20);
        c.llr_sat = d.value("llr_sat", 30.0);
    }
    c.stage1_data_noise = j.value("stage1_data_noise", false);
    c.workers = j.value("workers", 0);
    c.validate();
    return c;
}

inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("QPREP_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// ---------------------------------------------------------------------------
// Code construction from specs
// ---------------------------------------------------------------------------

struct BuiltCode {
    ClassicalCode classical_input;  // input to the hypergraph product
    CssCode base;                   // with logical bases attached
    std::string code_id;
};

inline ClassicalCode build_classical(const ClassicalSpec& spec, std::uint64_t* seed_used = nullptr) {
    if (spec.type == "rep") return repetition_code(spec.ell);
    std::uint64_t seed = spec.seed;
    for (;; ++seed) {
        ClassicalCode c = sample_regular_ldpc(spec.n, spec.col_deg, spec.row_deg, seed);
        if (spec.require_full_rank && c.rank_h != c.h.rows()) continue;
        if (spec.require_distance) {
            auto d = distance_exhaustive(c.h);
            if (!d.is_exact() || d.value != *spec.require_distance) continue;
            c.d = d.value;
        }
        if (seed_used) *seed_used = seed;
        return c;
    }
}

inline BuiltCode build_code(const ClassicalSpec& spec) {
    BuiltCode out;
    std::uint64_t seed_used = spec.seed;
    out.classical_input = build_classical(spec, &seed_used);
    auto hgp = hypergraph_product(out.classical_input, out.classical_input);
    attach_logicals(hgp.css);
    out.base = std::move(hgp.css);
    ClassicalSpec echo = spec;
    echo.seed = seed_used;
    out.code_id = "hgp-" + echo.id();
    return out;
}

inline ClassicalCode build_thickener(const ThickeningSpec& spec) {
    if (spec.type == "star") return star_code(spec.z, spec.branch_len);
    return repetition_code(spec.ell);
}

// ---------------------------------------------------------------------------
// Bundles
// ---------------------------------------------------------------------------

inline void save_bundle(const std::string& dir, const BuiltCode& code, const ThickeningSpec* thickening) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    write_text_file(dir + "/classical.alist", to_alist(code.classical_input.h));
    write_text_file(dir + "/hx.alist", to_alist(code.base.h_x));
    write_text_file(dir + "/hz.alist", to_alist(code.base.h_z));
    write_text_file(dir + "/lx.coord", to_coord(*code.base.l_x));
    write_text_file(dir + "/lz.coord", to_coord(*code.base.l_z));

    std::ostringstream man;
    man << "bundle: qprep-code v1\n";
    man << "code_id: " << code.code_id << '\n';
    man << "classical_n: " << code.classical_input.n << '\n';
    man << "classical_k: " << code.classical_input.k << '\n';
    man << "classical_rank: " << code.classical_input.rank_h << '\n';
    man << "classical_seed: " << code.classical_input.seed << '\n';
    if (code.classical_input.d) man << "classical_d: " << *code.classical_input.d << '\n';
    man << "n: " << code.base.n << '\n';
    man << "k: " << code.base.k << '\n';
    if (thickening) {
        auto thickener = build_thickener(*thickening);
        auto thick = thicken(code.base, thickener);
        write_text_file(dir + "/thick_hx.alist", to_alist(thick.css.h_x));
        write_text_file(dir + "/thick_hz.alist", to_alist(thick.css.h_z));
        write_text_file(dir + "/thick_mz.alist", to_alist(*thick.css.m_z));
        man << "thickening: " << thickening->id() << '\n';
        man << "thick_n: " << thick.css.n << '\n';
        man << "thick_k: " << thick.css.k << '\n';
        // layout tables: qubit and Z-check coordinates as integer columns
        std::ostringstream lay;
        const ThickenedLayout& ly = thick.layout;
        lay << "# qubit kind a b   (kind 0: sheet a, position b; kind 1: layer a, check b)\n";
        for (std::size_t sheet = 0; sheet < ly.ell; ++sheet)
            for (std::size_t q = 0; q < ly.n_base; ++q) lay << ly.sheet_qubit(sheet, q) << " 0 " << sheet << ' ' << q << '\n';
        for (std::size_t c = 0; c < ly.mc; ++c)
            for (std::size_t i = 0; i < ly.mx_base; ++i) lay << ly.inter_qubit(c, i) << " 1 " << c << ' ' << i << '\n';
        lay << "# zcheck kind a b\n";
        for (std::size_t sheet = 0; sheet < ly.ell; ++sheet)
            for (std::size_t r = 0; r < ly.mz_base; ++r) lay << ly.sheet_zcheck(sheet, r) << " 0 " << sheet << ' ' << r << '\n';
        for (std::size_t c = 0; c < ly.mc; ++c)
            for (std::size_t q = 0; q < ly.n_base; ++q) lay << ly.inter_zcheck(c, q) << " 1 " << c << ' ' << q << '\n';
        write_text_file(dir + "/layout.txt", lay.str());
    }
    write_text_file(dir + "/manifest.txt", man.str());
    // machine-readable echo of the construction inputs
    json meta;
    meta["code_id"] = code.code_id;
    meta["classical"] =
        json{{"type", "ldpc"}, {"n", code.classical_input.n}, {"seed", code.classical_input.seed}};
    if (thickening) meta["thickening"] = to_json(*thickening);
    write_text_file(dir + "/bundle.json", meta.dump(2) + "\n");
}

struct LoadedBundle {
    BuiltCode code;
    std::optional<ThickeningSpec> thickening;
};

inline LoadedBundle load_bundle(const std::string& dir) {
    LoadedBundle out;
    out.code.base.h_x = from_alist(read_text_file(dir + "/hx.alist"));
    out.code.base.h_z = from_alist(read_text_file(dir + "/hz.alist"));
    CssCode rebuilt = make_css(out.code.base.h_x, out.code.base.h_z);
    rebuilt.l_x = from_coord(read_text_file(dir + "/lx.coord"));
    rebuilt.l_z = from_coord(read_text_file(dir + "/lz.coord"));
    out.code.base = std::move(rebuilt);
    out.code.classical_input = make_classical(from_alist(read_text_file(dir + "/classical.alist")));
    json meta = json::parse(read_text_file(dir + "/bundle.json"));
    out.code.code_id = meta.value("code_id", "bundle");
    if (meta.contains("thickening")) out.thickening = thickening_from_json(meta.at("thickening"));
    return out;
}

// ---------------------------------------------------------------------------
// Simulation driver
// ---------------------------------------------------------------------------

struct ResultRow {
    std::string run_id, code_id, thickening, experiment;
    double p = 0;
    std::size_t trials = 0;
    std::size_t failures_x = 0, failures_z = 0;
    double rate_x = 0, rate_z = 0, stderr_x = 0, stderr_z = 0;
    std::int64_t wall_ms = 0;
};

inline std::string csv_header() {
    return std::string("# ") + kResultsSchema +
           "\nrun_id,code_id,thickening,experiment,p,trials,failures_x,failures_z,rate_x,rate_z,stderr_x,"
           "stderr_z,wall_ms\n";
}

inline std::string csv_line(const ResultRow& r) {
    std::ostringstream os;
    os.precision(10);
    os << r.run_id << ',' << r.code_id << ',' << r.thickening << ',' << r.experiment << ',' << r.p << ','
       << r.trials << ',' << r.failures_x << ',' << r.failures_z << ',' << r.rate_x << ',' << r.rate_z << ','
       << r.stderr_x << ',' << r.stderr_z << ',' << r.wall_ms << '\n';
    return os.str();
}

inline double binomial_stderr(double rate, std::size_t n) {
    return n ? std::sqrt(rate * (1.0 - rate) / static_cast<double>(n)) : 0.0;
}

/// Runs one parameter point with a worker pool.  Per-trial randomness is
/// derived from (master seed, experiment stream, point index, trial index),
/// so results do not depend on the worker count.
inline ResultRow run_point(const RunConfig& cfg, const BuiltCode& code, const ThickenedCode* thick,
                           std::size_t point_index, double p) {
    ResultRow row;
    row.code_id = code.code_id;
    row.thickening = cfg.thickening.id();
    row.experiment = cfg.experiment;
    row.p = p;
    row.trials = cfg.trials;

    DecoderSettings ds;
    ds.bp.max_iters = cfg.bp_iters;
    ds.bp.llr_sat = cfg.llr_sat;
    ds.osd.search_depth = cfg.osd_depth;
    NoiseModel noise{p, p, cfg.master_seed};

    const std::uint64_t stream = cfg.experiment == "prepare-x"   ? 1
                                 : cfg.experiment == "prepare-z" ? 2
                                 : cfg.experiment == "full"      ? 3
                                                                 : 4;
    const int workers = resolve_workers(cfg.workers);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> fail_x{0}, fail_z{0};
    const auto t0 = std::chrono::steady_clock::now();

    auto worker = [&]() {
        std::optional<ProtocolEngine> engine;
        std::optional<BaselineEngine> baseline;
        if (cfg.experiment == "baseline")
            baseline.emplace(code.base, cfg.thickening.ell, ds, noise);
        else
            engine.emplace(*thick, ds, noise, cfg.stage1_data_noise);
        std::size_t local_x = 0, local_z = 0;
        for (;;) {
            const std::size_t trial = next.fetch_add(1);
            if (trial >= cfg.trials) break;
            Rng rng(derive_seed(cfg.master_seed, stream, point_index, trial));
            if (cfg.experiment == "baseline") {
                local_x += baseline->trial(rng) ? 1 : 0;
            } else if (cfg.experiment == "prepare-x") {
                auto v = engine->trial_prepare_plus(rng);
                local_x += std::any_of(v.begin(), v.end(), [](bool b) { return b; }) ? 1 : 0;
            } else if (cfg.experiment == "prepare-z") {
                auto res = engine->trial_collapse(rng);
                local_z += std::any_of(res.z_failures.begin(), res.z_failures.end(), [](bool b) { return b; }) ? 1 : 0;
            } else {
                auto res = engine->trial_full(rng);
                local_x += std::any_of(res.x_failures.begin(), res.x_failures.end(), [](bool b) { return b; }) ? 1 : 0;
                local_z += std::any_of(res.z_failures.begin(), res.z_failures.end(), [](bool b) { return b; }) ? 1 : 0;
            }
        }
        fail_x += local_x;
        fail_z += local_z;
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    row.failures_x = fail_x.load();
    row.failures_z = fail_z.load();
    row.rate_x = static_cast<double>(row.failures_x) / static_cast<double>(row.trials);
    row.rate_z = static_cast<double>(row.failures_z) / static_cast<double>(row.trials);
    row.stderr_x = binomial_stderr(row.rate_x, row.trials);
    row.stderr_z = binomial_stderr(row.rate_z, row.trials);
    row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

struct RunOutput {
    std::vector<ResultRow> rows;
    std::string results_csv;
    json manifest;
};

inline RunOutput run_simulation(const RunConfig& cfg) {
    cfg.validate();
    BuiltCode code;
    std::optional<ThickeningSpec> bundle_thickening;
    if (cfg.bundle_path) {
        LoadedBundle b = load_bundle(*cfg.bundle_path);
        code = std::move(b.code);
        bundle_thickening = b.thickening;
    } else {
        code = build_code(cfg.classical);
    }
    RunConfig effective = cfg;
    if (bundle_thickening) effective.thickening = *bundle_thickening;

    std::optional<ThickenedCode> thick;
    if (effective.experiment != "baseline") {
        thick = thicken(code.base, build_thickener(effective.thickening));
        thick->base = code.base;  // carries the logical bases
    }

    RunOutput out;
    std::ostringstream csv;
    csv << csv_header();
    const std::string run_id = "run-" + std::to_string(effective.master_seed);
    for (std::size_t pi = 0; pi < effective.p_grid.size(); ++pi) {
        ResultRow row = run_point(effective, code, thick ? &*thick : nullptr, pi, effective.p_grid[pi]);
        row.run_id = run_id;
        csv << csv_line(row);
        out.rows.push_back(std::move(row));
    }
    out.results_csv = csv.str();
    out.manifest = json{{"manifest", "qprep-run v1"},
                        {"run_id", run_id},
                        {"code_id", code.code_id},
                        {"config", to_json(effective)}};
    return out;
}

// ---------------------------------------------------------------------------
// Plot data
// ---------------------------------------------------------------------------

/// Reshapes a results CSV into long-format series for external plotting:
/// one series per (code, thickening, sector), sorted by p.
inline std::string emit_plot_data(const std::string& results_csv, const std::string& group_by = "thickening") {
    std::istringstream in(results_csv);
    std::string line;
    if (!std::getline(in, line) || line != std::string("# ") + kResultsSchema)
        throw std::invalid_argument("plot data: unknown results schema: '" + line + "'");
    std::getline(in, line);  // column header
    struct Point {
        std::string series;
        double p, rate, err;
    };
    std::vector<Point> pts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() < 13) throw std::invalid_argument("plot data: malformed row: " + line);
        const std::string key = group_by == "code" ? f[1] : f[1] + "/" + f[2];
        pts.push_back({key + "/x", std::stod(f[4]), std::stod(f[8]), std::stod(f[10])});
        pts.push_back({key + "/z", std::stod(f[4]), std::stod(f[9]), std::stod(f[11])});
    }
    std::stable_sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        if (a.series != b.series) return a.series < b.series;
        return a.p < b.p;
    });
    std::ostringstream os;
    os.precision(10);
    os << "series,p,rate,stderr\n";
    for (const auto& pt : pts) os << pt.series << ',' << pt.p << ',' << pt.rate << ',' << pt.err << '\n';
    return os.str();
}

}  // namespace qprep
