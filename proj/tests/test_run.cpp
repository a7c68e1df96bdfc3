#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "qprep/bounds.hpp"
#include "qprep/run.hpp"

using namespace qprep;
namespace fs = std::filesystem;

namespace {
RunConfig tiny_config() {
    RunConfig cfg;
    cfg.classical.type = "rep";
    cfg.classical.ell = 3;
    cfg.thickening.type = "rep";
    cfg.thickening.ell = 3;
    cfg.experiment = "prepare-x";
    cfg.p_grid = {0.002, 0.02};
    cfg.trials = 120;
    cfg.master_seed = 11;
    return cfg;
}
}  // namespace

TEST_CASE("config round trip and validation") {
    RunConfig cfg = tiny_config();
    auto j = to_json(cfg);
    RunConfig back = config_from_json(j);
    CHECK(to_json(back) == j);

    SECTION("empty grid is rejected with the offending field named") {
        json bad = j;
        bad["p_grid"] = json::array();
        try {
            config_from_json(bad);
            FAIL("expected throw");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("grid") != std::string::npos);
        }
    }
    SECTION("unknown experiment is rejected") {
        json bad = j;
        bad["experiment"] = "warp";
        CHECK_THROWS_AS(config_from_json(bad), std::invalid_argument);
    }
    SECTION("manifest wrapper is accepted transparently") {
        json manifest{{"manifest", "qprep-run v1"}, {"config", j}};
        CHECK(to_json(config_from_json(manifest)) == j);
    }
}

TEST_CASE("simulation runs are deterministic across worker counts") {
    RunConfig cfg = tiny_config();
    cfg.workers = 1;
    auto a = run_simulation(cfg);
    cfg.workers = 2;
    auto b = run_simulation(cfg);
    REQUIRE(a.rows.size() == 2);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].failures_x == b.rows[i].failures_x);
        CHECK(a.rows[i].failures_z == b.rows[i].failures_z);
    }
    // byte-identical apart from the wall-time column
    auto strip_wall = [](const std::string& csv) {
        std::istringstream in(csv);
        std::string line, out;
        while (std::getline(in, line)) {
            auto pos = line.rfind(',');
            out += line.substr(0, pos) + "\n";
        }
        return out;
    };
    CHECK(strip_wall(a.results_csv) == strip_wall(b.results_csv));
}

TEST_CASE("simulation statistics fields are consistent") {
    RunConfig cfg = tiny_config();
    cfg.experiment = "full";
    cfg.trials = 60;
    auto out = run_simulation(cfg);
    for (const auto& row : out.rows) {
        CHECK(row.failures_x <= row.trials);
        CHECK(row.failures_z <= row.trials);
        CHECK(row.rate_x == Catch::Approx(double(row.failures_x) / row.trials));
        CHECK(row.stderr_x == Catch::Approx(std::sqrt(row.rate_x * (1 - row.rate_x) / row.trials)));
    }
}

TEST_CASE("bundle save and load") {
    const std::string dir = (fs::temp_directory_path() / "qprep_test_bundle").string();
    fs::remove_all(dir);
    ClassicalSpec spec;
    spec.type = "rep";
    spec.ell = 3;
    BuiltCode code = build_code(spec);
    ThickeningSpec th;
    th.type = "rep";
    th.ell = 3;
    save_bundle(dir, code, &th);
    auto loaded = load_bundle(dir);
    CHECK(loaded.code.base.h_x == code.base.h_x);
    CHECK(loaded.code.base.h_z == code.base.h_z);
    CHECK(*loaded.code.base.l_x == *code.base.l_x);
    REQUIRE(loaded.thickening.has_value());
    CHECK(loaded.thickening->ell == 3);
    // the saved thickened matrices match a reconstruction
    auto thick = thicken(loaded.code.base, build_thickener(*loaded.thickening));
    CHECK(from_alist(read_text_file(dir + "/thick_hz.alist")) == thick.css.h_z);
    fs::remove_all(dir);
}

TEST_CASE("plot data emission") {
    RunConfig cfg = tiny_config();
    auto out = run_simulation(cfg);
    SECTION("single series passes through sorted by p") {
        auto plot = emit_plot_data(out.results_csv);
        std::istringstream in(plot);
        std::string line;
        std::getline(in, line);
        CHECK(line == "series,p,rate,stderr");
        double last_p = -1;
        std::string first_series;
        while (std::getline(in, line)) {
            auto c1 = line.find(',');
            auto c2 = line.find(',', c1 + 1);
            const std::string series = line.substr(0, c1);
            const double p = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
            if (first_series.empty()) first_series = series;
            if (series == first_series) {
                CHECK(p > last_p);
                last_p = p;
            }
        }
    }
    SECTION("unknown schema versions are rejected") {
        CHECK_THROWS_AS(emit_plot_data("# qprep-results v999\nheader\n"), std::invalid_argument);
    }
    SECTION("empty results produce only the header") {
        CHECK(emit_plot_data(csv_header()) == "series,p,rate,stderr\n");
    }
}

TEST_CASE("seed search honors constraints") {
    ClassicalSpec spec;
    spec.type = "ldpc";
    spec.n = 12;
    spec.col_deg = 5;
    spec.row_deg = 6;
    spec.seed = 0;
    spec.require_full_rank = true;
    std::uint64_t used = 0;
    auto c = build_classical(spec, &used);
    CHECK(c.rank_h == c.h.rows());
    CHECK(used >= spec.seed);
}

TEST_CASE("residual bound suites pass on the 13-qubit instance") {
    auto hgp = hypergraph_product(repetition_code(3), repetition_code(3));
    attach_logicals(hgp.css);
    auto thick = thicken(hgp.css, repetition_code(3));
    thick.base = hgp.css;

    SECTION("stage-1 residual, exhaustive weight 1 plus sampled weight 2") {
        auto rep = stage1_residual_bound(thick, 1, 2, 200, 5);
        CHECK(rep.pass);
        CHECK(rep.violations == 0);
        CHECK(rep.cases > 200);
        CHECK(rep.worst_ratio <= 1.0);
    }
    SECTION("shadow residual on the base code") {
        auto rep = shadow_residual_bound(hgp.css.h_x, hgp.css.h_z, 2, 5, 5);
        CHECK(rep.pass);
    }
    SECTION("collapse residual with the shadow decoder") {
        auto rep = collapse_residual_bound(thick, 2);
        CHECK(rep.pass);
    }
    SECTION("composed protocol") {
        auto rep = composed_protocol_bound(thick, 1, 2, 100, 5);
        CHECK(rep.pass);
        CHECK(rep.violations == 0);
    }
}
