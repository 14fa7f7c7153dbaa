#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include <decolab/config.hpp>
#include <decolab/csv.hpp>
#include <decolab/runner.hpp>

using namespace decolab;
using Catch::Approx;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("parse_config: defaults are filled and recorded") {
    const std::string text = R"({
        "model": {"omega": 0.1, "nu": 1.0},
        "time_grid": {"t_min": 0.1, "t_max": 10.0, "n_points": 5}
    })";
    const RunConfig cfg = parse_config(text, "harmonic");
    CHECK(cfg.model.omega == 0.1);
    CHECK(cfg.model.nu == 1.0);
    CHECK(cfg.model.m == 1.0);
    CHECK(cfg.model.hbar == 1.0);
    CHECK(cfg.model.d0 == 1.0);
    CHECK(cfg.model.d2 == 1.0);
    bool noted_m = false, noted_d0 = false;
    for (const auto& d : cfg.defaults_applied) {
        noted_m |= d.find("model.m") != std::string::npos;
        noted_d0 |= d.find("model.d0") != std::string::npos;
    }
    CHECK(noted_m);
    CHECK(noted_d0);
}

TEST_CASE("parse_config: unknown keys are rejected by name") {
    const std::string text = R"({"model": {"omgea": 0.1}})";
    try {
        parse_config(text, "harmonic");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("omgea") != std::string::npos);
    }
}

TEST_CASE("parse_config: grid validation") {
    const std::string text = R"({
        "model": {"omega": 0.1},
        "time_grid": {"t_min": 10.0, "t_max": 1.0}
    })";
    CHECK_THROWS_AS(parse_config(text, "harmonic"), ValidationError);
}

TEST_CASE("parse_config: complex boundary entries") {
    const std::string text = R"({
        "model": {"omega": 1.0},
        "boundary": {"t_f": 2.0, "x_i": 0.0, "xd_i": [0.5, -0.25], "x_f": 2.0, "xd_f": 0.0}
    })";
    const RunConfig cfg = parse_config(text, "saddle");
    CHECK(cfg.boundary.xd_i == Complex(0.5, -0.25));
    CHECK(cfg.boundary.x_f == Complex(2.0, 0.0));
}

TEST_CASE("parse_config: invalid JSON and command mismatch") {
    CHECK_THROWS_AS(parse_config("{not json", "harmonic"), ParseError);
    CHECK_THROWS_AS(parse_config(R"({"command": "drude"})", "harmonic"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"command": "nonsense"})", ""), ValidationError);
}

TEST_CASE("parse_config: state block") {
    const std::string text = R"({
        "model": {"omega": 0.1, "nu": 1.0},
        "time_grid": {"t_min": 0.1, "t_max": 10.0, "n_points": 3},
        "state": {"q2": 1.0, "kappa": 40.0}
    })";
    const RunConfig cfg = parse_config(text, "wavepacket");
    CHECK(cfg.initial_state().kappa() == Approx(40.0));
    CHECK_THROWS_AS(
        parse_config(R"({"state": {"q2": 1.0, "kappa": 2.0, "r2": 1.0}})", "wavepacket"),
        ValidationError);
}

TEST_CASE("coupling_scale rescales nu, d0, d2") {
    const std::string text = R"({
        "model": {"omega": 0.1, "nu": 1.0, "d0": 1.0, "d2": 1.0, "coupling_scale": 2.0},
        "time_grid": {"t_min": 0.1, "t_max": 1.0, "n_points": 2}
    })";
    const RunConfig cfg = parse_config(text, "harmonic");
    CHECK(cfg.model.nu == Approx(4.0));
    CHECK(cfg.model.d0 == Approx(4.0));
    CHECK(cfg.model.d2 == Approx(4.0));
    CHECK(cfg.model.omega == Approx(0.1));
}

TEST_CASE("format_value and emit_csv") {
    CHECK(format_value(1.0 / 3.0) == "0.33333333333333331");
    CHECK(format_value(std::numeric_limits<double>::quiet_NaN()) == "NaN");

    const auto dir = std::filesystem::temp_directory_path() / "decolab_csv_test";
    std::filesystem::create_directories(dir);

    SECTION("header-only file for empty rows") {
        const auto f = emit_csv((dir / "empty.csv").string(), {"a", "b"}, {});
        CHECK(slurp(f.path) == "a,b\n");
    }
    SECTION("deterministic content hash") {
        const std::vector<std::vector<double>> rows = {{1.0 / 3.0, 2.0}, {-0.5, 1e-30}};
        const auto f1 = emit_csv((dir / "h1.csv").string(), {"x", "y"}, rows);
        const auto f2 = emit_csv((dir / "h2.csv").string(), {"x", "y"}, rows);
        CHECK(f1.hash == f2.hash);
        CHECK(slurp(f1.path) == slurp(f2.path));
    }
    SECTION("ragged rows rejected") {
        CHECK_THROWS_AS(emit_csv((dir / "bad.csv").string(), {"a", "b"}, {{1.0}}), ValidationError);
    }
}

TEST_CASE("run: drude command produces csv + manifest") {
    const auto dir = std::filesystem::temp_directory_path() / "decolab_run_drude";
    std::filesystem::remove_all(dir);
    const std::string text = R"({
        "bath": {"kind": "drude", "lambda": 1.0, "OmegaD": 2.0, "m_B": 1.0, "T": 1.0},
        "output_dir": ")" + dir.string() + R"("
    })";
    const RunConfig cfg = parse_config(text, "drude");
    const RunManifest man = run(cfg);
    REQUIRE(man.all_ok());
    REQUIRE(man.tasks.size() == 1);
    REQUIRE(man.tasks[0].outputs.size() == 1);

    const std::string csv = slurp((dir / "drude.csv").string());
    CHECK(csv.find("delta_m,delta_omega2,k,d0,d2") == 0);
    CHECK(csv.find("-0.41666666666666669") != std::string::npos);  // d2 = -5/12

    const std::string manifest = slurp((dir / "manifest.json").string());
    const Json mj = Json::parse(manifest);
    CHECK(mj.at("tasks").size() == 1);
    CHECK(mj.at("tasks")[0].at("outputs")[0].at("fnv1a64") == man.tasks[0].outputs[0].hash);
}

TEST_CASE("run: identical config gives byte-identical csv") {
    const auto dir1 = std::filesystem::temp_directory_path() / "decolab_det1";
    const auto dir2 = std::filesystem::temp_directory_path() / "decolab_det2";
    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);
    const std::string base = R"({
        "model": {"omega": 0.1, "nu": 1.0},
        "time_grid": {"t_min": 0.01, "t_max": 30.0, "n_points": 40, "spacing": "log"},
        "output_dir": ")";
    const RunConfig c1 = parse_config(base + dir1.string() + "\"}", "harmonic");
    const RunConfig c2 = parse_config(base + dir2.string() + "\"}", "harmonic");
    const RunManifest m1 = run(c1);
    const RunManifest m2 = run(c2, 2);
    REQUIRE(m1.all_ok());
    REQUIRE(m2.all_ok());
    REQUIRE(m1.tasks[0].outputs.size() == m2.tasks[0].outputs.size());
    for (std::size_t i = 0; i < m1.tasks[0].outputs.size(); ++i)
        CHECK(m1.tasks[0].outputs[i].hash == m2.tasks[0].outputs[i].hash);
}

TEST_CASE("run: wavepacket kappa column relaxes toward its asymptote") {
    const auto dir = std::filesystem::temp_directory_path() / "decolab_wp";
    std::filesystem::remove_all(dir);
    const std::string text = R"({
        "model": {"omega": 0.1, "nu": 0.08, "d0": 0.08, "d2": 0.08},
        "time_grid": {"t_min": 1.0, "t_max": 400.0, "n_points": 12, "spacing": "log"},
        "state": {"q2": 1.0, "kappa": 40.0},
        "output_dir": ")" + dir.string() + R"("
    })";
    const RunConfig cfg = parse_config(text, "wavepacket");
    const RunManifest man = run(cfg);
    REQUIRE(man.all_ok());
    std::ifstream in((dir / "wavepacket.csv").string());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,q2,r2,s2,kappa,purity,ell_id");
    std::vector<double> kappas;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        REQUIRE(vals.size() == 7);
        kappas.push_back(vals[4]);
        ++rows;
    }
    REQUIRE(rows == 12);
    // the mixed packet ends up at the relaxed mixedness, far below kappa(t_i)
    const double kappa_inf =
        std::sqrt(asymptotic_state(cfg.model).r2_inf / asymptotic_state(cfg.model).q2_inf);
    CHECK(kappas.back() == Approx(kappa_inf).epsilon(1e-2));
    CHECK(kappas.back() < kappas.front());
}

TEST_CASE("run: figures subset fig1a has the pinned header and pole sidecar") {
    const auto dir = std::filesystem::temp_directory_path() / "decolab_fig1a";
    std::filesystem::remove_all(dir);
    const std::string text = R"({
        "figures": ["fig1a"],
        "output_dir": ")" + dir.string() + R"("
    })";
    const RunManifest man = run(parse_config(text, "figures"));
    REQUIRE(man.all_ok());
    const std::string csv = slurp((dir / "fig1a.csv").string());
    CHECK(csv.rfind("t,D_i_nu2,D_i_nu1,D_i_nu0.25", 0) == 0);
    CHECK(std::filesystem::exists(dir / "fig1a_poles.csv"));
    bool named = false;
    for (const auto& n : man.tasks[0].notes) named |= n.find("omega = 0.1") != std::string::npos;
    CHECK(named);  // manifest names the parameter set
}

TEST_CASE("run: partial completion is reported per task") {
    const auto dir = std::filesystem::temp_directory_path() / "decolab_partial";
    std::filesystem::remove_all(dir);
    // brownian command with omega != 0 fails inside the task
    const std::string text = R"({
        "model": {"omega": 0.5, "nu": 1.0},
        "time_grid": {"t_min": 0.1, "t_max": 1.0, "n_points": 3},
        "output_dir": ")" + dir.string() + R"("
    })";
    const RunManifest man = run(parse_config(text, "brownian"));
    CHECK_FALSE(man.all_ok());
    CHECK(man.tasks[0].status.rfind("failed:", 0) == 0);
}
