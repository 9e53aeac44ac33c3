#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spde/config.hpp"
#include "spde/output.hpp"

using namespace spde;

namespace {

RunConfig overridden(std::vector<std::pair<std::string, std::string>> kv) {
    std::vector<std::string> errors;
    RunConfig cfg = apply_overrides(RunConfig{}, kv, errors);
    REQUIRE(errors.empty());
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

} // namespace

TEST_CASE("numbers parse with caret notation") {
    CHECK(parse_number("0.25") == doctest::Approx(0.25));
    CHECK(parse_number("2^-6") == doctest::Approx(0.015625));
    CHECK(parse_number("2^3") == doctest::Approx(8.0));
    CHECK(parse_number("1e-3") == doctest::Approx(0.001));
    CHECK_THROWS(parse_number("fish"));
    CHECK_THROWS(parse_number("2^"));
    CHECK_THROWS(parse_number(""));
}

TEST_CASE("ini files feed the override list") {
    const std::string path = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                             "/spde_test_config.ini";
    {
        std::ofstream out(path, std::ios::trunc);
        out << "# comment\n"
            << "[model]\n"
            << "a1 = 12\n"
            << "; another comment\n"
            << "[scheme]\n"
            << "dt = 2^-6\n"
            << "noise.kappa = 2\n"   // fully qualified keys work anywhere
            << "\n";
    }
    const auto kv = read_ini_file(path);
    REQUIRE(kv.size() == 3);
    CHECK(kv[0].first == "model.a1");
    CHECK(kv[1].first == "scheme.dt");
    CHECK(kv[2].first == "noise.kappa");

    const RunConfig cfg = overridden(kv);
    CHECK(cfg.a1 == doctest::Approx(12.0));
    CHECK(cfg.dt == doctest::Approx(0.015625));
    CHECK(cfg.kappa == doctest::Approx(2.0));

    {
        std::ofstream out(path, std::ios::trunc);
        out << "no equals sign here\n";
    }
    CHECK_THROWS(read_ini_file(path));
    std::remove(path.c_str());
    CHECK_THROWS(read_ini_file("/nonexistent/spde.ini"));
}

TEST_CASE("environment variables become overrides") {
    setenv("SPDE_SCHEME_DT", "2^-5", 1);
    setenv("SPDE_MODEL_A1", "7", 1);
    const auto kv = env_overrides();
    unsetenv("SPDE_SCHEME_DT");
    unsetenv("SPDE_MODEL_A1");
    bool saw_dt = false, saw_a1 = false;
    for (const auto& [k, v] : kv) {
        if (k == "scheme.dt" && v == "2^-5") saw_dt = true;
        if (k == "model.a1" && v == "7") saw_a1 = true;
    }
    CHECK(saw_dt);
    CHECK(saw_a1);
}

TEST_CASE("unknown keys and bad values are all reported") {
    std::vector<std::string> errors;
    const RunConfig cfg = apply_overrides(
        RunConfig{},
        {{"model.a1", "6"}, {"bogus.key", "1"}, {"scheme.dt", "fish"}, {"run.seed", "3"}},
        errors);
    REQUIRE(errors.size() == 2);
    CHECK(errors[0].find("bogus.key") != std::string::npos);
    CHECK(errors[1].find("scheme.dt") != std::string::npos);
    // valid keys applied despite the failures
    CHECK(cfg.a1 == doctest::Approx(6.0));
    CHECK(cfg.seed == 3);
}

TEST_CASE("list-valued keys parse comma-separated entries") {
    const RunConfig cfg = overridden({{"experiment.dt_list", "2^-4,2^-5,2^-6"},
                                      {"experiment.n_list", "4,8,16"},
                                      {"experiment.functionals", "norm_sq,sin_norm"},
                                      {"experiment.init_scales", "-1,0,1"},
                                      {"noise.q_list", "0.5,0.25"},
                                      {"noise.kind", "explicit"}});
    REQUIRE(cfg.dt_list.size() == 3);
    CHECK(cfg.dt_list[1] == doctest::Approx(0.03125));
    REQUIRE(cfg.n_list.size() == 3);
    CHECK(cfg.n_list[2] == 16);
    REQUIRE(cfg.functionals.size() == 2);
    CHECK(cfg.functionals[0] == "norm_sq");
    REQUIRE(cfg.init_scales.size() == 3);
    REQUIRE(cfg.q_list.size() == 2);
    CHECK(cfg.noise_kind == "explicit");
}

TEST_CASE("validation collects every violation") {
    RunConfig cfg;  // defaults are valid
    CHECK(validate(cfg).empty());

    cfg.tol = -1.0;
    cfg.solver = "banana";
    const auto errs = validate(cfg);
    CHECK(errs.size() == 2);  // both problems reported at once

    RunConfig steep;
    steep.a1 = 12.0;  // dt0 becomes ~0.2347
    steep.dt = 0.5;   // violates it
    const auto derrs = validate(steep);
    REQUIRE(derrs.size() == 1);
    CHECK(derrs[0].find("scheme.dt") != std::string::npos);
    CHECK(derrs[0].find("0.2346") != std::string::npos);
}

TEST_CASE("dt_list entries are checked against dt0 and dt_ref") {
    RunConfig cfg;
    cfg.a1 = 12.0;
    cfg.dt = 0.1;
    cfg.dt_list = {0.25, 0.125};  // 0.25 > dt0 ~ 0.2347
    cfg.dt_ref = 0.0625;          // and 0.125 is a clean multiple but 0.25/0.0625=4 fine
    auto errs = validate(cfg);
    bool flagged = false;
    for (const std::string& e : errs)
        if (e.find("dt_list") != std::string::npos) flagged = true;
    CHECK(flagged);

    RunConfig cfg2;
    cfg2.dt_list = {0.03, 0.015625};  // 0.03 not a multiple of dt_ref
    auto errs2 = validate(cfg2);
    bool multiple = false;
    for (const std::string& e : errs2)
        if (e.find("multiple") != std::string::npos) multiple = true;
    CHECK(multiple);
}

TEST_CASE("canonical text and hash ignore presentation settings") {
    RunConfig a;
    RunConfig b;
    b.out_prefix = "elsewhere";
    b.workers = 8;
    CHECK(canonical_text(a) == canonical_text(b));
    CHECK(config_hash(a) == config_hash(b));

    RunConfig c;
    c.a1 = 4.0;
    CHECK(config_hash(a) != config_hash(c));
    CHECK(config_hash(a).size() == 16);

    // canonical text is sorted key=value lines
    const std::string text = canonical_text(a);
    CHECK(text.find("model.a1=") != std::string::npos);
    CHECK(text.find("run.out") == std::string::npos);
    CHECK(text.find("run.workers") == std::string::npos);
}

TEST_CASE("factories assemble experiment inputs") {
    RunConfig cfg;
    cfg.kappa = 0.5;
    const NoiseSpec spec = make_noise(cfg, 32);
    CHECK(q_coefficient(spec, 32) > 0.0);   // m_w = 0 tracks the finest level
    CHECK(q_coefficient(spec, 33) == 0.0);

    cfg.m_w = 16;
    const NoiseSpec fixed = make_noise(cfg, 32);
    CHECK(q_coefficient(fixed, 17) == 0.0);

    const auto phis = make_functionals({"norm_sq", "exp_neg_norm_sq"});
    REQUIRE(phis.size() == 2);
    CHECK(phis[0] == Functional::norm_sq);
    CHECK_THROWS(make_functionals({"unknown_phi"}));

    RunConfig erg;
    const ErgodicityParams params = make_ergodicity(erg);
    CHECK(params.inits.size() == erg.init_scales.size());
    CHECK(params.phis.size() == erg.erg_functionals.size());

    const TemporalCurveParams tp = make_temporal(erg);
    CHECK(tp.dt_list.size() == erg.dt_list.size());
    CHECK(tp.x0.coeff(1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("rate csv uses full precision and a fixed header") {
    RateTable t;
    t.rows = {{0.5, 0.125, 0.0078125, 100, RowFlag::ok},
              {0.25, 0.0625, 0.00390625, 100, RowFlag::noise_floor}};
    const std::string path = "/tmp/spde_test_rate.csv";
    write_rate_csv(path, t);
    const std::string text = slurp(path);
    CHECK(text == "h,err,se,n\n"
                  "0.5,0.125,0.0078125,100\n"
                  "0.25,0.0625,0.00390625,100\n");
    std::remove(path.c_str());
}

TEST_CASE("svg plots are self-contained and well formed") {
    RateTable t;
    t.rows = {{0.03125, 0.01, 1e-5, 100, RowFlag::ok},
              {0.015625, 0.005, 1e-5, 100, RowFlag::ok},
              {0.0078125, 0.0025, 1e-5, 100, RowFlag::ok}};
    t = fit_rate(t.rows);
    const std::string path = "/tmp/spde_test_rate.svg";
    write_rate_svg(path, "temporal weak error", {{"norm_sq", t, 1.0, true}}, "dt");
    const std::string text = slurp(path);
    CHECK(text.find("<svg") != std::string::npos);
    CHECK(text.find("</svg>") != std::string::npos);
    CHECK(text.find("polyline") != std::string::npos);
    CHECK(text.find("nan") == std::string::npos);
    CHECK(text.find("norm_sq") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("meta json is deterministic and carries no runtime fields") {
    RunConfig cfg;
    cfg.out_prefix = "/tmp/spde_test_emit";
    RateTable t;
    t.rows = {{0.5, 0.1, 1e-4, 50, RowFlag::ok},
              {0.25, 0.05, 1e-4, 50, RowFlag::ok},
              {0.125, 0.025, 1e-4, 50, RowFlag::ok}};
    t = fit_rate(t.rows);
    SolveStats stats;
    stats.solves = 100;
    stats.max_iterations = 3;
    const auto paths = emit_rate_results(cfg, "weak", {{"norm_sq", t, 0.5, true}}, stats, 0, "dt");
    REQUIRE(paths.size() == 3);

    const std::string meta = slurp(cfg.out_prefix + "_weak_meta.json");
    const auto parsed = nlohmann::json::parse(meta);
    CHECK(parsed.contains("config_hash"));
    CHECK(parsed.contains("tables"));
    CHECK(parsed["command"] == "weak");
    CHECK_FALSE(parsed.contains("elapsed"));
    CHECK_FALSE(parsed.contains("workers"));
    CHECK(meta.find("workers") == std::string::npos);

    // identical settings produce identical bytes
    const std::string first = meta;
    emit_rate_results(cfg, "weak", {{"norm_sq", t, 0.5, true}}, stats, 0, "dt");
    CHECK(slurp(cfg.out_prefix + "_weak_meta.json") == first);
    for (const auto& p : paths) std::remove(p.c_str());
}

TEST_CASE("empty tables emit a header-only csv and no plot") {
    RunConfig cfg;
    cfg.out_prefix = "/tmp/spde_test_empty";
    const RateTable t;  // no rows, no slope
    const auto paths =
        emit_rate_results(cfg, "weak", {{"norm_sq", t, 0.5, true}}, SolveStats{}, 0, "dt");
    REQUIRE(paths.size() == 2);  // csv and metadata only
    CHECK(slurp(cfg.out_prefix + "_weak_norm_sq.csv") == "h,err,se,n\n");
    CHECK_FALSE(std::ifstream(cfg.out_prefix + "_weak.svg").good());
    for (const auto& p : paths) std::remove(p.c_str());
}
