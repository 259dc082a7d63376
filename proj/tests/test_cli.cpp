#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "spinso4/report.hpp"
#include "spinso4/suites.hpp"

using namespace spinso4;
using report::Report;
using report::RunConfig;

namespace {

std::string strip_timestamp(std::string json) {
    return std::regex_replace(json, std::regex("\"timestamp\": \"[^\"]*\""),
                              "\"timestamp\": \"\"");
}

}  // namespace

TEST_CASE("config file parsing with comments, overrides and errors") {
    const std::string path = "test_cli_config.txt";
    {
        std::ofstream out(path);
        out << "# comment line\n"
            << "grid.points = 48\n"
            << "coulomb.k=0.5,0.8  # trailing comment\n"
            << "\n"
            << "grid.points=64\n";  // later assignment wins
    }
    auto cfg = RunConfig::from_file(path);
    std::remove(path.c_str());
    CHECK(cfg.get_int("grid.points", 0) == 64);
    const auto ks = cfg.get_list("coulomb.k", {});
    REQUIRE(ks.size() == 2);
    CHECK(ks[0] == 0.5);
    CHECK(ks[1] == 0.8);

    cfg.set_pair("grid.points=32");
    CHECK(cfg.get_int("grid.points", 0) == 32);
    CHECK_THROWS_AS(cfg.set_pair("no-equals-here"), report::ConfigError);
    CHECK_THROWS_AS(cfg.set_pair("=5"), report::ConfigError);

    {
        std::ofstream out(path);
        out << "valid=1\nbroken line without equals\n";
    }
    CHECK_THROWS_WITH_AS(static_cast<void>(RunConfig::from_file(path)),
                         doctest::Contains(":2"), report::ConfigError);
    std::remove(path.c_str());
}

TEST_CASE("config typed accessors") {
    RunConfig cfg;
    cfg.set_pair("a.b=2.5");
    CHECK(cfg.get_double("a.b", 0.0) == 2.5);
    CHECK(cfg.get_double("missing", 7.0) == 7.0);
    CHECK_THROWS_AS(cfg.get_int("a.b", 0), report::ConfigError);
    cfg.set_pair("a.c=oops");
    CHECK_THROWS_AS(cfg.get_double("a.c", 0.0), report::ConfigError);
    cfg.set_pair("seed=123");
    CHECK(cfg.get_seed() == 123);
    cfg.set_pair("grid.ladder=32,48,64");
    const auto lad = cfg.grid_ladder();
    CHECK(lad == std::vector<int>{32, 48, 64});
    cfg.set_pair("grid.ladder=48,32");
    CHECK_THROWS_AS(cfg.grid_ladder(), report::ConfigError);
}

TEST_CASE("report round trip, csv rows, text anchors") {
    Report rep;
    rep.timestamp = "2000-01-01T00:00:00Z";
    rep.config_echo["suites"] = "ks";
    rep.environment["compiler"] = "test";
    rep.add("ks", "gamma_identity", "Gamma Gamma^dag = u^2", 1e-14, 1e-12);
    rep.add("ks", "failing_check", "deliberate failure", 0.5, 1e-12);
    rep.add_flag("ks", "flagged", "informational entry", 3.0, true);

    CHECK(rep.total() == 3);
    CHECK(rep.failed() == 1);
    CHECK(!rep.all_pass());

    const std::string json = rep.to_json();
    const Report back = Report::from_json(json);
    CHECK(back.to_json() == json);  // lossless round trip
    CHECK(back.records.size() == 3);
    CHECK(back.records[1].pass == false);

    const std::string csv = rep.to_csv();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 rows

    const std::string text = rep.to_text();
    CHECK(text.find("Gamma Gamma^dag = u^2") != std::string::npos);
    CHECK(text.find("FAIL") != std::string::npos);
}

TEST_CASE("emit writes the requested format and rejects unknown ones") {
    Report rep;
    rep.timestamp = "2000-01-01T00:00:00Z";
    rep.add("ks", "x", "anchor", 0.0, 1.0);
    const std::string dir = "test_cli_emit_out";
    const auto jpath = report::emit(rep, dir, "json");
    const auto cpath = report::emit(rep, dir, "csv");
    const auto tpath = report::emit(rep, dir, "text");
    CHECK(std::filesystem::exists(jpath));
    CHECK(std::filesystem::exists(cpath));
    CHECK(std::filesystem::exists(tpath));
    CHECK_THROWS_AS(report::emit(rep, dir, "yaml"), report::ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("suite selection validates names and rejects empty lists") {
    RunConfig cfg;
    cfg.set_pair("suites=nonsense");
    CHECK_THROWS_AS(suites::run(cfg), report::ConfigError);
    cfg.set_pair("suites=,");
    CHECK_THROWS_AS(suites::run(cfg), report::ConfigError);
}

TEST_CASE("ks suite is deterministic for a fixed seed") {
    RunConfig cfg;
    cfg.set_pair("suites=ks");
    cfg.set_pair("ks.sweep=2000");
    cfg.set_pair("ks.bridge_n_max=10");
    cfg.set_pair("seed=42");
    const auto a = suites::run(cfg);
    const auto b = suites::run(cfg);
    CHECK(strip_timestamp(a.to_json()) == strip_timestamp(b.to_json()));
    CHECK(a.all_pass());

    cfg.set_pair("seed=43");
    const auto c = suites::run(cfg);
    CHECK(c.all_pass());
}

TEST_CASE("spectrum suite passes on a reduced matrix") {
    RunConfig cfg;
    cfg.set_pair("suites=spectrum");
    cfg.set_pair("coulomb.k=0.8");
    cfg.set_pair("spectrum.n_max=2");
    const auto rep = suites::run(cfg);
    CHECK(rep.all_pass());
    bool saw = false;
    for (const auto& r : rep.records)
        if (r.check.rfind("closed_vs_radial", 0) == 0) {
            saw = true;
            CHECK(r.tol == 1e-5);
        }
    CHECK(saw);
}
