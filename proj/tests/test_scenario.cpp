#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bouquet/scenario.hpp"

using namespace bouquet;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("bouquet_scenario_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run_cli(const std::string& args, const fs::path& stdout_file) {
    const std::string cmd = std::string(BOUQUET_CLI_PATH) + " " + args + " > " +
                            stdout_file.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    REQUIRE(raw != -1);
    return WEXITSTATUS(raw);
}

} // namespace

TEST_CASE("built-in scenarios parse and are non-trivial") {
    for (const auto& [name, description] : builtin_scenario_descriptions()) {
        INFO(name);
        const Scenario sc = load_scenario(name);
        CHECK(sc.name == name);
        CHECK(!sc.description.empty());
        CHECK(!sc.blocks.empty());
        CHECK(!sc.checks.empty());
        CHECK(!description.empty());
    }
}

TEST_CASE("shipped scenario files agree with the built-in registry") {
    for (const auto& [name, description] : builtin_scenario_descriptions()) {
        INFO(name);
        const fs::path path = fs::path(BOUQUET_SCENARIO_DIR) / (name + ".json");
        REQUIRE(fs::exists(path));
        const json from_file = read_json_file(path.string());
        const json from_registry = json::parse(builtin_scenario_text(name));
        CHECK(from_file == from_registry);
        const Scenario sc = parse_scenario(from_file, path.string());
        CHECK(sc.name == name);
    }
}

TEST_CASE("scenario parsing reports schema violations with locations") {
    CHECK_THROWS_AS(parse_scenario(json::parse(R"({"blocks": [], "checks": []})")), SchemaError);

    try {
        parse_scenario(json::parse(R"({"name": "x", "blocks": [], "checks": []})"));
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.location == "/blocks");
    }

    const char* bad_group = R"({
      "name": "x",
      "blocks": [{"label": "b", "chart": {"dim": 0, "lo": [], "hi": [], "label": "b"},
                  "group": "nope", "action": {"kind": "trivial"},
                  "cocycle": {"kind": "trivial", "rank": 1}, "connection": {"kind": "zero"}}],
      "checks": []
    })";
    try {
        parse_scenario(json::parse(bad_group));
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.location == "/blocks/0/group");
        CHECK(std::string(e.what()).find("nope") != std::string::npos);
    }

    const char* no_tolerance = R"({
      "name": "x",
      "blocks": [{"label": "b", "chart": {"dim": 0, "lo": [], "hi": [], "label": "b"},
                  "group": "u1", "action": {"kind": "trivial"},
                  "cocycle": {"kind": "weights", "weights": [1]}, "connection": {"kind": "zero"}}],
      "checks": [{"kind": "cocycle-consistency"}]
    })";
    try {
        parse_scenario(json::parse(no_tolerance));
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.location == "/checks/0");
        CHECK(std::string(e.what()).find("tolerance") != std::string::npos);
    }

    const char* dup_labels = R"({
      "name": "x",
      "blocks": [{"label": "b", "chart": {"dim": 0, "lo": [], "hi": [], "label": "b"},
                  "group": "u1", "action": {"kind": "trivial"},
                  "cocycle": {"kind": "weights", "weights": [1]}, "connection": {"kind": "zero"}}],
      "checks": [{"kind": "cocycle-consistency", "label": "c", "tolerance": 1e-9},
                 {"kind": "cocycle-consistency", "label": "c", "tolerance": 1e-9}]
    })";
    CHECK_THROWS_AS(parse_scenario(json::parse(dup_labels)), SchemaError);
}

TEST_CASE("unknown check kinds surface when the check runs") {
    const char* text = R"({
      "name": "x",
      "blocks": [{"label": "b", "chart": {"dim": 0, "lo": [], "hi": [], "label": "b"},
                  "group": "u1", "action": {"kind": "trivial"},
                  "cocycle": {"kind": "weights", "weights": [1]}, "connection": {"kind": "zero"}}],
      "checks": [{"kind": "bogus", "tolerance": 1.0}]
    })";
    const Scenario sc = parse_scenario(json::parse(text));
    CHECK_THROWS_AS(run_scenario(sc, RunSettings{}), SchemaError);
}

TEST_CASE("the point scenario passes all of its checks in-process") {
    const Scenario sc = load_scenario("point-u1-weights");
    RunSettings st;
    st.out_dir = fresh_dir("pt").string();
    const RunReport rep = run_scenario(sc, st);
    CHECK(rep.all_pass);
    REQUIRE(rep.results.size() == sc.checks.size());
    for (const CheckResult& r : rep.results) {
        INFO(r.label << " residual " << r.residual);
        CHECK(r.pass);
    }
    CHECK(fs::exists(fs::path(st.out_dir) / "report.json"));
    CHECK(fs::exists(fs::path(st.out_dir) / "timings.json"));
    const json report = read_json_file((fs::path(st.out_dir) / "report.json").string());
    CHECK(report["scenario"] == "point-u1-weights");
    CHECK(report["summary"]["all_pass"] == true);
    CHECK(report["checks"].size() == sc.checks.size());
}

TEST_CASE("report files are byte-identical across repeated runs") {
    const Scenario sc = load_scenario("point-u1-weights");
    RunSettings st1, st2;
    st1.out_dir = fresh_dir("det1").string();
    st2.out_dir = fresh_dir("det2").string();
    run_scenario(sc, st1);
    run_scenario(sc, st2);
    CHECK(slurp(fs::path(st1.out_dir) / "report.json") ==
          slurp(fs::path(st2.out_dir) / "report.json"));
}

TEST_CASE("tolerance scaling turns passing checks into failures") {
    const Scenario sc = load_scenario("point-u1-weights");
    RunSettings st;
    st.tolerance_scale = 1e-20;
    const RunReport rep = run_scenario(sc, st);
    CHECK(!rep.all_pass);
}

TEST_CASE("cli runs a built-in scenario and reports success") {
    const fs::path dir = fresh_dir("cli_ok");
    const int code = run_cli("run --scenario point-u1-weights --out " + (dir / "out").string(),
                             dir / "stdout.txt");
    CHECK(code == 0);
    const std::string out = slurp(dir / "stdout.txt");
    CHECK(out.find("PASS") != std::string::npos);
    CHECK(out.find("FAIL") == std::string::npos);
    CHECK(fs::exists(dir / "out" / "report.json"));
}

TEST_CASE("cli emits machine-readable reports on request") {
    const fs::path dir = fresh_dir("cli_json");
    const int code = run_cli("run --scenario point-u1-weights --json", dir / "stdout.txt");
    CHECK(code == 0);
    const json report = json::parse(slurp(dir / "stdout.txt"));
    CHECK(report["scenario"] == "point-u1-weights");
    CHECK(report["summary"]["all_pass"] == true);
}

TEST_CASE("cli exits with 1 when a check fails") {
    const fs::path dir = fresh_dir("cli_fail");
    json doc = json::parse(builtin_scenario_text("point-u1-weights"));
    doc["checks"] = json::array({json{{"kind", "cocycle-consistency"},
                                      {"label", "too-tight"},
                                      {"tolerance", 1e-30}}});
    const fs::path file = dir / "failing.json";
    write_json_file(file.string(), doc);
    const int code = run_cli("run --scenario " + file.string(), dir / "stdout.txt");
    CHECK(code == 1);
    CHECK(slurp(dir / "stdout.txt").find("FAIL") != std::string::npos);
}

TEST_CASE("cli exits with 2 on usage and schema problems") {
    const fs::path dir = fresh_dir("cli_usage");
    CHECK(run_cli("run --scenario /nonexistent/missing.json", dir / "a.txt") == 2);
    CHECK(run_cli("run --no-such-flag", dir / "b.txt") == 2);
    CHECK(run_cli("run", dir / "c.txt") == 2);

    const fs::path bad = dir / "bad.json";
    {
        std::ofstream out(bad);
        out << R"({"name": "x", "blocks": [], "checks": []})";
    }
    CHECK(run_cli("run --scenario " + bad.string(), dir / "d.txt") == 2);
    CHECK(slurp(dir / "d.txt").find("error") != std::string::npos);
}

TEST_CASE("cli lists the scenario registry") {
    const fs::path dir = fresh_dir("cli_list");
    REQUIRE(run_cli("list", dir / "stdout.txt") == 0);
    const std::string out = slurp(dir / "stdout.txt");
    for (const auto& [name, description] : builtin_scenario_descriptions())
        CHECK(out.find(name) != std::string::npos);

    REQUIRE(run_cli(std::string("list --json --registry ") + BOUQUET_SCENARIO_DIR,
                    dir / "json.txt") == 0);
    const json listing = json::parse(slurp(dir / "json.txt"));
    REQUIRE(listing.is_array());
    CHECK(listing.size() >= size_t{4});
}
