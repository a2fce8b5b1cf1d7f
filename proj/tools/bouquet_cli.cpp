#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bouquet/bouquet.hpp"

namespace {

using namespace bouquet;

void print_human(const Scenario& sc, const RunReport& rep) {
    std::printf("scenario %s", sc.name.c_str());
    if (!sc.description.empty()) std::printf(": %s", sc.description.c_str());
    std::printf("\n");
    for (const CheckResult& r : rep.results) {
        std::printf("  %s  %-30s", r.pass ? "PASS" : "FAIL", r.label.c_str());
        if (std::isfinite(r.residual))
            std::printf("  residual %.6e  tolerance %s %.1e", r.residual,
                        r.lower_bound ? ">=" : "<", r.tolerance);
        if (!r.detail.empty()) std::printf("  (%s)", r.detail.c_str());
        std::printf("\n");
    }
    size_t passed = 0;
    for (const CheckResult& r : rep.results) passed += r.pass ? 1 : 0;
    std::printf("%zu/%zu checks passed\n", passed, rep.results.size());
    for (const std::string& a : rep.artifacts) std::printf("wrote %s\n", a.c_str());
}

struct Listing {
    std::string name;
    std::string description;
    std::string source;
};

std::vector<Listing> collect_listings(const std::string& registry_dir) {
    std::vector<Listing> rows;
    for (const auto& [name, desc] : builtin_scenario_descriptions())
        rows.push_back({name, desc, "built-in"});
    if (!registry_dir.empty()) {
        namespace fs = std::filesystem;
        if (!fs::is_directory(registry_dir))
            throw SchemaError(registry_dir, "not a directory");
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(registry_dir))
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const fs::path& f : files) {
            Scenario sc = parse_scenario(read_json_file(f.string()), f.string());
            rows.push_back({sc.name, sc.description, f.string()});
        }
    }
    return rows;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"equivariant parallel transport, holonomy and Chern character checks"};
    app.require_subcommand(1);

    std::string scenario_arg;
    std::string out_dir;
    std::string normalization;
    int steps = 0;
    int grid = 0;
    double tolerance_scale = 1.0;
    bool run_json = false;

    CLI::App* run = app.add_subcommand("run", "run the checks of one scenario");
    run->add_option("--scenario", scenario_arg,
                    "built-in scenario name or path to a scenario JSON file")
        ->required();
    run->add_option("--out", out_dir, "directory for report.json, timings.json and artifacts");
    run->add_option("--steps", steps, "override the transport step count of every check")
        ->check(CLI::PositiveNumber);
    run->add_option("--grid", grid, "override the grid resolution of every sampled check")
        ->check(CLI::PositiveNumber);
    run->add_option("--normalization", normalization,
                    "normalization for curvature field artifacts: raw or chern")
        ->check(CLI::IsMember({"raw", "chern"}));
    run->add_option("--tolerance-scale", tolerance_scale,
                    "multiply every upper-bound tolerance by this factor")
        ->check(CLI::PositiveNumber);
    run->add_flag("--json", run_json, "print the run report as JSON on stdout");

    std::string registry_dir;
    bool list_json = false;
    CLI::App* list = app.add_subcommand("list", "list known scenarios");
    list->add_option("--registry", registry_dir, "also list scenario files from this directory");
    list->add_flag("--json", list_json, "print the listing as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            const Scenario sc = load_scenario(scenario_arg);
            RunSettings settings;
            settings.out_dir = out_dir;
            settings.steps_override = steps;
            settings.grid_override = grid;
            settings.tolerance_scale = tolerance_scale;
            settings.normalization = normalization;
            const RunReport rep = run_scenario(sc, settings);
            if (run_json)
                std::cout << report_to_json(rep, settings).dump(2) << "\n";
            else
                print_human(sc, rep);
            return rep.all_pass ? 0 : 1;
        }
        const std::vector<Listing> rows = collect_listings(registry_dir);
        if (list_json) {
            json out = json::array();
            for (const Listing& r : rows)
                out.push_back(json{{"name", r.name}, {"description", r.description}, {"source", r.source}});
            std::cout << out.dump(2) << "\n";
        } else {
            for (const Listing& r : rows)
                std::printf("%-22s %s [%s]\n", r.name.c_str(), r.description.c_str(), r.source.c_str());
        }
        return 0;
    } catch (const SchemaError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
