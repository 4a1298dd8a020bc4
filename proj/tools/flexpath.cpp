#include "flexpath/cli/commands.hpp"
#include "flexpath/cli/config.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv)
{
    namespace fc = flexpath::cli;

    CLI::App app{"Deformation, modal and safety analysis of a flexible piece carried by a robot arm"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = ".";
    bool quiet = false;
    app.add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "directory receiving the artifacts")->capture_default_str();
    app.add_flag("--quiet", quiet, "suppress progress lines on standard output");

    const std::pair<const char*, const char*> descriptions[] = {
        {"simulate", "displacement and stress history along the trajectory (CSV + summary JSON)"},
        {"static", "static deflection and stress of the final pose held at rest (CSV)"},
        {"modal", "characteristic roots, natural frequencies and mode shapes (JSON)"},
        {"plate", "quasi-static plate deflection, moments and von Mises stress (CSV + JSON)"},
        {"check", "safety report against the configured limits (JSON; exit 3 on failure)"},
        {"mintime", "shortest admissible trajectory duration (JSON; exit 4 if infeasible)"},
        {"sweep", "simulation summaries over a parameter grid (per-run JSON + CSV index)"},
    };
    for (const auto& [name, help] : descriptions) {
        app.add_subcommand(name, help);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return fc::UsageError;
    }

    const std::string subcommand = app.get_subcommands().front()->get_name();
    fc::RunConfig config;
    try {
        config = fc::parse_config(config_path);
    } catch (const flexpath::ConfigError& e) {
        std::cerr << "flexpath: " << e.what() << '\n';
        return fc::ConfigFailure;
    }
    return fc::run(subcommand, config, fc::RunOptions{out_dir, quiet});
}
