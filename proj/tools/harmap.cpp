// harmap <subcommand> --config <path> [--out <dir>]

#include <harmap/cli.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv)
{
    CLI::App app{"Numerical rho-harmonic self-maps of the unit disk and their distortion estimates"};
    app.require_subcommand(1, 1);

    std::string config;
    std::string out;
    for (const char* name : {"solve", "diagnose", "rescale", "kernels"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "key = value run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory, overrides output.dir");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : harmap::cli::exit_input;
    }

    const auto subcommand = harmap::io::parse_subcommand(app.get_subcommands().front()->get_name());
    std::optional<std::filesystem::path> out_dir;
    if (!out.empty())
        out_dir = out;
    return harmap::cli::run_guarded(*subcommand, config, out_dir, std::cerr);
}
