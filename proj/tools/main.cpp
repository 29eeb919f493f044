#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Fedosov quantization and Einstein-Finsler solution toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config;
    fedq::cli::Overrides o;
    std::string out;
    double tolerance = 0;
    int jobs = 0, deg = 0;
    app.add_option("--out", out, "output directory");
    app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--tolerance", tolerance, "pass threshold")->check(CLI::PositiveNumber);
    app.add_option("--deg", deg, "Fedosov recursion depth K_max")->check(CLI::Range(3, 12));

    const char* names[][2] = {{"geometry", "nonlinear connection and symplectic form"},
                              {"quantize", "Fedosov connection, flatness certificate and star table"},
                              {"einstein", "generate and verify Einstein-Finsler solutions"},
                              {"index", "characteristic classes and solution fingerprint"},
                              {"verify", "replay a solution bundle"}};
    for (auto& [name, help] : names) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, name == std::string("verify") ? "solution bundle" : "run config")
            ->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return fedq::cli::kInputError;
    }
    if (!out.empty()) o.output = out;
    if (tolerance > 0) o.tolerance = tolerance;
    if (jobs > 0) o.jobs = jobs;
    if (deg > 0) o.deg = deg;
    return fedq::cli::run_command(app.get_subcommands().front()->get_name(), config, o, std::cerr);
}
