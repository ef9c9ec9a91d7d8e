#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "affgebroid/commands.hpp"

using namespace affgebroid;

int main(int argc, char** argv) {
    CLI::App app{"Nonholonomic mechanics on Lie affgebroids"};
    std::string config_path, command, out_dir, method;
    std::optional<std::uint64_t> seed;
    std::optional<double> step, t0, t1;
    bool project = false, hamiltonian = false;
    app.add_option("--config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
    app.add_option("--command", command, "simulate | check | bracket | derive (overrides run.command)");
    app.add_option("--out", out_dir, "output directory (overrides run.out)");
    app.add_option("--seed", seed, "random seed for sampled states");
    app.add_option("--step", step, "integration step (initial step for rk45)");
    app.add_option("--t0", t0, "initial time");
    app.add_option("--t1", t1, "final time");
    app.add_option("--method", method, "rk4 | rk45");
    app.add_flag("--project", project, "project onto the constraint set after every step");
    app.add_flag("--hamiltonian", hamiltonian, "integrate the Hamiltonian side");
    CLI11_PARSE(app, argc, argv);

    if (const char* lvl = std::getenv("AFFGEBROID_LOG"))
        spdlog::set_level(spdlog::level::from_str(lvl));
    else
        spdlog::set_level(spdlog::level::warn);

    try {
        Config cfg = load_config(config_path);
        RunSpec& run = cfg.run;
        if (!command.empty()) run.command = parse_command(command);
        if (!out_dir.empty()) run.out_dir = out_dir;
        if (seed) run.seed = *seed;
        if (step) run.step = *step;
        if (t0) run.t0 = *t0;
        if (t1) run.t1 = *t1;
        if (!method.empty()) run.method = parse_method(method);
        if (project) run.project = true;
        if (hamiltonian) run.hamiltonian = true;

        CommandResult res = run_command(cfg);
        std::cout << res.message << "\n";
        for (const auto& p : res.written) std::cout << "  wrote " << p.string() << "\n";
        return res.exit_code;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
