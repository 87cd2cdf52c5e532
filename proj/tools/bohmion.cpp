#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "bohmion/config.hpp"
#include "bohmion/error.hpp"
#include "bohmion/kernels.hpp"
#include "bohmion/runner.hpp"

namespace {

// Worker count comes from the environment only.
void apply_worker_env() {
    const char* env = std::getenv("BOHMION_WORKERS");
    if (env == nullptr || *env == '\0') {
        return;
    }
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1) {
        throw bohmion::Error(bohmion::ErrorKind::validation,
                             std::string("BOHMION_WORKERS must be a positive integer, got '") + env + "'");
    }
    bohmion::kernels::set_worker_count(static_cast<int>(n));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bohmian trajectory analysis of a two-electron soft-core molecule"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir;
    const char* commands[] = {"relax", "propagate", "trajectories", "sweep", "appendix-demo"};
    const char* help[] = {"relax field-free eigenstates", "propagate the ground state and write snapshots",
                          "one run with all seeds traced", "P(R) over the R x intensity grid",
                          "analytic Gaussian-pair trajectories"};
    for (int i = 0; i < 5; ++i) {
        auto* sub = app.add_subcommand(commands[i], help[i]);
        sub->add_option("--config", config_path, "flat key = value config file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        apply_worker_env();
        const auto command = bohmion::parse_command(app.get_subcommands().front()->get_name());
        bohmion::RunConfig config = bohmion::load_config(config_path);
        if (!out_dir.empty()) {
            config.output_dir = out_dir;
        }
        spdlog::info("{} with {} worker(s), output in {}", bohmion::to_string(command), bohmion::kernels::worker_count(),
                     config.output_dir.string());
        const auto manifest = bohmion::run_pipeline(config, command);
        spdlog::info("done in {:.1f} s, {} file(s) written", manifest.wall_seconds, manifest.files.size());
        return 0;
    } catch (const bohmion::Error& e) {
        spdlog::error("{}", e.what());
        return bohmion::exit_code_for(e.kind());
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
}
