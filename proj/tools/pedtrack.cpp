#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pedtrack/config.hpp"
#include "pedtrack/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"blob-based pedestrian tracker: frames in, trajectory table out"};

    std::string config_path;
    std::string out_path;
    std::string dump_dir;
    std::uint64_t seed = 0;

    app.add_option("--config", config_path, "run configuration file")->required();
    CLI::Option* out_opt = app.add_option("--out", out_path, "trajectory CSV path (overrides config)");
    CLI::Option* dump_opt =
        app.add_option("--dump-masks", dump_dir, "directory for per-frame mask dumps (overrides config)");
    CLI::Option* seed_opt = app.add_option("--seed", seed, "noise seed (overrides config)");

    CLI11_PARSE(app, argc, argv);

    try {
        pedtrack::RunConfig config = pedtrack::parse_run_config(config_path);
        if (out_opt->count() > 0) config.output = out_path;
        if (dump_opt->count() > 0) config.dump_masks = dump_dir;
        if (seed_opt->count() > 0) config.seed = seed;

        const pedtrack::RunResult result = pedtrack::run(config);
        std::cout << "frames: " << result.frames << "\n";
        std::cout << "tracks: " << result.tracks << "\n";
        if (!result.report.empty()) std::cout << result.report;
        std::cout << "wrote " << config.output.string() << "\n";
        return 0;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}
