#include <CLI11.hpp>
#include <exception>
#include <iostream>
#include <string>

#include "cinecam/config.hpp"
#include "cinecam/error.hpp"
#include "cinecam/pipeline.hpp"
#include "cinecam/rng.hpp"

namespace {

// exit codes: 0 success, 1 usage/config problem, 2 runtime failure

int run(const cinecam::PipelineConfig& config, cinecam::Stage stage, int threads) {
    try {
        cinecam::run_stage(config, stage, threads);
        return 0;
    } catch (const cinecam::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic camera-trajectory pipeline: synthesize, train, evaluate"};
    std::string stage_name, config_path, out_dir, strategy_name, endpoint;
    double beta = -1.0;
    std::int64_t seed_override = -1;
    int threads = 0;

    app.add_option("stage", stage_name,
                   "one of: synth pretrain sample preview score pairs dpo eval all")
        ->required();
    app.add_option("--config", config_path, "pipeline config JSON")->required();
    app.add_option("--out", out_dir, "override the output directory");
    app.add_option("--strategy", strategy_name, "override the scoring strategy")
        ->check(CLI::IsMember({"tag", "regression", "cyclic", "remote"}));
    app.add_option("--beta", beta, "override the preference-loss beta");
    app.add_option("--seed-override", seed_override,
                   "re-derive every seed from this value (whole-run replication)");
    app.add_option("--remote-endpoint", endpoint, "override the remote scorer URL");
    app.add_option("--threads", threads, "worker threads (0 = hardware)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // help/version exit clean
    }

    cinecam::PipelineConfig config;
    cinecam::Stage stage;
    try {
        stage = cinecam::stage_from_string(stage_name);
        config = cinecam::load_config(config_path);
        if (!out_dir.empty()) config.out_dir = out_dir;
        if (!strategy_name.empty()) config.strategy = cinecam::strategy_from_string(strategy_name);
        if (beta >= 0.0) config.dpo.beta = beta;
        if (!endpoint.empty()) config.remote_endpoint = endpoint;
        if (seed_override >= 0) {
            const auto base = static_cast<std::uint64_t>(seed_override);
            config.seeds.dataset = cinecam::mix_seed(base, 0);
            config.seeds.model = cinecam::mix_seed(base, 1);
            config.seeds.dpo = cinecam::mix_seed(base, 2);
            config.seeds.eval = cinecam::mix_seed(base, 3);
            config.dataset.seed = config.seeds.dataset;
        }
        config.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    return run(config, stage, threads);
}
