#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cinecam/dataset.hpp"
#include "cinecam/dpo.hpp"
#include "cinecam/model.hpp"
#include "cinecam/scoring.hpp"
#include "cinecam/tokenizer.hpp"

namespace cinecam {

/// Everything a pipeline run depends on, parsed from one versioned JSON
/// file. Every seed is explicit; nothing reads the environment. Unknown
/// JSON fields are rejected (ConfigError names the offending path) so a
/// typo cannot silently fall back to a default.
struct PipelineConfig {
    struct Seeds {
        std::uint64_t dataset = 1;
        std::uint64_t model = 2;
        std::uint64_t dpo = 3;
        std::uint64_t eval = 7;
    };
    struct Eval {
        int samples = 500;
        int prdc_k = 3;
        double temperature = 1.0;
        int top_k = 50;
        std::vector<double> beta_sweep = {0.01, 0.5, 0.9};
        int sweep_samples = 250;
        int probe_samples = 64;
    };

    std::filesystem::path out_dir = "out";
    Seeds seeds;
    DatasetSpec dataset;  // dataset.seed mirrors seeds.dataset after parsing
    int heldout = 200;
    TokenSpec token_spec = default_token_spec();
    ModelDesc model;
    PretrainHyper pretrain;
    DpoConfig dpo;  // dpo.frames mirrors dataset.frames after parsing
    Strategy strategy = Strategy::cyclic;
    std::string remote_endpoint;
    double remote_timeout_s = 10.0;
    RegressionHyper regression;
    Eval eval;

    void validate() const;
};

PipelineConfig parse_config_text(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical JSON echo of a parsed config (sorted keys); embedding it in
/// reports makes them self-describing.
std::string config_echo_json(const PipelineConfig& config);

}  // namespace cinecam
