#pragma once

#include <filesystem>
#include <string_view>

#include "cinecam/config.hpp"

namespace cinecam {

enum class Stage { synth, pretrain, sample, preview, score, pairs, dpo, eval, all };

std::string_view to_string(Stage s);
Stage stage_from_string(std::string_view s);

/// Every artifact location under one output directory.
struct ArtifactPaths {
    std::filesystem::path train;          // dataset/train.jsonl
    std::filesystem::path heldout;        // dataset/heldout.jsonl
    std::filesystem::path pretrain_ckpt;  // checkpoints/pretrain.ckpt
    std::filesystem::path pretrain_log;   // checkpoints/pretrain_log.json
    std::filesystem::path dpo_ckpt;       // checkpoints/dpo.ckpt
    std::filesystem::path dpo_log;        // checkpoints/dpo_log.json
    std::filesystem::path samples;        // samples/samples.jsonl
    std::filesystem::path previews_dir;   // previews/
    std::filesystem::path scores;         // scores/scores.jsonl
    std::filesystem::path pairs;          // pairs/pairs.jsonl (offline store)
    std::filesystem::path dpo_pairs;      // pairs/dpo_pairs.jsonl (pairs trained on)
    std::filesystem::path report;         // eval/report.json
    std::filesystem::path table;          // eval/table.txt
};
ArtifactPaths artifact_paths(const std::filesystem::path& out_dir);

/// Runs one stage (`all` chains every stage in dependency order). Missing
/// prerequisites raise MissingArtifact naming the file and its producing
/// stage. Artifacts are a pure function of the config: identical configs
/// give byte-identical files. threads = 0 uses hardware concurrency.
void run_stage(const PipelineConfig& config, Stage stage, int threads = 0);

}  // namespace cinecam
