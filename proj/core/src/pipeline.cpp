#include "cinecam/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <json.hpp>
#include <set>
#include <string>
#include <vector>

#include "cinecam/checkpoint.hpp"
#include "cinecam/dpo.hpp"
#include "cinecam/error.hpp"
#include "cinecam/evaluate.hpp"
#include "cinecam/io.hpp"
#include "cinecam/parallel.hpp"
#include "cinecam/preview.hpp"
#include "cinecam/sha256.hpp"

namespace cinecam {

namespace {

using nlohmann::json;

constexpr int kSampleStageCount = 64;  // inspection samples
constexpr int kPairStagePrompts = 32;  // offline pair-store prompts
constexpr int kPreviewCount = 4;

void require(const std::filesystem::path& path, Stage producer) {
    if (!std::filesystem::exists(path))
        throw MissingArtifact("missing artifact " + path.string() + " (run stage '" +
                              std::string(to_string(producer)) + "' first)");
}

std::vector<Prompt> prompts_of_records(const std::vector<DatasetRecord>& records) {
    std::vector<Prompt> prompts;
    prompts.reserve(records.size());
    for (const DatasetRecord& r : records) prompts.push_back({r.caption, r.tags});
    return prompts;
}

ScoreContext make_score_context(const PipelineConfig& c, const RegressionScorer* scorer) {
    ScoreContext ctx;
    ctx.subject = c.dataset.subject;
    ctx.aspect = c.dataset.aspect;
    ctx.regression = scorer;
    ctx.remote_endpoint = c.remote_endpoint;
    ctx.remote_timeout_s = c.remote_timeout_s;
    return ctx;
}

/// Trains the regression scorer when (and only when) the strategy needs it.
struct ScorerBundle {
    RegressionScorer regression;
    ScoreContext ctx;
};
ScorerBundle make_scorer(const PipelineConfig& c, const ArtifactPaths& paths) {
    ScorerBundle bundle;
    if (c.strategy == Strategy::regression) {
        require(paths.train, Stage::synth);
        const auto records = load_dataset_jsonl(paths.train.string());
        bundle.regression = train_regression_scorer(records, c.regression, c.seeds.dpo);
        bundle.ctx = make_score_context(c, &bundle.regression);
    } else {
        bundle.ctx = make_score_context(c, nullptr);
    }
    return bundle;
}

json report_json(const EvalReport& r) {
    return {{"frechet", r.frechet},     {"semantic_score", r.semantic_score},
            {"precision", r.precision}, {"recall", r.recall},
            {"density", r.density},     {"coverage", r.coverage},
            {"miss_rate", r.miss_rate}};
}

void stage_synth(const PipelineConfig& c, const ArtifactPaths& paths, int threads) {
    DatasetSpec spec = c.dataset;
    spec.count = c.dataset.count + c.heldout;
    const std::vector<DatasetRecord> records = synth_dataset(spec, threads);
    const std::vector<DatasetRecord> train(records.begin(),
                                           records.begin() + c.dataset.count);
    const std::vector<DatasetRecord> heldout(records.begin() + c.dataset.count,
                                             records.end());
    save_dataset_jsonl(paths.train.string(), train);
    save_dataset_jsonl(paths.heldout.string(), heldout);
    std::cerr << "synth: " << train.size() << " train + " << heldout.size()
              << " held-out records\n";
}

void stage_pretrain(const PipelineConfig& c, const ArtifactPaths& paths, int threads) {
    require(paths.train, Stage::synth);
    const auto records = load_dataset_jsonl(paths.train.string());
    std::vector<TokenizedTrajectory> data;
    data.reserve(records.size());
    long long clamped = 0;
    for (const DatasetRecord& r : records) {
        data.push_back(tokenize(r.trajectory, PartialShotTags::from(r.tags), c.token_spec));
        clamped += data.back().clamp_count;
    }

    Policy<float> model(c.model, c.seeds.model);
    const std::vector<double> losses = pretrain(model, data, c.pretrain, c.seeds.model, threads);
    save_checkpoint(paths.pretrain_ckpt, model, c.token_spec);

    json log;
    log["epoch_loss"] = losses;
    log["clamped_values"] = clamped;
    log["sequences"] = data.size();
    write_file_atomic(paths.pretrain_log, log.dump(2) + "\n");
    std::cerr << "pretrain: loss " << losses.front() << " -> " << losses.back() << " over "
              << losses.size() << " epochs\n";
}

void stage_sample(const PipelineConfig& c, const ArtifactPaths& paths, int threads) {
    require(paths.pretrain_ckpt, Stage::pretrain);
    require(paths.heldout, Stage::synth);
    const Checkpoint ckpt = load_checkpoint(paths.pretrain_ckpt);
    const auto heldout = load_dataset_jsonl(paths.heldout.string());

    const std::size_t n = std::min<std::size_t>(kSampleStageCount, heldout.size());
    std::vector<DatasetRecord> out(n);
    parallel_for(
        n,
        [&](std::size_t i) {
            const std::uint64_t seed = mix_seed(c.seeds.eval, 0x3a3e00 + i);
            const TokenizedTrajectory seq =
                sample_trajectory(ckpt.model, PartialShotTags::from(heldout[i].tags),
                                  c.dataset.frames, c.eval.temperature, c.eval.top_k, seed);
            out[i] = DatasetRecord{heldout[i].caption, heldout[i].tags, c.dataset.fps, seed,
                                   detokenize(seq.tokens, ckpt.spec)};
        },
        threads);
    save_dataset_jsonl(paths.samples.string(), out);
    std::cerr << "sample: " << n << " draws from the pretrained policy\n";
}

void stage_preview(const PipelineConfig& c, const ArtifactPaths& paths, int) {
    require(paths.samples, Stage::sample);
    const auto samples = load_dataset_jsonl(paths.samples.string());
    const std::size_t n = std::min<std::size_t>(kPreviewCount, samples.size());
    PreviewOptions opts;
    opts.width = 160;
    opts.height = 90;
    for (std::size_t i = 0; i < n; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "sample_%02zu", i);
        emit_preview(samples[i].trajectory, c.dataset.subject, c.dataset.aspect,
                     paths.previews_dir / name, opts);
    }
    std::cerr << "preview: wrote frames for " << n << " samples\n";
}

void stage_score(const PipelineConfig& c, const ArtifactPaths& paths, int) {
    require(paths.samples, Stage::sample);
    const auto samples = load_dataset_jsonl(paths.samples.string());
    const ScorerBundle scorer = make_scorer(c, paths);

    std::vector<std::string> lines;
    lines.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Prompt prompt{samples[i].caption, samples[i].tags};
        const ScoreRecord rec =
            score_candidates(prompt, {samples[i].trajectory}, c.strategy, scorer.ctx)[0];
        json j;
        j["index"] = i;
        j["strategy"] = std::string(to_string(rec.strategy));
        j["value"] = rec.value;
        j["caption"] = rec.caption;
        lines.push_back(j.dump());
    }
    write_lines_atomic(paths.scores, lines);
    std::cerr << "score: " << lines.size() << " samples under strategy "
              << to_string(c.strategy) << "\n";
}

void stage_pairs(const PipelineConfig& c, const ArtifactPaths& paths, int threads) {
    require(paths.pretrain_ckpt, Stage::pretrain);
    require(paths.heldout, Stage::synth);
    const Checkpoint ckpt = load_checkpoint(paths.pretrain_ckpt);
    const auto heldout = load_dataset_jsonl(paths.heldout.string());
    const ScorerBundle scorer = make_scorer(c, paths);
    const double min_gap =
        c.dpo.min_score_gap < 0.0 ? default_score_gap(c.strategy) : c.dpo.min_score_gap;

    const std::size_t n_prompts = std::min<std::size_t>(kPairStagePrompts, heldout.size());
    const auto n_cand = static_cast<std::size_t>(c.dpo.candidates);
    std::vector<PreferencePair> store;
    for (std::size_t i = 0; i < n_prompts; ++i) {
        const Prompt prompt{heldout[i].caption, heldout[i].tags};
        const PartialShotTags cond = PartialShotTags::from(heldout[i].tags);
        std::vector<TokenizedTrajectory> cands(n_cand);
        parallel_for(
            n_cand,
            [&](std::size_t k) {
                cands[k] = sample_trajectory(ckpt.model, cond, c.dataset.frames,
                                             c.dpo.temperature, c.dpo.top_k,
                                             mix_seed(c.seeds.dpo, 0xa17000 + i * n_cand + k));
            },
            threads);
        std::vector<Trajectory> trajs;
        trajs.reserve(n_cand);
        for (const auto& t : cands) trajs.push_back(detokenize(t.tokens, ckpt.spec));
        try {
            auto pairs = build_preference_pairs(
                cands, score_candidates(prompt, trajs, c.strategy, scorer.ctx), min_gap);
            for (PreferencePair& p : pairs) {
                p.prompt_tags = cond;
                store.push_back(std::move(p));
            }
        } catch (const NoPairs&) {
        }
    }
    save_pairs(paths.pairs, store);
    std::cerr << "pairs: " << store.size() << " preference pairs from " << n_prompts
              << " prompts\n";
}

void stage_dpo(const PipelineConfig& c, const ArtifactPaths& paths, int threads) {
    require(paths.pretrain_ckpt, Stage::pretrain);
    require(paths.heldout, Stage::synth);
    const Checkpoint ckpt = load_checkpoint(paths.pretrain_ckpt);
    const auto heldout = load_dataset_jsonl(paths.heldout.string());
    const std::vector<Prompt> prompts = prompts_of_records(heldout);
    const ScorerBundle scorer = make_scorer(c, paths);

    std::function<double(const Policy<float>&)> probe;
    if (c.eval.probe_samples > 0) {
        probe = [&, spec = ckpt.spec](const Policy<float>& m) {
            const EvalDraw draw =
                sample_eval_draw(m, spec, prompts, c.eval.probe_samples, c.dataset.frames,
                                 c.eval.temperature, c.eval.top_k,
                                 mix_seed(c.seeds.dpo, 0xbe), threads);
            return mean_miss_rate(draw.trajectories, c.dataset.subject, c.dataset.aspect,
                                  threads);
        };
    }

    Policy<float> policy = ckpt.model;
    const DpoLogs logs = dpo_train(policy, ckpt.model, prompts, c.strategy, scorer.ctx,
                                   ckpt.spec, c.dpo, c.seeds.dpo, threads, probe);
    save_checkpoint(paths.dpo_ckpt, policy, ckpt.spec);
    save_pairs(paths.dpo_pairs, logs.pairs);

    json log;
    log["pass_mean_loss"] = logs.pass_mean_loss;
    log["pass_mean_winner_score"] = logs.pass_mean_winner_score;
    log["pass_mean_loser_score"] = logs.pass_mean_loser_score;
    log["heldout_miss_rate"] = logs.pass_probe;
    log["usable_pairs"] = logs.usable_pairs;
    log["skipped_visits"] = logs.skipped_visits;
    write_file_atomic(paths.dpo_log, log.dump(2) + "\n");
    std::cerr << "dpo: " << logs.usable_pairs << " pairs, loss "
              << logs.pass_mean_loss.front() << " -> " << logs.pass_mean_loss.back() << "\n";
}

void stage_eval(const PipelineConfig& c, const ArtifactPaths& paths, int threads) {
    require(paths.train, Stage::synth);
    require(paths.heldout, Stage::synth);
    require(paths.pretrain_ckpt, Stage::pretrain);
    require(paths.dpo_ckpt, Stage::dpo);

    const auto train = load_dataset_jsonl(paths.train.string());
    const auto heldout = load_dataset_jsonl(paths.heldout.string());
    const std::vector<Prompt> prompts = prompts_of_records(heldout);
    const Checkpoint pre = load_checkpoint(paths.pretrain_ckpt);
    const Checkpoint post = load_checkpoint(paths.dpo_ckpt);
    const ScorerBundle scorer = make_scorer(c, paths);

    std::vector<DatasetRecord> ref_records;
    for (std::size_t idx :
         sample_indices(train.size(), static_cast<std::size_t>(c.eval.samples), c.seeds.eval))
        ref_records.push_back(train[idx]);
    const std::vector<TrajFeatures> reference =
        features_of_records(ref_records, c.dataset.subject, threads);

    auto eval_model = [&](const Checkpoint& ckpt) {
        const EvalDraw draw =
            sample_eval_draw(ckpt.model, ckpt.spec, prompts, c.eval.samples, c.dataset.frames,
                             c.eval.temperature, c.eval.top_k, mix_seed(c.seeds.eval, 1),
                             threads);
        return evaluate_set(draw.trajectories, draw.prompts, reference, c.eval.prdc_k,
                            c.dataset.subject, c.dataset.aspect, threads);
    };
    const EvalReport rep_pre = eval_model(pre);
    std::cerr << "eval: pretrain miss_rate " << rep_pre.miss_rate << "\n";
    const EvalReport rep_post = eval_model(post);
    std::cerr << "eval: dpo miss_rate " << rep_post.miss_rate << "\n";

    // beta sweep: identical budgets, only beta varies; measured on one
    // shared smaller draw (the main run is measured on that draw too so the
    // sweep is internally comparable)
    auto sweep_miss = [&](const Policy<float>& model, const TokenSpec& spec) {
        const EvalDraw draw = sample_eval_draw(model, spec, prompts, c.eval.sweep_samples,
                                               c.dataset.frames, c.eval.temperature,
                                               c.eval.top_k, mix_seed(c.seeds.eval, 2), threads);
        return mean_miss_rate(draw.trajectories, c.dataset.subject, c.dataset.aspect, threads);
    };
    std::set<double> betas(c.eval.beta_sweep.begin(), c.eval.beta_sweep.end());
    betas.insert(c.dpo.beta);
    json sweep = json::array();
    for (double beta : betas) {
        double miss = 0.0;
        if (beta == c.dpo.beta) {
            miss = sweep_miss(post.model, post.spec);
        } else {
            Policy<float> policy = pre.model;
            DpoConfig conf = c.dpo;
            conf.beta = beta;
            dpo_train(policy, pre.model, prompts, c.strategy, scorer.ctx, pre.spec, conf,
                      c.seeds.dpo, threads);
            miss = sweep_miss(policy, pre.spec);
        }
        sweep.push_back({{"beta", beta}, {"miss_rate", miss}});
        std::cerr << "eval: beta " << beta << " miss_rate " << miss << "\n";
    }

    json report;
    report["config"] = json::parse(config_echo_json(c));
    report["inputs"] = {
        {"dataset/train.jsonl", sha256_hex(read_file(paths.train))},
        {"dataset/heldout.jsonl", sha256_hex(read_file(paths.heldout))},
        {"checkpoints/pretrain.ckpt", sha256_hex(read_file(paths.pretrain_ckpt))},
        {"checkpoints/dpo.ckpt", sha256_hex(read_file(paths.dpo_ckpt))}};
    report["models"] = {{"pretrain", report_json(rep_pre)}, {"dpo", report_json(rep_post)}};
    report["beta_sweep"] = sweep;
    write_file_atomic(paths.report, report.dump(2) + "\n");

    std::string table;
    char line[256];
    std::snprintf(line, sizeof(line), "%-9s %9s %9s %9s %9s %9s %9s %9s\n", "model",
                  "frechet", "semantic", "precision", "recall", "density", "coverage",
                  "miss_rate");
    table += line;
    auto row = [&](const char* name, const EvalReport& r) {
        std::snprintf(line, sizeof(line), "%-9s %9.4f %9.2f %9.3f %9.3f %9.3f %9.3f %9.3f\n",
                      name, r.frechet, r.semantic_score, r.precision, r.recall, r.density,
                      r.coverage, r.miss_rate);
        table += line;
    };
    row("pretrain", rep_pre);
    row("dpo", rep_post);
    table += "\nbeta sweep (miss_rate):";
    for (const json& entry : sweep) {
        std::snprintf(line, sizeof(line), "  %.2g=%.3f", entry["beta"].get<double>(),
                      entry["miss_rate"].get<double>());
        table += line;
    }
    table += "\n";
    write_file_atomic(paths.table, table);
}

}  // namespace

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::synth:
            return "synth";
        case Stage::pretrain:
            return "pretrain";
        case Stage::sample:
            return "sample";
        case Stage::preview:
            return "preview";
        case Stage::score:
            return "score";
        case Stage::pairs:
            return "pairs";
        case Stage::dpo:
            return "dpo";
        case Stage::eval:
            return "eval";
        case Stage::all:
            return "all";
    }
    throw Unreachable("stage name");
}

Stage stage_from_string(std::string_view s) {
    for (Stage stage : {Stage::synth, Stage::pretrain, Stage::sample, Stage::preview,
                        Stage::score, Stage::pairs, Stage::dpo, Stage::eval, Stage::all})
        if (s == to_string(stage)) return stage;
    throw DomainError("unknown stage '" + std::string(s) + "'");
}

ArtifactPaths artifact_paths(const std::filesystem::path& out_dir) {
    ArtifactPaths p;
    p.train = out_dir / "dataset" / "train.jsonl";
    p.heldout = out_dir / "dataset" / "heldout.jsonl";
    p.pretrain_ckpt = out_dir / "checkpoints" / "pretrain.ckpt";
    p.pretrain_log = out_dir / "checkpoints" / "pretrain_log.json";
    p.dpo_ckpt = out_dir / "checkpoints" / "dpo.ckpt";
    p.dpo_log = out_dir / "checkpoints" / "dpo_log.json";
    p.samples = out_dir / "samples" / "samples.jsonl";
    p.previews_dir = out_dir / "previews";
    p.scores = out_dir / "scores" / "scores.jsonl";
    p.pairs = out_dir / "pairs" / "pairs.jsonl";
    p.dpo_pairs = out_dir / "pairs" / "dpo_pairs.jsonl";
    p.report = out_dir / "eval" / "report.json";
    p.table = out_dir / "eval" / "table.txt";
    return p;
}

void run_stage(const PipelineConfig& config, Stage stage, int threads) {
    config.validate();
    const ArtifactPaths paths = artifact_paths(config.out_dir);
    switch (stage) {
        case Stage::synth:
            return stage_synth(config, paths, threads);
        case Stage::pretrain:
            return stage_pretrain(config, paths, threads);
        case Stage::sample:
            return stage_sample(config, paths, threads);
        case Stage::preview:
            return stage_preview(config, paths, threads);
        case Stage::score:
            return stage_score(config, paths, threads);
        case Stage::pairs:
            return stage_pairs(config, paths, threads);
        case Stage::dpo:
            return stage_dpo(config, paths, threads);
        case Stage::eval:
            return stage_eval(config, paths, threads);
        case Stage::all:
            for (Stage s : {Stage::synth, Stage::pretrain, Stage::sample, Stage::preview,
                            Stage::score, Stage::pairs, Stage::dpo, Stage::eval})
                run_stage(config, s, threads);
            return;
    }
    throw Unreachable("run_stage");
}

}  // namespace cinecam
