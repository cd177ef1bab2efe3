#include "cinecam/config.hpp"

#include <initializer_list>
#include <json.hpp>
#include <string>

#include "cinecam/error.hpp"
#include "cinecam/io.hpp"

namespace cinecam {

namespace {

using nlohmann::json;

constexpr int kConfigVersion = 1;

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError(path + "." + key + ": unknown field");
    }
}

template <typename T>
void read_field(const json& obj, const std::string& path, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        obj.at(key).get_to(out);
    } catch (const json::exception&) {
        throw ConfigError(path + "." + key + ": wrong type");
    }
}

std::array<ChannelRange, TokenSpec::kChannels> read_ranges(const json& arr,
                                                           const std::string& path) {
    if (!arr.is_array() || arr.size() != TokenSpec::kChannels)
        throw ConfigError(path + ": expected " + std::to_string(TokenSpec::kChannels) +
                          " [min, max] entries");
    std::array<ChannelRange, TokenSpec::kChannels> out;
    for (int c = 0; c < TokenSpec::kChannels; ++c) {
        const json& r = arr[static_cast<std::size_t>(c)];
        if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
            throw ConfigError(path + "[" + std::to_string(c) + "]: expected [min, max]");
        out[static_cast<std::size_t>(c)] = {r[0].get<double>(), r[1].get<double>()};
    }
    return out;
}

json ranges_echo(const std::array<ChannelRange, TokenSpec::kChannels>& ranges) {
    json arr = json::array();
    for (const ChannelRange& r : ranges) arr.push_back(json::array({r.min, r.max}));
    return arr;
}

void read_weights(const json& obj, const std::string& path, const char* key,
                  std::vector<double>& out) {
    if (!obj.contains(key)) return;
    const json& arr = obj.at(key);
    if (!arr.is_array() || arr.size() != out.size())
        throw ConfigError(path + "." + key + ": expected " + std::to_string(out.size()) +
                          " weights");
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!arr[i].is_number()) throw ConfigError(path + "." + key + ": wrong type");
        out[i] = arr[i].get<double>();
    }
}

}  // namespace

void PipelineConfig::validate() const {
    if (out_dir.empty()) throw ConfigError("out_dir: must not be empty");
    if (dataset.count < 1) throw ConfigError("dataset.count: must be >= 1");
    if (heldout < 1) throw ConfigError("dataset.heldout: must be >= 1");
    if (dataset.frames < 2) throw ConfigError("dataset.frames: must be >= 2");
    if (!(dataset.fps > 0.0)) throw ConfigError("dataset.fps: must be > 0");
    if (!(dataset.aspect > 0.0)) throw ConfigError("dataset.aspect: must be > 0");
    try {
        dataset.tag_distribution.validate();
        token_spec.validate();
        model.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (pretrain.epochs < 1 || pretrain.batch < 1 || !(pretrain.lr > 0.0))
        throw ConfigError("pretrain: epochs/batch/lr out of range");
    if (dpo.candidates < 2 || dpo.passes < 1 || !(dpo.beta > 0.0) || !(dpo.lr > 0.0) ||
        !(dpo.temperature > 0.0) || dpo.top_k < 1)
        throw ConfigError("dpo: out-of-range hyperparameter");
    if (eval.samples <= eval.prdc_k || eval.prdc_k < 1)
        throw ConfigError("eval.samples: must exceed eval.prdc_k");
    if (eval.sweep_samples < 1 || eval.probe_samples < 0 || !(eval.temperature > 0.0) ||
        eval.top_k < 1)
        throw ConfigError("eval: out-of-range field");
    for (double b : eval.beta_sweep)
        if (!(b > 0.0)) throw ConfigError("eval.beta_sweep: betas must be > 0");
    if (strategy == Strategy::remote && remote_endpoint.empty())
        throw ConfigError("scorer.remote_endpoint: required for the remote strategy");
    if (regression.samples < 16 || regression.epochs < 1 || !(regression.lr > 0.0))
        throw ConfigError("scorer.regression: out-of-range field");
    const int seq = sequence_length(dataset.frames);
    if (seq > model.context)
        throw ConfigError("model.context: too small for dataset.frames (need " +
                          std::to_string(seq) + ")");
}

PipelineConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(root, "config",
               {"version", "out_dir", "seeds", "dataset", "tokenizer", "model", "pretrain",
                "dpo", "scorer", "eval"});
    if (!root.contains("version")) throw ConfigError("config.version: required");
    int version = -1;
    read_field(root, "config", "version", version);
    if (version != kConfigVersion)
        throw ConfigError("config.version: expected " + std::to_string(kConfigVersion));

    PipelineConfig c;
    std::string out_dir = c.out_dir.string();
    read_field(root, "config", "out_dir", out_dir);
    c.out_dir = out_dir;

    if (root.contains("seeds")) {
        const json& s = root["seeds"];
        check_keys(s, "seeds", {"dataset", "model", "dpo", "eval"});
        read_field(s, "seeds", "dataset", c.seeds.dataset);
        read_field(s, "seeds", "model", c.seeds.model);
        read_field(s, "seeds", "dpo", c.seeds.dpo);
        read_field(s, "seeds", "eval", c.seeds.eval);
    }
    if (root.contains("dataset")) {
        const json& d = root["dataset"];
        check_keys(d, "dataset",
                   {"count", "heldout", "frames", "fps", "aspect", "subject_height",
                    "tag_weights"});
        read_field(d, "dataset", "count", c.dataset.count);
        read_field(d, "dataset", "heldout", c.heldout);
        read_field(d, "dataset", "frames", c.dataset.frames);
        read_field(d, "dataset", "fps", c.dataset.fps);
        read_field(d, "dataset", "aspect", c.dataset.aspect);
        read_field(d, "dataset", "subject_height", c.dataset.subject.height);
        if (d.contains("tag_weights")) {
            const json& w = d["tag_weights"];
            check_keys(w, "dataset.tag_weights",
                       {"motion", "scale", "direction", "angle", "screen"});
            read_weights(w, "dataset.tag_weights", "motion", c.dataset.tag_distribution.motion);
            read_weights(w, "dataset.tag_weights", "scale", c.dataset.tag_distribution.scale);
            read_weights(w, "dataset.tag_weights", "direction",
                         c.dataset.tag_distribution.direction);
            read_weights(w, "dataset.tag_weights", "angle", c.dataset.tag_distribution.angle);
            read_weights(w, "dataset.tag_weights", "screen", c.dataset.tag_distribution.screen);
        }
    }
    if (root.contains("tokenizer")) {
        const json& t = root["tokenizer"];
        check_keys(t, "tokenizer", {"absolute", "delta"});
        if (t.contains("absolute")) c.token_spec.absolute = read_ranges(t["absolute"], "tokenizer.absolute");
        if (t.contains("delta")) c.token_spec.delta = read_ranges(t["delta"], "tokenizer.delta");
    }
    if (root.contains("model")) {
        const json& m = root["model"];
        check_keys(m, "model", {"width", "blocks", "heads", "context"});
        read_field(m, "model", "width", c.model.width);
        read_field(m, "model", "blocks", c.model.blocks);
        read_field(m, "model", "heads", c.model.heads);
        read_field(m, "model", "context", c.model.context);
    }
    if (root.contains("pretrain")) {
        const json& p = root["pretrain"];
        check_keys(p, "pretrain", {"epochs", "batch", "lr"});
        read_field(p, "pretrain", "epochs", c.pretrain.epochs);
        read_field(p, "pretrain", "batch", c.pretrain.batch);
        read_field(p, "pretrain", "lr", c.pretrain.lr);
    }
    if (root.contains("dpo")) {
        const json& d = root["dpo"];
        check_keys(d, "dpo",
                   {"beta", "candidates", "passes", "temperature", "top_k", "lr",
                    "min_score_gap"});
        read_field(d, "dpo", "beta", c.dpo.beta);
        read_field(d, "dpo", "candidates", c.dpo.candidates);
        read_field(d, "dpo", "passes", c.dpo.passes);
        read_field(d, "dpo", "temperature", c.dpo.temperature);
        read_field(d, "dpo", "top_k", c.dpo.top_k);
        read_field(d, "dpo", "lr", c.dpo.lr);
        read_field(d, "dpo", "min_score_gap", c.dpo.min_score_gap);
    }
    if (root.contains("scorer")) {
        const json& s = root["scorer"];
        check_keys(s, "scorer",
                   {"strategy", "remote_endpoint", "remote_timeout_s", "regression_samples",
                    "regression_epochs", "regression_lr"});
        if (s.contains("strategy")) {
            std::string name;
            read_field(s, "scorer", "strategy", name);
            try {
                c.strategy = strategy_from_string(name);
            } catch (const Error&) {
                throw ConfigError("scorer.strategy: unknown strategy '" + name + "'");
            }
        }
        read_field(s, "scorer", "remote_endpoint", c.remote_endpoint);
        read_field(s, "scorer", "remote_timeout_s", c.remote_timeout_s);
        read_field(s, "scorer", "regression_samples", c.regression.samples);
        read_field(s, "scorer", "regression_epochs", c.regression.epochs);
        read_field(s, "scorer", "regression_lr", c.regression.lr);
    }
    if (root.contains("eval")) {
        const json& e = root["eval"];
        check_keys(e, "eval",
                   {"samples", "prdc_k", "temperature", "top_k", "beta_sweep",
                    "sweep_samples", "probe_samples"});
        read_field(e, "eval", "samples", c.eval.samples);
        read_field(e, "eval", "prdc_k", c.eval.prdc_k);
        read_field(e, "eval", "temperature", c.eval.temperature);
        read_field(e, "eval", "top_k", c.eval.top_k);
        read_field(e, "eval", "beta_sweep", c.eval.beta_sweep);
        read_field(e, "eval", "sweep_samples", c.eval.sweep_samples);
        read_field(e, "eval", "probe_samples", c.eval.probe_samples);
    }

    c.dataset.seed = c.seeds.dataset;
    c.dpo.frames = c.dataset.frames;
    c.token_spec.fps = c.dataset.fps;
    c.validate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    return parse_config_text(read_file(path));
}

std::string config_echo_json(const PipelineConfig& c) {
    json root;
    root["version"] = kConfigVersion;
    root["out_dir"] = c.out_dir.string();
    root["seeds"] = {{"dataset", c.seeds.dataset},
                     {"model", c.seeds.model},
                     {"dpo", c.seeds.dpo},
                     {"eval", c.seeds.eval}};
    root["dataset"] = {{"count", c.dataset.count},
                       {"heldout", c.heldout},
                       {"frames", c.dataset.frames},
                       {"fps", c.dataset.fps},
                       {"aspect", c.dataset.aspect},
                       {"subject_height", c.dataset.subject.height},
                       {"tag_weights",
                        {{"motion", c.dataset.tag_distribution.motion},
                         {"scale", c.dataset.tag_distribution.scale},
                         {"direction", c.dataset.tag_distribution.direction},
                         {"angle", c.dataset.tag_distribution.angle},
                         {"screen", c.dataset.tag_distribution.screen}}}};
    root["tokenizer"] = {{"absolute", ranges_echo(c.token_spec.absolute)},
                         {"delta", ranges_echo(c.token_spec.delta)}};
    root["model"] = {{"width", c.model.width},
                     {"blocks", c.model.blocks},
                     {"heads", c.model.heads},
                     {"context", c.model.context}};
    root["pretrain"] = {{"epochs", c.pretrain.epochs},
                        {"batch", c.pretrain.batch},
                        {"lr", c.pretrain.lr}};
    root["dpo"] = {{"beta", c.dpo.beta},
                   {"candidates", c.dpo.candidates},
                   {"passes", c.dpo.passes},
                   {"temperature", c.dpo.temperature},
                   {"top_k", c.dpo.top_k},
                   {"lr", c.dpo.lr},
                   {"min_score_gap", c.dpo.min_score_gap}};
    root["scorer"] = {{"strategy", std::string(to_string(c.strategy))},
                      {"remote_endpoint", c.remote_endpoint},
                      {"remote_timeout_s", c.remote_timeout_s},
                      {"regression_samples", c.regression.samples},
                      {"regression_epochs", c.regression.epochs},
                      {"regression_lr", c.regression.lr}};
    root["eval"] = {{"samples", c.eval.samples},
                    {"prdc_k", c.eval.prdc_k},
                    {"temperature", c.eval.temperature},
                    {"top_k", c.eval.top_k},
                    {"beta_sweep", c.eval.beta_sweep},
                    {"sweep_samples", c.eval.sweep_samples},
                    {"probe_samples", c.eval.probe_samples}};
    return root.dump(2);
}

}  // namespace cinecam
