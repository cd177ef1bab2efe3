#include "cinecam/checkpoint.hpp"

#include <cstring>
#include <json.hpp>
#include <string>

#include "cinecam/error.hpp"
#include "cinecam/io.hpp"

namespace cinecam {

namespace {

using nlohmann::json;

constexpr int kVersion = 1;

json ranges_json(const std::array<ChannelRange, TokenSpec::kChannels>& ranges) {
    json arr = json::array();
    for (const ChannelRange& r : ranges) arr.push_back(json::array({r.min, r.max}));
    return arr;
}

std::array<ChannelRange, TokenSpec::kChannels> ranges_of_json(const json& arr) {
    if (!arr.is_array() || arr.size() != TokenSpec::kChannels)
        throw ParseError("checkpoint: bad channel range table");
    std::array<ChannelRange, TokenSpec::kChannels> out;
    for (int c = 0; c < TokenSpec::kChannels; ++c) {
        const json& r = arr[static_cast<std::size_t>(c)];
        if (!r.is_array() || r.size() != 2) throw ParseError("checkpoint: bad channel range");
        out[static_cast<std::size_t>(c)] = {r[0].get<double>(), r[1].get<double>()};
    }
    return out;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Policy<float>& model,
                     const TokenSpec& spec) {
    json header;
    header["version"] = kVersion;
    header["desc"] = {{"vocab", model.desc().vocab},
                      {"width", model.desc().width},
                      {"blocks", model.desc().blocks},
                      {"heads", model.desc().heads},
                      {"context", model.desc().context}};
    header["spec"] = {{"absolute", ranges_json(spec.absolute)},
                      {"delta", ranges_json(spec.delta)},
                      {"fps", spec.fps}};
    header["seed"] = model.init_seed();
    header["params"] = model.params().size();

    std::string blob = header.dump() + "\n";
    const std::size_t head = blob.size();
    blob.resize(head + model.params().size() * sizeof(float));
    std::memcpy(blob.data() + head, model.params().data(),
                model.params().size() * sizeof(float));
    write_file_atomic(path, blob);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    const std::string blob = read_file(path);
    const std::size_t nl = blob.find('\n');
    if (nl == std::string::npos) throw ParseError("checkpoint: missing header line");

    json header;
    try {
        header = json::parse(blob.substr(0, nl));
    } catch (const json::exception& e) {
        throw ParseError(std::string("checkpoint: bad header: ") + e.what());
    }
    try {
        if (header.at("version").get<int>() != kVersion)
            throw ParseError("checkpoint: unsupported version");

        ModelDesc desc;
        const json& d = header.at("desc");
        desc.vocab = d.at("vocab").get<int>();
        desc.width = d.at("width").get<int>();
        desc.blocks = d.at("blocks").get<int>();
        desc.heads = d.at("heads").get<int>();
        desc.context = d.at("context").get<int>();

        TokenSpec spec;
        const json& s = header.at("spec");
        spec.absolute = ranges_of_json(s.at("absolute"));
        spec.delta = ranges_of_json(s.at("delta"));
        spec.fps = s.at("fps").get<double>();
        spec.validate();

        const auto count = header.at("params").get<std::size_t>();
        Checkpoint out{Policy<float>(desc, header.at("seed").get<std::uint64_t>()), spec};
        if (out.model.params().size() != count)
            throw ParseError("checkpoint: parameter count does not match descriptor");
        const std::size_t want = count * sizeof(float);
        if (blob.size() - nl - 1 != want)
            throw ParseError("checkpoint: truncated parameter block");
        std::memcpy(out.model.params().data(), blob.data() + nl + 1, want);
        return out;
    } catch (const json::exception& e) {
        throw ParseError(std::string("checkpoint: bad header: ") + e.what());
    }
}

}  // namespace cinecam
