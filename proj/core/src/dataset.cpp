#include "cinecam/dataset.hpp"

#include <json.hpp>

#include "cinecam/caption.hpp"
#include "cinecam/error.hpp"
#include "cinecam/io.hpp"
#include "cinecam/parallel.hpp"

namespace cinecam {

using nlohmann::json;

void TagDistribution::validate() const {
    auto check = [](const std::vector<double>& w, int n, const char* name) {
        if (static_cast<int>(w.size()) != n)
            throw DomainError(std::string("tag_distribution.") + name + ": wrong length");
        double sum = 0.0;
        for (double x : w) {
            if (x < 0.0)
                throw DomainError(std::string("tag_distribution.") + name +
                                  ": negative weight");
            sum += x;
        }
        if (sum <= 0.0)
            throw DomainError(std::string("tag_distribution.") + name + ": zero sum");
    };
    check(motion, kMotionCount, "motion");
    check(scale, kScaleCount, "scale");
    check(direction, kDirectionCount, "direction");
    check(angle, kAngleCount, "angle");
    check(screen, kScreenCount, "screen");
}

ShotTags random_shot_tags(Rng& rng, const TagDistribution& dist) {
    ShotTags tags;
    tags.motion = static_cast<Motion>(rng.weighted(dist.motion));
    tags.scale = static_cast<Scale>(rng.weighted(dist.scale));
    tags.direction = static_cast<Direction>(rng.weighted(dist.direction));
    tags.angle = static_cast<Angle>(rng.weighted(dist.angle));
    tags.screen = static_cast<ScreenPos>(rng.weighted(dist.screen));
    return tags;
}

std::vector<DatasetRecord> synth_dataset(const DatasetSpec& spec, int threads) {
    if (spec.count < 1) throw DomainError("synth_dataset: count must be positive");
    spec.subject.validate();
    spec.tag_distribution.validate();
    std::vector<DatasetRecord> out(static_cast<std::size_t>(spec.count));
    SynthOptions opts;
    opts.aspect = spec.aspect;

    parallel_for(
        static_cast<std::size_t>(spec.count),
        [&](std::size_t i) {
            Rng rng(spec.seed, i);
            DatasetRecord rec;
            bool done = false;
            for (int redraw = 0; redraw < 64 && !done; ++redraw) {
                const ShotTags tags = random_shot_tags(rng, spec.tag_distribution);
                const std::uint64_t traj_seed = rng.next_u64();
                const std::uint64_t cap_seed = rng.next_u64();
                try {
                    rec.trajectory = synth_trajectory(tags, spec.frames, spec.fps,
                                                      spec.subject, traj_seed, opts);
                } catch (const InfeasibleTags&) {
                    continue;
                }
                rec.tags = tags;
                rec.seed = traj_seed;
                rec.fps = spec.fps;
                rec.caption = caption_from_tags(tags, cap_seed);
                done = true;
            }
            if (!done) throw InfeasibleTags("synth_dataset: record " + std::to_string(i));
            out[i] = std::move(rec);
        },
        threads);
    return out;
}

std::string dataset_record_json(const DatasetRecord& rec) {
    json tags = {{"motion", to_string(rec.tags.motion)},
                 {"scale", to_string(rec.tags.scale)},
                 {"direction", to_string(rec.tags.direction)},
                 {"angle", to_string(rec.tags.angle)},
                 {"screen", to_string(rec.tags.screen)}};
    json traj = json::array();
    for (const CameraPose& p : rec.trajectory.poses) {
        traj.push_back({p.translation.x(), p.translation.y(), p.translation.z(),
                        p.rotation.w(), p.rotation.x(), p.rotation.y(), p.rotation.z(),
                        p.fov});
    }
    json rec_json = {{"caption", rec.caption},
                     {"fps", rec.fps},
                     {"seed", rec.seed},
                     {"tags", tags},
                     {"trajectory", traj}};
    return rec_json.dump();
}

DatasetRecord dataset_record_from_json(const std::string& line) {
    json rec_json;
    try {
        rec_json = json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError(std::string("dataset record: ") + e.what());
    }
    DatasetRecord rec;
    try {
        rec.caption = rec_json.at("caption").get<std::string>();
        rec.fps = rec_json.at("fps").get<double>();
        rec.seed = rec_json.at("seed").get<std::uint64_t>();
        const json& tags = rec_json.at("tags");
        rec.tags.motion = motion_from_string(tags.at("motion").get<std::string>());
        rec.tags.scale = scale_from_string(tags.at("scale").get<std::string>());
        rec.tags.direction = direction_from_string(tags.at("direction").get<std::string>());
        rec.tags.angle = angle_from_string(tags.at("angle").get<std::string>());
        rec.tags.screen = screen_from_string(tags.at("screen").get<std::string>());
        rec.trajectory.fps = rec.fps;
        rec.trajectory.frame = Frame::SubjectLocal;
        for (const json& row : rec_json.at("trajectory")) {
            if (row.size() != 8) throw ParseError("dataset record: pose row needs 8 values");
            CameraPose pose;
            pose.translation = Vec3(row[0].get<double>(), row[1].get<double>(),
                                    row[2].get<double>());
            pose.rotation = Quat(row[3].get<double>(), row[4].get<double>(),
                                 row[5].get<double>(), row[6].get<double>())
                                .normalized();
            pose.fov = row[7].get<double>();
            rec.trajectory.poses.push_back(pose);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("dataset record: ") + e.what());
    }
    rec.trajectory.validate();
    return rec;
}

void save_dataset_jsonl(const std::string& path, const std::vector<DatasetRecord>& records) {
    std::vector<std::string> lines;
    lines.reserve(records.size());
    for (const DatasetRecord& rec : records) lines.push_back(dataset_record_json(rec));
    write_lines_atomic(path, lines);
}

std::vector<DatasetRecord> load_dataset_jsonl(const std::string& path) {
    std::vector<DatasetRecord> out;
    for (const std::string& line : read_lines(path)) {
        out.push_back(dataset_record_from_json(line));
    }
    if (out.empty()) throw ParseError("dataset: " + path + " has no records");
    return out;
}

}  // namespace cinecam
