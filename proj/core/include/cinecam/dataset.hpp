#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cinecam/rng.hpp"
#include "cinecam/stage.hpp"
#include "cinecam/synth.hpp"
#include "cinecam/taxonomy.hpp"
#include "cinecam/trajectory.hpp"

namespace cinecam {

/// Per-dimension sampling weights; defaults are uniform. Each vector must be
/// the dimension's value count with non-negative entries summing > 0.
struct TagDistribution {
    std::vector<double> motion = std::vector<double>(kMotionCount, 1.0);
    std::vector<double> scale = std::vector<double>(kScaleCount, 1.0);
    std::vector<double> direction = std::vector<double>(kDirectionCount, 1.0);
    std::vector<double> angle = std::vector<double>(kAngleCount, 1.0);
    std::vector<double> screen = std::vector<double>(kScreenCount, 1.0);

    void validate() const;
};

struct DatasetSpec {
    int count = 2000;
    int frames = 30;
    double fps = 10.0;
    std::uint64_t seed = 1;
    SubjectProxy subject{};
    double aspect = kDefaultAspect;
    TagDistribution tag_distribution{};
};

/// One synthesized shot: a caption, the tags it was generated from, and the
/// subject-local trajectory realizing them.
struct DatasetRecord {
    std::string caption;
    ShotTags tags{};
    double fps = 10.0;
    std::uint64_t seed = 0;
    Trajectory trajectory;
};

ShotTags random_shot_tags(Rng& rng, const TagDistribution& dist = {});

/// Deterministic in spec.seed and independent of thread count: record i is a
/// pure function of (seed, i).
std::vector<DatasetRecord> synth_dataset(const DatasetSpec& spec, int threads = 0);

std::string dataset_record_json(const DatasetRecord& rec);
DatasetRecord dataset_record_from_json(const std::string& line);

void save_dataset_jsonl(const std::string& path, const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> load_dataset_jsonl(const std::string& path);

}  // namespace cinecam
