#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "pedtrack/detection.hpp"
#include "pedtrack/features.hpp"

namespace pedtrack {

// Line-oriented `key = value` file split into `[section]` blocks. Blank
// lines and lines starting with '#' are skipped. Repeated sections are kept
// in file order (scene scripts use one block per actor).
struct ConfigEntry {
    std::string key;
    std::string value;
    int line = 0;
};

struct ConfigSection {
    std::string name;
    int line = 0;
    std::vector<ConfigEntry> entries;
};

std::vector<ConfigSection> parse_config_file(const std::filesystem::path& path);

// Value parsers used by the run-config and scene-script schemas; all throw
// with the offending key on bad input.
long parse_long(const std::string& key, const std::string& value);
double parse_double(const std::string& key, const std::string& value);
std::uint64_t parse_u64(const std::string& key, const std::string& value);

enum class RunMode { background, redhat, synth };

struct RunConfig {
    RunMode mode = RunMode::redhat;

    // input: a frame directory (background/redhat) or a scene script (synth)
    std::filesystem::path input_dir;
    std::string pattern = "*.ppm";
    std::filesystem::path scene;

    std::filesystem::path output = "ntyx.csv";
    std::filesystem::path truth_output = "truth.csv";
    std::filesystem::path dump_masks;  // empty: no mask dumps
    std::uint64_t seed = 0;

    DetectorMode detector = DetectorMode::redhat;
    double threshold = 50.0;  // default 25 under the background detector
    int morphology_radius = 1;
    int min_blob_area = 20;
    double alpha = 0.95;
    double eta = 2.0;

    FeatureConfig features;
    int occlusion_limit = 10;

    double match_radius = 0.0;  // 0: use the scene's largest actor radius
};

// Reads and validates a run config. Unknown sections or keys are errors;
// missing keys take the defaults above.
RunConfig parse_run_config(const std::filesystem::path& path);

}  // namespace pedtrack
