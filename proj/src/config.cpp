#include "pedtrack/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace pedtrack {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("config: " + msg); }

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

}  // namespace

std::vector<ConfigSection> parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path.string() + "'");

    std::vector<ConfigSection> sections;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                fail(path.string() + ": line " + std::to_string(line_no) + ": unterminated section header");
            }
            ConfigSection section;
            section.name = trim(line.substr(1, line.size() - 2));
            section.line = line_no;
            if (section.name.empty()) {
                fail(path.string() + ": line " + std::to_string(line_no) + ": empty section name");
            }
            sections.push_back(std::move(section));
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            fail(path.string() + ": line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        ConfigEntry entry;
        entry.key = trim(line.substr(0, eq));
        entry.value = trim(line.substr(eq + 1));
        entry.line = line_no;
        if (entry.key.empty()) {
            fail(path.string() + ": line " + std::to_string(line_no) + ": empty key");
        }
        if (sections.empty()) {
            fail(path.string() + ": line " + std::to_string(line_no) + ": key before any [section]");
        }
        sections.back().entries.push_back(std::move(entry));
    }
    return sections;
}

long parse_long(const std::string& key, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(value.c_str(), &end, 10);
    if (errno != 0 || end == value.c_str() || *end != '\0') {
        fail("key '" + key + "': '" + value + "' is not an integer");
    }
    return v;
}

double parse_double(const std::string& key, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (errno != 0 || end == value.c_str() || *end != '\0') {
        fail("key '" + key + "': '" + value + "' is not a number");
    }
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (errno != 0 || end == value.c_str() || *end != '\0' || value.find('-') != std::string::npos) {
        fail("key '" + key + "': '" + value + "' is not an unsigned integer");
    }
    return static_cast<std::uint64_t>(v);
}

namespace {

[[noreturn]] void fail_key(const std::filesystem::path& path, const ConfigEntry& entry,
                           const std::string& msg) {
    fail(path.string() + ": line " + std::to_string(entry.line) + ": key '" + entry.key + "': " + msg);
}

}  // namespace

RunConfig parse_run_config(const std::filesystem::path& path) {
    RunConfig cfg;
    bool mode_set = false;
    bool detector_set = false;
    bool threshold_set = false;

    for (const ConfigSection& section : parse_config_file(path)) {
        if (section.name == "io") {
            for (const ConfigEntry& e : section.entries) {
                if (e.key == "mode") {
                    mode_set = true;
                    if (e.value == "background") cfg.mode = RunMode::background;
                    else if (e.value == "redhat") cfg.mode = RunMode::redhat;
                    else if (e.value == "synth") cfg.mode = RunMode::synth;
                    else fail_key(path, e, "expected background, redhat or synth");
                } else if (e.key == "input_dir") cfg.input_dir = e.value;
                else if (e.key == "pattern") cfg.pattern = e.value;
                else if (e.key == "scene") cfg.scene = e.value;
                else if (e.key == "output") cfg.output = e.value;
                else if (e.key == "truth_output") cfg.truth_output = e.value;
                else if (e.key == "dump_masks") cfg.dump_masks = e.value;
                else if (e.key == "seed") cfg.seed = parse_u64(e.key, e.value);
                else fail_key(path, e, "unknown key in [io]");
            }
        } else if (section.name == "detection") {
            for (const ConfigEntry& e : section.entries) {
                if (e.key == "detector") {
                    detector_set = true;
                    if (e.value == "background") cfg.detector = DetectorMode::background;
                    else if (e.value == "redhat") cfg.detector = DetectorMode::redhat;
                    else fail_key(path, e, "expected background or redhat");
                } else if (e.key == "threshold") {
                    threshold_set = true;
                    cfg.threshold = parse_double(e.key, e.value);
                } else if (e.key == "morphology_radius") {
                    cfg.morphology_radius = static_cast<int>(parse_long(e.key, e.value));
                    if (cfg.morphology_radius < 0) fail_key(path, e, "must be >= 0");
                } else if (e.key == "min_blob_area") {
                    cfg.min_blob_area = static_cast<int>(parse_long(e.key, e.value));
                    if (cfg.min_blob_area < 0) fail_key(path, e, "must be >= 0");
                } else if (e.key == "alpha") {
                    cfg.alpha = parse_double(e.key, e.value);
                    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) fail_key(path, e, "must be in (0,1)");
                } else if (e.key == "eta") {
                    cfg.eta = parse_double(e.key, e.value);
                    if (cfg.eta < 0.0) fail_key(path, e, "must be >= 0");
                } else fail_key(path, e, "unknown key in [detection]");
            }
        } else if (section.name == "features") {
            FeatureConfig& f = cfg.features;
            for (const ConfigEntry& e : section.entries) {
                double* target = nullptr;
                bool positive = false;
                if (e.key == "w1") target = &f.w1;
                else if (e.key == "w2") target = &f.w2;
                else if (e.key == "cap_entropy") { target = &f.cap_entropy; positive = true; }
                else if (e.key == "cap_distance") { target = &f.cap_distance; positive = true; }
                else if (e.key == "cap_angle") { target = &f.cap_angle; positive = true; }
                else if (e.key == "cap_speed") { target = &f.cap_speed; positive = true; }
                else if (e.key == "weight_entropy") target = &f.weights.entropy;
                else if (e.key == "weight_distance") target = &f.weights.distance;
                else if (e.key == "weight_angle") target = &f.weights.angle;
                else if (e.key == "weight_speed") target = &f.weights.speed;
                else if (e.key == "possibility_threshold") target = &f.possibility_threshold;
                else fail_key(path, e, "unknown key in [features]");
                *target = parse_double(e.key, e.value);
                if (positive && *target <= 0.0) fail_key(path, e, "must be > 0");
                if (!positive && *target < 0.0) fail_key(path, e, "must be >= 0");
            }
        } else if (section.name == "tracker") {
            for (const ConfigEntry& e : section.entries) {
                if (e.key == "occlusion_limit") {
                    cfg.occlusion_limit = static_cast<int>(parse_long(e.key, e.value));
                    if (cfg.occlusion_limit < 0) fail_key(path, e, "must be >= 0");
                } else fail_key(path, e, "unknown key in [tracker]");
            }
        } else if (section.name == "synth") {
            for (const ConfigEntry& e : section.entries) {
                if (e.key == "match_radius") {
                    cfg.match_radius = parse_double(e.key, e.value);
                    if (cfg.match_radius <= 0.0) fail_key(path, e, "must be > 0");
                } else fail_key(path, e, "unknown key in [synth]");
            }
        } else {
            fail(path.string() + ": line " + std::to_string(section.line) + ": unknown section [" +
                 section.name + "]");
        }
    }

    if (!mode_set) fail(path.string() + ": [io] mode not set (no input source)");

    if (cfg.mode == RunMode::synth) {
        if (cfg.scene.empty()) fail(path.string() + ": synth mode requires [io] scene");
        if (!cfg.input_dir.empty()) fail(path.string() + ": synth mode does not read [io] input_dir");
    } else {
        if (cfg.input_dir.empty()) fail(path.string() + ": [io] input_dir not set (no input source)");
        if (!cfg.scene.empty()) fail(path.string() + ": [io] scene is only read in synth mode");
        const DetectorMode from_mode =
            cfg.mode == RunMode::background ? DetectorMode::background : DetectorMode::redhat;
        if (detector_set && cfg.detector != from_mode) {
            fail(path.string() + ": [detection] detector conflicts with [io] mode");
        }
        cfg.detector = from_mode;
    }

    if (!threshold_set) {
        cfg.threshold = cfg.detector == DetectorMode::background ? 25.0 : 50.0;
    }
    return cfg;
}

}  // namespace pedtrack
