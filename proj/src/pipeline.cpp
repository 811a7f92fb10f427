#include "pedtrack/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pedtrack/detection.hpp"
#include "pedtrack/synth.hpp"
#include "pedtrack/tracker.hpp"

namespace pedtrack {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("pipeline: " + msg); }

std::filesystem::path mask_path(const std::filesystem::path& dir, int t) {
    char name[32];
    std::snprintf(name, sizeof(name), "mask_%06d.ppm", t);
    return dir / name;
}

struct PipelineRun {
    const RunConfig& cfg;
    DetectionConfig detection;
    std::optional<BackgroundModel> model;
    TrackerState tracker;
    bool dump = false;

    explicit PipelineRun(const RunConfig& config) : cfg(config) {
        detection.mode = config.detector;
        detection.threshold = config.threshold;
        detection.morphology_radius = config.morphology_radius;
        detection.min_blob_area = config.min_blob_area;
        tracker.occlusion_limit = config.occlusion_limit;
        dump = !config.dump_masks.empty();
        if (dump) std::filesystem::create_directories(config.dump_masks);
    }

    void process(const Frame& frame, int t) {
        if (detection.mode == DetectorMode::background && !model) {
            model.emplace(frame.width, frame.height, cfg.alpha, cfg.eta);
        }
        DetectionResult detected = detect(frame, t, detection, model ? &*model : nullptr);
        if (dump) save_mask(detected.mask, mask_path(cfg.dump_masks, t));
        step(tracker, detected.blobs, frame, cfg.features);
    }
};

}  // namespace

RunResult run(const RunConfig& config) {
    PipelineRun pipeline(config);
    RunResult result;
    std::vector<TruthEntry> truth;
    double match_radius = config.match_radius;

    if (config.mode == RunMode::synth) {
        const SceneScript script = load_scene_script(config.scene);
        if (match_radius <= 0.0) {
            for (const Actor& actor : script.actors) {
                match_radius = std::max(match_radius, actor.radius);
            }
            if (match_radius <= 0.0) match_radius = 1.0;
        }
        for (int t = 0; t < script.num_frames; ++t) {
            const RenderResult rendered = render(script, t, config.seed);
            pipeline.process(rendered.frame, t);
            truth.insert(truth.end(), rendered.truth.begin(), rendered.truth.end());
        }
        result.frames = static_cast<std::size_t>(script.num_frames);
    } else {
        const std::vector<std::filesystem::path> paths =
            list_frame_sequence(config.input_dir, config.pattern);
        int width = 0;
        int height = 0;
        for (std::size_t t = 0; t < paths.size(); ++t) {
            const Frame frame = load_frame(paths[t]);
            if (t == 0) {
                width = frame.width;
                height = frame.height;
            } else if (frame.width != width || frame.height != height) {
                fail("'" + paths[t].string() + "': " + std::to_string(frame.width) + "x" +
                     std::to_string(frame.height) + " does not match the sequence's " +
                     std::to_string(width) + "x" + std::to_string(height));
            }
            pipeline.process(frame, static_cast<int>(t));
        }
        result.frames = paths.size();
    }

    result.records = export_ntyx(pipeline.tracker);
    write_ntyx_csv(result.records, config.output);
    result.tracks = pipeline.tracker.tracks.size();

    if (config.mode == RunMode::synth) {
        write_truth_csv(truth, config.truth_output);
        result.truth = std::move(truth);
        result.score = score(result.records, result.truth, match_radius);
        result.report = format_score_report(result.score);
    }
    return result;
}

}  // namespace pedtrack
