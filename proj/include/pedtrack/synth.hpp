#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pedtrack/frame.hpp"
#include "pedtrack/tracker.hpp"

namespace pedtrack {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
};

struct Waypoint {
    int frame = 0;
    double x = 0.0;
    double y = 0.0;
};

// A scripted disc: present between its first and last waypoint frames,
// position linearly interpolated between waypoints.
struct Actor {
    int id = 0;
    double radius = 0.0;
    Rgb color;
    std::vector<Waypoint> waypoints;
};

struct SceneScript {
    int width = 0;
    int height = 0;
    int num_frames = 0;
    Rgb background;
    int noise_amplitude = 0;          // uniform per-channel noise in [-a, +a]
    double visibility_threshold = 0.6;  // covered fraction at which an actor counts as occluded
    std::vector<Actor> actors;
};

SceneScript load_scene_script(const std::filesystem::path& path);

struct TruthEntry {
    int actor = 0;
    int t = 0;
    double x = 0.0;
    double y = 0.0;
    bool visible = true;
};

struct RenderResult {
    Frame frame;
    std::vector<TruthEntry> truth;  // one entry per actor in script span at t
};

// Draw frame t: discs in ascending actor id (higher ids paint over lower),
// then uniform noise derived from (seed, t). An actor is marked invisible
// when at least visibility_threshold of its drawn pixels are painted over
// by later discs.
RenderResult render(const SceneScript& script, int t, std::uint64_t seed);

struct ScoreReport {
    std::size_t truth_visible = 0;  // visible ground-truth entries
    std::size_t matched = 0;        // entries matched by a track sample within radius
    double accuracy = 0.0;          // matched / truth_visible (0 when no entries)
    int id_switches = 0;            // actors whose matched track id changed between sightings
};

// Per frame, greedily pair track samples with visible truth entries by
// ascending distance within match_radius (ties: track id, then actor id).
ScoreReport score(const std::vector<NtyxRecord>& records, const std::vector<TruthEntry>& truth,
                  double match_radius);

std::string format_score_report(const ScoreReport& report);

// CSV with header "actor,T,Y,X,visible", coordinates with 2 decimals,
// visible as 0/1, sorted by (actor, T), LF line endings.
void write_truth_csv(const std::vector<TruthEntry>& truth, const std::filesystem::path& path);

// Number of intersecting segment pairs between the scripted polyline paths
// of distinct actors.
int count_path_crossings(const SceneScript& script);

}  // namespace pedtrack
