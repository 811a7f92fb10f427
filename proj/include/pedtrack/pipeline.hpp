#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pedtrack/config.hpp"
#include "pedtrack/synth.hpp"

namespace pedtrack {

struct RunResult {
    std::size_t frames = 0;
    std::size_t tracks = 0;
    std::vector<NtyxRecord> records;
    std::vector<TruthEntry> truth;  // synth mode only
    ScoreReport score;              // synth mode only
    std::string report;             // formatted score, synth mode only
};

// Full pipeline: ingest frames (directory or rendered scene), detect blobs,
// track, write the trajectory CSV. Synth mode also writes the ground-truth
// CSV and fills in the score report. Frames stream one at a time.
RunResult run(const RunConfig& config);

}  // namespace pedtrack
