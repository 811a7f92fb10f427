#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pedtrack/detection.hpp"
#include "pedtrack/features.hpp"
#include "pedtrack/frame.hpp"

namespace pedtrack {

// What the tracker keeps of a blob once features are extracted. Pixel sets
// and histograms are not retained across frames.
struct BlobInfo {
    PointD centroid;
    double entropy = 0.0;
};

std::vector<BlobInfo> extract_blob_info(const Frame& frame, const std::vector<Blob>& blobs);

// Pairwise normalized features between two consecutive frames' blobs.
// Rows index blobs of the higher frame, columns blobs of the lower frame.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<FeatureVector> cells;

    const FeatureVector& at(std::size_t row, std::size_t col) const { return cells[row * cols + col]; }
    FeatureVector& at(std::size_t row, std::size_t col) { return cells[row * cols + col]; }
};

// Binary gate over the same axes: true where the pair is a credible identity.
struct PossibilityMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> allowed;

    bool at(std::size_t row, std::size_t col) const { return allowed[row * cols + col] != 0; }
};

FeatureMatrix build_feature_matrix(const std::vector<BlobInfo>& low, const std::vector<BlobInfo>& high,
                                   const FeatureConfig& config);
FeatureMatrix build_feature_matrix(const std::vector<Blob>& low, const std::vector<Blob>& high,
                                   const Frame& frame_low, const Frame& frame_high,
                                   const FeatureConfig& config);

// Cell true iff the combined similarity score reaches the possibility
// threshold.
PossibilityMatrix build_possibility_matrix(const FeatureMatrix& fm, const FeatureConfig& config);

// Three-level identity-hypothesis tree over frames t-2 (roots), t-1
// (children) and t (leaves).
//
// Edge conditionals P(j|i) are the pair scores normalized over every
// permitted (i,j) edge. Leaf conditionals P(k|i,j) augment the (j,k) pair
// score with the turn-angle and speed-change features of the chain
// x_i -> x_j -> x_k and are normalized over the permitted k under that
// (i,j) path. Posteriors combine both with the root priors via Bayes.
struct TreeEdge {
    int root = 0;   // blob index at t-2
    int child = 0;  // blob index at t-1
    double score = 0.0;
    double conditional = 0.0;  // P(j|i)
};

struct TreeLeaf {
    int root = 0;
    int child = 0;
    int leaf = 0;  // blob index at t
    std::size_t edge_index = 0;
    double score = 0.0;        // augmented chain score
    double conditional = 0.0;  // P(k|i,j)
    double posterior = 0.0;    // P(i|j,k), filled in by posteriors()
};

struct ProbabilityTree {
    std::size_t num_roots = 0;
    std::size_t num_children = 0;
    std::size_t num_leaf_blobs = 0;
    std::vector<TreeEdge> edges;    // sorted by (root, child)
    std::vector<TreeLeaf> leaves;   // sorted by (root, child, leaf)
    std::vector<double> priors;     // per root, set by posteriors()
    bool degenerate = false;        // all-zero posterior mass; assign() yields nothing

    bool empty() const { return leaves.empty(); }
};

ProbabilityTree build_probability_tree(const std::vector<BlobInfo>& roots,
                                       const std::vector<BlobInfo>& children,
                                       const std::vector<BlobInfo>& leaves,
                                       const FeatureMatrix& fm_low, const PossibilityMatrix& pm_low,
                                       const FeatureMatrix& fm_high, const PossibilityMatrix& pm_high,
                                       const FeatureConfig& config);

// Bayes update: posterior(i,j,k) = P(j|i) * P(k|i,j) * prior(i), normalized
// over all leaves. Leaf posteriors sum to 1 unless the mass is all zero, in
// which case the tree is marked degenerate.
void posteriors(ProbabilityTree& tree, const std::vector<double>& priors);

// Next-step priors for the blobs at t-1: sum of incoming edge conditionals,
// with blobs that have no incoming edge given the smallest positive mass,
// then renormalized to total 1.
std::vector<double> update_priors(const ProbabilityTree& tree);

struct Match {
    int root = 0;
    int child = 0;
    int leaf = 0;
    bool operator==(const Match&) const = default;
};

// Greedy maximum-posterior selection: take the best leaf, zero every leaf
// sharing its root, child or leaf blob, repeat until nothing positive is
// left. Ties go to the lowest (root, child, leaf).
std::vector<Match> assign(const ProbabilityTree& tree);

enum class TrackStatus { active, lost, terminated };

struct TrackSample {
    int t = 0;
    double x = 0.0;
    double y = 0.0;
};

struct Track {
    int id = 0;  // pedestrian number N, unique per run, starting at 1
    std::vector<TrackSample> samples;
    TrackStatus status = TrackStatus::active;
    int lost_age = 0;  // frames since last seen, while lost
    double prior = 0.0;
};

struct TrackerState {
    int occlusion_limit = 10;  // lost tracks older than this are terminated

    std::vector<Track> tracks;
    int next_id = 1;
    long frames_processed = 0;

    // rolling two-frame history
    std::vector<BlobInfo> blobs_prev2;  // t-2
    std::vector<BlobInfo> blobs_prev;   // t-1
    std::vector<int> track_of_prev;     // track index per blob at t-1
    FeatureMatrix fm_cache;             // features between (t-2, t-1)
    PossibilityMatrix pm_cache;
    std::vector<double> root_priors;    // priors for blobs_prev, next step's roots
};

// Advance the tracker by one frame. Builds the matrices and tree over the
// three newest frames, assigns chains, extends/loses/spawns tracks and
// refreshes the priors. The first two frames run the documented bootstrap:
// frame 0 spawns a track per blob with uniform priors; whenever no t-2 blobs
// exist the tree degenerates to two levels with unit leaf conditionals.
void step(TrackerState& state, const std::vector<Blob>& blobs, const Frame& frame,
          const FeatureConfig& config);

struct NtyxRecord {
    int n = 0;
    int t = 0;
    double y = 0.0;
    double x = 0.0;
};

// One record per track sample, sorted by (N, T).
std::vector<NtyxRecord> export_ntyx(const TrackerState& state);

// CSV with header "N,T,Y,X", two decimals on coordinates, LF line endings.
std::string format_ntyx_csv(const std::vector<NtyxRecord>& records);
void write_ntyx_csv(const std::vector<NtyxRecord>& records, const std::filesystem::path& path);

}  // namespace pedtrack
