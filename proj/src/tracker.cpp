#include "pedtrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace pedtrack {

namespace {

[[noreturn]] void fail(const std::string& msg) {
    throw std::runtime_error("tracker: " + msg);
}

double pair_score(const FeatureVector& fv, const FeatureWeights& weights) {
    return combined_score(fv, weights);
}

}  // namespace

std::vector<BlobInfo> extract_blob_info(const Frame& frame, const std::vector<Blob>& blobs) {
    std::vector<BlobInfo> out;
    out.reserve(blobs.size());
    for (const Blob& blob : blobs) {
        out.push_back({blob.centroid, entropy(color_histogram(frame, blob))});
    }
    return out;
}

FeatureMatrix build_feature_matrix(const std::vector<BlobInfo>& low, const std::vector<BlobInfo>& high,
                                   const FeatureConfig& config) {
    FeatureMatrix fm;
    fm.rows = high.size();
    fm.cols = low.size();
    fm.cells.resize(fm.rows * fm.cols);
    for (std::size_t r = 0; r < fm.rows; ++r) {
        for (std::size_t c = 0; c < fm.cols; ++c) {
            FeatureVector& cell = fm.at(r, c);
            cell.entropy_diff = normalize_feature(entropy_difference(low[c].entropy, high[r].entropy),
                                                  config.cap_entropy);
            cell.distance = normalize_feature(centroid_distance(low[c].centroid, high[r].centroid),
                                              config.cap_distance);
        }
    }
    return fm;
}

FeatureMatrix build_feature_matrix(const std::vector<Blob>& low, const std::vector<Blob>& high,
                                   const Frame& frame_low, const Frame& frame_high,
                                   const FeatureConfig& config) {
    return build_feature_matrix(extract_blob_info(frame_low, low), extract_blob_info(frame_high, high),
                                config);
}

PossibilityMatrix build_possibility_matrix(const FeatureMatrix& fm, const FeatureConfig& config) {
    PossibilityMatrix pm;
    pm.rows = fm.rows;
    pm.cols = fm.cols;
    pm.allowed.resize(pm.rows * pm.cols, 0);
    for (std::size_t idx = 0; idx < fm.cells.size(); ++idx) {
        const double score = pair_score(fm.cells[idx], config.weights);
        pm.allowed[idx] = score >= config.possibility_threshold ? 1 : 0;
    }
    return pm;
}

ProbabilityTree build_probability_tree(const std::vector<BlobInfo>& roots,
                                       const std::vector<BlobInfo>& children,
                                       const std::vector<BlobInfo>& leaves,
                                       const FeatureMatrix& fm_low, const PossibilityMatrix& pm_low,
                                       const FeatureMatrix& fm_high, const PossibilityMatrix& pm_high,
                                       const FeatureConfig& config) {
    if (fm_low.rows != children.size() || fm_low.cols != roots.size()) {
        fail("lower feature matrix does not match the root/child blob counts");
    }
    if (fm_high.rows != leaves.size() || fm_high.cols != children.size()) {
        fail("upper feature matrix does not match the child/leaf blob counts");
    }
    if (pm_low.rows != fm_low.rows || pm_low.cols != fm_low.cols ||
        pm_high.rows != fm_high.rows || pm_high.cols != fm_high.cols) {
        fail("possibility matrix does not match its feature matrix");
    }

    ProbabilityTree tree;
    tree.num_roots = roots.size();
    tree.num_children = children.size();
    tree.num_leaf_blobs = leaves.size();

    double edge_total = 0.0;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        for (std::size_t j = 0; j < children.size(); ++j) {
            if (!pm_low.at(j, i)) continue;
            TreeEdge edge;
            edge.root = static_cast<int>(i);
            edge.child = static_cast<int>(j);
            edge.score = pair_score(fm_low.at(j, i), config.weights);
            tree.edges.push_back(edge);
            edge_total += edge.score;
        }
    }
    for (TreeEdge& edge : tree.edges) {
        edge.conditional = edge_total > 0.0 ? edge.score / edge_total : 0.0;
    }

    for (std::size_t e = 0; e < tree.edges.size(); ++e) {
        const TreeEdge& edge = tree.edges[e];
        const PointD ci = roots[static_cast<std::size_t>(edge.root)].centroid;
        const PointD cj = children[static_cast<std::size_t>(edge.child)].centroid;

        const std::size_t first_leaf = tree.leaves.size();
        double path_total = 0.0;
        for (std::size_t k = 0; k < leaves.size(); ++k) {
            if (!pm_high.at(k, static_cast<std::size_t>(edge.child))) continue;
            const PointD ck = leaves[k].centroid;

            FeatureVector fv = fm_high.at(k, static_cast<std::size_t>(edge.child));
            fv.angle = normalize_feature(movement_angle(ci, cj, ck, config.w1), config.cap_angle);
            fv.speed = normalize_feature(speed_feature(ci, cj, ck, config.w2), config.cap_speed);

            TreeLeaf leaf;
            leaf.root = edge.root;
            leaf.child = edge.child;
            leaf.leaf = static_cast<int>(k);
            leaf.edge_index = e;
            leaf.score = combined_score(fv, config.weights);
            tree.leaves.push_back(leaf);
            path_total += leaf.score;
        }
        for (std::size_t l = first_leaf; l < tree.leaves.size(); ++l) {
            tree.leaves[l].conditional = path_total > 0.0 ? tree.leaves[l].score / path_total : 0.0;
        }
    }
    return tree;
}

void posteriors(ProbabilityTree& tree, const std::vector<double>& priors) {
    if (priors.size() != tree.num_roots) {
        fail("prior count does not match the tree's root count");
    }
    tree.priors = priors;
    tree.degenerate = false;

    double total = 0.0;
    for (TreeLeaf& leaf : tree.leaves) {
        const TreeEdge& edge = tree.edges[leaf.edge_index];
        leaf.posterior = edge.conditional * leaf.conditional * priors[static_cast<std::size_t>(leaf.root)];
        total += leaf.posterior;
    }
    if (total <= 0.0) {
        for (TreeLeaf& leaf : tree.leaves) leaf.posterior = 0.0;
        tree.degenerate = true;
        return;
    }
    for (TreeLeaf& leaf : tree.leaves) leaf.posterior /= total;
}

std::vector<double> update_priors(const ProbabilityTree& tree) {
    std::vector<double> raw(tree.num_children, 0.0);
    for (const TreeEdge& edge : tree.edges) {
        raw[static_cast<std::size_t>(edge.child)] += edge.conditional;
    }
    if (raw.empty()) return raw;

    double min_positive = std::numeric_limits<double>::infinity();
    for (double v : raw) {
        if (v > 0.0) min_positive = std::min(min_positive, v);
    }
    if (std::isinf(min_positive)) {
        std::fill(raw.begin(), raw.end(), 1.0 / static_cast<double>(raw.size()));
        return raw;
    }
    for (double& v : raw) {
        if (v == 0.0) v = min_positive;
    }
    double total = 0.0;
    for (double v : raw) total += v;
    for (double& v : raw) v /= total;
    return raw;
}

std::vector<Match> assign(const ProbabilityTree& tree) {
    std::vector<Match> matches;
    if (tree.degenerate || tree.leaves.empty()) return matches;

    std::vector<double> post(tree.leaves.size());
    for (std::size_t l = 0; l < tree.leaves.size(); ++l) post[l] = tree.leaves[l].posterior;

    for (;;) {
        std::size_t best = post.size();
        for (std::size_t l = 0; l < post.size(); ++l) {
            if (post[l] <= 0.0) continue;
            if (best == post.size() || post[l] > post[best]) best = l;
        }
        if (best == post.size()) break;

        const TreeLeaf& chosen = tree.leaves[best];
        matches.push_back({chosen.root, chosen.child, chosen.leaf});
        for (std::size_t l = 0; l < post.size(); ++l) {
            const TreeLeaf& leaf = tree.leaves[l];
            if (leaf.root == chosen.root || leaf.child == chosen.child || leaf.leaf == chosen.leaf) {
                post[l] = 0.0;
            }
        }
    }
    return matches;
}

namespace {

// Pair-level bootstrap tree: roots are the previous frame's blobs, each
// permitted edge carries a single leaf (k = j) with unit conditional.
ProbabilityTree build_pair_tree(std::size_t num_prev, std::size_t num_cur,
                                const FeatureMatrix& fm, const PossibilityMatrix& pm,
                                const FeatureWeights& weights) {
    ProbabilityTree tree;
    tree.num_roots = num_prev;
    tree.num_children = num_cur;
    tree.num_leaf_blobs = num_cur;

    double edge_total = 0.0;
    for (std::size_t i = 0; i < num_prev; ++i) {
        for (std::size_t j = 0; j < num_cur; ++j) {
            if (!pm.at(j, i)) continue;
            TreeEdge edge;
            edge.root = static_cast<int>(i);
            edge.child = static_cast<int>(j);
            edge.score = pair_score(fm.at(j, i), weights);
            tree.edges.push_back(edge);
            edge_total += edge.score;
        }
    }
    for (std::size_t e = 0; e < tree.edges.size(); ++e) {
        TreeEdge& edge = tree.edges[e];
        edge.conditional = edge_total > 0.0 ? edge.score / edge_total : 0.0;
        TreeLeaf leaf;
        leaf.root = edge.root;
        leaf.child = edge.child;
        leaf.leaf = edge.child;
        leaf.edge_index = e;
        leaf.score = edge.score;
        leaf.conditional = 1.0;
        tree.leaves.push_back(leaf);
    }
    return tree;
}

int spawn_track(TrackerState& state, int t, PointD centroid) {
    Track track;
    track.id = state.next_id++;
    track.samples.push_back({t, centroid.x, centroid.y});
    track.status = TrackStatus::active;
    state.tracks.push_back(std::move(track));
    return static_cast<int>(state.tracks.size()) - 1;
}

void extend_track(TrackerState& state, int track_index, int t, PointD centroid) {
    Track& track = state.tracks[static_cast<std::size_t>(track_index)];
    track.samples.push_back({t, centroid.x, centroid.y});
    track.status = TrackStatus::active;
    track.lost_age = 0;
}

// Nearest lost track within the distance cap; ties go to the lowest id.
// Returns -1 when nothing qualifies. Reclaimed tracks turn active, so they
// drop out of the candidate set by themselves.
int find_reclaimable(const TrackerState& state, PointD centroid, double cap_distance) {
    int best = -1;
    double best_dist = 0.0;
    for (std::size_t idx = 0; idx < state.tracks.size(); ++idx) {
        const Track& track = state.tracks[idx];
        if (track.status != TrackStatus::lost) continue;
        if (track.lost_age > state.occlusion_limit) continue;
        const TrackSample& last = track.samples.back();
        const double dist = centroid_distance({last.x, last.y}, centroid);
        if (dist > cap_distance) continue;
        if (best < 0 || dist < best_dist ||
            (dist == best_dist && track.id < state.tracks[static_cast<std::size_t>(best)].id)) {
            best = static_cast<int>(idx);
            best_dist = dist;
        }
    }
    return best;
}

}  // namespace

void step(TrackerState& state, const std::vector<Blob>& blobs, const Frame& frame,
          const FeatureConfig& config) {
    const int t = static_cast<int>(state.frames_processed);
    const std::vector<BlobInfo> current = extract_blob_info(frame, blobs);

    FeatureMatrix fm_high = build_feature_matrix(state.blobs_prev, current, config);
    PossibilityMatrix pm_high = build_possibility_matrix(fm_high, config);

    // Which tracks were already lost when this step began; only these age
    // further below, so a track demoted this step keeps age 1.
    std::vector<std::uint8_t> was_lost(state.tracks.size(), 0);
    for (std::size_t idx = 0; idx < state.tracks.size(); ++idx) {
        was_lost[idx] = state.tracks[idx].status == TrackStatus::lost ? 1 : 0;
    }

    std::vector<int> track_of_current(current.size(), -1);
    std::vector<std::uint8_t> matched_prev_track(state.tracks.size(), 0);
    std::vector<double> new_root_priors;

    const bool have_prev = !state.blobs_prev.empty();
    const bool have_prev2 = !state.blobs_prev2.empty();

    if (have_prev && have_prev2) {
        ProbabilityTree tree = build_probability_tree(state.blobs_prev2, state.blobs_prev, current,
                                                      state.fm_cache, state.pm_cache,
                                                      fm_high, pm_high, config);
        posteriors(tree, state.root_priors);
        for (const Match& match : assign(tree)) {
            const int track_index = state.track_of_prev[static_cast<std::size_t>(match.child)];
            extend_track(state, track_index, t, current[static_cast<std::size_t>(match.leaf)].centroid);
            track_of_current[static_cast<std::size_t>(match.leaf)] = track_index;
            matched_prev_track[static_cast<std::size_t>(track_index)] = 1;
        }
        new_root_priors = update_priors(tree);
    } else if (have_prev) {
        ProbabilityTree tree = build_pair_tree(state.blobs_prev.size(), current.size(),
                                               fm_high, pm_high, config.weights);
        std::vector<double> uniform(state.blobs_prev.size(),
                                    1.0 / static_cast<double>(state.blobs_prev.size()));
        posteriors(tree, uniform);
        for (const Match& match : assign(tree)) {
            const int track_index = state.track_of_prev[static_cast<std::size_t>(match.root)];
            extend_track(state, track_index, t, current[static_cast<std::size_t>(match.leaf)].centroid);
            track_of_current[static_cast<std::size_t>(match.leaf)] = track_index;
            matched_prev_track[static_cast<std::size_t>(track_index)] = 1;
        }
        new_root_priors = uniform;
    }

    for (std::size_t idx = 0; idx < state.tracks.size(); ++idx) {
        Track& track = state.tracks[idx];
        if (track.status == TrackStatus::active && !matched_prev_track[idx]) {
            track.status = TrackStatus::lost;
            track.lost_age = 1;
        }
    }

    for (std::size_t b = 0; b < current.size(); ++b) {
        if (track_of_current[b] >= 0) continue;
        const int found = find_reclaimable(state, current[b].centroid, config.cap_distance);
        if (found >= 0) {
            extend_track(state, found, t, current[b].centroid);
            track_of_current[b] = found;
        } else {
            track_of_current[b] = spawn_track(state, t, current[b].centroid);
        }
    }

    for (std::size_t idx = 0; idx < was_lost.size(); ++idx) {
        Track& track = state.tracks[idx];
        if (was_lost[idx] && track.status == TrackStatus::lost) {
            ++track.lost_age;
        }
        if (track.status == TrackStatus::lost && track.lost_age > state.occlusion_limit) {
            track.status = TrackStatus::terminated;
        }
    }

    // Priors produced this step describe the previous frame's blobs, which
    // become the roots of the next step's tree.
    for (std::size_t j = 0; j < state.blobs_prev.size(); ++j) {
        if (j < new_root_priors.size()) {
            state.tracks[static_cast<std::size_t>(state.track_of_prev[j])].prior = new_root_priors[j];
        }
    }

    state.blobs_prev2 = std::move(state.blobs_prev);
    state.blobs_prev = current;
    state.track_of_prev = track_of_current;
    state.fm_cache = std::move(fm_high);
    state.pm_cache = std::move(pm_high);
    state.root_priors = std::move(new_root_priors);
    ++state.frames_processed;
}

std::vector<NtyxRecord> export_ntyx(const TrackerState& state) {
    std::vector<NtyxRecord> records;
    for (const Track& track : state.tracks) {
        for (const TrackSample& sample : track.samples) {
            records.push_back({track.id, sample.t, sample.y, sample.x});
        }
    }
    std::sort(records.begin(), records.end(), [](const NtyxRecord& a, const NtyxRecord& b) {
        if (a.n != b.n) return a.n < b.n;
        return a.t < b.t;
    });
    return records;
}

std::string format_ntyx_csv(const std::vector<NtyxRecord>& records) {
    std::string out = "N,T,Y,X\n";
    char line[96];
    for (const NtyxRecord& rec : records) {
        std::snprintf(line, sizeof(line), "%d,%d,%.2f,%.2f\n", rec.n, rec.t, rec.y, rec.x);
        out += line;
    }
    return out;
}

void write_ntyx_csv(const std::vector<NtyxRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open '" + path.string() + "' for writing");
    const std::string text = format_ntyx_csv(records);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) fail("failed writing '" + path.string() + "'");
}

}  // namespace pedtrack
