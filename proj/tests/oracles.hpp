#pragma once

#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "helpers.hpp"
#include "pedtrack/tracker.hpp"

// Brute-force reference implementations of the tree probabilities and the
// greedy assignment, kept deliberately naive and independent of the library's
// normalization code paths.
namespace testutil {

inline std::vector<pedtrack::BlobInfo> random_blobs(Rng& rng, std::size_t n, double spread) {
    std::vector<pedtrack::BlobInfo> blobs(n);
    for (pedtrack::BlobInfo& blob : blobs) {
        blob.centroid = {rng.real(0.0, spread), rng.real(0.0, spread)};
        blob.entropy = rng.real(0.0, 2.5);
    }
    return blobs;
}

inline double oracle_pair_score(const pedtrack::FeatureVector& fv, const pedtrack::FeatureWeights& w) {
    double s = w.entropy * fv.entropy_diff + w.distance * fv.distance;
    if (fv.angle) s += w.angle * *fv.angle;
    if (fv.speed) s += w.speed * *fv.speed;
    return s;
}

struct OracleResult {
    std::map<std::pair<int, int>, double> edge_cond;
    std::map<std::tuple<int, int, int>, double> leaf_cond;
    std::map<std::tuple<int, int, int>, double> posterior;
    bool degenerate = false;
};

inline OracleResult oracle_tree(const std::vector<pedtrack::BlobInfo>& roots,
                                const std::vector<pedtrack::BlobInfo>& children,
                                const std::vector<pedtrack::BlobInfo>& leaves,
                                const pedtrack::FeatureMatrix& fm_low,
                                const pedtrack::PossibilityMatrix& pm_low,
                                const pedtrack::FeatureMatrix& fm_high,
                                const pedtrack::PossibilityMatrix& pm_high,
                                const pedtrack::FeatureConfig& cfg, const std::vector<double>& priors) {
    using pedtrack::FeatureVector;
    OracleResult out;
    double edge_total = 0.0;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        for (std::size_t j = 0; j < children.size(); ++j) {
            if (pm_low.at(j, i)) edge_total += oracle_pair_score(fm_low.at(j, i), cfg.weights);
        }
    }
    for (std::size_t i = 0; i < roots.size(); ++i) {
        for (std::size_t j = 0; j < children.size(); ++j) {
            if (!pm_low.at(j, i)) continue;
            const double score = oracle_pair_score(fm_low.at(j, i), cfg.weights);
            out.edge_cond[{static_cast<int>(i), static_cast<int>(j)}] =
                edge_total > 0.0 ? score / edge_total : 0.0;
        }
    }

    for (const auto& [edge, cond] : out.edge_cond) {
        const auto [i, j] = edge;
        double path_total = 0.0;
        std::map<int, double> scores;
        for (std::size_t k = 0; k < leaves.size(); ++k) {
            if (!pm_high.at(k, static_cast<std::size_t>(j))) continue;
            FeatureVector fv = fm_high.at(k, static_cast<std::size_t>(j));
            fv.angle = pedtrack::normalize_feature(
                pedtrack::movement_angle(roots[static_cast<std::size_t>(i)].centroid,
                                         children[static_cast<std::size_t>(j)].centroid,
                                         leaves[k].centroid, cfg.w1),
                cfg.cap_angle);
            fv.speed = pedtrack::normalize_feature(
                pedtrack::speed_feature(roots[static_cast<std::size_t>(i)].centroid,
                                        children[static_cast<std::size_t>(j)].centroid,
                                        leaves[k].centroid, cfg.w2),
                cfg.cap_speed);
            const double s = oracle_pair_score(fv, cfg.weights);
            scores[static_cast<int>(k)] = s;
            path_total += s;
        }
        for (const auto& [k, s] : scores) {
            out.leaf_cond[{i, j, k}] = path_total > 0.0 ? s / path_total : 0.0;
        }
    }

    double post_total = 0.0;
    for (const auto& [key, cond] : out.leaf_cond) {
        const auto [i, j, k] = key;
        const double p = out.edge_cond[{i, j}] * cond * priors[static_cast<std::size_t>(i)];
        out.posterior[key] = p;
        post_total += p;
    }
    if (post_total <= 0.0) {
        out.degenerate = true;
        for (auto& [key, p] : out.posterior) p = 0.0;
    } else {
        for (auto& [key, p] : out.posterior) p /= post_total;
    }
    return out;
}

inline std::vector<pedtrack::Match> oracle_greedy(const pedtrack::ProbabilityTree& tree) {
    struct Entry {
        int i, j, k;
        double p;
    };
    std::vector<Entry> entries;
    for (const pedtrack::TreeLeaf& leaf : tree.leaves) {
        entries.push_back({leaf.root, leaf.child, leaf.leaf, leaf.posterior});
    }

    std::vector<pedtrack::Match> out;
    for (;;) {
        const Entry* best = nullptr;
        for (const Entry& e : entries) {
            if (e.p <= 0.0) continue;
            if (!best || e.p > best->p ||
                (e.p == best->p && std::tuple(e.i, e.j, e.k) < std::tuple(best->i, best->j, best->k))) {
                best = &e;
            }
        }
        if (!best) break;
        out.push_back({best->i, best->j, best->k});
        const pedtrack::Match m = out.back();
        for (Entry& e : entries) {
            if (e.i == m.root || e.j == m.child || e.k == m.leaf) e.p = 0.0;
        }
    }
    return out;
}

inline pedtrack::ProbabilityTree build_random_tree(Rng& rng, const pedtrack::FeatureConfig& cfg,
                                                   std::size_t max_blobs, std::vector<double>* priors_out) {
    const std::size_t nr = 1 + rng.below(max_blobs);
    const std::size_t nc = 1 + rng.below(max_blobs);
    const std::size_t nl = 1 + rng.below(max_blobs);
    const auto roots = random_blobs(rng, nr, 40.0);
    const auto children = random_blobs(rng, nc, 40.0);
    const auto leaves = random_blobs(rng, nl, 40.0);

    const pedtrack::FeatureMatrix fm_low = pedtrack::build_feature_matrix(roots, children, cfg);
    const pedtrack::PossibilityMatrix pm_low = pedtrack::build_possibility_matrix(fm_low, cfg);
    const pedtrack::FeatureMatrix fm_high = pedtrack::build_feature_matrix(children, leaves, cfg);
    const pedtrack::PossibilityMatrix pm_high = pedtrack::build_possibility_matrix(fm_high, cfg);

    pedtrack::ProbabilityTree tree = pedtrack::build_probability_tree(roots, children, leaves, fm_low,
                                                                      pm_low, fm_high, pm_high, cfg);
    std::vector<double> priors(nr);
    double total = 0.0;
    for (double& p : priors) {
        p = rng.real(0.1, 1.0);
        total += p;
    }
    for (double& p : priors) p /= total;
    pedtrack::posteriors(tree, priors);
    *priors_out = priors;
    return tree;
}

}  // namespace testutil
