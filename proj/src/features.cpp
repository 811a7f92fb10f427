#include "pedtrack/features.hpp"

#include <cmath>
#include <stdexcept>

namespace pedtrack {

ColorHistogram color_histogram(const Frame& frame, const Blob& blob) {
    ColorHistogram hist;
    for (const PixelCoord& p : blob.pixels) {
        if (p.x < 0 || p.y < 0 || p.x >= frame.width || p.y >= frame.height)
            throw std::runtime_error("features: blob pixel (" + std::to_string(p.x) + "," +
                                     std::to_string(p.y) + ") outside " + std::to_string(frame.width) +
                                     "x" + std::to_string(frame.height) + " frame");
        for (int c = 0; c < 3; ++c) {
            const std::uint8_t v = frame.at(p.x, p.y, c);
            if (v == 0) continue;
            ++hist.bins[c][v];
            ++hist.area_nonzero[c];
        }
    }
    return hist;
}

double entropy(const ColorHistogram& hist) {
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        const double area = static_cast<double>(hist.area_nonzero[c]);
        if (area == 0.0) continue;
        for (std::uint32_t count : hist.bins[c]) {
            if (count == 0) continue;
            const double p = count / area;
            total -= p * std::log(p);
        }
    }
    return total;
}

double entropy_difference(double e_low, double e_high) { return std::abs(e_high - e_low); }

double centroid_distance(PointD a, PointD b) { return std::hypot(b.x - a.x, b.y - a.y); }

double centroid_distance(const Blob& a, const Blob& b) {
    return centroid_distance(a.centroid, b.centroid);
}

double movement_angle(PointD a, PointD b, PointD c, double w1) {
    const double ux = b.x - a.x, uy = b.y - a.y;
    const double vx = c.x - b.x, vy = c.y - b.y;
    const double nu = std::hypot(ux, uy), nv = std::hypot(vx, vy);
    if (nu == 0.0 || nv == 0.0) return 0.0;
    const double cos_turn = (ux * vx + uy * vy) / (nu * nv);
    return w1 * (1.0 - cos_turn);
}

double speed_feature(PointD a, PointD b, PointD c, double w2) {
    const double d1 = centroid_distance(a, b);
    const double d2 = centroid_distance(b, c);
    if (d1 + d2 == 0.0) return 0.0;
    return w2 * (1.0 - 2.0 * std::sqrt(d1 * d2) / (d1 + d2));
}

double normalize_feature(double f, double cap) {
    if (f >= cap) return 0.0;
    const double r = f / cap;
    return std::sqrt(1.0 - r * r);
}

double combined_score(const FeatureVector& normalized, const FeatureWeights& weights) {
    double score = weights.entropy * normalized.entropy_diff + weights.distance * normalized.distance;
    if (normalized.angle) score += weights.angle * *normalized.angle;
    if (normalized.speed) score += weights.speed * *normalized.speed;
    return score;
}

}  // namespace pedtrack
