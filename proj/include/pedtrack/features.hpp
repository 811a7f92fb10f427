#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "pedtrack/detection.hpp"
#include "pedtrack/frame.hpp"

namespace pedtrack {

// Per-channel 256-bin color histogram over a blob's pixels. Pixels whose
// value in a channel is zero are excluded from that channel (zero is the
// mask/background fill value); area_nonzero holds the included count.
struct ColorHistogram {
    std::array<std::array<std::uint32_t, 256>, 3> bins{};
    std::array<std::uint32_t, 3> area_nonzero{};
};

struct FeatureWeights {
    double entropy = 1.0;
    double distance = 1.0;
    double angle = 1.0;
    double speed = 1.0;
};

struct FeatureConfig {
    double w1 = 1.0;  // turn-angle weight
    double w2 = 1.0;  // speed-change weight
    // normalization caps (feature value at which similarity hits 0)
    double cap_entropy = 2.0;
    double cap_distance = 50.0;  // pixels
    double cap_angle = 1.0;      // w1 * 1.0 by default
    double cap_speed = 0.5;      // w2 * 0.5 by default
    FeatureWeights weights;
    // similarity scale: a blob pair is possible when its combined score
    // reaches this value
    double possibility_threshold = 1.5;
};

// Normalized similarity components in [0,1]; angle and speed exist only for
// frame triples and stay empty at pair level.
struct FeatureVector {
    double entropy_diff = 0.0;
    double distance = 0.0;
    std::optional<double> angle;
    std::optional<double> speed;
};

ColorHistogram color_histogram(const Frame& frame, const Blob& blob);

// Sum over channels of -sum (H/A) ln(H/A); empty channels contribute 0.
double entropy(const ColorHistogram& hist);

double entropy_difference(double e_low, double e_high);

double centroid_distance(const Blob& a, const Blob& b);
double centroid_distance(PointD a, PointD b);

// w1 * (1 - cos of the turn at b along a->b->c); 0 when either segment has
// zero length (a stationary blob is a perfect match, not undefined).
double movement_angle(PointD a, PointD b, PointD c, double w1);

// w2 * (1 - 2*sqrt(d1*d2)/(d1+d2)) with d1=|ab|, d2=|bc|; 0 when d1+d2 == 0.
double speed_feature(PointD a, PointD b, PointD c, double w2);

// Dissimilarity -> similarity: sqrt(1 - (f/cap)^2), hard 0 at and beyond the
// cap. 1 means identical.
double normalize_feature(double f, double cap);

// Weighted sum over the present components; absent angle/speed contribute
// nothing.
double combined_score(const FeatureVector& normalized, const FeatureWeights& weights);

}  // namespace pedtrack
