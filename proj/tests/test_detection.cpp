#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "pedtrack/detection.hpp"

using namespace pedtrack;
using testutil::make_frame;

namespace {

// Scalar reference for the running mean / smoothed variance recursion.
struct ScalarModel {
    double mean = 0.0;
    double var;
    long t = 0;
    double alpha;

    ScalarModel(double alpha_, double initial_var) : var(initial_var), alpha(alpha_) {}

    void update(double v) {
        ++t;
        mean = (static_cast<double>(t - 1) / t) * mean + v / t;
        var = alpha * var + (1.0 - alpha) * (v - mean) * (v - mean);
    }
};

BinaryMask random_mask(testutil::Rng& rng, int w, int h, int fill_percent) {
    BinaryMask mask(w, h);
    for (auto& bit : mask.bits) bit = rng.below(100) < static_cast<std::uint64_t>(fill_percent) ? 1 : 0;
    return mask;
}

// Direct square-window morphology, no separability tricks.
BinaryMask brute_window(const BinaryMask& mask, int radius, bool any) {
    BinaryMask out(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            bool acc = !any;
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) continue;
                    const bool v = mask.at(nx, ny) != 0;
                    acc = any ? (acc || v) : (acc && v);
                }
            }
            out.set(x, y, acc ? 1 : 0);
        }
    }
    return out;
}

bool subset(const BinaryMask& a, const BinaryMask& b) {
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        if (a.bits[i] && !b.bits[i]) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("background model matches the scalar recursion on random sequences") {
    testutil::Rng rng(7);
    BackgroundModel model(3, 2, 0.9, 2.0, 4.0);
    std::vector<ScalarModel> oracle(3 * 2 * 3, ScalarModel(0.9, 4.0));

    for (int t = 0; t < 25; ++t) {
        Frame frame(3, 2);
        for (auto& byte : frame.data) byte = static_cast<std::uint8_t>(rng.below(256));
        model.update(frame);
        for (std::size_t i = 0; i < frame.data.size(); ++i) oracle[i].update(frame.data[i]);
    }
    for (std::size_t i = 0; i < oracle.size(); ++i) {
        CHECK(model.mean()[i] == doctest::Approx(oracle[i].mean).epsilon(1e-12));
        CHECK(model.variance()[i] == doctest::Approx(oracle[i].var).epsilon(1e-12));
    }
}

TEST_CASE("first update pins the mean to the first frame") {
    BackgroundModel model(2, 1, 0.95, 2.0);
    Frame frame(2, 1);
    frame.set(0, 0, 10, 20, 30);
    frame.set(1, 0, 200, 0, 55);
    model.update(frame);

    CHECK(model.mean()[0] == 10.0);
    CHECK(model.mean()[5] == 55.0);
    for (double v : model.variance()) CHECK(v == 0.0);
}

TEST_CASE("variance decays geometrically on a constant sequence") {
    BackgroundModel model(1, 1, 0.95, 2.0, 10.0);
    const Frame frame = make_frame(1, 1, 77, 77, 77);
    double expected = 10.0;
    for (int t = 0; t < 5; ++t) {
        model.update(frame);
        expected *= 0.95;
        CHECK(model.variance()[0] == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(model.variance()[0] == doctest::Approx(7.737809375).epsilon(1e-12));
}

TEST_CASE("background image is mean plus eta sigma") {
    BackgroundModel model(1, 1, 0.5, 3.0, 16.0);
    model.update(make_frame(1, 1, 100, 100, 100));
    const RealImage bg = model.background_image();
    CHECK(bg.at(0, 0, 0) == doctest::Approx(100.0 + 3.0 * std::sqrt(8.0)));
}

TEST_CASE("background image before any update is an error") {
    BackgroundModel model(1, 1, 0.5, 2.0);
    CHECK_THROWS_AS(model.background_image(), std::runtime_error);
}

TEST_CASE("subtraction is one-sided and triggers on any channel") {
    BackgroundModel model(3, 1, 0.95, 2.0);
    model.update(make_frame(3, 1, 100, 100, 100));

    Frame next = make_frame(3, 1, 100, 100, 100);
    next.set(0, 0, 100, 160, 100);  // one channel above
    next.set(1, 0, 30, 30, 30);     // far below, must stay background
    const BinaryMask mask = model.subtract(next, 25.0);

    CHECK(mask.at(0, 0) == 1);
    CHECK(mask.at(1, 0) == 0);
    CHECK(mask.at(2, 0) == 0);
}

TEST_CASE("model rejects frames of the wrong size, naming both") {
    BackgroundModel model(4, 3, 0.95, 2.0);
    CHECK_THROWS_WITH_AS(model.update(Frame(2, 2)), doctest::Contains("4x3"), std::runtime_error);
    CHECK_THROWS_WITH_AS(model.update(Frame(2, 2)), doctest::Contains("2x2"), std::runtime_error);
}

TEST_CASE("red-hat mask is the signed red minus green difference") {
    Frame frame(4, 1);
    frame.set(0, 0, 100, 30, 0);   // +70
    frame.set(1, 0, 30, 100, 0);   // -70
    frame.set(2, 0, 90, 90, 200);  // 0
    frame.set(3, 0, 90, 40, 0);    // exactly +50

    const BinaryMask mask = detect_redhat(frame, 50.0);
    CHECK(mask.at(0, 0) == 1);
    CHECK(mask.at(1, 0) == 0);
    CHECK(mask.at(2, 0) == 0);
    CHECK(mask.at(3, 0) == 0);  // strict inequality
}

TEST_CASE("raising the threshold never adds foreground") {
    testutil::Rng rng(11);
    for (int round = 0; round < 20; ++round) {
        Frame frame(8, 8);
        for (auto& byte : frame.data) byte = static_cast<std::uint8_t>(rng.below(256));

        const BinaryMask loose = detect_redhat(frame, 10.0);
        const BinaryMask tight = detect_redhat(frame, 60.0);
        CHECK(subset(tight, loose));

        BackgroundModel model(8, 8, 0.9, 2.0);
        model.update(make_frame(8, 8, 50, 50, 50));
        CHECK(subset(model.subtract(frame, 60.0), model.subtract(frame, 10.0)));
    }
}

TEST_CASE("morphology radius zero is the identity") {
    testutil::Rng rng(3);
    const BinaryMask mask = random_mask(rng, 9, 7, 40);
    CHECK(dilate(mask, 0) == mask);
    CHECK(erode(mask, 0) == mask);
    CHECK(pedtrack::open(mask, 0) == mask);
    CHECK(pedtrack::close(mask, 0) == mask);
}

TEST_CASE("dilation and erosion match the square-window reference") {
    testutil::Rng rng(5);
    for (int round = 0; round < 30; ++round) {
        const int w = 3 + static_cast<int>(rng.below(12));
        const int h = 3 + static_cast<int>(rng.below(12));
        const int radius = static_cast<int>(rng.below(3));
        const BinaryMask mask = random_mask(rng, w, h, 35);

        CHECK(dilate(mask, radius) == brute_window(mask, radius, true));
        CHECK(erode(mask, radius) == brute_window(mask, radius, false));
    }
}

TEST_CASE("single set pixel dilates to a clipped square") {
    BinaryMask mask(5, 5);
    mask.set(2, 2, 1);
    const BinaryMask grown = dilate(mask, 1);
    int count = 0;
    for (auto bit : grown.bits) count += bit;
    CHECK(count == 9);
    CHECK(grown.at(1, 1) == 1);
    CHECK(grown.at(3, 3) == 1);
    CHECK(grown.at(0, 0) == 0);

    BinaryMask corner(3, 3);
    corner.set(0, 0, 1);
    const BinaryMask corner_grown = dilate(corner, 1);
    int corner_count = 0;
    for (auto bit : corner_grown.bits) corner_count += bit;
    CHECK(corner_count == 4);
}

TEST_CASE("erosion ignores out-of-bounds neighbors") {
    BinaryMask full(3, 3, 1);
    CHECK(erode(full, 1) == full);
}

TEST_CASE("opening and closing are idempotent and ordered around the identity") {
    testutil::Rng rng(13);
    for (int round = 0; round < 20; ++round) {
        const BinaryMask mask = random_mask(rng, 11, 9, 45);
        for (int radius = 1; radius <= 2; ++radius) {
            const BinaryMask opened = pedtrack::open(mask, radius);
            const BinaryMask closed = pedtrack::close(mask, radius);
            CHECK(pedtrack::open(opened, radius) == opened);
            CHECK(pedtrack::close(closed, radius) == closed);
            CHECK(subset(opened, mask));
            CHECK(subset(mask, closed));
            CHECK(subset(erode(mask, radius), mask));
            CHECK(subset(mask, dilate(mask, radius)));
        }
    }
}

TEST_CASE("connected components use 8-connectivity") {
    BinaryMask mask(4, 4);
    mask.set(0, 0, 1);
    mask.set(1, 1, 1);  // diagonal touch: same blob
    mask.set(3, 3, 1);  // separate

    const auto blobs = connected_components(mask, 0, 1);
    REQUIRE(blobs.size() == 2);
    CHECK(blobs[0].area == 2);
    CHECK(blobs[1].area == 1);
}

TEST_CASE("connected components fill area, bbox and centroid") {
    BinaryMask mask(6, 4);
    mask.set(1, 1, 1);
    mask.set(2, 1, 1);
    mask.set(1, 2, 1);
    mask.set(2, 2, 1);

    const auto blobs = connected_components(mask, 9, 1);
    REQUIRE(blobs.size() == 1);
    const Blob& blob = blobs[0];
    CHECK(blob.frame_index == 9);
    CHECK(blob.area == 4);
    CHECK(blob.pixels.size() == 4);
    CHECK(blob.x_min == 1);
    CHECK(blob.x_max == 2);
    CHECK(blob.y_min == 1);
    CHECK(blob.y_max == 2);
    CHECK(blob.centroid.x == doctest::Approx(1.5));
    CHECK(blob.centroid.y == doctest::Approx(1.5));
}

TEST_CASE("components below min_area are dropped") {
    BinaryMask mask(8, 1);
    mask.set(0, 0, 1);
    for (int x = 3; x < 8; ++x) mask.set(x, 0, 1);

    const auto blobs = connected_components(mask, 0, 3);
    REQUIRE(blobs.size() == 1);
    CHECK(blobs[0].area == 5);
}

TEST_CASE("blobs are ordered by bounding-box y then x") {
    BinaryMask mask(10, 10);
    mask.set(7, 0, 1);
    mask.set(1, 3, 1);
    mask.set(5, 3, 1);

    const auto blobs = connected_components(mask, 0, 1);
    REQUIRE(blobs.size() == 3);
    CHECK(blobs[0].pixels[0] == PixelCoord{7, 0});
    CHECK(blobs[1].pixels[0] == PixelCoord{1, 3});
    CHECK(blobs[2].pixels[0] == PixelCoord{5, 3});
}

TEST_CASE("components partition the mask on random input") {
    testutil::Rng rng(17);
    for (int round = 0; round < 25; ++round) {
        const BinaryMask mask = random_mask(rng, 16, 12, 30);
        const auto blobs = connected_components(mask, 0, 1);

        BinaryMask rebuilt(mask.width, mask.height);
        std::size_t total = 0;
        for (const Blob& blob : blobs) {
            for (const PixelCoord& p : blob.pixels) {
                CHECK(rebuilt.at(p.x, p.y) == 0);  // disjoint
                rebuilt.set(p.x, p.y, 1);
            }
            total += blob.pixels.size();
        }
        CHECK(rebuilt == mask);  // complete
        std::size_t set_bits = 0;
        for (auto bit : mask.bits) set_bits += bit;
        CHECK(total == set_bits);
    }
}

TEST_CASE("detect finds a red disc and cleans speckle noise") {
    Frame frame = make_frame(64, 48, 16, 16, 18);
    testutil::draw_disc(frame, 30.0, 24.0, 5.0, 210, 40, 40);
    frame.set(2, 2, 210, 40, 40);  // lone speckle, removed by opening

    DetectionConfig config;
    config.mode = DetectorMode::redhat;
    config.threshold = 50.0;
    config.morphology_radius = 1;
    config.min_blob_area = 20;

    const DetectionResult result = detect(frame, 0, config, nullptr);
    REQUIRE(result.blobs.size() == 1);
    CHECK(result.blobs[0].centroid.x == doctest::Approx(30.0).epsilon(0.05));
    CHECK(result.blobs[0].centroid.y == doctest::Approx(24.0).epsilon(0.05));
}

TEST_CASE("background mode requires a model") {
    DetectionConfig config;
    config.mode = DetectorMode::background;
    CHECK_THROWS_AS(detect(Frame(4, 4), 0, config, nullptr), std::runtime_error);
}

TEST_CASE("background mode lights up only where the scene changed") {
    DetectionConfig config;
    config.mode = DetectorMode::background;
    config.threshold = 25.0;
    config.morphology_radius = 0;
    config.min_blob_area = 1;

    BackgroundModel model(32, 32, 0.95, 2.0);
    const Frame still = make_frame(32, 32, 20, 20, 20);
    for (int t = 0; t < 10; ++t) CHECK(detect(still, t, config, &model).blobs.empty());

    Frame moved = still;
    testutil::draw_disc(moved, 16.0, 16.0, 4.0, 200, 200, 200);
    const DetectionResult result = detect(moved, 10, config, &model);
    REQUIRE(result.blobs.size() == 1);
    CHECK(result.blobs[0].centroid.x == doctest::Approx(16.0).epsilon(0.05));
}
