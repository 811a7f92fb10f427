#include "pedtrack/detection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pedtrack {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("detection: " + msg); }

void check_dims(const BackgroundModel& model, const Frame& frame) {
    if (frame.width != model.width() || frame.height != model.height())
        fail("frame is " + std::to_string(frame.width) + "x" + std::to_string(frame.height) +
             " but model is " + std::to_string(model.width()) + "x" + std::to_string(model.height()));
}

}  // namespace

BackgroundModel::BackgroundModel(int width, int height, double alpha, double eta,
                                 double initial_variance)
    : width_(width), height_(height), alpha_(alpha), eta_(eta) {
    if (width < 1 || height < 1) fail("model dimensions must be at least 1x1");
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must be in (0,1)");
    if (eta < 0.0) fail("eta must be >= 0");
    if (initial_variance < 0.0) fail("initial variance must be >= 0");
    std::size_t n = static_cast<std::size_t>(width) * height * 3;
    mean_.assign(n, 0.0);
    variance_.assign(n, initial_variance);
}

void BackgroundModel::update(const Frame& frame) {
    check_dims(*this, frame);
    ++frame_count_;
    const double t = static_cast<double>(frame_count_);
    const double keep = (t - 1.0) / t;
    for (std::size_t i = 0; i < mean_.size(); ++i) {
        const double v = static_cast<double>(frame.data[i]);
        mean_[i] = keep * mean_[i] + v / t;
        const double d = v - mean_[i];
        variance_[i] = alpha_ * variance_[i] + (1.0 - alpha_) * d * d;
    }
}

RealImage BackgroundModel::background_image() const {
    if (frame_count_ < 1) fail("background image requested before any update");
    RealImage img{width_, height_, std::vector<double>(mean_.size())};
    for (std::size_t i = 0; i < mean_.size(); ++i)
        img.data[i] = mean_[i] + eta_ * std::sqrt(variance_[i]);
    return img;
}

BinaryMask BackgroundModel::subtract(const Frame& frame, double threshold) const {
    check_dims(*this, frame);
    RealImage bg = background_image();
    BinaryMask mask(width_, height_);
    for (std::size_t p = 0; p < mask.bits.size(); ++p) {
        const std::size_t i = p * 3;
        mask.bits[p] = (frame.data[i] - bg.data[i] > threshold ||
                        frame.data[i + 1] - bg.data[i + 1] > threshold ||
                        frame.data[i + 2] - bg.data[i + 2] > threshold)
                           ? 1
                           : 0;
    }
    return mask;
}

BinaryMask detect_redhat(const Frame& frame, double threshold) {
    BinaryMask mask(frame.width, frame.height);
    for (std::size_t p = 0; p < mask.bits.size(); ++p) {
        const int diff = static_cast<int>(frame.data[p * 3]) - static_cast<int>(frame.data[p * 3 + 1]);
        mask.bits[p] = (static_cast<double>(diff) > threshold) ? 1 : 0;
    }
    return mask;
}

namespace {

enum class WindowOp { any, all };

// Separable pass along one axis with the window clipped at the borders.
BinaryMask axis_window(const BinaryMask& mask, int radius, bool horizontal, WindowOp op) {
    BinaryMask out(mask.width, mask.height);
    const int limit = horizontal ? mask.width : mask.height;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            const int c = horizontal ? x : y;
            const int lo = std::max(0, c - radius);
            const int hi = std::min(limit - 1, c + radius);
            std::uint8_t acc = (op == WindowOp::any) ? 0 : 1;
            for (int k = lo; k <= hi; ++k) {
                const std::uint8_t v = horizontal ? mask.at(k, y) : mask.at(x, k);
                if (op == WindowOp::any) {
                    if (v) {
                        acc = 1;
                        break;
                    }
                } else if (!v) {
                    acc = 0;
                    break;
                }
            }
            out.set(x, y, acc);
        }
    }
    return out;
}

BinaryMask square_window(const BinaryMask& mask, int radius, WindowOp op) {
    if (radius < 0) fail("morphology radius must be >= 0");
    if (radius == 0) return mask;
    return axis_window(axis_window(mask, radius, true, op), radius, false, op);
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, int radius) { return square_window(mask, radius, WindowOp::any); }
BinaryMask erode(const BinaryMask& mask, int radius) { return square_window(mask, radius, WindowOp::all); }
BinaryMask open(const BinaryMask& mask, int radius) { return dilate(erode(mask, radius), radius); }
BinaryMask close(const BinaryMask& mask, int radius) { return erode(dilate(mask, radius), radius); }

std::vector<Blob> connected_components(const BinaryMask& mask, int frame_index, int min_area) {
    std::vector<Blob> blobs;
    std::vector<std::uint8_t> seen(mask.bits.size(), 0);
    std::vector<PixelCoord> stack;

    for (int sy = 0; sy < mask.height; ++sy) {
        for (int sx = 0; sx < mask.width; ++sx) {
            const std::size_t start = static_cast<std::size_t>(sy) * mask.width + sx;
            if (!mask.bits[start] || seen[start]) continue;

            Blob blob;
            blob.frame_index = frame_index;
            blob.x_min = blob.x_max = sx;
            blob.y_min = blob.y_max = sy;
            double sum_x = 0.0, sum_y = 0.0;

            seen[start] = 1;
            stack.push_back({sx, sy});
            while (!stack.empty()) {
                const PixelCoord p = stack.back();
                stack.pop_back();
                blob.pixels.push_back(p);
                sum_x += p.x;
                sum_y += p.y;
                blob.x_min = std::min(blob.x_min, p.x);
                blob.x_max = std::max(blob.x_max, p.x);
                blob.y_min = std::min(blob.y_min, p.y);
                blob.y_max = std::max(blob.y_max, p.y);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (!dx && !dy) continue;
                        const int nx = p.x + dx, ny = p.y + dy;
                        if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) continue;
                        const std::size_t ni = static_cast<std::size_t>(ny) * mask.width + nx;
                        if (mask.bits[ni] && !seen[ni]) {
                            seen[ni] = 1;
                            stack.push_back({nx, ny});
                        }
                    }
                }
            }

            blob.area = static_cast<int>(blob.pixels.size());
            if (blob.area < min_area) continue;
            blob.centroid = {sum_x / blob.area, sum_y / blob.area};
            blobs.push_back(std::move(blob));
        }
    }

    std::stable_sort(blobs.begin(), blobs.end(), [](const Blob& a, const Blob& b) {
        if (a.y_min != b.y_min) return a.y_min < b.y_min;
        return a.x_min < b.x_min;
    });
    return blobs;
}

DetectionResult detect(const Frame& frame, int frame_index, const DetectionConfig& config,
                       BackgroundModel* model) {
    BinaryMask mask;
    if (config.mode == DetectorMode::background) {
        if (!model) fail("background mode requires a background model");
        model->update(frame);
        mask = model->subtract(frame, config.threshold);
    } else {
        mask = detect_redhat(frame, config.threshold);
    }
    mask = close(open(dilate(mask, config.morphology_radius), config.morphology_radius),
                 config.morphology_radius);
    DetectionResult result;
    result.blobs = connected_components(mask, frame_index, config.min_blob_area);
    result.mask = std::move(mask);
    return result;
}

}  // namespace pedtrack
