#pragma once

#include <optional>
#include <vector>

#include "pedtrack/frame.hpp"

namespace pedtrack {

struct PixelCoord {
    int x = 0;
    int y = 0;
    bool operator==(const PixelCoord&) const = default;
};

struct PointD {
    double x = 0.0;
    double y = 0.0;
};

// Per-pixel per-channel real image (same layout as Frame, doubles).
struct RealImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    double at(int x, int y, int channel) const {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + channel];
    }
};

// Gaussian background model: per-pixel per-channel running mean and
// exponentially smoothed variance.
//
//   mean_t = ((t-1)/t) * mean_{t-1} + I_t / t
//   var_t  = alpha * var_{t-1} + (1 - alpha) * (I_t - mean_t)^2
//
// The variance term uses the freshly updated mean. The first update therefore
// sets the mean to the first frame exactly.
class BackgroundModel {
public:
    BackgroundModel(int width, int height, double alpha, double eta, double initial_variance = 0.0);

    void update(const Frame& frame);

    // B = mean + eta * sqrt(var). Requires at least one update.
    RealImage background_image() const;

    // Foreground bit where (I - B) > threshold on any channel.
    BinaryMask subtract(const Frame& frame, double threshold) const;

    int width() const { return width_; }
    int height() const { return height_; }
    long frame_count() const { return frame_count_; }
    double alpha() const { return alpha_; }
    double eta() const { return eta_; }
    const std::vector<double>& mean() const { return mean_; }
    const std::vector<double>& variance() const { return variance_; }

private:
    int width_;
    int height_;
    long frame_count_ = 0;
    double alpha_;
    double eta_;
    std::vector<double> mean_;
    std::vector<double> variance_;
};

// Foreground bit where (R - G) > threshold, signed arithmetic.
BinaryMask detect_redhat(const Frame& frame, double threshold);

// Binary morphology with a square structuring element of side 2*radius+1,
// clipped at the image border. Radius 0 is the identity for all four ops.
BinaryMask dilate(const BinaryMask& mask, int radius);
BinaryMask erode(const BinaryMask& mask, int radius);
BinaryMask open(const BinaryMask& mask, int radius);   // erode then dilate
BinaryMask close(const BinaryMask& mask, int radius);  // dilate then erode

// A connected foreground region.
struct Blob {
    int frame_index = 0;
    std::vector<PixelCoord> pixels;  // 8-connected
    int area = 0;                    // == pixels.size()
    PointD centroid;                 // arithmetic mean of pixel coordinates
    int x_min = 0, y_min = 0, x_max = 0, y_max = 0;
};

// 8-connected components of the mask; components smaller than min_area are
// dropped. Blobs come back ordered by (y_min, x_min) of their bounding box.
std::vector<Blob> connected_components(const BinaryMask& mask, int frame_index, int min_area);

enum class DetectorMode { background, redhat };

struct DetectionConfig {
    DetectorMode mode = DetectorMode::redhat;
    double threshold = 50.0;  // 25 is the background-mode default
    int morphology_radius = 1;
    int min_blob_area = 20;
};

struct DetectionResult {
    std::vector<Blob> blobs;
    BinaryMask mask;  // post-morphology foreground, as fed to the labeler
};

// Full per-frame detection: mode's mask op, then close(open(dilate(mask)))
// at the config radius, then connected components. Background mode updates
// the model with this frame first and requires one.
DetectionResult detect(const Frame& frame, int frame_index, const DetectionConfig& config,
                       BackgroundModel* model);

}  // namespace pedtrack
