#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hcrs/image.hpp"

namespace hcrs {

inline constexpr int kCellSize = 8;
inline constexpr int kOrientationBins = 9;  // centers at 10, 30, ..., 170 degrees
inline constexpr int kWindowWidth = 64;
inline constexpr int kWindowHeight = 128;
inline constexpr int kBlockValues = 36;  // 2x2 cells x 9 bins
inline constexpr int kWindowDescriptorSize = 3780;  // 7x15 blocks x 36
inline constexpr double kHysClip = 0.2;
inline constexpr double kNormEpsilon = 1e-5;

// Per-pixel gradient magnitude and unsigned orientation in [0,180).
// Zero-magnitude pixels carry orientation 0.
struct GradientField {
    int width = 0, height = 0;
    std::vector<double> magnitude;
    std::vector<double> orientation;

    double mag(int x, int y) const { return magnitude[static_cast<std::size_t>(y) * width + x]; }
    double ori(int x, int y) const { return orientation[static_cast<std::size_t>(y) * width + x]; }
};

// Grid of 9-bin orientation histograms over 8x8 pixel cells.
struct CellGrid {
    int cells_x = 0, cells_y = 0;
    std::vector<double> bins;  // cells_x * cells_y * 9, cell-row-major

    double bin(int cx, int cy, int b) const {
        return bins[(static_cast<std::size_t>(cy) * cells_x + cx) * kOrientationBins + b];
    }
};

struct HogDescriptor {
    std::vector<double> values;
};

struct LinearSvmModel {
    std::vector<double> weights;
    double bias = 0.0;

    double score(std::span<const double> features) const;
};

struct Detection {
    Region region;
    double score = 0.0;
    double scale = 1.0;
};

// Centered [-1,0,1] differences per channel with replicate borders; the
// channel with the largest gradient norm supplies the pixel's vector.
GradientField compute_gradients(const RgbImage& image);

// Histograms over the w x h window at (x0,y0); w and h must be cell multiples.
CellGrid cell_histograms_in_window(const GradientField& grad, int x0, int y0, int w, int h);
CellGrid compute_cell_histograms(const GradientField& grad);

// 2x2-cell blocks at 1-cell stride, each L2-Hys normalized:
// L2-normalize with epsilon guard, clip at 0.2, L2-normalize again.
std::vector<std::array<double, kBlockValues>> normalize_blocks(const CellGrid& cells);

HogDescriptor window_descriptor(const GradientField& grad, int left, int top);
HogDescriptor window_descriptor(const RgbImage& image, int left, int top);

struct SvmTrainConfig {
    int epochs = 200;
    double learning_rate = 0.01;
    double regularization = 1e-4;
    std::uint64_t seed = 0;
};

struct SvmTrainResult {
    LinearSvmModel model;
    std::vector<double> objective;  // full-set hinge + L2 after each epoch
};

// L2-regularized hinge loss minimized by stochastic subgradient descent with
// seeded shuffling; bitwise deterministic for a fixed seed.
SvmTrainResult train_svm(const std::vector<HogDescriptor>& positives,
                         const std::vector<HogDescriptor>& negatives,
                         const SvmTrainConfig& config);

double svm_objective(const LinearSvmModel& model,
                     const std::vector<HogDescriptor>& positives,
                     const std::vector<HogDescriptor>& negatives,
                     double regularization);

double region_iou(const Region& a, const Region& b);

// Greedy suppression: keep by descending score, drop anything overlapping a
// kept detection with IoU above the limit.
std::vector<Detection> non_max_suppression(std::vector<Detection> detections, double iou_limit);

RgbImage scale_image_nearest(const RgbImage& image, int new_width, int new_height);

// Multi-scale sliding-window detection. Scales where the resized image no
// longer fits a window are skipped; regions are mapped back to original
// coordinates. Results sorted by descending score after NMS at IoU 0.5.
std::vector<Detection> detect(const RgbImage& image, const LinearSvmModel& model,
                              double threshold, int stride, const std::vector<double>& scales);

// JSON record {"dim": int, "weights": [...], "bias": real}
void save_svm_model(const LinearSvmModel& model, const std::string& path);
LinearSvmModel load_svm_model(const std::string& path);

}  // namespace hcrs
