#pragma once

#include <array>
#include <string>
#include <vector>

#include "hcrs/image.hpp"

namespace hcrs {

inline constexpr int kColorCodes = 72;  // 8 hue x 3 saturation x 3 value bins

// code = 9*Hbin + 3*Sbin + Vbin
struct ColorCode {
    int l = 0;
};

// Fraction of region pixels falling into each of the 72 color codes.
// Components are nonnegative and sum to 1 for a non-empty region.
struct ColorVector {
    std::string item_id;
    std::array<double, kColorCodes> per{};
};

// Saturation/value bin thresholds; the hue partition lives in quantize_hsv.
inline constexpr double kSatLow = 0.2;
inline constexpr double kSatHigh = 0.7;
inline constexpr double kValLow = 0.2;
inline constexpr double kValHigh = 0.7;

int hue_bin(double h);     // [0,360) -> [0,7]
int sat_bin(double s);     // [0,1] -> [0,2]
int val_bin(double v);     // [0,1] -> [0,2]
ColorCode quantize_hsv(const HsvPixel& p);

ColorVector color_vector(const RgbImage& image, const Region& region, const std::string& item_id);

struct Detection;  // hog.hpp
Region clothes_region(const std::vector<Detection>& detections, const RgbImage& image);

// CSV with header item_id,c0,...,c71
void save_features(const std::vector<ColorVector>& features, const std::string& path);
std::vector<ColorVector> load_features(const std::string& path);

}  // namespace hcrs
