#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hcrs {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

// h in degrees [0,360), s and v in [0,1]; h is 0 for achromatic pixels
struct HsvPixel {
    double h = 0.0;
    double s = 0.0;
    double v = 0.0;
};

struct Region {
    int x = 0, y = 0, w = 0, h = 0;
    bool operator==(const Region&) const = default;
};

// Row-major 8-bit RGB grid. Value type: every operation copies, none mutates.
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height, Rgb fill = Rgb{});
    RgbImage(int width, int height, std::vector<Rgb> pixels);

    int width() const { return width_; }
    int height() const { return height_; }
    const Rgb& at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    Rgb& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    const std::vector<Rgb>& pixels() const { return pixels_; }

    bool operator==(const RgbImage&) const = default;

private:
    int width_ = 0, height_ = 0;
    std::vector<Rgb> pixels_;
};

bool region_inside(const Region& region, const RgbImage& image);

// Binary PPM (P6, maxval 255). Parse errors carry the offending byte offset.
RgbImage load_image(const std::string& path);
void save_image(const RgbImage& image, const std::string& path);

HsvPixel rgb_to_hsv(int r, int g, int b);

RgbImage crop(const RgbImage& image, const Region& region);

}  // namespace hcrs
