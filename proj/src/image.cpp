#include "hcrs/image.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace hcrs {

RgbImage::RgbImage(int width, int height, Rgb fill)
    : width_(width), height_(height) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("image dimensions must be positive");
    pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

RgbImage::RgbImage(int width, int height, std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("image dimensions must be positive");
    if (pixels_.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("pixel count does not match dimensions");
}

bool region_inside(const Region& region, const RgbImage& image) {
    return region.w > 0 && region.h > 0 && region.x >= 0 && region.y >= 0 &&
           region.x + region.w <= image.width() && region.y + region.h <= image.height();
}

namespace {

[[noreturn]] void ppm_error(const std::string& path, const std::string& what, std::size_t offset) {
    throw std::runtime_error(path + ": " + what + " at byte " + std::to_string(offset));
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// Reads one unsigned decimal token, advancing pos past leading whitespace.
long read_header_int(const std::string& data, std::size_t& pos, const std::string& path,
                     const std::string& what) {
    while (pos < data.size() && is_space(data[pos])) ++pos;
    if (pos >= data.size()) ppm_error(path, "truncated header, expected " + what, pos);
    std::size_t start = pos;
    long value = 0;
    while (pos < data.size() && data[pos] >= '0' && data[pos] <= '9') {
        value = value * 10 + (data[pos] - '0');
        if (value > 1000000000L) ppm_error(path, what + " out of range", start);
        ++pos;
    }
    if (pos == start) ppm_error(path, "malformed " + what, start);
    return value;
}

}  // namespace

RgbImage load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open file");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (data.size() < 2 || data[0] != 'P' || data[1] != '6')
        ppm_error(path, "not a P6 ppm, bad magic", 0);

    std::size_t pos = 2;
    long width = read_header_int(data, pos, path, "width");
    long height = read_header_int(data, pos, path, "height");
    std::size_t maxval_at = pos;
    long maxval = read_header_int(data, pos, path, "maxval");
    if (width <= 0 || height <= 0) ppm_error(path, "non-positive dimensions", 2);
    if (maxval != 255) ppm_error(path, "unsupported maxval " + std::to_string(maxval), maxval_at);
    if (pos >= data.size() || !is_space(data[pos]))
        ppm_error(path, "missing whitespace after maxval", pos);
    ++pos;  // exactly one whitespace byte before the raster

    std::size_t need = static_cast<std::size_t>(width) * height * 3;
    if (data.size() - pos < need)
        ppm_error(path, "truncated pixel data, expected " + std::to_string(need) + " bytes",
                  data.size());

    std::vector<Rgb> pixels(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        pixels[i].r = static_cast<std::uint8_t>(data[pos + 3 * i]);
        pixels[i].g = static_cast<std::uint8_t>(data[pos + 3 * i + 1]);
        pixels[i].b = static_cast<std::uint8_t>(data[pos + 3 * i + 2]);
    }
    return RgbImage(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

void save_image(const RgbImage& image, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open file for writing");
    out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
    for (const Rgb& p : image.pixels()) {
        char bytes[3] = {static_cast<char>(p.r), static_cast<char>(p.g), static_cast<char>(p.b)};
        out.write(bytes, 3);
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

HsvPixel rgb_to_hsv(int r, int g, int b) {
    if (r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255)
        throw std::invalid_argument("rgb channel outside [0,255]");
    double rf = r / 255.0, gf = g / 255.0, bf = b / 255.0;
    double max = std::max(rf, std::max(gf, bf));
    double min = std::min(rf, std::min(gf, bf));
    double delta = max - min;

    HsvPixel hsv;
    hsv.v = max;
    hsv.s = max == 0.0 ? 0.0 : delta / max;
    if (delta == 0.0) {
        hsv.h = 0.0;  // achromatic
        return hsv;
    }
    double h;
    if (max == rf)
        h = 60.0 * ((gf - bf) / delta);
    else if (max == gf)
        h = 60.0 * ((bf - rf) / delta + 2.0);
    else
        h = 60.0 * ((rf - gf) / delta + 4.0);
    if (h < 0.0) h += 360.0;
    if (h >= 360.0) h -= 360.0;
    hsv.h = h;
    return hsv;
}

RgbImage crop(const RgbImage& image, const Region& region) {
    if (!region_inside(region, image))
        throw std::out_of_range("crop region outside image bounds");
    std::vector<Rgb> pixels;
    pixels.reserve(static_cast<std::size_t>(region.w) * region.h);
    for (int y = 0; y < region.h; ++y)
        for (int x = 0; x < region.w; ++x)
            pixels.push_back(image.at(region.x + x, region.y + y));
    return RgbImage(region.w, region.h, std::move(pixels));
}

}  // namespace hcrs
