#include "hcrs/color.hpp"

#include <sstream>
#include <stdexcept>

#include "hcrs/csv.hpp"
#include "hcrs/hog.hpp"

namespace hcrs {

// Perceptual 72-color partition: 8 hue sectors with red wrapping around 0.
int hue_bin(double h) {
    if (h <= 20.0 || h > 315.0) return 0;
    if (h <= 40.0) return 1;
    if (h <= 75.0) return 2;
    if (h <= 155.0) return 3;
    if (h <= 190.0) return 4;
    if (h <= 270.0) return 5;
    if (h <= 295.0) return 6;
    return 7;
}

int sat_bin(double s) {
    if (s < kSatLow) return 0;
    if (s < kSatHigh) return 1;
    return 2;
}

int val_bin(double v) {
    if (v < kValLow) return 0;
    if (v < kValHigh) return 1;
    return 2;
}

ColorCode quantize_hsv(const HsvPixel& p) {
    return ColorCode{9 * hue_bin(p.h) + 3 * sat_bin(p.s) + val_bin(p.v)};
}

ColorVector color_vector(const RgbImage& image, const Region& region, const std::string& item_id) {
    if (!region_inside(region, image))
        throw std::out_of_range("color_vector region outside image or empty");
    ColorVector out;
    out.item_id = item_id;
    std::array<long, kColorCodes> counts{};
    for (int y = region.y; y < region.y + region.h; ++y) {
        for (int x = region.x; x < region.x + region.w; ++x) {
            const Rgb& p = image.at(x, y);
            counts[quantize_hsv(rgb_to_hsv(p.r, p.g, p.b)).l]++;
        }
    }
    double total = static_cast<double>(region.w) * region.h;
    for (int i = 0; i < kColorCodes; ++i) out.per[i] = counts[i] / total;
    return out;
}

Region clothes_region(const std::vector<Detection>& detections, const RgbImage& image) {
    if (detections.empty()) return Region{0, 0, image.width(), image.height()};
    const Detection* best = &detections.front();
    for (const Detection& d : detections)
        if (d.score > best->score) best = &d;
    return best->region;
}

void save_features(const std::vector<ColorVector>& features, const std::string& path) {
    std::ostringstream out;
    out << "item_id";
    for (int i = 0; i < kColorCodes; ++i) out << ",c" << i;
    out << "\n";
    for (const ColorVector& f : features) {
        out << f.item_id;
        for (int i = 0; i < kColorCodes; ++i) out << ',' << format_real(f.per[i]);
        out << "\n";
    }
    write_file(path, out.str());
}

std::vector<ColorVector> load_features(const std::string& path) {
    auto lines = read_lines(path);
    if (lines.empty()) throw std::runtime_error(path + ": empty features file");
    auto header = split_csv_line(lines[0]);
    if (header.size() != kColorCodes + 1 || header[0] != "item_id")
        throw std::runtime_error(path + ": bad features header");
    std::vector<ColorVector> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split_csv_line(lines[i]);
        if (fields.size() != kColorCodes + 1)
            throw std::runtime_error(path + ": wrong field count on line " + std::to_string(i + 1));
        ColorVector v;
        v.item_id = fields[0];
        for (int c = 0; c < kColorCodes; ++c)
            v.per[c] = parse_real(fields[c + 1], "feature value");
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace hcrs
