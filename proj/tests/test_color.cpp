#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hcrs/color.hpp"
#include "hcrs/hog.hpp"
#include "hcrs/rng.hpp"
#include "temp_dir.hpp"

using namespace hcrs;

namespace {

RgbImage random_image(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Rgb> px(static_cast<std::size_t>(w) * h);
    for (auto& p : px) {
        p.r = static_cast<std::uint8_t>(rng.next_index(256));
        p.g = static_cast<std::uint8_t>(rng.next_index(256));
        p.b = static_cast<std::uint8_t>(rng.next_index(256));
    }
    return RgbImage(w, h, std::move(px));
}

}  // namespace

TEST_CASE("hue bins follow the 8-sector table with red wrapping zero") {
    CHECK(hue_bin(0.0) == 0);
    CHECK(hue_bin(20.0) == 0);
    CHECK(hue_bin(20.001) == 1);
    CHECK(hue_bin(40.0) == 1);
    CHECK(hue_bin(40.001) == 2);
    CHECK(hue_bin(75.0) == 2);
    CHECK(hue_bin(120.0) == 3);
    CHECK(hue_bin(155.0) == 3);
    CHECK(hue_bin(190.0) == 4);
    CHECK(hue_bin(240.0) == 5);
    CHECK(hue_bin(270.0) == 5);
    CHECK(hue_bin(295.0) == 6);
    CHECK(hue_bin(315.0) == 7);
    CHECK(hue_bin(315.001) == 0);
    CHECK(hue_bin(359.9) == 0);
}

TEST_CASE("saturation and value bins split at 0.2 and 0.7") {
    CHECK(sat_bin(0.0) == 0);
    CHECK(sat_bin(0.19) == 0);
    CHECK(sat_bin(0.2) == 1);
    CHECK(sat_bin(0.69) == 1);
    CHECK(sat_bin(0.7) == 2);
    CHECK(sat_bin(1.0) == 2);
    CHECK(val_bin(0.0) == 0);
    CHECK(val_bin(0.2) == 1);
    CHECK(val_bin(0.7) == 2);
    CHECK(val_bin(1.0) == 2);
}

TEST_CASE("quantization composes the bins as 9H+3S+V") {
    CHECK(quantize_hsv(HsvPixel{0.0, 1.0, 1.0}).l == 8);    // pure red
    CHECK(quantize_hsv(HsvPixel{0.0, 0.0, 0.0}).l == 0);    // black
    CHECK(quantize_hsv(HsvPixel{300.0, 1.0, 1.0}).l == 71); // top of every bin
    CHECK(quantize_hsv(HsvPixel{120.0, 0.5, 0.5}).l == 9 * 3 + 3 * 1 + 1);
}

TEST_CASE("every hsv pixel maps to exactly one of the 72 codes") {
    Rng rng(23);
    for (int i = 0; i < 20000; ++i) {
        HsvPixel p{rng.next_double() * 360.0, rng.next_double(), rng.next_double()};
        int l = quantize_hsv(p).l;
        CHECK(l >= 0);
        CHECK(l < kColorCodes);
    }
}

TEST_CASE("a uniform red region concentrates all mass on code 8") {
    RgbImage img(10, 10, Rgb{255, 0, 0});
    ColorVector v = color_vector(img, Region{0, 0, 10, 10}, "red");
    CHECK(v.item_id == "red");
    CHECK(v.per[8] == doctest::Approx(1.0));
    for (int i = 0; i < kColorCodes; ++i)
        if (i != 8) CHECK(v.per[i] == 0.0);
}

TEST_CASE("a half red half black region splits its mass") {
    RgbImage img(10, 10, Rgb{0, 0, 0});
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 5; ++x) img.at(x, y) = Rgb{255, 0, 0};
    ColorVector v = color_vector(img, Region{0, 0, 10, 10}, "halved");
    CHECK(v.per[8] == doctest::Approx(0.5));
    CHECK(v.per[0] == doctest::Approx(0.5));
}

TEST_CASE("color vectors are normalized and region-additive") {
    RgbImage img = random_image(24, 16, 41);
    ColorVector whole = color_vector(img, Region{0, 0, 24, 16}, "w");
    double sum = std::accumulate(whole.per.begin(), whole.per.end(), 0.0);
    CHECK(std::fabs(sum - 1.0) < 1e-9);
    for (double p : whole.per) CHECK(p >= 0.0);

    // pixel-count-weighted average of two disjoint halves equals the union
    ColorVector left = color_vector(img, Region{0, 0, 10, 16}, "l");
    ColorVector right = color_vector(img, Region{10, 0, 14, 16}, "r");
    for (int i = 0; i < kColorCodes; ++i) {
        double merged = (10.0 * 16.0 * left.per[i] + 14.0 * 16.0 * right.per[i]) / (24.0 * 16.0);
        CHECK(std::fabs(merged - whole.per[i]) < 1e-9);
    }

    CHECK_THROWS_AS(color_vector(img, Region{0, 0, 0, 4}, "x"), std::out_of_range);
    CHECK_THROWS_AS(color_vector(img, Region{20, 0, 10, 16}, "x"), std::out_of_range);
}

TEST_CASE("the clothes region is the best detection or the whole image") {
    RgbImage img(20, 40);
    std::vector<Detection> two{
        {Region{1, 2, 3, 4}, 0.4, 1.0},
        {Region{5, 6, 7, 8}, 1.2, 1.0},
    };
    CHECK(clothes_region(two, img) == Region{5, 6, 7, 8});

    std::vector<Detection> one{{Region{2, 2, 8, 16}, 0.1, 1.0}};
    CHECK(clothes_region(one, img) == Region{2, 2, 8, 16});

    CHECK(clothes_region({}, img) == Region{0, 0, 20, 40});
}

TEST_CASE("feature files round-trip bitwise") {
    TempDir tmp("color_features");
    std::vector<ColorVector> features;
    Rng rng(17);
    for (int i = 0; i < 5; ++i) {
        ColorVector v;
        v.item_id = "item" + std::to_string(i);
        double sum = 0.0;
        for (double& p : v.per) {
            p = rng.next_double();
            sum += p;
        }
        for (double& p : v.per) p /= sum;
        features.push_back(v);
    }
    save_features(features, tmp.file("f.csv"));

    auto lines = slurp(tmp.file("f.csv"));
    CHECK(lines.substr(0, 13) == "item_id,c0,c1");
    CHECK(lines.find(",c71\n") != std::string::npos);

    auto back = load_features(tmp.file("f.csv"));
    REQUIRE(back.size() == features.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].item_id == features[i].item_id);
        CHECK(back[i].per == features[i].per);
    }

    spit(tmp.file("bad.csv"), "item_id,c0\nx,0.5\n");
    CHECK_THROWS_AS(load_features(tmp.file("bad.csv")), std::runtime_error);
}
