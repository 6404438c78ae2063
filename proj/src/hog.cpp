#include "hcrs/hog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "hcrs/rng.hpp"
#include "json.hpp"

namespace hcrs {

double LinearSvmModel::score(std::span<const double> features) const {
    if (features.size() != weights.size())
        throw std::invalid_argument("feature length does not match model dimension");
    double s = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * features[i];
    return s;
}

GradientField compute_gradients(const RgbImage& image) {
    const int w = image.width(), h = image.height();
    if (w < 3 || h < 3) throw std::invalid_argument("image smaller than 3x3");

    GradientField field;
    field.width = w;
    field.height = h;
    field.magnitude.resize(static_cast<std::size_t>(w) * h);
    field.orientation.resize(static_cast<std::size_t>(w) * h);

    auto channel = [](const Rgb& p, int c) {
        return static_cast<double>(c == 0 ? p.r : c == 1 ? p.g : p.b);
    };

    for (int y = 0; y < h; ++y) {
        const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
            double best_sq = -1.0, best_dx = 0.0, best_dy = 0.0;
            for (int c = 0; c < 3; ++c) {
                double dx = channel(image.at(xp, y), c) - channel(image.at(xm, y), c);
                double dy = channel(image.at(x, yp), c) - channel(image.at(x, ym), c);
                double sq = dx * dx + dy * dy;
                if (sq > best_sq) {
                    best_sq = sq;
                    best_dx = dx;
                    best_dy = dy;
                }
            }
            std::size_t idx = static_cast<std::size_t>(y) * w + x;
            double mag = std::sqrt(best_sq);
            field.magnitude[idx] = mag;
            if (mag == 0.0) {
                field.orientation[idx] = 0.0;
            } else {
                double deg = std::atan2(best_dy, best_dx) * (180.0 / M_PI);
                deg = std::fmod(deg, 180.0);
                if (deg < 0.0) deg += 180.0;
                if (deg >= 180.0) deg = 0.0;
                field.orientation[idx] = deg;
            }
        }
    }
    return field;
}

CellGrid cell_histograms_in_window(const GradientField& grad, int x0, int y0, int w, int h) {
    if (w % kCellSize != 0 || h % kCellSize != 0)
        throw std::invalid_argument("window dimensions must be multiples of the cell size");
    if (x0 < 0 || y0 < 0 || x0 + w > grad.width || y0 + h > grad.height)
        throw std::out_of_range("window outside gradient field");

    CellGrid grid;
    grid.cells_x = w / kCellSize;
    grid.cells_y = h / kCellSize;
    grid.bins.assign(static_cast<std::size_t>(grid.cells_x) * grid.cells_y * kOrientationBins, 0.0);

    constexpr double bin_width = 180.0 / kOrientationBins;  // 20 degrees
    for (int cy = 0; cy < grid.cells_y; ++cy) {
        for (int cx = 0; cx < grid.cells_x; ++cx) {
            double* bins = &grid.bins[(static_cast<std::size_t>(cy) * grid.cells_x + cx) * kOrientationBins];
            for (int py = 0; py < kCellSize; ++py) {
                for (int px = 0; px < kCellSize; ++px) {
                    int x = x0 + cx * kCellSize + px;
                    int y = y0 + cy * kCellSize + py;
                    double m = grad.mag(x, y);
                    if (m == 0.0) continue;
                    // linear vote between the two nearest bin centers,
                    // circular over 180 degrees
                    double t = (grad.ori(x, y) - bin_width / 2.0) / bin_width;
                    double lower = std::floor(t);
                    double frac = t - lower;
                    int lo = static_cast<int>(lower);
                    int lo_bin = ((lo % kOrientationBins) + kOrientationBins) % kOrientationBins;
                    int hi_bin = (lo_bin + 1) % kOrientationBins;
                    bins[lo_bin] += (1.0 - frac) * m;
                    bins[hi_bin] += frac * m;
                }
            }
        }
    }
    return grid;
}

CellGrid compute_cell_histograms(const GradientField& grad) {
    return cell_histograms_in_window(grad, 0, 0, grad.width, grad.height);
}

namespace {

std::array<double, kBlockValues> l2_hys(std::array<double, kBlockValues> block) {
    double sq = 0.0;
    for (double v : block) sq += v * v;
    double norm = std::sqrt(sq + kNormEpsilon * kNormEpsilon);
    for (double& v : block) v /= norm;
    sq = 0.0;
    for (double& v : block) {
        v = std::min(v, kHysClip);
        sq += v * v;
    }
    norm = std::sqrt(sq + kNormEpsilon * kNormEpsilon);
    for (double& v : block) v /= norm;
    return block;
}

}  // namespace

std::vector<std::array<double, kBlockValues>> normalize_blocks(const CellGrid& cells) {
    if (cells.cells_x < 2 || cells.cells_y < 2)
        throw std::invalid_argument("cell grid must be at least 2x2");
    std::vector<std::array<double, kBlockValues>> blocks;
    blocks.reserve(static_cast<std::size_t>(cells.cells_x - 1) * (cells.cells_y - 1));
    for (int by = 0; by + 1 < cells.cells_y; ++by) {
        for (int bx = 0; bx + 1 < cells.cells_x; ++bx) {
            std::array<double, kBlockValues> block;
            int k = 0;
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx)
                    for (int b = 0; b < kOrientationBins; ++b)
                        block[k++] = cells.bin(bx + dx, by + dy, b);
            blocks.push_back(l2_hys(block));
        }
    }
    return blocks;
}

HogDescriptor window_descriptor(const GradientField& grad, int left, int top) {
    if (left < 0 || top < 0 || left + kWindowWidth > grad.width || top + kWindowHeight > grad.height)
        throw std::out_of_range("detector window outside image");
    CellGrid cells = cell_histograms_in_window(grad, left, top, kWindowWidth, kWindowHeight);
    auto blocks = normalize_blocks(cells);
    HogDescriptor d;
    d.values.reserve(kWindowDescriptorSize);
    for (const auto& block : blocks)
        d.values.insert(d.values.end(), block.begin(), block.end());
    return d;
}

HogDescriptor window_descriptor(const RgbImage& image, int left, int top) {
    return window_descriptor(compute_gradients(image), left, top);
}

double svm_objective(const LinearSvmModel& model,
                     const std::vector<HogDescriptor>& positives,
                     const std::vector<HogDescriptor>& negatives,
                     double regularization) {
    double reg = 0.0;
    for (double w : model.weights) reg += w * w;
    double loss = 0.0;
    auto hinge = [&](const HogDescriptor& d, double label) {
        double margin = label * model.score(d.values);
        loss += std::max(0.0, 1.0 - margin);
    };
    for (const auto& d : positives) hinge(d, 1.0);
    for (const auto& d : negatives) hinge(d, -1.0);
    double n = static_cast<double>(positives.size() + negatives.size());
    return 0.5 * regularization * reg + loss / n;
}

SvmTrainResult train_svm(const std::vector<HogDescriptor>& positives,
                         const std::vector<HogDescriptor>& negatives,
                         const SvmTrainConfig& config) {
    if (positives.empty() || negatives.empty())
        throw std::invalid_argument("both training classes must be non-empty");
    const std::size_t dim = positives.front().values.size();
    for (const auto& d : positives)
        if (d.values.size() != dim) throw std::invalid_argument("inconsistent descriptor lengths");
    for (const auto& d : negatives)
        if (d.values.size() != dim) throw std::invalid_argument("inconsistent descriptor lengths");

    const std::size_t n = positives.size() + negatives.size();
    std::vector<const HogDescriptor*> samples(n);
    std::vector<double> labels(n);
    for (std::size_t i = 0; i < positives.size(); ++i) {
        samples[i] = &positives[i];
        labels[i] = 1.0;
    }
    for (std::size_t i = 0; i < negatives.size(); ++i) {
        samples[positives.size() + i] = &negatives[i];
        labels[positives.size() + i] = -1.0;
    }

    SvmTrainResult result;
    result.model.weights.assign(dim, 0.0);
    result.model.bias = 0.0;
    auto& w = result.model.weights;
    auto& b = result.model.bias;

    Rng rng(config.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    const double lr = config.learning_rate;
    const double lambda = config.regularization;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t idx : order) {
            const auto& x = samples[idx]->values;
            const double y = labels[idx];
            double margin = y * result.model.score(x);
            const double shrink = 1.0 - lr * lambda;
            if (margin < 1.0) {
                for (std::size_t j = 0; j < dim; ++j) w[j] = shrink * w[j] + lr * y * x[j];
                b += lr * y;
            } else {
                for (std::size_t j = 0; j < dim; ++j) w[j] = shrink * w[j];
            }
        }
        result.objective.push_back(svm_objective(result.model, positives, negatives, lambda));
    }
    return result;
}

double region_iou(const Region& a, const Region& b) {
    int ix = std::max(a.x, b.x);
    int iy = std::max(a.y, b.y);
    int ix2 = std::min(a.x + a.w, b.x + b.w);
    int iy2 = std::min(a.y + a.h, b.y + b.h);
    double inter = static_cast<double>(std::max(0, ix2 - ix)) * std::max(0, iy2 - iy);
    double uni = static_cast<double>(a.w) * a.h + static_cast<double>(b.w) * b.h - inter;
    return uni <= 0.0 ? 0.0 : inter / uni;
}

std::vector<Detection> non_max_suppression(std::vector<Detection> detections, double iou_limit) {
    std::sort(detections.begin(), detections.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.region.x != b.region.x) return a.region.x < b.region.x;
        if (a.region.y != b.region.y) return a.region.y < b.region.y;
        return a.scale < b.scale;
    });
    std::vector<Detection> kept;
    for (const Detection& d : detections) {
        bool suppressed = false;
        for (const Detection& k : kept) {
            if (region_iou(d.region, k.region) > iou_limit) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(d);
    }
    return kept;
}

RgbImage scale_image_nearest(const RgbImage& image, int new_width, int new_height) {
    if (new_width <= 0 || new_height <= 0)
        throw std::invalid_argument("scaled dimensions must be positive");
    std::vector<Rgb> pixels(static_cast<std::size_t>(new_width) * new_height);
    for (int y = 0; y < new_height; ++y) {
        int sy = std::min(image.height() - 1,
                          static_cast<int>((y + 0.5) * image.height() / new_height));
        for (int x = 0; x < new_width; ++x) {
            int sx = std::min(image.width() - 1,
                              static_cast<int>((x + 0.5) * image.width() / new_width));
            pixels[static_cast<std::size_t>(y) * new_width + x] = image.at(sx, sy);
        }
    }
    return RgbImage(new_width, new_height, std::move(pixels));
}

std::vector<Detection> detect(const RgbImage& image, const LinearSvmModel& model,
                              double threshold, int stride, const std::vector<double>& scales) {
    if (model.weights.size() != kWindowDescriptorSize)
        throw std::invalid_argument("model dimension does not match the 64x128 window descriptor");
    if (stride <= 0) throw std::invalid_argument("stride must be positive");

    std::vector<Detection> candidates;
    for (double scale : scales) {
        if (scale <= 0.0) throw std::invalid_argument("scales must be positive");
        int sw = static_cast<int>(std::lround(image.width() / scale));
        int sh = static_cast<int>(std::lround(image.height() / scale));
        if (sw < kWindowWidth || sh < kWindowHeight) continue;

        RgbImage scaled = scale == 1.0 ? image : scale_image_nearest(image, sw, sh);
        GradientField grad = compute_gradients(scaled);
        for (int y = 0; y + kWindowHeight <= sh; y += stride) {
            for (int x = 0; x + kWindowWidth <= sw; x += stride) {
                HogDescriptor d = window_descriptor(grad, x, y);
                double score = model.score(d.values);
                if (score >= threshold) {
                    Region r;
                    r.x = static_cast<int>(std::lround(x * scale));
                    r.y = static_cast<int>(std::lround(y * scale));
                    r.w = static_cast<int>(std::lround(kWindowWidth * scale));
                    r.h = static_cast<int>(std::lround(kWindowHeight * scale));
                    // rounding can push the box one pixel past the border
                    r.x = std::min(r.x, image.width() - 1);
                    r.y = std::min(r.y, image.height() - 1);
                    r.w = std::min(r.w, image.width() - r.x);
                    r.h = std::min(r.h, image.height() - r.y);
                    candidates.push_back(Detection{r, score, scale});
                }
            }
        }
    }
    return non_max_suppression(std::move(candidates), 0.5);
}

void save_svm_model(const LinearSvmModel& model, const std::string& path) {
    nlohmann::json j;
    j["dim"] = model.weights.size();
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error(path + ": write failed");
}

LinearSvmModel load_svm_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open model file");
    nlohmann::json j;
    in >> j;
    LinearSvmModel model;
    model.weights = j.at("weights").get<std::vector<double>>();
    model.bias = j.at("bias").get<double>();
    if (j.at("dim").get<std::size_t>() != model.weights.size())
        throw std::runtime_error(path + ": dim field does not match weight count");
    return model;
}

}  // namespace hcrs
