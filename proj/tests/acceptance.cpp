// Acceptance suite for the full toolkit: eight end-to-end properties with
// pinned tolerances and runtime budgets, one PASS/FAIL line each. The exit
// code is the number of failed criteria, so ctest reports any regression.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hcrs/cf.hpp"
#include "hcrs/clustering.hpp"
#include "hcrs/eval.hpp"
#include "hcrs/hog.hpp"
#include "hcrs/image.hpp"
#include "hcrs/ratings.hpp"
#include "hcrs/rng.hpp"
#include "small_catalog.hpp"

using namespace hcrs;

namespace {

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw CheckFailure(message);
}

std::string fmt(const char* pattern, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, value);
    return buf;
}

int failures = 0;

void criterion(int index, const std::string& name, double budget_seconds,
               const std::function<std::string()>& body) {
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
        detail = body();
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (ok && elapsed > budget_seconds) {
        ok = false;
        detail = fmt("exceeded the %.0fs budget", budget_seconds);
    }
    if (!ok) ++failures;
    std::printf("%s %d/8 %s [%.2fs]%s%s\n", ok ? "PASS" : "FAIL", index, name.c_str(), elapsed,
                detail.empty() ? "" : " ", detail.c_str());
    std::fflush(stdout);
}

RgbImage noise_image(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    RgbImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(x, y) = Rgb{static_cast<std::uint8_t>(rng.next_index(256)),
                               static_cast<std::uint8_t>(rng.next_index(256)),
                               static_cast<std::uint8_t>(rng.next_index(256))};
    return img;
}

// independent straight-line prediction math over the extended matrix
struct ReferenceModel {
    const ExtendedMatrix& m;
    double weight;

    double pearson(int a, int b) const {
        std::vector<double> xs, ys;
        for (std::size_t u = 0; u < m.users.size(); ++u) {
            auto ra = m.rating(a, static_cast<int>(u));
            auto rb = m.rating(b, static_cast<int>(u));
            if (ra && rb) {
                xs.push_back(*ra);
                ys.push_back(*rb);
            }
        }
        if (xs.size() < 2) return 0.0;
        double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
        double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
        double cov = 0.0, vx = 0.0, vy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            cov += (xs[i] - mx) * (ys[i] - my);
            vx += (xs[i] - mx) * (xs[i] - mx);
            vy += (ys[i] - my) * (ys[i] - my);
        }
        if (vx == 0.0 || vy == 0.0) return 0.0;
        return std::clamp(cov / std::sqrt(vx * vy), -1.0, 1.0);
    }

    double cosine(int a, int b) const {
        if (m.group_count == 0) return 0.0;
        std::vector<double> mean(m.group_count, 0.0);
        for (const auto& row : m.group_values)
            for (int c = 0; c < m.group_count; ++c) mean[c] += row[c];
        for (double& v : mean) v /= static_cast<double>(m.items.size());
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (int c = 0; c < m.group_count; ++c) {
            double va = m.group_values[a][c] - mean[c];
            double vb = m.group_values[b][c] - mean[c];
            dot += va * vb;
            na += va * va;
            nb += vb * vb;
        }
        if (na == 0.0 || nb == 0.0) return 0.0;
        return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
    }

    double sim(int a, int b) const {
        if (a == b) return 1.0;
        return weight * pearson(a, b) + (1.0 - weight) * cosine(a, b);
    }

    std::optional<double> mean_of(int item) const {
        double sum = 0.0;
        int n = 0;
        for (std::size_t u = 0; u < m.users.size(); ++u)
            if (auto r = m.rating(item, static_cast<int>(u))) {
                sum += *r;
                ++n;
            }
        if (n == 0) return std::nullopt;
        return sum / n;
    }

    double predict(int item, int user, int neighbors) const {
        std::vector<int> rated;
        for (std::size_t i = 0; i < m.items.size(); ++i)
            if (static_cast<int>(i) != item && m.rating(static_cast<int>(i), user))
                rated.push_back(static_cast<int>(i));
        std::sort(rated.begin(), rated.end(), [&](int x, int y) {
            double ax = std::fabs(sim(item, x)), ay = std::fabs(sim(item, y));
            if (ax != ay) return ax > ay;
            return x < y;
        });
        if (static_cast<int>(rated.size()) > neighbors) rated.resize(neighbors);
        double numer = 0.0, denom = 0.0;
        for (int n : rated) {
            double s = sim(item, n);
            numer += (*m.rating(n, user) - *mean_of(n)) * s;
            denom += std::fabs(s);
        }
        double value = denom == 0.0 ? *mean_of(item) : *mean_of(item) + numer / denom;
        return std::clamp(value, m.scale.min, m.scale.max);
    }
};

double brute_force_two_cluster_sse(const std::vector<std::vector<double>>& pts) {
    const std::size_t n = pts.size(), dim = pts[0].size();
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
        std::vector<double> mean[2] = {std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
        int count[2] = {0, 0};
        for (std::size_t j = 0; j < n; ++j) {
            int side = (mask >> j) & 1;
            ++count[side];
            for (std::size_t d = 0; d < dim; ++d) mean[side][d] += pts[j][d];
        }
        for (int s = 0; s < 2; ++s)
            for (double& v : mean[s]) v /= count[s];
        double sse = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            int side = (mask >> j) & 1;
            for (std::size_t d = 0; d < dim; ++d) {
                double diff = pts[j][d] - mean[side][d];
                sse += diff * diff;
            }
        }
        best = std::min(best, sse);
    }
    return best;
}

// ---- criteria ----

std::string worked_example_oracle() {
    constexpr double kTol = 1e-12;
    RatingMatrix ratings = small_catalog_ratings();
    ExtendedMatrix ext = extend(ratings, small_catalog_groups(), 1.0);
    int compared = 0;
    for (double w : {0.3, 0.5, 1.0}) {
        SimilarityMatrix sims = build_similarity_matrix(ext, w);
        ReferenceModel ref{ext, w};
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b)
                require(std::fabs(sims.at(a, b) - ref.sim(a, b)) <= kTol,
                        "similarity mismatch at (" + std::to_string(a) + "," + std::to_string(b) +
                            ")");
        for (int item = 0; item < 6; ++item)
            for (int user = 0; user < 4; ++user) {
                if (ext.rated_items_by_user[user].empty()) continue;
                for (int n : {1, 2, 6}) {
                    PredictOptions opt;
                    opt.neighbors = n;
                    double got = predict(ext, sims, item, user, opt).value;
                    double want = ref.predict(item, user, n);
                    require(std::fabs(got - want) <= kTol,
                            "prediction mismatch for item " + std::to_string(item) + " user " +
                                std::to_string(user) + " N=" + std::to_string(n));
                    ++compared;
                }
            }
    }
    return std::to_string(compared) + " predictions within 1e-12";
}

std::string mae_oracle() {
    constexpr double kTol = 1e-12;
    Rng rng(7);
    std::vector<std::pair<double, double>> pairs;
    long double direct = 0.0L;
    for (int i = 0; i < 10000; ++i) {
        double p = 1.0 + 4.0 * rng.next_double();
        double t = 1.0 + 4.0 * rng.next_double();
        pairs.emplace_back(p, t);
        direct += std::fabs(static_cast<long double>(p) - static_cast<long double>(t));
    }
    double want = static_cast<double>(direct / 10000.0L);
    double got = mean_absolute_error(pairs);
    require(std::fabs(got - want) <= kTol, "mae " + std::to_string(got) + " differs from direct sum");
    return "10000 pairs within 1e-12";
}

std::string hog_shape() {
    constexpr double kNormTol = 1e-6;
    constexpr double kMassTol = 1e-9;  // relative

    for (int level : {0, 128, 255}) {
        RgbImage flat(kWindowWidth, kWindowHeight,
                      Rgb{static_cast<std::uint8_t>(level), static_cast<std::uint8_t>(level),
                          static_cast<std::uint8_t>(level)});
        HogDescriptor d = window_descriptor(flat, 0, 0);
        require(d.values.size() == kWindowDescriptorSize, "descriptor length is not 3780");
        for (double v : d.values) require(v == 0.0, "constant image gave a non-zero descriptor");
    }

    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        RgbImage img = noise_image(kWindowWidth, kWindowHeight, seed);
        GradientField grad = compute_gradients(img);

        HogDescriptor d = window_descriptor(grad, 0, 0);
        require(d.values.size() == kWindowDescriptorSize, "descriptor length is not 3780");
        for (std::size_t block = 0; block < d.values.size() / kBlockValues; ++block) {
            double norm = 0.0;
            bool nonzero = false;
            for (int j = 0; j < kBlockValues; ++j) {
                double v = d.values[block * kBlockValues + j];
                norm += v * v;
                nonzero = nonzero || v != 0.0;
            }
            if (nonzero)
                require(std::fabs(std::sqrt(norm) - 1.0) <= kNormTol,
                        "block norm off unity on seed " + std::to_string(seed));
        }

        CellGrid cells = compute_cell_histograms(grad);
        double mass = std::accumulate(cells.bins.begin(), cells.bins.end(), 0.0);
        double total = std::accumulate(grad.magnitude.begin(), grad.magnitude.end(), 0.0);
        require(std::fabs(mass - total) <= kMassTol * total,
                "vote mass lost on seed " + std::to_string(seed));
    }
    return "100 images, norms within 1e-6, mass within 1e-9";
}

std::string detection_fixture() {
    std::vector<HogDescriptor> pos, neg;
    for (int i = 0; i < 20; ++i) {
        pos.push_back(window_descriptor(noise_image(kWindowWidth, kWindowHeight, 101 + i), 0, 0));
        auto level = static_cast<std::uint8_t>(40 + 10 * i);
        neg.push_back(
            window_descriptor(RgbImage(kWindowWidth, kWindowHeight, Rgb{level, level, level}), 0, 0));
    }
    SvmTrainConfig cfg;  // stock settings, seed 42
    cfg.seed = 42;
    LinearSvmModel model = train_svm(pos, neg, cfg).model;

    RgbImage patch = noise_image(kWindowWidth, kWindowHeight, 999);  // held out of training
    RgbImage scene(96, 160, Rgb{128, 128, 128});
    for (int y = 0; y < kWindowHeight; ++y)
        for (int x = 0; x < kWindowWidth; ++x) scene.at(16 + x, 16 + y) = patch.at(x, y);

    auto hits = detect(scene, model, 0.0, 8, {1.0});
    require(!hits.empty(), "no detection on the pasted patch");
    double iou = region_iou(hits.front().region, Region{16, 16, kWindowWidth, kWindowHeight});
    require(iou >= 0.5, "top detection iou " + std::to_string(iou) + " below 0.5");

    RgbImage flat(96, 160, Rgb{128, 128, 128});
    require(detect(flat, model, 0.0, 8, {1.0}).empty(), "flat image produced detections");
    return fmt("top iou %.2f, flat image silent", iou);
}

std::string clustering_invariants() {
    Rng rng(6);
    std::vector<std::vector<double>> pts(200, std::vector<double>(72));
    for (auto& p : pts)
        for (double& v : p) v = rng.next_double();

    for (int k : {2, 10, 30}) {
        ClusterModel m = kmeans(pts, k, 99);
        require(!m.sse_history.empty(), "no iterations recorded");
        for (std::size_t i = 1; i < m.sse_history.size(); ++i)
            require(m.sse_history[i] <= m.sse_history[i - 1] + 1e-9,
                    "sse increased at k=" + std::to_string(k));
        MembershipMatrix mem = membership(pts, m);
        for (double p : mem.pro)
            require(p >= 0.0 && p <= 1.0, "membership out of [0,1] at k=" + std::to_string(k));
    }

    std::vector<std::vector<double>> toy{{0.0, 0.0}, {0.0, 1.0}, {10.0, 0.0}, {10.0, 1.0}};
    double oracle = brute_force_two_cluster_sse(toy);
    ClusterModel m = kmeans(toy, 2, 1);
    require(std::fabs(m.sse - oracle) <= 1e-12,
            "toy sse " + std::to_string(m.sse) + " misses the brute-force optimum");
    return fmt("toy optimum %.1f matched", oracle);
}

std::string hybrid_beats_baseline() {
    constexpr double kMargin = 0.02;
    Dataset d = gen_synthetic(163, 50, 1783, 42, 0.8);
    const std::vector<std::uint64_t> seeds{42, 43, 44, 45, 46};

    double worst = std::numeric_limits<double>::infinity();
    int worst_n = 0;
    for (int n = 10; n <= 100; n += 10) {
        double hybrid = 0.0, base = 0.0;
        for (std::uint64_t seed : seeds) {
            EvalParams p;
            p.clusters = 30;
            p.neighbors = n;
            p.weight = 0.5;
            p.scale_factor = 5.0;
            p.seed = seed;
            hybrid += evaluate(d, p).mae;
            base += baseline_pearson(d, n, seed).mae;
        }
        hybrid /= seeds.size();
        base /= seeds.size();
        double margin = (base - hybrid) / base;
        if (margin < worst) {
            worst = margin;
            worst_n = n;
        }
        require(margin >= kMargin, "margin " + fmt("%.1f%%", margin * 100.0) + " at N=" +
                                       std::to_string(n) + " is below 2%");
    }
    return "weakest margin " + fmt("%.1f%%", worst * 100.0) + " at N=" + std::to_string(worst_n);
}

std::string cluster_count_sweep() {
    Dataset d = gen_synthetic(163, 50, 1783, 42, 0.8);
    SweepGrid grid;
    grid.clusters = {5, 10, 20, 30, 40, 50};
    auto reports = sweep(d, grid, 42, 2);
    require(reports.size() == 6, "expected 6 sweep rows");

    std::ostringstream csv;
    emit_report_csv(reports, csv);
    std::istringstream lines(csv.str());
    std::string line;
    int rows = -1;  // header
    while (std::getline(lines, line))
        if (!line.empty()) ++rows;
    require(rows == 6, "csv does not have 6 data rows");

    const EvalReport* best = &reports.front();
    for (const EvalReport& r : reports) {
        require(r.pair_count > 0, "a sweep point evaluated no pairs");
        if (r.mae < best->mae) best = &r;
    }
    return "lowest mae " + fmt("%.4f", best->mae) + " at k=" +
           std::to_string(best->params.clusters);
}

std::string leakage_and_determinism() {
    Dataset d = gen_synthetic(163, 50, 1783, 42, 0.8);
    EvalParams p;
    p.clusters = 30;
    p.seed = 42;

    SplitResult s = split(d, p.test_fraction, p.seed);
    std::set<std::pair<std::string, std::string>> withheld;
    for (const auto& h : s.heldout) withheld.insert({h.user_id, h.item_id});

    Dataset tampered;
    tampered.features = d.features;
    for (const auto& item : d.ratings.items()) tampered.ratings.ensure_item(item);
    for (const auto& user : d.ratings.users()) tampered.ratings.ensure_user(user);
    for (std::size_t item = 0; item < d.ratings.items().size(); ++item)
        for (const auto& [user, rating] : d.ratings.row(static_cast<int>(item))) {
            double value = rating;
            if (withheld.count({d.ratings.users()[user], d.ratings.items()[item]}))
                value = rating == 5.0 ? 1.0 : rating + 1.0;
            tampered.ratings.add_rating(d.ratings.users()[user], d.ratings.items()[item], value);
        }
    SplitResult s2 = split(tampered, p.test_fraction, p.seed);
    TrainedModel a = build_trained_model(d, s.train, p);
    TrainedModel b = build_trained_model(tampered, s2.train, p);
    require(a.sims.values == b.sims.values,
            "similarities changed when withheld ratings were perturbed");

    SweepGrid grid;
    grid.clusters = {0, 30};
    auto serial = sweep(d, grid, 42, 1);
    auto parallel = sweep(d, grid, 42, 4);
    auto parallel2 = sweep(d, grid, 42, 4);
    std::ostringstream cs, cp, cp2;
    emit_report_csv(serial, cs);
    emit_report_csv(parallel, cp);
    emit_report_csv(parallel2, cp2);
    require(cs.str() == cp.str(), "parallel sweep csv differs from serial");
    require(cp.str() == cp2.str(), "repeated parallel sweep csv differs");
    return "bit-identical similarities, byte-identical csv";
}

}  // namespace

int main() {
    criterion(1, "worked-example prediction oracle", 1.0, worked_example_oracle);
    criterion(2, "mean-absolute-error oracle", 1.0, mae_oracle);
    criterion(3, "hog descriptor shape", 10.0, hog_shape);
    criterion(4, "detection fixture", 60.0, detection_fixture);
    criterion(5, "clustering invariants", 5.0, clustering_invariants);
    criterion(6, "hybrid beats rating-only baseline", 120.0, hybrid_beats_baseline);
    criterion(7, "cluster-count sweep", 300.0, cluster_count_sweep);
    criterion(8, "leakage and determinism", 600.0, leakage_and_determinism);
    if (failures) std::printf("%d of 8 criteria failed\n", failures);
    return failures;
}
