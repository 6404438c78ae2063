#include "hcrs/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hcrs/csv.hpp"
#include "hcrs/rng.hpp"

namespace hcrs {

namespace {

// seed stream ids: one master seed fans out to every random decision
constexpr std::uint64_t kStreamUserSplit = 0;
constexpr std::uint64_t kStreamProfileBase = 1000;
constexpr std::uint64_t kStreamClustering = 2;
constexpr std::uint64_t kStreamItemColors = 10;
constexpr std::uint64_t kStreamAffinities = 11;
constexpr std::uint64_t kStreamPairs = 12;
constexpr std::uint64_t kStreamNoise = 13;

// synthetic rating model: the 72 color codes split into style palettes,
// items dress within one palette, and a user's taste is mostly per style
constexpr int kStyleCount = 8;
constexpr double kAffinityJitter = 0.05;
constexpr double kPreferenceSpread = 2.4;
constexpr double kRatingNoiseSigma = 1.0;

long round_half_up(double x) { return static_cast<long>(std::floor(x + 0.5)); }

void check_params(const EvalParams& p) {
    if (p.clusters < 0) throw std::invalid_argument("cluster count must be nonnegative");
    if (p.neighbors < 1) throw std::invalid_argument("neighborhood size must be positive");
    if (p.weight < 0.0 || p.weight > 1.0)
        throw std::invalid_argument("combination weight must be in [0,1]");
    if (p.scale_factor < 0.0) throw std::invalid_argument("scale factor must be nonnegative");
}

}  // namespace

SplitResult split(const Dataset& d, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("test fraction must lie strictly between 0 and 1");
    const auto& all_users = d.ratings.users();
    if (all_users.size() < 2) throw std::invalid_argument("need at least 2 users to split");

    // sort before shuffling so the partition depends only on the seed and the
    // set of user ids, not on file row order or rating values
    std::vector<std::string> users(all_users);
    std::sort(users.begin(), users.end());
    Rng rng(mix_seed(seed, kStreamUserSplit));
    rng.shuffle(users);

    std::size_t n_test = static_cast<std::size_t>(round_half_up(test_fraction * users.size()));
    std::vector<std::string> test_users(users.begin(), users.begin() + n_test);

    SplitResult result;
    result.test_users = test_users;
    result.train = RatingMatrix(d.ratings.scale());
    for (const auto& item : d.ratings.items()) result.train.ensure_item(item);
    for (const auto& user : d.ratings.users()) result.train.ensure_user(user);

    std::vector<bool> is_test(all_users.size(), false);
    for (const auto& u : test_users) is_test[*d.ratings.user_index(u)] = true;

    // training users contribute everything
    for (std::size_t item = 0; item < d.ratings.items().size(); ++item)
        for (const auto& [user, rating] : d.ratings.row(static_cast<int>(item)))
            if (!is_test[user])
                result.train.add_rating(all_users[user], d.ratings.items()[item], rating);

    // test users reveal half of their ratings as profile, the rest is held out
    for (std::size_t t = 0; t < test_users.size(); ++t) {
        int user = *d.ratings.user_index(test_users[t]);
        std::vector<std::pair<std::string, double>> rated;
        for (std::size_t item = 0; item < d.ratings.items().size(); ++item) {
            auto r = d.ratings.rating(static_cast<int>(item), user);
            if (r) rated.emplace_back(d.ratings.items()[item], *r);
        }
        std::sort(rated.begin(), rated.end());
        Rng profile_rng(mix_seed(seed, kStreamProfileBase + t));
        profile_rng.shuffle(rated);
        std::size_t reveal = rated.size() / 2;
        for (std::size_t i = 0; i < rated.size(); ++i) {
            if (i < reveal)
                result.train.add_rating(test_users[t], rated[i].first, rated[i].second);
            else
                result.heldout.push_back({test_users[t], rated[i].first, rated[i].second});
        }
    }
    return result;
}

double mean_absolute_error(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("mae needs at least one pair");
    double sum = 0.0;
    for (const auto& [prediction, truth] : pairs) sum += std::fabs(prediction - truth);
    return sum / static_cast<double>(pairs.size());
}

TrainedModel build_trained_model(const Dataset& d, const RatingMatrix& train,
                                 const EvalParams& params) {
    GroupRatingMatrix groups;
    if (params.clusters > 0) {
        std::vector<std::vector<double>> points;
        points.reserve(d.features.size());
        for (const ColorVector& f : d.features)
            points.emplace_back(f.per.begin(), f.per.end());
        ClusterModel model =
            kmeans(points, params.clusters, mix_seed(params.seed, kStreamClustering));
        MembershipMatrix mem = membership(points, model);
        std::vector<std::string> ids;
        ids.reserve(d.features.size());
        for (const ColorVector& f : d.features) ids.push_back(f.item_id);
        groups = build_group_matrix(mem, ids);
    }
    TrainedModel tm;
    tm.extended = extend(train, groups, params.scale_factor);
    tm.sims = build_similarity_matrix(tm.extended, params.weight);
    return tm;
}

EvalReport evaluate(const Dataset& d, const EvalParams& params) {
    check_params(params);
    SplitResult parts = split(d, params.test_fraction, params.seed);
    TrainedModel tm = build_trained_model(d, parts.train, params);

    PredictOptions options;
    options.neighbors = params.neighbors;

    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(parts.heldout.size());
    for (const HeldoutRating& h : parts.heldout) {
        int item = *parts.train.item_index(h.item_id);
        int user = *parts.train.user_index(h.user_id);
        if (!tm.extended.item_mean(item)) continue;  // no training ratings for this item
        Prediction p = predict(tm.extended, tm.sims, item, user, options);
        pairs.emplace_back(p.value, h.rating);
    }

    EvalReport report;
    report.params = params;
    report.mae = mean_absolute_error(pairs);
    report.pair_count = static_cast<int>(pairs.size());
    return report;
}

EvalReport baseline_pearson(const Dataset& d, int neighbors, std::uint64_t seed,
                            double test_fraction) {
    EvalParams params;
    params.clusters = 0;
    params.neighbors = neighbors;
    params.weight = 1.0;
    params.scale_factor = 1.0;
    params.seed = seed;
    params.test_fraction = test_fraction;
    return evaluate(d, params);
}

std::vector<EvalReport> sweep(const Dataset& d, const SweepGrid& grid, std::uint64_t seed,
                              int threads, double test_fraction) {
    if (grid.clusters.empty() || grid.neighbors.empty() || grid.weights.empty() ||
        grid.scale_factors.empty())
        throw std::invalid_argument("sweep grid must not be empty");

    std::vector<EvalParams> points;
    for (int k : grid.clusters)
        for (int n : grid.neighbors)
            for (double w : grid.weights)
                for (double sf : grid.scale_factors) {
                    EvalParams p;
                    p.clusters = k;
                    p.neighbors = n;
                    p.weight = w;
                    p.scale_factor = sf;
                    p.seed = seed;
                    p.test_fraction = test_fraction;
                    points.push_back(p);
                }

    std::vector<EvalReport> reports(points.size());
    if (threads < 1) threads = 1;
    threads = std::min<int>(threads, static_cast<int>(points.size()));

    if (threads == 1) {
        for (std::size_t i = 0; i < points.size(); ++i) reports[i] = evaluate(d, points[i]);
        return reports;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= points.size() || failed.load()) return;
            try {
                reports[i] = evaluate(d, points[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return reports;
}

namespace {

std::string padded_id(const std::string& prefix, int value, int count) {
    int width = 1;
    for (int v = count; v >= 10; v /= 10) ++width;
    std::string digits = std::to_string(value);
    return prefix + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

Dataset gen_synthetic(int n_users, int n_items, int n_ratings, std::uint64_t seed,
                      double preference_strength) {
    if (n_users < 1 || n_items < 1) throw std::invalid_argument("need at least one user and item");
    if (preference_strength < 0.0 || preference_strength > 1.0)
        throw std::invalid_argument("preference strength must be in [0,1]");
    const long total = static_cast<long>(n_users) * n_items;
    if (n_ratings < 1 || n_ratings > total)
        throw std::invalid_argument("rating count must be in [1, users*items]");

    Dataset d;
    const RatingScale scale = d.ratings.scale();

    // style palettes partition the color codes, so items sharing colors
    // share a style and items from different styles share nothing
    Rng color_rng(mix_seed(seed, kStreamItemColors));
    std::vector<int> code_order(kColorCodes);
    std::iota(code_order.begin(), code_order.end(), 0);
    color_rng.shuffle(code_order);
    const int palette_size = kColorCodes / kStyleCount;
    std::vector<int> style_of_code(kColorCodes);
    for (int c = 0; c < kColorCodes; ++c)
        style_of_code[code_order[c]] = std::min(c / palette_size, kStyleCount - 1);

    // items: color mass concentrated on 2-4 codes of one palette
    for (int i = 0; i < n_items; ++i) {
        ColorVector v;
        v.item_id = padded_id("item", i + 1, n_items);
        int style = static_cast<int>(color_rng.next_index(kStyleCount));
        int codes = 2 + static_cast<int>(color_rng.next_index(3));
        std::vector<int> chosen;
        while (static_cast<int>(chosen.size()) < codes) {
            int code = code_order[style * palette_size +
                                  static_cast<int>(color_rng.next_index(palette_size))];
            if (std::find(chosen.begin(), chosen.end(), code) == chosen.end())
                chosen.push_back(code);
        }
        double sum = 0.0;
        std::vector<double> weights(codes);
        for (double& w : weights) {
            w = 0.1 + color_rng.next_double();
            sum += w;
        }
        for (int c = 0; c < codes; ++c) v.per[chosen[c]] = weights[c] / sum;
        d.features.push_back(v);
        d.ratings.ensure_item(v.item_id);
    }

    // hidden affinities drive each user's ratings: one taste level per
    // style plus a little per-code variation. Tastes are centered per user,
    // so loving one palette implies comparatively cooler feelings about the
    // rest, the way preferences trade off within a fixed wardrobe budget.
    Rng affinity_rng(mix_seed(seed, kStreamAffinities));
    std::vector<std::array<double, kColorCodes>> affinity(n_users);
    for (int u = 0; u < n_users; ++u) {
        std::array<double, kStyleCount> taste;
        double mean_taste = 0.0;
        for (double& t : taste) {
            t = affinity_rng.next_normal();
            mean_taste += t;
        }
        mean_taste /= kStyleCount;
        for (double& t : taste) t -= mean_taste;
        for (int c = 0; c < kColorCodes; ++c)
            affinity[u][c] = taste[style_of_code[c]] + kAffinityJitter * affinity_rng.next_normal();
        d.ratings.ensure_user(padded_id("user", u + 1, n_users));
    }

    // unique (user,item) pairs by partial Fisher-Yates over all cells
    Rng pair_rng(mix_seed(seed, kStreamPairs));
    std::vector<long> cells(total);
    std::iota(cells.begin(), cells.end(), 0L);
    for (int i = 0; i < n_ratings; ++i) {
        std::size_t j = i + pair_rng.next_index(cells.size() - i);
        std::swap(cells[i], cells[j]);
    }

    Rng noise_rng(mix_seed(seed, kStreamNoise));
    const double mid = (scale.min + scale.max) / 2.0;
    for (int i = 0; i < n_ratings; ++i) {
        int user = static_cast<int>(cells[i] / n_items);
        int item = static_cast<int>(cells[i] % n_items);
        double signal = 0.0;
        for (int c = 0; c < kColorCodes; ++c) signal += affinity[user][c] * d.features[item].per[c];
        double value = mid + preference_strength * kPreferenceSpread * signal +
                       kRatingNoiseSigma * noise_rng.next_normal();
        double rating = std::clamp(static_cast<double>(std::lround(value)), scale.min, scale.max);
        d.ratings.add_rating(padded_id("user", user + 1, n_users),
                             padded_id("item", item + 1, n_items), rating);
    }
    return d;
}

void emit_report_csv(const std::vector<EvalReport>& reports, std::ostream& out) {
    out << "k,N,w,scale_factor,seed,mae,pairs\n";
    for (const EvalReport& r : reports) {
        out << r.params.clusters << ',' << r.params.neighbors << ','
            << format_real(r.params.weight) << ',' << format_real(r.params.scale_factor) << ','
            << r.params.seed << ',' << format_real(r.mae) << ',' << r.pair_count << "\n";
    }
}

void emit_report(const std::vector<EvalReport>& reports, const std::string& path) {
    if (reports.empty()) throw std::invalid_argument("no reports to emit");
    std::ostringstream out;
    emit_report_csv(reports, out);
    write_file(path, out.str());
}

std::vector<EvalReport> parse_report_csv(const std::string& path) {
    auto lines = read_lines(path);
    if (lines.empty() || lines[0] != "k,N,w,scale_factor,seed,mae,pairs")
        throw std::runtime_error(path + ": bad report header");
    std::vector<EvalReport> reports;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto f = split_csv_line(lines[i]);
        if (f.size() != 7)
            throw std::runtime_error(path + ": wrong field count on line " + std::to_string(i + 1));
        EvalReport r;
        r.params.clusters = static_cast<int>(parse_int(f[0], "k"));
        r.params.neighbors = static_cast<int>(parse_int(f[1], "N"));
        r.params.weight = parse_real(f[2], "w");
        r.params.scale_factor = parse_real(f[3], "scale_factor");
        r.params.seed = static_cast<std::uint64_t>(parse_int(f[4], "seed"));
        r.mae = parse_real(f[5], "mae");
        r.pair_count = static_cast<int>(parse_int(f[6], "pairs"));
        reports.push_back(r);
    }
    return reports;
}

void emit_report_svg(const std::vector<EvalReport>& reports, const std::string& path) {
    if (reports.empty()) throw std::invalid_argument("no reports to chart");

    // chart against whichever parameter actually varies
    std::string axis = "point";
    std::vector<double> xs(reports.size());
    auto all_same = [&](auto getter) {
        for (const auto& r : reports)
            if (getter(r) != getter(reports.front())) return false;
        return true;
    };
    if (!all_same([](const EvalReport& r) { return r.params.clusters; })) {
        axis = "k";
        for (std::size_t i = 0; i < reports.size(); ++i) xs[i] = reports[i].params.clusters;
    } else if (!all_same([](const EvalReport& r) { return r.params.neighbors; })) {
        axis = "N";
        for (std::size_t i = 0; i < reports.size(); ++i) xs[i] = reports[i].params.neighbors;
    } else if (!all_same([](const EvalReport& r) { return r.params.weight; })) {
        axis = "w";
        for (std::size_t i = 0; i < reports.size(); ++i) xs[i] = reports[i].params.weight;
    } else if (!all_same([](const EvalReport& r) { return r.params.scale_factor; })) {
        axis = "scale_factor";
        for (std::size_t i = 0; i < reports.size(); ++i) xs[i] = reports[i].params.scale_factor;
    } else {
        for (std::size_t i = 0; i < reports.size(); ++i) xs[i] = static_cast<double>(i);
    }

    double xmin = *std::min_element(xs.begin(), xs.end());
    double xmax = *std::max_element(xs.begin(), xs.end());
    double ymin = reports.front().mae, ymax = reports.front().mae;
    for (const auto& r : reports) {
        ymin = std::min(ymin, r.mae);
        ymax = std::max(ymax, r.mae);
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;

    const double width = 640, height = 400, margin = 60;
    auto sx = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin); };
    auto sy = [&](double y) { return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 15
        << "\" text-anchor=\"middle\" font-size=\"14\">" << axis << "</text>\n";
    out << "<text x=\"18\" y=\"" << height / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 " << height / 2
        << ")\">mae</text>\n";

    if (reports.size() > 1) {
        out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < reports.size(); ++i)
            out << sx(xs[i]) << ',' << sy(reports[i].mae) << ' ';
        out << "\"/>\n";
    }
    for (std::size_t i = 0; i < reports.size(); ++i)
        out << "<circle cx=\"" << sx(xs[i]) << "\" cy=\"" << sy(reports[i].mae)
            << "\" r=\"4\" fill=\"steelblue\"/>\n";
    for (double frac : {0.0, 0.5, 1.0}) {
        double y = ymin + frac * (ymax - ymin);
        double x = xmin + frac * (xmax - xmin);
        out << "<text x=\"" << margin - 6 << "\" y=\"" << sy(y) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << format_real(y) << "</text>\n";
        out << "<text x=\"" << sx(x) << "\" y=\"" << height - margin + 16
            << "\" text-anchor=\"middle\" font-size=\"11\">" << format_real(x) << "</text>\n";
    }
    out << "</svg>\n";
    write_file(path, out.str());
}

Dataset load_dataset(const std::string& ratings_path, const std::string& features_path,
                     RatingScale scale) {
    Dataset d;
    d.features = load_features(features_path);
    d.ratings = RatingMatrix(scale);
    for (const ColorVector& f : d.features) d.ratings.ensure_item(f.item_id);
    read_ratings_csv(ratings_path, d.ratings);
    if (d.ratings.items().size() != d.features.size())
        throw std::runtime_error("rated items missing from the features file");
    return d;
}

}  // namespace hcrs
