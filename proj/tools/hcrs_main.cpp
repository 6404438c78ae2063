// hcrs command line: wires image analysis, clustering and the recommender
// into scriptable subcommands. Machine-readable output goes to stdout,
// diagnostics to stderr. A JSON config file may supply any long flag; explicit
// flags win over the file, the file wins over built-in defaults.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hcrs/clustering.hpp"
#include "hcrs/color.hpp"
#include "hcrs/csv.hpp"
#include "hcrs/eval.hpp"
#include "hcrs/hog.hpp"
#include "hcrs/image.hpp"
#include "hcrs/ratings.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string config_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::string joined;
        for (const auto& elem : v) {
            if (!joined.empty()) joined.push_back(',');
            joined += config_text(elem);
        }
        return joined;
    }
    return v.dump();
}

// Applies config-file values to flags the command line left untouched.
class ConfigBinder {
public:
    void bind(CLI::App* cmd, const std::string& name, std::string& target) {
        entries_.push_back({cmd, name, [&target](const json& v) { target = config_text(v); }});
    }
    void bind(CLI::App* cmd, const std::string& name, double& target) {
        entries_.push_back({cmd, name, [&target](const json& v) {
                                target = v.is_string() ? hcrs::parse_real(v.get<std::string>(), "config value")
                                                       : v.get<double>();
                            }});
    }
    void bind(CLI::App* cmd, const std::string& name, int& target) {
        entries_.push_back({cmd, name, [&target](const json& v) {
                                target = v.is_string()
                                             ? static_cast<int>(hcrs::parse_int(v.get<std::string>(), "config value"))
                                             : v.get<int>();
                            }});
    }
    void bind(CLI::App* cmd, const std::string& name, std::uint64_t& target) {
        entries_.push_back({cmd, name, [&target](const json& v) {
                                target = v.is_string()
                                             ? static_cast<std::uint64_t>(
                                                   hcrs::parse_int(v.get<std::string>(), "config value"))
                                             : v.get<std::uint64_t>();
                            }});
    }

    void apply(const std::string& config_path) const {
        if (config_path.empty()) return;
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("cannot open config " + config_path);
        json config = json::parse(in);
        for (const auto& e : entries_) {
            if (e.cmd->count("--" + e.name) == 0 && config.contains(e.name)) e.set(config.at(e.name));
        }
    }

private:
    struct Entry {
        CLI::App* cmd;
        std::string name;
        std::function<void(const json&)> set;
    };
    std::vector<Entry> entries_;
};

std::vector<double> parse_real_list(const std::string& text, const std::string& what) {
    std::vector<double> values;
    for (const auto& field : hcrs::split_csv_line(text)) values.push_back(hcrs::parse_real(field, what));
    if (values.empty()) throw std::runtime_error("empty " + what + " list");
    return values;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
    std::vector<int> values;
    for (const auto& field : hcrs::split_csv_line(text)) values.push_back(static_cast<int>(hcrs::parse_int(field, what)));
    if (values.empty()) throw std::runtime_error("empty " + what + " list");
    return values;
}

std::vector<fs::path> ppm_files(const std::string& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".ppm") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw std::runtime_error("no .ppm files in " + dir);
    return paths;
}

std::vector<hcrs::HogDescriptor> window_descriptors_from_dir(const std::string& dir) {
    std::vector<hcrs::HogDescriptor> descriptors;
    for (const auto& path : ppm_files(dir)) {
        hcrs::RgbImage image = hcrs::load_image(path.string());
        if (image.width() != hcrs::kWindowWidth || image.height() != hcrs::kWindowHeight)
            throw std::runtime_error("training crop must be 64x128: " + path.string());
        descriptors.push_back(hcrs::window_descriptor(image, 0, 0));
    }
    return descriptors;
}

hcrs::Dataset load_eval_dataset(const std::string& ratings_path, const std::string& features_path) {
    if (!features_path.empty()) return hcrs::load_dataset(ratings_path, features_path);
    // No features: color-blind dataset, valid for runs that never cluster.
    hcrs::Dataset d;
    d.ratings = hcrs::load_ratings(ratings_path);
    d.features.resize(d.ratings.items().size());
    for (std::size_t i = 0; i < d.features.size(); ++i) d.features[i].item_id = d.ratings.items()[i];
    return d;
}

void write_reports(const std::vector<hcrs::EvalReport>& reports, const std::string& out_path,
                   const std::string& svg_path) {
    hcrs::emit_report_csv(reports, std::cout);
    if (!out_path.empty()) hcrs::emit_report(reports, out_path);
    if (!svg_path.empty()) hcrs::emit_report_svg(reports, svg_path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid clothes recommender toolkit"};
    app.require_subcommand(1);
    ConfigBinder binder;

    // img-info
    auto* img_info = app.add_subcommand("img-info", "print WxH of a PPM image");
    std::string img_info_path;
    img_info->add_option("path", img_info_path, "image file")->required();

    // detect
    auto* detect = app.add_subcommand("detect", "run the person detector over an image");
    std::string detect_image, detect_model, detect_scales = "1.0", detect_config;
    double detect_threshold = 0.0;
    int detect_stride = 8;
    detect->add_option("--image", detect_image, "input PPM")->required();
    detect->add_option("--model", detect_model, "SVM model JSON")->required();
    detect->add_option("--threshold", detect_threshold, "minimum decision score");
    detect->add_option("--stride", detect_stride, "window step in pixels");
    detect->add_option("--scales", detect_scales, "comma-separated image scales");
    detect->add_option("--config", detect_config, "JSON config file");
    binder.bind(detect, "image", detect_image);
    binder.bind(detect, "model", detect_model);
    binder.bind(detect, "threshold", detect_threshold);
    binder.bind(detect, "stride", detect_stride);
    binder.bind(detect, "scales", detect_scales);

    // train-svm
    auto* train = app.add_subcommand("train-svm", "train the window classifier on 64x128 crops");
    std::string train_pos, train_neg, train_out, train_config;
    int train_epochs = 200;
    double train_lr = 0.01, train_lambda = 1e-4;
    std::uint64_t train_seed = 42;
    train->add_option("--pos", train_pos, "directory of positive crops")->required();
    train->add_option("--neg", train_neg, "directory of negative crops")->required();
    train->add_option("--out", train_out, "model JSON path")->required();
    train->add_option("--epochs", train_epochs, "training epochs");
    train->add_option("--lr", train_lr, "learning rate");
    train->add_option("--lambda", train_lambda, "L2 regularization strength");
    train->add_option("--seed", train_seed, "shuffle seed");
    train->add_option("--config", train_config, "JSON config file");
    binder.bind(train, "pos", train_pos);
    binder.bind(train, "neg", train_neg);
    binder.bind(train, "out", train_out);
    binder.bind(train, "epochs", train_epochs);
    binder.bind(train, "lr", train_lr);
    binder.bind(train, "lambda", train_lambda);
    binder.bind(train, "seed", train_seed);

    // extract
    auto* extract = app.add_subcommand("extract", "detect the wearer and write color vectors");
    std::string extract_images, extract_model, extract_out, extract_scales = "1.0", extract_config;
    double extract_threshold = 0.0;
    int extract_stride = 8;
    extract->add_option("--images", extract_images, "directory of item photos (PPM)")->required();
    extract->add_option("--model", extract_model, "SVM model JSON")->required();
    extract->add_option("--out", extract_out, "features CSV path")->required();
    extract->add_option("--threshold", extract_threshold, "minimum decision score");
    extract->add_option("--stride", extract_stride, "window step in pixels");
    extract->add_option("--scales", extract_scales, "comma-separated image scales");
    extract->add_option("--config", extract_config, "JSON config file");
    binder.bind(extract, "images", extract_images);
    binder.bind(extract, "model", extract_model);
    binder.bind(extract, "out", extract_out);
    binder.bind(extract, "threshold", extract_threshold);
    binder.bind(extract, "stride", extract_stride);
    binder.bind(extract, "scales", extract_scales);

    // cluster
    auto* cluster = app.add_subcommand("cluster", "group color vectors and write soft memberships");
    std::string cluster_features, cluster_out, cluster_centers, cluster_config;
    int cluster_k = 30, cluster_max_iter = 100;
    double cluster_tol = 1e-6;
    std::uint64_t cluster_seed = 42;
    cluster->add_option("--features", cluster_features, "features CSV")->required();
    cluster->add_option("--k", cluster_k, "number of clusters");
    cluster->add_option("--seed", cluster_seed, "initialization seed");
    cluster->add_option("--out", cluster_out, "memberships CSV path")->required();
    cluster->add_option("--centers", cluster_centers, "also save centers CSV (+ JSON sidecar)");
    cluster->add_option("--tol", cluster_tol, "convergence tolerance");
    cluster->add_option("--max-iter", cluster_max_iter, "iteration cap");
    cluster->add_option("--config", cluster_config, "JSON config file");
    binder.bind(cluster, "features", cluster_features);
    binder.bind(cluster, "k", cluster_k);
    binder.bind(cluster, "seed", cluster_seed);
    binder.bind(cluster, "out", cluster_out);
    binder.bind(cluster, "centers", cluster_centers);
    binder.bind(cluster, "tol", cluster_tol);
    binder.bind(cluster, "max-iter", cluster_max_iter);

    // recommend
    auto* recommend = app.add_subcommand("recommend", "rank unrated items for one user");
    std::string rec_ratings, rec_groups, rec_user, rec_config;
    int rec_top = 10, rec_neighbors = 40;
    double rec_weight = 0.5, rec_scale = 5.0;
    recommend->add_option("--ratings", rec_ratings, "ratings CSV")->required();
    recommend->add_option("--groups", rec_groups, "group memberships CSV");
    recommend->add_option("--user", rec_user, "user id")->required();
    recommend->add_option("--top", rec_top, "number of recommendations");
    recommend->add_option("--neighbors", rec_neighbors, "neighborhood size");
    recommend->add_option("--weight", rec_weight, "rating-similarity weight in [0,1]");
    recommend->add_option("--scale", rec_scale, "group column scale factor");
    recommend->add_option("--config", rec_config, "JSON config file");
    binder.bind(recommend, "ratings", rec_ratings);
    binder.bind(recommend, "groups", rec_groups);
    binder.bind(recommend, "user", rec_user);
    binder.bind(recommend, "top", rec_top);
    binder.bind(recommend, "neighbors", rec_neighbors);
    binder.bind(recommend, "weight", rec_weight);
    binder.bind(recommend, "scale", rec_scale);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "write a seeded synthetic ratings + features pair");
    std::string gen_out, gen_config;
    int gen_users = 163, gen_items = 50, gen_ratings = 1783;
    double gen_strength = 0.8;
    std::uint64_t gen_seed = 42;
    gen->add_option("--users", gen_users, "number of users");
    gen->add_option("--items", gen_items, "number of items");
    gen->add_option("--ratings", gen_ratings, "number of ratings");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--strength", gen_strength, "color-preference strength in [0,1]");
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--config", gen_config, "JSON config file");
    binder.bind(gen, "users", gen_users);
    binder.bind(gen, "items", gen_items);
    binder.bind(gen, "ratings", gen_ratings);
    binder.bind(gen, "seed", gen_seed);
    binder.bind(gen, "strength", gen_strength);
    binder.bind(gen, "out", gen_out);

    // evaluate / baseline / sweep share dataset flags
    auto* evaluate = app.add_subcommand("evaluate", "train/test split and MAE for one parameter point");
    std::string eval_ratings, eval_features, eval_out, eval_config;
    int eval_k = 30, eval_neighbors = 40;
    double eval_weight = 0.5, eval_scale = 5.0, eval_test_fraction = 0.2;
    std::uint64_t eval_seed = 42;
    evaluate->add_option("--ratings", eval_ratings, "ratings CSV")->required();
    evaluate->add_option("--features", eval_features, "features CSV")->required();
    evaluate->add_option("--k", eval_k, "number of clusters (0 disables group columns)");
    evaluate->add_option("--neighbors", eval_neighbors, "neighborhood size");
    evaluate->add_option("--weight", eval_weight, "rating-similarity weight in [0,1]");
    evaluate->add_option("--scale", eval_scale, "group column scale factor");
    evaluate->add_option("--seed", eval_seed, "split/clustering seed");
    evaluate->add_option("--test-fraction", eval_test_fraction, "share of users held out");
    evaluate->add_option("--out", eval_out, "also write the report CSV here");
    evaluate->add_option("--config", eval_config, "JSON config file");
    binder.bind(evaluate, "ratings", eval_ratings);
    binder.bind(evaluate, "features", eval_features);
    binder.bind(evaluate, "k", eval_k);
    binder.bind(evaluate, "neighbors", eval_neighbors);
    binder.bind(evaluate, "weight", eval_weight);
    binder.bind(evaluate, "scale", eval_scale);
    binder.bind(evaluate, "seed", eval_seed);
    binder.bind(evaluate, "test-fraction", eval_test_fraction);
    binder.bind(evaluate, "out", eval_out);

    auto* baseline = app.add_subcommand("baseline", "classic rating-only Pearson evaluation");
    std::string base_ratings, base_features, base_out, base_config;
    int base_neighbors = 40;
    double base_test_fraction = 0.2;
    std::uint64_t base_seed = 42;
    baseline->add_option("--ratings", base_ratings, "ratings CSV")->required();
    baseline->add_option("--features", base_features, "features CSV (optional, unused by the baseline)");
    baseline->add_option("--neighbors", base_neighbors, "neighborhood size");
    baseline->add_option("--seed", base_seed, "split seed");
    baseline->add_option("--test-fraction", base_test_fraction, "share of users held out");
    baseline->add_option("--out", base_out, "also write the report CSV here");
    baseline->add_option("--config", base_config, "JSON config file");
    binder.bind(baseline, "ratings", base_ratings);
    binder.bind(baseline, "features", base_features);
    binder.bind(baseline, "neighbors", base_neighbors);
    binder.bind(baseline, "seed", base_seed);
    binder.bind(baseline, "test-fraction", base_test_fraction);
    binder.bind(baseline, "out", base_out);

    auto* sweep = app.add_subcommand("sweep", "evaluate a parameter grid, rows in grid order");
    std::string sweep_ratings, sweep_features, sweep_out, sweep_svg, sweep_config;
    std::string sweep_clusters = "30", sweep_neighbors = "40", sweep_weights = "0.5", sweep_scales = "5";
    double sweep_test_fraction = 0.2;
    std::uint64_t sweep_seed = 42;
    int sweep_threads = 1;
    sweep->add_option("--ratings", sweep_ratings, "ratings CSV")->required();
    sweep->add_option("--features", sweep_features, "features CSV")->required();
    sweep->add_option("--clusters", sweep_clusters, "comma-separated k values");
    sweep->add_option("--neighbors", sweep_neighbors, "comma-separated neighborhood sizes");
    sweep->add_option("--weights", sweep_weights, "comma-separated similarity weights");
    sweep->add_option("--scales", sweep_scales, "comma-separated scale factors");
    sweep->add_option("--seed", sweep_seed, "split/clustering seed");
    sweep->add_option("--test-fraction", sweep_test_fraction, "share of users held out");
    sweep->add_option("--threads", sweep_threads, "worker threads");
    sweep->add_option("--out", sweep_out, "also write the report CSV here");
    sweep->add_option("--svg", sweep_svg, "write an MAE chart here");
    sweep->add_option("--config", sweep_config, "JSON config file");
    binder.bind(sweep, "ratings", sweep_ratings);
    binder.bind(sweep, "features", sweep_features);
    binder.bind(sweep, "clusters", sweep_clusters);
    binder.bind(sweep, "neighbors", sweep_neighbors);
    binder.bind(sweep, "weights", sweep_weights);
    binder.bind(sweep, "scales", sweep_scales);
    binder.bind(sweep, "seed", sweep_seed);
    binder.bind(sweep, "test-fraction", sweep_test_fraction);
    binder.bind(sweep, "threads", sweep_threads);
    binder.bind(sweep, "out", sweep_out);
    binder.bind(sweep, "svg", sweep_svg);

    CLI11_PARSE(app, argc, argv);

    try {
        if (img_info->parsed()) {
            hcrs::RgbImage image = hcrs::load_image(img_info_path);
            std::cout << image.width() << "x" << image.height() << "\n";
            return 0;
        }

        if (detect->parsed()) {
            binder.apply(detect_config);
            hcrs::RgbImage image = hcrs::load_image(detect_image);
            hcrs::LinearSvmModel model = hcrs::load_svm_model(detect_model);
            auto detections = hcrs::detect(image, model, detect_threshold, detect_stride,
                                           parse_real_list(detect_scales, "scale"));
            for (const auto& d : detections) {
                std::cout << d.region.x << " " << d.region.y << " " << d.region.w << " " << d.region.h
                          << " " << hcrs::format_real(d.score) << " " << hcrs::format_real(d.scale) << "\n";
            }
            return 0;
        }

        if (train->parsed()) {
            binder.apply(train_config);
            auto positives = window_descriptors_from_dir(train_pos);
            auto negatives = window_descriptors_from_dir(train_neg);
            hcrs::SvmTrainConfig config;
            config.epochs = train_epochs;
            config.learning_rate = train_lr;
            config.regularization = train_lambda;
            config.seed = train_seed;
            hcrs::SvmTrainResult result = hcrs::train_svm(positives, negatives, config);
            hcrs::save_svm_model(result.model, train_out);
            std::cout << positives.size() << " " << negatives.size() << " " << config.epochs << " "
                      << hcrs::format_real(result.objective.back()) << "\n";
            return 0;
        }

        if (extract->parsed()) {
            binder.apply(extract_config);
            hcrs::LinearSvmModel model = hcrs::load_svm_model(extract_model);
            auto scales = parse_real_list(extract_scales, "scale");
            std::vector<hcrs::ColorVector> features;
            for (const auto& path : ppm_files(extract_images)) {
                hcrs::RgbImage image = hcrs::load_image(path.string());
                auto detections = hcrs::detect(image, model, extract_threshold, extract_stride, scales);
                hcrs::Region region = hcrs::clothes_region(detections, image);
                features.push_back(hcrs::color_vector(image, region, path.stem().string()));
                std::cout << path.stem().string() << " " << region.x << " " << region.y << " " << region.w
                          << " " << region.h << "\n";
            }
            hcrs::save_features(features, extract_out);
            return 0;
        }

        if (cluster->parsed()) {
            binder.apply(cluster_config);
            auto features = hcrs::load_features(cluster_features);
            std::vector<std::vector<double>> points;
            std::vector<std::string> item_ids;
            for (const auto& f : features) {
                points.emplace_back(f.per.begin(), f.per.end());
                item_ids.push_back(f.item_id);
            }
            hcrs::ClusterModel model =
                hcrs::kmeans(points, cluster_k, cluster_seed, cluster_max_iter, cluster_tol);
            hcrs::MembershipMatrix m = hcrs::membership(points, model);
            hcrs::save_memberships(m, item_ids, cluster_out);
            if (!cluster_centers.empty()) hcrs::save_cluster_model(model, cluster_centers);
            std::cout << model.k << " " << model.iterations << " " << hcrs::format_real(model.sse) << "\n";
            return 0;
        }

        if (recommend->parsed()) {
            binder.apply(rec_config);
            hcrs::RatingMatrix ratings = hcrs::load_ratings(rec_ratings);
            hcrs::GroupRatingMatrix groups;
            if (!rec_groups.empty()) {
                groups = hcrs::load_groups(rec_groups);
            } else {
                groups.items = ratings.items();
                groups.values.resize(groups.items.size());
            }
            hcrs::ExtendedMatrix extended = hcrs::extend(ratings, groups, rec_scale);
            hcrs::SimilarityMatrix sims = hcrs::build_similarity_matrix(extended, rec_weight);
            auto user = ratings.user_index(rec_user);
            if (!user) throw std::runtime_error("unknown user: " + rec_user);
            hcrs::PredictOptions options;
            options.neighbors = rec_neighbors;
            auto recs = hcrs::recommend(extended, sims, *user, rec_top, options);
            for (std::size_t i = 0; i < recs.size(); ++i) {
                std::cout << (i + 1) << "," << recs[i].item_id << "," << hcrs::format_real(recs[i].value)
                          << "\n";
            }
            return 0;
        }

        if (gen->parsed()) {
            binder.apply(gen_config);
            hcrs::Dataset d = hcrs::gen_synthetic(gen_users, gen_items, gen_ratings, gen_seed, gen_strength);
            fs::create_directories(gen_out);
            hcrs::save_ratings(d.ratings, (fs::path(gen_out) / "ratings.csv").string());
            hcrs::save_features(d.features, (fs::path(gen_out) / "features.csv").string());
            std::cout << d.ratings.users().size() << " " << d.ratings.items().size() << " "
                      << d.ratings.rating_count() << "\n";
            return 0;
        }

        if (evaluate->parsed()) {
            binder.apply(eval_config);
            hcrs::Dataset d = load_eval_dataset(eval_ratings, eval_features);
            hcrs::EvalParams params;
            params.clusters = eval_k;
            params.neighbors = eval_neighbors;
            params.weight = eval_weight;
            params.scale_factor = eval_scale;
            params.seed = eval_seed;
            params.test_fraction = eval_test_fraction;
            write_reports({hcrs::evaluate(d, params)}, eval_out, "");
            return 0;
        }

        if (baseline->parsed()) {
            binder.apply(base_config);
            hcrs::Dataset d = load_eval_dataset(base_ratings, base_features);
            write_reports({hcrs::baseline_pearson(d, base_neighbors, base_seed, base_test_fraction)},
                          base_out, "");
            return 0;
        }

        if (sweep->parsed()) {
            binder.apply(sweep_config);
            hcrs::Dataset d = load_eval_dataset(sweep_ratings, sweep_features);
            hcrs::SweepGrid grid;
            grid.clusters = parse_int_list(sweep_clusters, "cluster count");
            grid.neighbors = parse_int_list(sweep_neighbors, "neighborhood size");
            grid.weights = parse_real_list(sweep_weights, "weight");
            grid.scale_factors = parse_real_list(sweep_scales, "scale factor");
            auto reports = hcrs::sweep(d, grid, sweep_seed, sweep_threads, sweep_test_fraction);
            write_reports(reports, sweep_out, sweep_svg);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    std::cerr << "error: no subcommand\n";
    return 1;
}
