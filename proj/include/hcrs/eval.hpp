#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "hcrs/cf.hpp"
#include "hcrs/color.hpp"
#include "hcrs/ratings.hpp"

namespace hcrs {

// Ratings plus one color vector per item, aligned with the rating matrix's
// item order. Every rated item must carry a feature vector.
struct Dataset {
    RatingMatrix ratings;
    std::vector<ColorVector> features;
};

struct EvalParams {
    int clusters = 30;
    int neighbors = 40;
    double weight = 0.5;
    double scale_factor = 5.0;
    std::uint64_t seed = 42;
    double test_fraction = 0.2;
};

struct EvalReport {
    EvalParams params;
    double mae = 0.0;
    int pair_count = 0;
};

struct HeldoutRating {
    std::string user_id;
    std::string item_id;
    double rating = 0.0;
};

struct SplitResult {
    RatingMatrix train;
    std::vector<HeldoutRating> heldout;
    std::vector<std::string> test_users;
};

// Round-half-up share of users becomes the test group; half of each test
// user's ratings (seeded, per user) stays visible as their profile, the rest
// is withheld as prediction targets. Item features are never split.
SplitResult split(const Dataset& d, double test_fraction, std::uint64_t seed);

double mean_absolute_error(const std::vector<std::pair<double, double>>& pairs);

// The training-side artifacts of one evaluation; exposed so tests can verify
// withheld ratings never reach similarity computation.
struct TrainedModel {
    ExtendedMatrix extended;
    SimilarityMatrix sims;
};

TrainedModel build_trained_model(const Dataset& d, const RatingMatrix& train,
                                 const EvalParams& params);

// Full pipeline at one parameter point: split, cluster all item features,
// extend the training matrix, build similarities, predict every withheld
// rating, report MAE. Withheld pairs whose item has no training ratings are
// skipped (nothing to anchor a prediction on) and not counted.
EvalReport evaluate(const Dataset& d, const EvalParams& params);

// Same pipeline with no group columns and Pearson-only similarity.
EvalReport baseline_pearson(const Dataset& d, int neighbors, std::uint64_t seed,
                            double test_fraction = 0.2);

struct SweepGrid {
    std::vector<int> clusters{30};
    std::vector<int> neighbors{40};
    std::vector<double> weights{0.5};
    std::vector<double> scale_factors{5.0};
};

// Cartesian sweep, rows in grid order (clusters, neighbors, weights, scale
// factors, innermost last) regardless of how many worker threads run.
std::vector<EvalReport> sweep(const Dataset& d, const SweepGrid& grid, std::uint64_t seed,
                              int threads = 1, double test_fraction = 0.2);

// Seeded stand-in for the unavailable user study: the color codes split into
// style palettes, each item concentrates its color mass on 2-4 codes of one
// palette, users carry hidden per-style tastes (with per-code jitter), and
// each sampled (user,item) pair rates clamp(round(mid +
// strength*affinity.color + noise)). strength 0 makes ratings pure noise.
Dataset gen_synthetic(int n_users, int n_items, int n_ratings, std::uint64_t seed,
                      double preference_strength);

void emit_report_csv(const std::vector<EvalReport>& reports, std::ostream& out);
void emit_report(const std::vector<EvalReport>& reports, const std::string& path);
std::vector<EvalReport> parse_report_csv(const std::string& path);

// Line chart of MAE against whichever grid parameter varies.
void emit_report_svg(const std::vector<EvalReport>& reports, const std::string& path);

Dataset load_dataset(const std::string& ratings_path, const std::string& features_path,
                     RatingScale scale = RatingScale{});

}  // namespace hcrs
