#pragma once

#include <string>
#include <vector>

#include "hcrs/ratings.hpp"

namespace hcrs {

// Symmetric item-item similarities in [-1,1] with unit diagonal.
struct SimilarityMatrix {
    int n = 0;
    std::vector<double> values;

    SimilarityMatrix() = default;
    explicit SimilarityMatrix(int size) : n(size), values(static_cast<std::size_t>(size) * size, 0.0) {}
    double at(int a, int b) const { return values[static_cast<std::size_t>(a) * n + b]; }
    void set(int a, int b, double v) {
        values[static_cast<std::size_t>(a) * n + b] = v;
        values[static_cast<std::size_t>(b) * n + a] = v;
    }
};

struct Prediction {
    std::string user_id;
    std::string item_id;
    double value = 0.0;
    int neighbor_count = 0;
};

struct PredictOptions {
    int neighbors = 40;
    // the default keeps signed similarities; flip to drop negatively
    // correlated neighbors from selection instead
    bool exclude_negative = false;
};

// Pearson correlation over users who rated both items (user columns only);
// 0 with fewer than 2 co-raters or a constant co-rated vector.
double pearson_sim(const ExtendedMatrix& matrix, int a, int b);

// Cosine over the group columns after subtracting each column's mean across
// items; 0 when either centered vector vanishes (or there are no groups).
double adjusted_cosine_sim(const ExtendedMatrix& matrix, int a, int b);

double combined_sim(const ExtendedMatrix& matrix, int a, int b, double weight);

SimilarityMatrix build_similarity_matrix(const ExtendedMatrix& matrix, double weight);

// Weighted average of neighbor deviations from their item means, anchored at
// the target item's mean and clamped to the rating scale. Neighbors are the
// top-N items by |sim| among those the user rated.
Prediction predict(const ExtendedMatrix& matrix, const SimilarityMatrix& sims, int item, int user,
                   const PredictOptions& options);

// Predictions for every item the user has not rated, best first, ties by
// item id. Items with no ratings at all are skipped.
std::vector<Prediction> recommend(const ExtendedMatrix& matrix, const SimilarityMatrix& sims,
                                  int user, int top_m, const PredictOptions& options);

}  // namespace hcrs
