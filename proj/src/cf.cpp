#include "hcrs/cf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hcrs {

namespace {

double clamp_sim(double v) { return std::clamp(v, -1.0, 1.0); }

std::vector<double> group_column_means(const ExtendedMatrix& matrix) {
    std::vector<double> means(matrix.group_count, 0.0);
    if (matrix.group_count == 0 || matrix.items.empty()) return means;
    for (const auto& row : matrix.group_values)
        for (int c = 0; c < matrix.group_count; ++c) means[c] += row[c];
    for (double& m : means) m /= static_cast<double>(matrix.items.size());
    return means;
}

double adjusted_cosine_with_means(const ExtendedMatrix& matrix, int a, int b,
                                  const std::vector<double>& means) {
    if (matrix.group_count == 0) return 0.0;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int c = 0; c < matrix.group_count; ++c) {
        double va = matrix.group_values[a][c] - means[c];
        double vb = matrix.group_values[b][c] - means[c];
        dot += va * vb;
        na += va * va;
        nb += vb * vb;
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return clamp_sim(dot / std::sqrt(na * nb));
}

}  // namespace

double pearson_sim(const ExtendedMatrix& matrix, int a, int b) {
    const auto& ra = matrix.user_ratings[a];
    const auto& rb = matrix.user_ratings[b];
    // both rows sorted by user index
    std::vector<std::pair<double, double>> co;
    std::size_t i = 0, j = 0;
    while (i < ra.size() && j < rb.size()) {
        if (ra[i].first < rb[j].first)
            ++i;
        else if (rb[j].first < ra[i].first)
            ++j;
        else {
            co.emplace_back(ra[i].second, rb[j].second);
            ++i;
            ++j;
        }
    }
    if (co.size() < 2) return 0.0;
    double ma = 0.0, mb = 0.0;
    for (const auto& [x, y] : co) {
        ma += x;
        mb += y;
    }
    ma /= static_cast<double>(co.size());
    mb /= static_cast<double>(co.size());
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (const auto& [x, y] : co) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if (va == 0.0 || vb == 0.0) return 0.0;
    return clamp_sim(cov / std::sqrt(va * vb));
}

double adjusted_cosine_sim(const ExtendedMatrix& matrix, int a, int b) {
    return adjusted_cosine_with_means(matrix, a, b, group_column_means(matrix));
}

double combined_sim(const ExtendedMatrix& matrix, int a, int b, double weight) {
    if (weight < 0.0 || weight > 1.0)
        throw std::invalid_argument("combination weight must be in [0,1]");
    return weight * pearson_sim(matrix, a, b) + (1.0 - weight) * adjusted_cosine_sim(matrix, a, b);
}

SimilarityMatrix build_similarity_matrix(const ExtendedMatrix& matrix, double weight) {
    if (weight < 0.0 || weight > 1.0)
        throw std::invalid_argument("combination weight must be in [0,1]");
    const int n = static_cast<int>(matrix.items.size());
    SimilarityMatrix sims(n);
    const auto means = group_column_means(matrix);
    for (int a = 0; a < n; ++a) {
        sims.set(a, a, 1.0);
        for (int b = a + 1; b < n; ++b) {
            double s = weight * pearson_sim(matrix, a, b) +
                       (1.0 - weight) * adjusted_cosine_with_means(matrix, a, b, means);
            sims.set(a, b, s);
        }
    }
    return sims;
}

Prediction predict(const ExtendedMatrix& matrix, const SimilarityMatrix& sims, int item, int user,
                   const PredictOptions& options) {
    auto target_mean = matrix.item_mean(item);
    if (!target_mean)
        throw std::runtime_error("cold item " + matrix.items[item] + ": no user ratings");

    // candidate neighbors: items this user rated, ranked by |sim|
    std::vector<int> candidates;
    for (int u : matrix.rated_items_by_user[user]) {
        if (u == item) continue;
        if (options.exclude_negative && sims.at(item, u) < 0.0) continue;
        candidates.push_back(u);
    }
    std::sort(candidates.begin(), candidates.end(), [&](int x, int y) {
        double ax = std::fabs(sims.at(item, x)), ay = std::fabs(sims.at(item, y));
        if (ax != ay) return ax > ay;
        return x < y;
    });
    if (static_cast<int>(candidates.size()) > options.neighbors)
        candidates.resize(options.neighbors);

    double numer = 0.0, denom = 0.0;
    for (int u : candidates) {
        double sim = sims.at(item, u);
        double neighbor_mean = *matrix.item_mean(u);  // u is rated by this user
        numer += (*matrix.rating(u, user) - neighbor_mean) * sim;
        denom += std::fabs(sim);
    }

    Prediction p;
    p.user_id = matrix.users[user];
    p.item_id = matrix.items[item];
    p.neighbor_count = static_cast<int>(candidates.size());
    p.value = denom == 0.0 ? *target_mean : *target_mean + numer / denom;
    p.value = std::clamp(p.value, matrix.scale.min, matrix.scale.max);
    return p;
}

std::vector<Prediction> recommend(const ExtendedMatrix& matrix, const SimilarityMatrix& sims,
                                  int user, int top_m, const PredictOptions& options) {
    std::vector<Prediction> predictions;
    for (int item = 0; item < static_cast<int>(matrix.items.size()); ++item) {
        if (matrix.rating(item, user)) continue;
        if (!matrix.item_mean(item)) continue;  // cold item, nothing to go on
        predictions.push_back(predict(matrix, sims, item, user, options));
    }
    std::sort(predictions.begin(), predictions.end(), [](const Prediction& a, const Prediction& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.item_id < b.item_id;
    });
    if (static_cast<int>(predictions.size()) > top_m) predictions.resize(top_m);
    return predictions;
}

}  // namespace hcrs
