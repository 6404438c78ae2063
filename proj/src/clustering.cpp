#include "hcrs/clustering.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hcrs/csv.hpp"
#include "hcrs/rng.hpp"
#include "json.hpp"

namespace hcrs {

double counter_similarity(const std::vector<double>& point, const std::vector<double>& center) {
    if (point.size() != center.size())
        throw std::invalid_argument("counter_similarity dimension mismatch");
    double sq = 0.0;
    for (std::size_t i = 0; i < point.size(); ++i) {
        double d = point[i] - center[i];
        sq += d * d;
    }
    return std::sqrt(sq);
}

namespace {

// Seeded pick of k initial centers, preferring distinct point values so that
// duplicates in the data do not collapse clusters from the start.
std::vector<std::vector<double>> initial_centers(const std::vector<std::vector<double>>& points,
                                                 int k, Rng& rng) {
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    std::vector<std::vector<double>> centers;
    std::vector<std::size_t> skipped;
    for (std::size_t idx : order) {
        if (static_cast<int>(centers.size()) == k) break;
        bool duplicate = false;
        for (const auto& c : centers)
            if (c == points[idx]) {
                duplicate = true;
                break;
            }
        if (duplicate)
            skipped.push_back(idx);
        else
            centers.push_back(points[idx]);
    }
    for (std::size_t i = 0; static_cast<int>(centers.size()) < k; ++i)
        centers.push_back(points[skipped[i]]);
    return centers;
}

}  // namespace

ClusterModel kmeans(const std::vector<std::vector<double>>& points, int k, std::uint64_t seed,
                    int max_iter, double tol) {
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    if (static_cast<std::size_t>(k) > points.size())
        throw std::invalid_argument("k exceeds the number of points");
    const std::size_t dim = points.front().size();
    if (dim == 0) throw std::invalid_argument("points must not be zero-dimensional");
    for (const auto& p : points)
        if (p.size() != dim) throw std::invalid_argument("points have mixed dimensions");

    ClusterModel model;
    model.k = k;
    model.seed = seed;
    model.tol = tol;
    Rng rng(seed);
    model.centers = initial_centers(points, k, rng);

    std::vector<int> assignment(points.size(), 0);
    for (int iter = 0; iter < max_iter; ++iter) {
        // assign to the nearest center, ties to the lowest cluster index
        for (std::size_t j = 0; j < points.size(); ++j) {
            double best = std::numeric_limits<double>::infinity();
            int best_c = 0;
            for (int c = 0; c < k; ++c) {
                double d = counter_similarity(points[j], model.centers[c]);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            assignment[j] = best_c;
        }

        // means
        std::vector<std::vector<double>> next(k, std::vector<double>(dim, 0.0));
        std::vector<int> counts(k, 0);
        for (std::size_t j = 0; j < points.size(); ++j) {
            counts[assignment[j]]++;
            for (std::size_t d = 0; d < dim; ++d) next[assignment[j]][d] += points[j][d];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t d = 0; d < dim; ++d) next[c][d] /= counts[c];
        }

        // reseed empty clusters from the point farthest from its own center;
        // each reseed consumes its point so several empties pick distinct ones
        std::vector<bool> used(points.size(), false);
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            double worst = -1.0;
            std::size_t worst_j = 0;
            for (std::size_t j = 0; j < points.size(); ++j) {
                if (used[j]) continue;
                double d = counter_similarity(points[j], next[assignment[j]]);
                if (d > worst) {
                    worst = d;
                    worst_j = j;
                }
            }
            next[c] = points[worst_j];
            used[worst_j] = true;
        }

        double moved = 0.0;
        for (int c = 0; c < k; ++c)
            moved = std::max(moved, counter_similarity(model.centers[c], next[c]));
        model.centers = std::move(next);
        model.iterations = iter + 1;

        double sse = 0.0;
        for (std::size_t j = 0; j < points.size(); ++j) {
            double d = counter_similarity(points[j], model.centers[assignment[j]]);
            sse += d * d;
        }
        model.sse_history.push_back(sse);
        model.sse = sse;

        if (moved < tol) break;
    }
    return model;
}

MembershipMatrix membership(const std::vector<std::vector<double>>& points,
                            const ClusterModel& model) {
    MembershipMatrix m;
    m.items = static_cast<int>(points.size());
    m.k = model.k;
    m.cs.resize(points.size() * model.k);
    m.pro.resize(points.size() * model.k);
    m.max_cs.assign(model.k, 0.0);

    for (std::size_t j = 0; j < points.size(); ++j)
        for (int c = 0; c < model.k; ++c) {
            double d = counter_similarity(points[j], model.centers[c]);
            m.cs[j * model.k + c] = d;
            m.max_cs[c] = std::max(m.max_cs[c], d);
        }

    for (std::size_t j = 0; j < points.size(); ++j)
        for (int c = 0; c < model.k; ++c) {
            // all points on the center: full membership for everyone
            m.pro[j * model.k + c] =
                m.max_cs[c] == 0.0 ? 1.0 : 1.0 - m.cs[j * model.k + c] / m.max_cs[c];
        }
    return m;
}

namespace {

std::string sidecar_path(const std::string& centers_path) {
    auto dot = centers_path.find_last_of('.');
    auto slash = centers_path.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return centers_path + ".json";
    return centers_path.substr(0, dot) + ".json";
}

}  // namespace

void save_cluster_model(const ClusterModel& model, const std::string& centers_path) {
    std::ostringstream out;
    for (const auto& center : model.centers) {
        for (std::size_t d = 0; d < center.size(); ++d) {
            if (d) out << ',';
            out << format_real(center[d]);
        }
        out << "\n";
    }
    write_file(centers_path, out.str());

    nlohmann::json j;
    j["k"] = model.k;
    j["seed"] = model.seed;
    j["tol"] = model.tol;
    j["iterations"] = model.iterations;
    j["sse"] = model.sse;
    write_file(sidecar_path(centers_path), j.dump(2) + "\n");
}

ClusterModel load_cluster_model(const std::string& centers_path) {
    ClusterModel model;
    for (const auto& line : read_lines(centers_path)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        std::vector<double> center;
        center.reserve(fields.size());
        for (const auto& f : fields) center.push_back(parse_real(f, "center value"));
        model.centers.push_back(std::move(center));
    }
    model.k = static_cast<int>(model.centers.size());

    std::ifstream meta(sidecar_path(centers_path));
    if (meta) {
        nlohmann::json j;
        meta >> j;
        if (j.at("k").get<int>() != model.k)
            throw std::runtime_error(centers_path + ": sidecar k does not match center rows");
        model.seed = j.at("seed").get<std::uint64_t>();
        model.tol = j.at("tol").get<double>();
        model.iterations = j.at("iterations").get<int>();
        model.sse = j.at("sse").get<double>();
    }
    return model;
}

void save_memberships(const MembershipMatrix& m, const std::vector<std::string>& item_ids,
                      const std::string& path) {
    if (static_cast<int>(item_ids.size()) != m.items)
        throw std::invalid_argument("item id count does not match membership rows");
    std::ostringstream out;
    out << "item_id";
    for (int c = 0; c < m.k; ++c) out << ",g" << c;
    out << "\n";
    for (int j = 0; j < m.items; ++j) {
        out << item_ids[j];
        for (int c = 0; c < m.k; ++c) out << ',' << format_real(m.pro_at(j, c));
        out << "\n";
    }
    write_file(path, out.str());
}

}  // namespace hcrs
