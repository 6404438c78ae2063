#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hcrs {

struct ClusterModel {
    int k = 0;
    std::vector<std::vector<double>> centers;
    double sse = 0.0;                 // squared-error criterion at convergence
    std::vector<double> sse_history;  // per-iteration, non-increasing
    int iterations = 0;
    std::uint64_t seed = 0;
    double tol = 1e-6;
};

// Pro(j,k) = 1 - CS(j,k)/MaxCS(k): graded membership of every item in every
// cluster, 1 at the center and 0 for the farthest item.
struct MembershipMatrix {
    int items = 0;
    int k = 0;
    std::vector<double> pro;     // items x k
    std::vector<double> cs;      // items x k, Euclidean distances
    std::vector<double> max_cs;  // per cluster

    double pro_at(int item, int cluster) const { return pro[static_cast<std::size_t>(item) * k + cluster]; }
    double cs_at(int item, int cluster) const { return cs[static_cast<std::size_t>(item) * k + cluster]; }
};

double counter_similarity(const std::vector<double>& point, const std::vector<double>& center);

// Lloyd iterations with seeded initialization, lowest-index tie-breaking and
// farthest-point reseeding of empty clusters. Stops when the largest center
// displacement drops below tol or after max_iter rounds.
ClusterModel kmeans(const std::vector<std::vector<double>>& points, int k, std::uint64_t seed,
                    int max_iter = 100, double tol = 1e-6);

MembershipMatrix membership(const std::vector<std::vector<double>>& points,
                            const ClusterModel& model);

// Centers as a k-row CSV plus a JSON sidecar {k, seed, tol, iterations, sse}
// at the same path with the extension replaced by .json.
void save_cluster_model(const ClusterModel& model, const std::string& centers_path);
ClusterModel load_cluster_model(const std::string& centers_path);

void save_memberships(const MembershipMatrix& m, const std::vector<std::string>& item_ids,
                      const std::string& path);

}  // namespace hcrs
