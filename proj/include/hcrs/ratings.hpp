#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hcrs/clustering.hpp"

namespace hcrs {

struct RatingScale {
    double min = 1.0;
    double max = 5.0;
};

// Sparse items-by-users table. Unrated cells are absent, never zero-filled.
class RatingMatrix {
public:
    explicit RatingMatrix(RatingScale scale = RatingScale{}) : scale_(scale) {}

    int ensure_item(const std::string& item_id);
    int ensure_user(const std::string& user_id);
    void add_rating(const std::string& user_id, const std::string& item_id, double rating);

    const std::vector<std::string>& items() const { return items_; }
    const std::vector<std::string>& users() const { return users_; }
    RatingScale scale() const { return scale_; }
    std::optional<int> item_index(const std::string& item_id) const;
    std::optional<int> user_index(const std::string& user_id) const;

    // (user index, rating) pairs sorted by user index
    const std::vector<std::pair<int, double>>& row(int item) const { return rows_[item]; }
    std::optional<double> rating(int item, int user) const;
    std::size_t rating_count() const { return rating_count_; }

private:
    RatingScale scale_;
    std::vector<std::string> items_, users_;
    std::unordered_map<std::string, int> item_index_, user_index_;
    std::vector<std::vector<std::pair<int, double>>> rows_;
    std::size_t rating_count_ = 0;
};

// items x clusters table of soft memberships in [0,1]
struct GroupRatingMatrix {
    std::vector<std::string> items;
    int k = 0;
    std::vector<std::vector<double>> values;
};

// Item rows carrying the real user-rating columns plus the group-membership
// columns multiplied by scale_factor, with a kind marker per column.
struct ExtendedMatrix {
    std::vector<std::string> items;
    std::vector<std::string> users;
    int group_count = 0;
    double scale_factor = 1.0;
    RatingScale scale;
    std::vector<std::vector<std::pair<int, double>>> user_ratings;  // sparse, per item
    std::vector<std::vector<double>> group_values;                  // dense, per item
    std::vector<std::vector<int>> rated_items_by_user;              // user -> item indices

    std::optional<double> rating(int item, int user) const;
    // mean over the user columns only; nullopt for an item with no ratings
    std::optional<double> item_mean(int item) const;
};

// CSV with header user_id,item_id,rating
RatingMatrix load_ratings(const std::string& path, RatingScale scale = RatingScale{});
void read_ratings_csv(const std::string& path, RatingMatrix& into);
void save_ratings(const RatingMatrix& matrix, const std::string& path);

GroupRatingMatrix build_group_matrix(const MembershipMatrix& membership,
                                     const std::vector<std::string>& item_ids);

void save_groups(const GroupRatingMatrix& groups, const std::string& path);
GroupRatingMatrix load_groups(const std::string& path);

ExtendedMatrix extend(const RatingMatrix& ratings, const GroupRatingMatrix& groups,
                      double scale_factor = 5.0);

// Debug export mirroring the extended layout, with a leading "#kind:" row
// marking each column as user or group.
void save_extended(const ExtendedMatrix& matrix, const std::string& path);

}  // namespace hcrs
