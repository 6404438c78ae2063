#include "hcrs/ratings.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "hcrs/csv.hpp"

namespace hcrs {

int RatingMatrix::ensure_item(const std::string& item_id) {
    auto it = item_index_.find(item_id);
    if (it != item_index_.end()) return it->second;
    int idx = static_cast<int>(items_.size());
    items_.push_back(item_id);
    item_index_.emplace(item_id, idx);
    rows_.emplace_back();
    return idx;
}

int RatingMatrix::ensure_user(const std::string& user_id) {
    auto it = user_index_.find(user_id);
    if (it != user_index_.end()) return it->second;
    int idx = static_cast<int>(users_.size());
    users_.push_back(user_id);
    user_index_.emplace(user_id, idx);
    return idx;
}

void RatingMatrix::add_rating(const std::string& user_id, const std::string& item_id,
                              double rating) {
    if (rating < scale_.min || rating > scale_.max)
        throw std::out_of_range("rating " + format_real(rating) + " outside scale [" +
                                format_real(scale_.min) + "," + format_real(scale_.max) + "]");
    int item = ensure_item(item_id);
    int user = ensure_user(user_id);
    auto& row = rows_[item];
    auto pos = std::lower_bound(row.begin(), row.end(), user,
                                [](const auto& p, int u) { return p.first < u; });
    if (pos != row.end() && pos->first == user)
        throw std::invalid_argument("duplicate rating for (" + item_id + "," + user_id + ")");
    row.insert(pos, {user, rating});
    ++rating_count_;
}

std::optional<int> RatingMatrix::item_index(const std::string& item_id) const {
    auto it = item_index_.find(item_id);
    if (it == item_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<int> RatingMatrix::user_index(const std::string& user_id) const {
    auto it = user_index_.find(user_id);
    if (it == user_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<double> RatingMatrix::rating(int item, int user) const {
    const auto& row = rows_[item];
    auto pos = std::lower_bound(row.begin(), row.end(), user,
                                [](const auto& p, int u) { return p.first < u; });
    if (pos != row.end() && pos->first == user) return pos->second;
    return std::nullopt;
}

std::optional<double> ExtendedMatrix::rating(int item, int user) const {
    const auto& row = user_ratings[item];
    auto pos = std::lower_bound(row.begin(), row.end(), user,
                                [](const auto& p, int u) { return p.first < u; });
    if (pos != row.end() && pos->first == user) return pos->second;
    return std::nullopt;
}

std::optional<double> ExtendedMatrix::item_mean(int item) const {
    const auto& row = user_ratings[item];
    if (row.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& [user, r] : row) sum += r;
    return sum / static_cast<double>(row.size());
}

void read_ratings_csv(const std::string& path, RatingMatrix& into) {
    auto lines = read_lines(path);
    if (lines.empty()) throw std::runtime_error(path + ": empty ratings file");
    if (split_csv_line(lines[0]) != std::vector<std::string>{"user_id", "item_id", "rating"})
        throw std::runtime_error(path + ": header must be user_id,item_id,rating");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split_csv_line(lines[i]);
        if (fields.size() != 3)
            throw std::runtime_error(path + ": wrong field count on line " + std::to_string(i + 1));
        try {
            into.add_rating(fields[0], fields[1], parse_real(fields[2], "rating"));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + " line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
}

RatingMatrix load_ratings(const std::string& path, RatingScale scale) {
    RatingMatrix matrix(scale);
    read_ratings_csv(path, matrix);
    return matrix;
}

void save_ratings(const RatingMatrix& matrix, const std::string& path) {
    // sorted by (item_id, user_id) so equal matrices serialize identically
    std::vector<int> item_order(matrix.items().size());
    for (std::size_t i = 0; i < item_order.size(); ++i) item_order[i] = static_cast<int>(i);
    std::sort(item_order.begin(), item_order.end(),
              [&](int a, int b) { return matrix.items()[a] < matrix.items()[b]; });

    std::ostringstream out;
    out << "user_id,item_id,rating\n";
    for (int item : item_order) {
        std::vector<std::pair<int, double>> row = matrix.row(item);
        std::sort(row.begin(), row.end(), [&](const auto& a, const auto& b) {
            return matrix.users()[a.first] < matrix.users()[b.first];
        });
        for (const auto& [user, rating] : row)
            out << matrix.users()[user] << ',' << matrix.items()[item] << ','
                << format_real(rating) << "\n";
    }
    write_file(path, out.str());
}

GroupRatingMatrix build_group_matrix(const MembershipMatrix& membership,
                                     const std::vector<std::string>& item_ids) {
    if (static_cast<int>(item_ids.size()) != membership.items)
        throw std::invalid_argument("item id count does not match membership rows");
    GroupRatingMatrix groups;
    groups.items = item_ids;
    groups.k = membership.k;
    groups.values.resize(item_ids.size());
    for (int j = 0; j < membership.items; ++j) {
        groups.values[j].resize(membership.k);
        for (int c = 0; c < membership.k; ++c) groups.values[j][c] = membership.pro_at(j, c);
    }
    return groups;
}

void save_groups(const GroupRatingMatrix& groups, const std::string& path) {
    std::ostringstream out;
    out << "item_id";
    for (int c = 0; c < groups.k; ++c) out << ",g" << c;
    out << "\n";
    for (std::size_t j = 0; j < groups.items.size(); ++j) {
        out << groups.items[j];
        for (int c = 0; c < groups.k; ++c) out << ',' << format_real(groups.values[j][c]);
        out << "\n";
    }
    write_file(path, out.str());
}

GroupRatingMatrix load_groups(const std::string& path) {
    auto lines = read_lines(path);
    if (lines.empty()) throw std::runtime_error(path + ": empty groups file");
    auto header = split_csv_line(lines[0]);
    if (header.empty() || header[0] != "item_id")
        throw std::runtime_error(path + ": bad groups header");
    GroupRatingMatrix groups;
    groups.k = static_cast<int>(header.size()) - 1;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split_csv_line(lines[i]);
        if (fields.size() != header.size())
            throw std::runtime_error(path + ": wrong field count on line " + std::to_string(i + 1));
        groups.items.push_back(fields[0]);
        std::vector<double> row;
        for (int c = 0; c < groups.k; ++c)
            row.push_back(parse_real(fields[c + 1], "group value"));
        groups.values.push_back(std::move(row));
    }
    return groups;
}

ExtendedMatrix extend(const RatingMatrix& ratings, const GroupRatingMatrix& groups,
                      double scale_factor) {
    ExtendedMatrix ext;
    ext.items = ratings.items();
    ext.users = ratings.users();
    ext.group_count = groups.k;
    ext.scale_factor = scale_factor;
    ext.scale = ratings.scale();
    ext.user_ratings.resize(ext.items.size());
    ext.group_values.resize(ext.items.size());

    std::unordered_map<std::string, int> group_row;
    for (std::size_t j = 0; j < groups.items.size(); ++j)
        group_row.emplace(groups.items[j], static_cast<int>(j));
    if (groups.k > 0 && groups.items.size() != ext.items.size())
        throw std::invalid_argument("group matrix item universe does not match the rating matrix");

    for (std::size_t item = 0; item < ext.items.size(); ++item) {
        ext.user_ratings[item] = ratings.row(static_cast<int>(item));
        if (groups.k > 0) {
            auto it = group_row.find(ext.items[item]);
            if (it == group_row.end())
                throw std::invalid_argument("item " + ext.items[item] + " missing from group matrix");
            ext.group_values[item].resize(groups.k);
            for (int c = 0; c < groups.k; ++c)
                ext.group_values[item][c] = groups.values[it->second][c] * scale_factor;
        }
    }

    ext.rated_items_by_user.resize(ext.users.size());
    for (std::size_t item = 0; item < ext.items.size(); ++item)
        for (const auto& [user, rating] : ext.user_ratings[item])
            ext.rated_items_by_user[user].push_back(static_cast<int>(item));
    return ext;
}

void save_extended(const ExtendedMatrix& matrix, const std::string& path) {
    std::ostringstream out;
    out << "#kind:";
    for (std::size_t u = 0; u < matrix.users.size(); ++u) out << ",user";
    for (int c = 0; c < matrix.group_count; ++c) out << ",group";
    out << "\n";
    out << "item_id";
    for (const auto& user : matrix.users) out << ',' << user;
    for (int c = 0; c < matrix.group_count; ++c) out << ",g" << c;
    out << "\n";
    for (std::size_t item = 0; item < matrix.items.size(); ++item) {
        out << matrix.items[item];
        std::size_t next = 0;
        const auto& row = matrix.user_ratings[item];
        for (std::size_t u = 0; u < matrix.users.size(); ++u) {
            out << ',';
            if (next < row.size() && row[next].first == static_cast<int>(u)) {
                out << format_real(row[next].second);
                ++next;
            }
        }
        for (int c = 0; c < matrix.group_count; ++c)
            out << ',' << format_real(matrix.group_values[item][c]);
        out << "\n";
    }
    write_file(path, out.str());
}

}  // namespace hcrs
