#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mods::ann {

enum class Mode { exact, kdtree };

struct KdTreeParams {
    std::size_t leaf_size = 16;
    /// Leaves scanned per query before giving up; unlimited() makes the
    /// search exhaustive (results identical to Mode::exact).
    std::size_t max_visited_leaves = 64;

    static constexpr std::size_t unlimited() { return std::numeric_limits<std::size_t>::max(); }
};

struct Neighbor {
    std::string id;
    double distance = 0.0;  // L2 between unit vectors

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Immutable nearest-neighbour index over unit vectors. Items are
/// re-normalized on build and kept sorted by id, so equal distances resolve
/// to the smaller id. Concurrent queries need no synchronization.
class VectorIndex {
public:
    using Item = std::pair<std::string, std::vector<float>>;

    VectorIndex() = default;

    /// Throws std::invalid_argument on mixed dimensions or duplicate ids.
    static VectorIndex build(std::vector<Item> items, Mode mode = Mode::kdtree,
                             KdTreeParams params = {});

    /// Ascending by distance, at most min(k, size()) results; k must be ≥ 1.
    std::vector<Neighbor> query_knn(std::span<const float> q, std::size_t k) const;

    std::size_t size() const { return ids_.size(); }
    std::size_t dimension() const { return dim_; }
    Mode mode() const { return mode_; }
    const KdTreeParams& params() const { return params_; }

private:
    struct Node {
        // Leaf when split_dim < 0: items [begin, end) of order_.
        int split_dim = -1;
        float split_value = 0.0f;
        std::size_t left = 0;
        std::size_t right = 0;
        std::size_t begin = 0;
        std::size_t end = 0;
    };

    std::size_t build_node(std::size_t begin, std::size_t end);
    double squared_distance(std::span<const double> q, std::size_t item) const;
    std::span<const float> row(std::size_t item) const { return {data_.data() + item * dim_, dim_}; }

    Mode mode_ = Mode::exact;
    KdTreeParams params_;
    std::size_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<float> data_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
};

/// Scales to unit L2 norm in double precision; zero vectors stay zero.
std::vector<float> normalized(std::span<const float> v);

double l2_distance(std::span<const float> a, std::span<const float> b);
double cosine_similarity(std::span<const float> a, std::span<const float> b);

}  // namespace mods::ann
