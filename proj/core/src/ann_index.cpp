#include "mods/ann_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace mods::ann {

std::vector<float> normalized(std::span<const float> v)
{
    double ss = 0.0;
    for (float x : v) ss += static_cast<double>(x) * x;
    std::vector<float> out(v.begin(), v.end());
    if (ss > 0.0) {
        const double inv = 1.0 / std::sqrt(ss);
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] * inv);
    }
    return out;
}

double l2_distance(std::span<const float> a, std::span<const float> b)
{
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - b[i];
        ss += d * d;
    }
    return std::sqrt(ss);
}

double cosine_similarity(std::span<const float> a, std::span<const float> b)
{
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

VectorIndex VectorIndex::build(std::vector<Item> items, Mode mode, KdTreeParams params)
{
    if (params.leaf_size == 0) throw std::invalid_argument("leaf_size must be ≥ 1");
    if (params.max_visited_leaves == 0) throw std::invalid_argument("max_visited_leaves must be ≥ 1");

    std::sort(items.begin(), items.end(),
              [](const Item& a, const Item& b) { return a.first < b.first; });
    VectorIndex index;
    index.mode_ = mode;
    index.params_ = params;
    if (items.empty()) return index;

    index.dim_ = items.front().second.size();
    index.data_.reserve(items.size() * index.dim_);
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].second.size() != index.dim_)
            throw std::invalid_argument("vector '" + items[i].first + "' has mismatched dimension");
        if (!index.ids_.empty() && items[i].first == index.ids_.back())
            throw std::invalid_argument("duplicate index id '" + items[i].first + "'");
        const auto unit = normalized(items[i].second);
        index.data_.insert(index.data_.end(), unit.begin(), unit.end());
        index.ids_.push_back(std::move(items[i].first));
    }
    index.order_.resize(index.ids_.size());
    std::iota(index.order_.begin(), index.order_.end(), 0);
    if (mode == Mode::kdtree) index.build_node(0, index.order_.size());
    return index;
}

std::size_t VectorIndex::build_node(std::size_t begin, std::size_t end)
{
    const std::size_t self = nodes_.size();
    nodes_.push_back(Node{-1, 0.0f, 0, 0, begin, end});
    const std::size_t n = end - begin;
    if (n <= params_.leaf_size) return self;

    // Split on the coordinate of largest variance, at the median.
    int best_dim = -1;
    double best_var = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) {
        double mean = 0.0, m2 = 0.0;
        for (std::size_t i = begin; i < end; ++i) mean += data_[order_[i] * dim_ + d];
        mean /= static_cast<double>(n);
        for (std::size_t i = begin; i < end; ++i) {
            const double dv = data_[order_[i] * dim_ + d] - mean;
            m2 += dv * dv;
        }
        if (m2 > best_var) {
            best_var = m2;
            best_dim = static_cast<int>(d);
        }
    }
    if (best_dim < 0) return self;  // all points identical

    const std::size_t mid = begin + n / 2;
    const auto coord = [&](std::size_t item) { return data_[item * dim_ + static_cast<std::size_t>(best_dim)]; };
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) {
                         return coord(a) < coord(b) || (coord(a) == coord(b) && a < b);
                     });
    const float split = coord(order_[mid]);

    const std::size_t left = build_node(begin, mid);
    const std::size_t right = build_node(mid, end);
    nodes_[self].split_dim = best_dim;
    nodes_[self].split_value = split;
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
}

double VectorIndex::squared_distance(std::span<const double> q, std::size_t item) const
{
    const float* p = data_.data() + item * dim_;
    // Independent partial sums keep the adds from serializing.
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= dim_; i += 4) {
        const double d0 = q[i] - p[i], d1 = q[i + 1] - p[i + 1];
        const double d2 = q[i + 2] - p[i + 2], d3 = q[i + 3] - p[i + 3];
        s0 += d0 * d0;
        s1 += d1 * d1;
        s2 += d2 * d2;
        s3 += d3 * d3;
    }
    for (; i < dim_; ++i) {
        const double d = q[i] - p[i];
        s0 += d * d;
    }
    return (s0 + s1) + (s2 + s3);
}

std::vector<Neighbor> VectorIndex::query_knn(std::span<const float> q, std::size_t k) const
{
    if (k == 0) throw std::invalid_argument("k must be ≥ 1");
    if (ids_.empty()) return {};
    if (q.size() != dim_) throw std::invalid_argument("query dimension does not match index");

    const auto unit = normalized(q);
    const std::vector<double> query(unit.begin(), unit.end());
    k = std::min(k, ids_.size());

    // Max-heap on (distance², item): the top is the worst kept candidate.
    using Candidate = std::pair<double, std::size_t>;
    std::priority_queue<Candidate> best;
    auto offer = [&](std::size_t item) {
        const Candidate c{squared_distance(query, item), item};
        if (best.size() < k) {
            best.push(c);
        } else if (c < best.top()) {
            best.pop();
            best.push(c);
        }
    };

    if (mode_ == Mode::exact) {
        for (std::size_t i = 0; i < ids_.size(); ++i) offer(i);
    } else {
        // Best-bin-first: nodes ordered by a lower bound on their distance².
        using Entry = std::pair<double, std::size_t>;
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pending;
        pending.emplace(0.0, 0);
        std::size_t visited = 0;
        while (!pending.empty() && visited < params_.max_visited_leaves) {
            const auto [bound, node_id] = pending.top();
            pending.pop();
            if (best.size() == k && bound > best.top().first) break;
            std::size_t current = node_id;
            while (nodes_[current].split_dim >= 0) {
                const Node& n = nodes_[current];
                const double diff = query[static_cast<std::size_t>(n.split_dim)] - n.split_value;
                const std::size_t near = diff < 0 ? n.left : n.right;
                const std::size_t far = diff < 0 ? n.right : n.left;
                pending.emplace(std::max(bound, diff * diff), far);
                current = near;
            }
            const Node& leaf = nodes_[current];
            for (std::size_t i = leaf.begin; i < leaf.end; ++i) offer(order_[i]);
            ++visited;
        }
    }

    std::vector<Neighbor> out(best.size());
    for (std::size_t i = out.size(); i-- > 0;) {
        out[i] = Neighbor{ids_[best.top().second], std::sqrt(best.top().first)};
        best.pop();
    }
    return out;
}

}  // namespace mods::ann
