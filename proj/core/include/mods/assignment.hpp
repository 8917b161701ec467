#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace mods::assign {

/// Dense row-major matrix of finite non-negative costs.
class CostMatrix {
public:
    CostMatrix() = default;
    CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {
    }
    CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    /// Convenience for small literal matrices; rows must be equally long.
    static CostMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using Pair = std::pair<std::size_t, std::size_t>;

/// Minimum-cost assignment of min(rows, cols) disjoint (row, col) pairs,
/// sorted by row. Rectangular inputs are padded to square with max + 1.
/// Among equal-cost optima the lexicographically smallest column sequence
/// (taken in row order) is returned. Throws std::invalid_argument for empty
/// matrices and for non-finite or negative cells (the message names the cell).
std::vector<Pair> solve(const CostMatrix& c);

/// Sum of c(r, col) over the pairs, accumulated in pair order.
double total_cost(const CostMatrix& c, std::span<const Pair> pairs);

}  // namespace mods::assign
