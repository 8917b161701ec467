#include "mods/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mods::assign {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data))
{
    if (data_.size() != rows * cols) throw std::invalid_argument("cost matrix size mismatch");
}

CostMatrix CostMatrix::from_rows(const std::vector<std::vector<double>>& rows)
{
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    std::vector<double> data;
    for (const auto& r : rows) {
        if (r.size() != cols) throw std::invalid_argument("ragged cost matrix");
        data.insert(data.end(), r.begin(), r.end());
    }
    return {rows.size(), cols, std::move(data)};
}

double total_cost(const CostMatrix& c, std::span<const Pair> pairs)
{
    double sum = 0.0;
    for (const auto& [r, col] : pairs) sum += c(r, col);
    return sum;
}

namespace {

// Kuhn-style search for an alternating path from `row` that ends in `target`
// using only tight edges and rows/columns not yet fixed.
class TightGraph {
public:
    TightGraph(const std::vector<std::vector<char>>& tight, std::vector<std::size_t>& col_of_row,
               std::vector<std::size_t>& row_of_col, const std::vector<char>& col_fixed)
        : tight_(tight), col_of_row_(col_of_row), row_of_col_(row_of_col), col_fixed_(col_fixed)
    {
    }

    // Row `row` is currently unmatched; free column is `target`.
    bool reroute(std::size_t row, std::size_t target)
    {
        seen_.assign(row_of_col_.size(), 0);
        return augment(row, target);
    }

private:
    bool augment(std::size_t row, std::size_t target)
    {
        const std::size_t n = row_of_col_.size();
        for (std::size_t col = 0; col < n; ++col) {
            if (!tight_[row][col] || col_fixed_[col] || seen_[col]) continue;
            seen_[col] = 1;
            if (col == target || augment(row_of_col_[col], target)) {
                row_of_col_[col] = row;
                col_of_row_[row] = col;
                return true;
            }
        }
        return false;
    }

    const std::vector<std::vector<char>>& tight_;
    std::vector<std::size_t>& col_of_row_;
    std::vector<std::size_t>& row_of_col_;
    const std::vector<char>& col_fixed_;
    std::vector<char> seen_;
};

}  // namespace

std::vector<Pair> solve(const CostMatrix& c)
{
    const std::size_t m = c.rows(), k = c.cols();
    if (m == 0 || k == 0) throw std::invalid_argument("cost matrix must have at least one row and column");
    double max_entry = 0.0;
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t col = 0; col < k; ++col) {
            const double v = c(r, col);
            if (!std::isfinite(v) || v < 0.0)
                throw std::invalid_argument("cost matrix cell (" + std::to_string(r) + ", " +
                                            std::to_string(col) + ") is not a finite non-negative value");
            max_entry = std::max(max_entry, v);
        }

    const std::size_t n = std::max(m, k);
    const double pad = max_entry + 1.0;
    auto cost = [&](std::size_t r, std::size_t col) { return (r < m && col < k) ? c(r, col) : pad; };

    // Shortest augmenting path Hungarian method with row/column potentials
    // (1-based internally; index 0 is the virtual root column).
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> col_of_row(n), row_of_col(n);
    for (std::size_t j = 1; j <= n; ++j) {
        row_of_col[j - 1] = p[j] - 1;
        col_of_row[p[j] - 1] = j - 1;
    }

    // Every optimal assignment lives on the zero-reduced-cost edges of the
    // final potentials; walk rows in order and take the smallest tight column
    // that still admits a perfect matching of the remaining rows.
    const double eps = 1e-9 * (1.0 + pad) * static_cast<double>(n);
    std::vector<std::vector<char>> tight(n, std::vector<char>(n, 0));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t col = 0; col < n; ++col)
            tight[r][col] = (cost(r, col) - u[r + 1] - v[col + 1]) <= eps;

    std::vector<char> col_fixed(n, 0);
    TightGraph graph(tight, col_of_row, row_of_col, col_fixed);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t col = 0; col < n; ++col) {
            if (!tight[r][col] || col_fixed[col]) continue;
            if (col_of_row[r] == col) break;
            const std::size_t displaced = row_of_col[col];
            const std::size_t freed = col_of_row[r];
            const auto saved_cr = col_of_row;
            const auto saved_rc = row_of_col;
            col_fixed[col] = 1;  // keep the detour away from the column under test
            row_of_col[col] = r;
            col_of_row[r] = col;
            row_of_col[freed] = n;
            const bool ok = graph.reroute(displaced, freed);
            col_fixed[col] = 0;
            if (ok) break;
            col_of_row = saved_cr;
            row_of_col = saved_rc;
        }
        col_fixed[col_of_row[r]] = 1;
    }

    std::vector<Pair> out;
    for (std::size_t r = 0; r < m; ++r)
        if (col_of_row[r] < k) out.emplace_back(r, col_of_row[r]);
    return out;
}

}  // namespace mods::assign
