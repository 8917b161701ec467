#include "mods/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mods/doc_model.hpp"

namespace mods::eval {

namespace {

template <typename Flags>
std::optional<double> ap_of(const Flags& relevant)
{
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < relevant.size(); ++r) {
        if (!relevant[r]) continue;
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
    if (hits == 0) return std::nullopt;
    return sum / static_cast<double>(hits);
}

}  // namespace

std::optional<double> average_precision(std::span<const bool> relevant)
{
    return ap_of(relevant);
}

std::optional<double> average_precision(const std::vector<bool>& relevant)
{
    return ap_of(relevant);
}

MeanAp mean_ap(std::span<const std::vector<bool>> queries)
{
    MeanAp out;
    double sum = 0.0;
    for (const auto& q : queries) {
        if (auto ap = ap_of(q)) {
            sum += *ap;
            ++out.evaluated;
        } else {
            ++out.skipped;
        }
    }
    out.map = out.evaluated ? sum / static_cast<double>(out.evaluated) : 0.0;
    return out;
}

double dcg_at(std::span<const int> grades, std::size_t p)
{
    double dcg = 0.0;
    const std::size_t n = std::min(p, grades.size());
    for (std::size_t i = 0; i < n; ++i)
        dcg += (std::exp2(grades[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    return dcg;
}

double ndcg_at(std::span<const int> grades, std::size_t p)
{
    if (p == 0) throw std::invalid_argument("nDCG cut-off p must be ≥ 1");
    std::vector<int> ideal(grades.begin(), grades.end());
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    const double idcg = dcg_at(ideal, p);
    return idcg > 0.0 ? dcg_at(grades, p) / idcg : 0.0;
}

namespace {

template <typename Flags>
double auc_of(std::span<const double> scores, const Flags& positive)
{
    if (scores.size() != positive.size()) throw std::invalid_argument("scores and labels differ in length");
    const std::size_t n = scores.size();
    const auto n_pos = static_cast<std::size_t>(std::count(positive.begin(), positive.end(), true));
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("AUC needs both positive and negative items");

    // Rank-sum (Mann-Whitney U) with mid-ranks for ties.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t)
            if (positive[order[t]]) rank_sum += mid_rank;
        i = j;
    }
    const double np = static_cast<double>(n_pos);
    return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const bool> positive)
{
    return auc_of(scores, positive);
}

double roc_auc(std::span<const double> scores, const std::vector<bool>& positive)
{
    return auc_of(scores, positive);
}

bool inexact_match(std::string_view query_label, std::string_view target_label)
{
    return porter_stem(fold_case(query_label)) == porter_stem(fold_case(target_label));
}

}  // namespace mods::eval
