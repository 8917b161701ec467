#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mods::eval {

/// Mean over relevant ranks r of precision@r; nullopt when nothing is relevant.
std::optional<double> average_precision(std::span<const bool> relevant_in_rank_order);
std::optional<double> average_precision(const std::vector<bool>& relevant_in_rank_order);

struct MeanAp {
    double map = 0.0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;  // queries without any relevant item
};

MeanAp mean_ap(std::span<const std::vector<bool>> queries);

/// Graded relevance in ranked order; gain 2^rel - 1, discount log2(i + 1).
double dcg_at(std::span<const int> grades, std::size_t p);

/// DCG@p over IDCG@p of the grade-sorted ordering; 0 when IDCG is 0.
/// Throws std::invalid_argument when p is 0.
double ndcg_at(std::span<const int> grades_in_rank_order, std::size_t p);

/// Probability that a random positive outscores a random negative, ties
/// counted one half. Throws std::invalid_argument unless both classes occur.
double roc_auc(std::span<const double> scores, std::span<const bool> positive);
double roc_auc(std::span<const double> scores, const std::vector<bool>& positive);

/// Classic Porter (1980) stemmer for lowercase ASCII words.
std::string porter_stem(std::string_view word);

/// Case-folded labels share a Porter stem.
bool inexact_match(std::string_view query_label, std::string_view target_label);

}  // namespace mods::eval
