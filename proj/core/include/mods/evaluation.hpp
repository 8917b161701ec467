#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mods/ann_index.hpp"
#include "mods/descriptor.hpp"
#include "mods/fixtures.hpp"
#include "mods/matcher.hpp"
#include "mods/metrics.hpp"

namespace mods::eval {

struct MetricSummary {
    double mean_ndcg = 0.0;
    double auc = 0.0;
    std::map<std::string, double> ndcg_per_query;
};

struct DocsimReport {
    std::size_t p = 0;  // nDCG cut-off used
    std::size_t pairs = 0;
    MetricSummary mods;
    MetricSummary swm;
};

/// nDCG per query (targets ranked by descending mods_norm, or ascending swm,
/// ties by doc_id; grades missing from the truth count as 0) and ROC-AUC over
/// all scored (query, target) pairs with grade > 0 as positives. SWM enters
/// the AUC negated. Self-pairs are ignored. `p` defaults to the number of
/// targets per query.
DocsimReport evaluate_docsim(std::span<const match::ScoreLine> scores,
                             std::span<const GradeEntry> truth, std::optional<std::size_t> p = std::nullopt);

struct SpotConfig {
    bool inexact = false;
    bool include_stopword_queries = false;
    double stopword_tau = desc::kDefaultStopwordTau;
};

/// Query-by-example word spotting: every labeled word (stopwords excluded
/// unless asked) retrieves all other labeled words by L2 distance; relevance
/// is label equality, or a shared Porter stem when inexact.
MeanAp evaluate_word_spotting(const CorpusManifest& manifest, const EmbeddingStore& store,
                              const SpotConfig& cfg, const desc::Lexicon& lexicon = desc::default_lexicon());

}  // namespace mods::eval
