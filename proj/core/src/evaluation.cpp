#include "mods/evaluation.hpp"

#include <algorithm>
#include <set>

#include <Eigen/Dense>

namespace mods::eval {

namespace {

MetricSummary summarize(std::span<const match::ScoreLine> scores,
                        const std::map<std::pair<std::string, std::string>, int>& grades,
                        const std::set<std::string>& queries, std::size_t p, bool use_swm)
{
    MetricSummary out;
    auto similarity = [use_swm](const match::ScoreLine& s) { return use_swm ? -s.swm : s.mods_norm; };

    double total = 0.0;
    for (const auto& q : queries) {
        std::vector<const match::ScoreLine*> rows;
        for (const auto& s : scores)
            if (s.query_doc == q && s.target_doc != q) rows.push_back(&s);
        std::sort(rows.begin(), rows.end(), [&](const auto* a, const auto* b) {
            if (similarity(*a) != similarity(*b)) return similarity(*a) > similarity(*b);
            return a->target_doc < b->target_doc;
        });
        std::vector<int> ranked;
        for (const auto* r : rows) {
            auto it = grades.find({q, r->target_doc});
            ranked.push_back(it == grades.end() ? 0 : it->second);
        }
        const double v = ranked.empty() ? 0.0 : ndcg_at(ranked, p);
        out.ndcg_per_query[q] = v;
        total += v;
    }
    out.mean_ndcg = queries.empty() ? 0.0 : total / static_cast<double>(queries.size());

    std::vector<double> values;
    std::vector<bool> labels;
    for (const auto& s : scores) {
        if (s.query_doc == s.target_doc) continue;
        auto it = grades.find({s.query_doc, s.target_doc});
        if (it == grades.end()) continue;
        values.push_back(similarity(s));
        labels.push_back(it->second > 0);
    }
    out.auc = roc_auc(values, labels);
    return out;
}

}  // namespace

DocsimReport evaluate_docsim(std::span<const match::ScoreLine> scores, std::span<const GradeEntry> truth,
                             std::optional<std::size_t> p)
{
    std::map<std::pair<std::string, std::string>, int> grades;
    std::set<std::string> queries;
    for (const auto& g : truth) {
        grades[{g.query_doc, g.target_doc}] = g.grade;
        queries.insert(g.query_doc);
    }
    std::map<std::string, std::size_t> per_query;
    DocsimReport out;
    for (const auto& s : scores) {
        if (s.query_doc == s.target_doc || !queries.contains(s.query_doc)) continue;
        ++per_query[s.query_doc];
        ++out.pairs;
    }
    std::size_t targets = 0;
    for (const auto& [q, n] : per_query) targets = std::max(targets, n);
    out.p = p.value_or(std::max<std::size_t>(1, targets));
    out.mods = summarize(scores, grades, queries, out.p, false);
    out.swm = summarize(scores, grades, queries, out.p, true);
    return out;
}

MeanAp evaluate_word_spotting(const CorpusManifest& manifest, const EmbeddingStore& store,
                              const SpotConfig& cfg, const desc::Lexicon& lexicon)
{
    struct Entry {
        const WordBox* box;
        std::string key;  // relevance class: folded label, or its stem when inexact
    };
    std::vector<Entry> entries;
    std::vector<const EmbeddingRecord*> records;
    for (const auto& d : manifest.documents)
        for (const auto& w : d.words) {
            if (!w.label) continue;
            const EmbeddingRecord* rec = store.find(w.word_id);
            if (!rec) throw DataError("no embedding for word_id '" + w.word_id + "'");
            const std::string folded = fold_case(*w.label);
            entries.push_back({&w, cfg.inexact ? porter_stem(folded) : folded});
            records.push_back(rec);
        }
    MeanAp out;
    if (entries.empty()) return out;

    const std::size_t n = entries.size();
    const std::size_t dim = records.front()->vector.size();
    Eigen::MatrixXf unit(dim, n);  // one unit vector per column
    for (std::size_t i = 0; i < n; ++i) {
        if (records[i]->vector.size() != dim)
            throw DataError("embedding of word_id '" + entries[i].box->word_id + "' has mismatched dimension");
        const auto v = ann::normalized(records[i]->vector);
        unit.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXf>(v.data(), static_cast<Eigen::Index>(dim));
    }

    std::map<std::string, std::vector<std::size_t>> classes;
    for (std::size_t i = 0; i < n; ++i) classes[entries[i].key].push_back(i);

    // Queries with nothing relevant are counted as skipped without scoring.
    std::vector<std::size_t> queries;
    for (std::size_t i = 0; i < n; ++i) {
        WordBox evidence = *entries[i].box;
        if (!evidence.stopword_prob && records[i]->stopword_prob) evidence.stopword_prob = *records[i]->stopword_prob;
        if (!cfg.include_stopword_queries && desc::is_stopword(evidence, cfg.stopword_tau, lexicon)) continue;
        if (classes.at(entries[i].key).size() < 2) {
            ++out.skipped;
            continue;
        }
        queries.push_back(i);
    }

    // Unit vectors: ascending L2 distance is descending cosine similarity.
    // Ranking ties resolve to the smaller word_id, as in the vector index.
    auto ahead = [&](float sa, std::size_t a, float sb, std::size_t b) {
        return sa != sb ? sa > sb : entries[a].box->word_id < entries[b].box->word_id;
    };
    constexpr std::size_t kBlock = 256;
    double sum = 0.0;
    Eigen::MatrixXf block, sims;
    for (std::size_t b0 = 0; b0 < queries.size(); b0 += kBlock) {
        const std::size_t b1 = std::min(queries.size(), b0 + kBlock);
        block.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(b1 - b0));
        for (std::size_t k = b0; k < b1; ++k)
            block.col(static_cast<Eigen::Index>(k - b0)) = unit.col(static_cast<Eigen::Index>(queries[k]));
        sims.noalias() = unit.transpose() * block;  // n × block, one column per query
        for (std::size_t k = b0; k < b1; ++k) {
            const std::size_t q = queries[k];
            const float* row = sims.col(static_cast<Eigen::Index>(k - b0)).data();
            std::vector<std::size_t> rel;
            for (std::size_t j : classes.at(entries[q].key))
                if (j != q) rel.push_back(j);
            std::sort(rel.begin(), rel.end(), [&](std::size_t a, std::size_t b) { return ahead(row[a], a, row[b], b); });
            // rank[r] = 1 + number of other items ranked ahead of rel[r].
            std::vector<std::size_t> ahead_count(rel.size() + 1, 0);
            for (std::size_t j = 0; j < n; ++j) {
                if (j == q) continue;
                // First relevant item that j precedes; j counts toward it and all later ones.
                const auto it = std::partition_point(rel.begin(), rel.end(),
                                                     [&](std::size_t r) { return !ahead(row[j], j, row[r], r); });
                ++ahead_count[static_cast<std::size_t>(it - rel.begin())];
            }
            double ap = 0.0;
            std::size_t before = 0;
            for (std::size_t r = 0; r < rel.size(); ++r) {
                before += ahead_count[r];
                ap += static_cast<double>(r + 1) / static_cast<double>(before + 1);
            }
            sum += ap / static_cast<double>(rel.size());
            ++out.evaluated;
        }
    }
    out.map = out.evaluated ? sum / static_cast<double>(out.evaluated) : 0.0;
    return out;
}

}  // namespace mods::eval
