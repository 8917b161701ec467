#include "mods/matcher.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "mods/assignment.hpp"

namespace mods::match {

void MatchConfig::validate() const
{
    if (!(gamma >= 0.0 && gamma <= 2.0)) throw std::invalid_argument("gamma must be in [0, 2]");
    if (region_lines < 1) throw std::invalid_argument("region_lines must be ≥ 1");
    if (region_stride < 1 || region_stride > region_lines)
        throw std::invalid_argument("region_stride must be in [1, region_lines]");
    if (!(stopword_tau >= 0.0 && stopword_tau <= 1.0))
        throw std::invalid_argument("stopword_tau must be in [0, 1]");
    if (ann_params.leaf_size < 1) throw std::invalid_argument("leaf_size must be ≥ 1");
    if (ann_params.max_visited_leaves < 1) throw std::invalid_argument("max_visited_leaves must be ≥ 1");
}

PreparedDocument prepare(const DocumentRecord& doc, const EmbeddingStore& store,
                         const MatchConfig& cfg, const desc::Lexicon& lexicon)
{
    PreparedDocument out;
    out.doc_id = doc.doc_id;
    std::vector<ann::VectorIndex::Item> items;
    for (const auto& w : doc.words) {
        const EmbeddingRecord* rec = store.find(w.word_id);
        WordBox evidence = w;
        if (!evidence.stopword_prob && rec && rec->stopword_prob)
            evidence.stopword_prob = *rec->stopword_prob;
        if (desc::is_stopword(evidence, cfg.stopword_tau, lexicon)) continue;
        if (!rec)
            throw DataError("no embedding for word_id '" + w.word_id + "' of doc_id '" + doc.doc_id + "'");
        out.word_ids.push_back(w.word_id);
        out.lines.push_back(w.line_index);
        out.vectors.push_back(ann::normalized(rec->vector));
        items.emplace_back(w.word_id, out.vectors.back());
    }
    out.index = ann::VectorIndex::build(std::move(items), cfg.ann_mode, cfg.ann_params);
    return out;
}

namespace {

double directed_sum(const PreparedDocument& from, const PreparedDocument& to)
{
    double sum = 0.0;
    for (const auto& v : from.vectors) sum += to.index.query_knn(v, 1).front().distance;
    return sum;
}

}  // namespace

double swm_score(const PreparedDocument& a, const PreparedDocument& b)
{
    if (a.size() == 0 || b.size() == 0) return 2.0;
    const double ab = directed_sum(a, b);
    const double ba = directed_sum(b, a);
    return (ab + ba) / static_cast<double>(a.size() + b.size());
}

double swm_score(const DocumentRecord& a, const DocumentRecord& b, const EmbeddingStore& store,
                 const MatchConfig& cfg, const desc::Lexicon& lexicon)
{
    return swm_score(prepare(a, store, cfg, lexicon), prepare(b, store, cfg, lexicon));
}

namespace {

std::vector<Region> tile_lines(const std::string& doc_id, std::span<const int> lines,
                               const MatchConfig& cfg)
{
    std::vector<Region> out;
    if (lines.empty()) return out;
    const auto [lo_it, hi_it] = std::minmax_element(lines.begin(), lines.end());
    const int lo = *lo_it, hi = *hi_it, k = cfg.region_lines;

    std::vector<std::pair<int, int>> spans;
    if (hi - lo + 1 <= k) {
        spans.emplace_back(lo, hi);
    } else {
        for (int start = lo;; start += cfg.region_stride) {
            if (start + k - 1 >= hi) {
                if (spans.empty() || spans.back().first != hi - k + 1) spans.emplace_back(hi - k + 1, hi);
                break;
            }
            spans.emplace_back(start, start + k - 1);
        }
    }
    for (const auto& [first, last] : spans) {
        Region r;
        r.doc_id = doc_id;
        r.first_line = first;
        r.last_line = last;
        for (std::size_t i = 0; i < lines.size(); ++i)
            if (lines[i] >= first && lines[i] <= last) r.members.push_back(i);
        if (r.members.empty()) continue;
        r.region_id = out.size();
        out.push_back(std::move(r));
    }
    return out;
}

// Four partial sums in a fixed order: the result depends only on the two
// vectors, never on where they sit in a document.
double dot(std::span<const float> a, std::span<const float> b)
{
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += static_cast<double>(a[i]) * b[i];
        s1 += static_cast<double>(a[i + 1]) * b[i + 1];
        s2 += static_cast<double>(a[i + 2]) * b[i + 2];
        s3 += static_cast<double>(a[i + 3]) * b[i + 3];
    }
    for (; i < n; ++i) s0 += static_cast<double>(a[i]) * b[i];
    return (s0 + s1) + (s2 + s3);
}

double distance_from(double ab, double aa, double bb)
{
    if (aa == 0.0 || bb == 0.0) return 1.0;
    return std::max(0.0, 1.0 - ab / std::sqrt(aa * bb));
}

// Cosine distances between every kept word of two documents, row-major.
struct CrossDistances {
    std::size_t cols = 0;
    std::vector<double> d;
    double operator()(std::size_t i, std::size_t j) const { return d[i * cols + j]; }
};

CrossDistances cross_distances(const PreparedDocument& a, const PreparedDocument& b)
{
    CrossDistances out;
    out.cols = b.size();
    out.d.resize(a.size() * b.size());
    std::vector<double> na(a.size()), nb(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) na[i] = dot(a.vectors[i], a.vectors[i]);
    for (std::size_t j = 0; j < b.size(); ++j) nb[j] = dot(b.vectors[j], b.vectors[j]);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            out.d[i * out.cols + j] = distance_from(dot(a.vectors[i], b.vectors[j]), na[i], nb[j]);
    return out;
}

template <typename Distance>
RegionMatch best_region(const Region& p, std::span<const Region> targets, const MatchConfig& cfg,
                        const Distance& dist)
{
    RegionMatch best;
    best.source = p.region_id;
    if (p.members.empty()) return best;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const Region& q = targets[t];
        if (q.members.empty()) continue;
        assign::CostMatrix cost(p.size(), q.size());
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = 0; j < q.size(); ++j) cost(i, j) = dist(p.members[i], q.members[j]);

        RegionMatch cand;
        cand.source = p.region_id;
        cand.target = t;
        std::vector<double> gains;
        for (const auto& [i, j] : assign::solve(cost)) {
            const double d = cost(i, j);
            if (d > cfg.gamma) continue;
            gains.push_back(std::max(0.0, 1.0 - d));
            cand.pairs.emplace_back(p.members[i], q.members[j]);
            cand.pair_distances.push_back(d);
        }
        // Summed in sorted order so the score does not depend on word order.
        std::sort(gains.begin(), gains.end());
        double sum = 0.0;
        for (double g : gains) sum += g;
        cand.score = sum / static_cast<double>(std::max(p.size(), q.size()));
        if (!best.target || cand.score > best.score) best = std::move(cand);
    }
    if (best.score == 0.0) {
        best.pairs.clear();
        best.pair_distances.clear();
    }
    return best;
}

}  // namespace

std::vector<Region> tile_regions(const PreparedDocument& doc, const MatchConfig& cfg)
{
    return tile_lines(doc.doc_id, doc.lines, cfg);
}

std::vector<Region> tile_regions(const DocumentRecord& doc, const MatchConfig& cfg)
{
    std::vector<int> lines;
    for (const auto& w : doc.words) lines.push_back(w.line_index);
    return tile_lines(doc.doc_id, lines, cfg);
}

double cosine_distance(std::span<const float> a, std::span<const float> b)
{
    return distance_from(dot(a, b), dot(a, a), dot(b, b));
}

RegionMatch region_score(const Region& p, std::span<const Region> targets,
                         const PreparedDocument& source, const PreparedDocument& target,
                         const MatchConfig& cfg)
{
    return best_region(p, targets, cfg, [&](std::size_t i, std::size_t j) {
        return cosine_distance(source.vectors[i], target.vectors[j]);
    });
}

PairScore mods_score(const PreparedDocument& a, const PreparedDocument& b, const MatchConfig& cfg)
{
    PairScore s;
    s.query_doc = a.doc_id;
    s.target_doc = b.doc_id;
    s.swm = swm_score(a, b);
    if (a.size() == 0 || b.size() == 0) return s;

    s.source_regions = tile_regions(a, cfg);
    s.target_regions = tile_regions(b, cfg);
    const CrossDistances dist = cross_distances(a, b);

    double sum = 0.0, weighted = 0.0, weight = 0.0;
    for (const auto& p : s.source_regions) {
        RegionMatch m = best_region(p, s.target_regions, cfg, dist);
        sum += m.score;
        weighted += static_cast<double>(p.size()) * m.score;
        weight += static_cast<double>(p.size());
        s.region_matches.push_back(std::move(m));
    }
    s.mods_raw = sum / static_cast<double>(std::max(a.size(), b.size()));
    s.mods_norm = weight > 0.0 ? std::clamp(weighted / weight, 0.0, 1.0) : 0.0;
    return s;
}

PairScore mods_score(const DocumentRecord& a, const DocumentRecord& b, const EmbeddingStore& store,
                     const MatchConfig& cfg, const desc::Lexicon& lexicon)
{
    return mods_score(prepare(a, store, cfg, lexicon), prepare(b, store, cfg, lexicon), cfg);
}

std::vector<PairScore> rank_prepared(const PreparedDocument& query,
                                     std::span<const PreparedDocument> corpus, const MatchConfig& cfg,
                                     Metric metric, unsigned jobs)
{
    std::vector<const PreparedDocument*> targets;
    for (const auto& d : corpus)
        if (d.doc_id != query.doc_id) targets.push_back(&d);

    std::vector<PairScore> out(targets.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < targets.size(); i = next++)
            out[i] = mods_score(query, *targets[i], cfg);
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, targets.size()))));
    {
        std::vector<std::jthread> pool;
        for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(work);
        work();
    }

    std::sort(out.begin(), out.end(), [metric](const PairScore& x, const PairScore& y) {
        if (metric == Metric::mods) {
            if (x.mods_norm != y.mods_norm) return x.mods_norm > y.mods_norm;
        } else if (x.swm != y.swm) {
            return x.swm < y.swm;
        }
        return x.target_doc < y.target_doc;
    });
    return out;
}

std::vector<PairScore> rank_corpus(const DocumentRecord& query, const CorpusManifest& corpus,
                                   const EmbeddingStore& store, const MatchConfig& cfg, Metric metric,
                                   const desc::Lexicon& lexicon, unsigned jobs)
{
    std::vector<PreparedDocument> prepared;
    for (const auto& d : corpus.documents)
        if (d.doc_id != query.doc_id) prepared.push_back(prepare(d, store, cfg, lexicon));
    return rank_prepared(prepare(query, store, cfg, lexicon), prepared, cfg, metric, jobs);
}

std::string format_score_line(const PairScore& s, const PreparedDocument& a,
                              const PreparedDocument& b, bool with_regions,
                              std::optional<std::size_t> rank)
{
    nlohmann::ordered_json j;
    j["query_doc"] = s.query_doc;
    j["target_doc"] = s.target_doc;
    if (rank) j["rank"] = *rank;
    j["swm"] = s.swm;
    j["mods_raw"] = s.mods_raw;
    j["mods_norm"] = s.mods_norm;
    if (with_regions) {
        auto regions = nlohmann::ordered_json::array();
        for (const auto& m : s.region_matches) {
            nlohmann::ordered_json r;
            const Region& p = s.source_regions[m.source];
            r["p"] = {p.first_line, p.last_line};
            if (m.target) {
                const Region& q = s.target_regions[*m.target];
                r["q"] = {q.first_line, q.last_line};
            } else {
                r["q"] = nullptr;
            }
            r["score"] = m.score;
            auto pairs = nlohmann::ordered_json::array();
            for (const auto& [k, l] : m.pairs) pairs.push_back({a.word_ids[k], b.word_ids[l]});
            r["pairs"] = std::move(pairs);
            regions.push_back(std::move(r));
        }
        j["region_matches"] = std::move(regions);
    }
    return j.dump();
}

std::vector<ScoreLine> parse_score_report(std::string_view text)
{
    std::vector<ScoreLine> out;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            out.push_back({j.at("query_doc").get<std::string>(), j.at("target_doc").get<std::string>(),
                           j.at("swm").get<double>(), j.at("mods_raw").get<double>(),
                           j.at("mods_norm").get<double>()});
        } catch (const nlohmann::json::exception& e) {
            throw DataError("score report line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace mods::match
