#include "mods/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mods/descriptor.hpp"
#include "mods/doc_model.hpp"
#include "mods/evaluation.hpp"
#include "mods/fixtures.hpp"
#include "mods/matcher.hpp"
#include "mods/segmenter.hpp"

namespace fs = std::filesystem;

namespace mods::cli {

EnvLookup process_env()
{
    return [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str())) return std::string(v);
        return std::nullopt;
    };
}

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::uint64_t seed = 1;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string lexicon;  // empty = built-in list

    match::MatchConfig match;
    std::string ann = "kdtree";

    desc::DescriptorConfig descriptor;
    double noise = 0.15;
    std::size_t dimension = desc::kSynthDimension;

    seg::SegmenterConfig segmenter;
    int seg_threshold = -1;
    std::string seg_gaps = "1,1.5,2";
};

// A setting reachable from flags, MODS_* variables and the config file.
struct Setting {
    std::string key;
    CLI::Option* option = nullptr;
};

std::string env_name(const std::string& key)
{
    std::string out = "MODS_";
    for (char c : key) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::vector<double> parse_list(const std::string& text, const std::string& what)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(what + ": '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw UsageError(what + " must list at least one value");
    return out;
}

void require_file(const std::string& path)
{
    if (!fs::is_regular_file(path)) throw DataError("input file not found: " + path);
}

std::string slurp(const std::string& path)
{
    require_file(path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Writes to the named file, or to `out` for "-".
void emit(const std::string& path, const std::string& bytes, std::ostream& out)
{
    if (path == "-") {
        out << bytes;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write '" + path + "'");
    f << bytes;
}

struct Inputs {
    CorpusManifest manifest;
    EmbeddingStore store;
};

Inputs load_inputs(const std::string& manifest_path, const std::string& emb_path)
{
    Inputs in;
    in.manifest = parse_manifest(slurp(manifest_path));
    in.store = decode_embeddings(slurp(emb_path));
    validate_against(in.manifest, in.store);
    return in;
}

const DocumentRecord& find_doc(const CorpusManifest& m, const std::string& id)
{
    const DocumentRecord* d = m.find(id);
    if (!d) throw DataError("unknown doc_id '" + id + "'");
    return *d;
}

std::string score_lines(const std::vector<match::PairScore>& scores, const match::PreparedDocument& query,
                        const std::map<std::string, const match::PreparedDocument*>& docs, bool regions,
                        bool ranked)
{
    std::string out;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out += match::format_score_line(scores[i], query, *docs.at(scores[i].target_doc), regions,
                                        ranked ? std::optional<std::size_t>(i + 1) : std::nullopt);
        out += '\n';
    }
    return out;
}

std::string fmt(double v, int precision = 4)
{
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(precision) << v;
    return ss.str();
}

class Cli {
public:
    Cli(std::ostream& out, std::ostream& err, const EnvLookup& env) : out_(out), err_(err), env_(env) {}

    int run(const std::vector<std::string>& args);

private:
    void define();
    template <typename T>
    CLI::Option* setting(const std::string& key, T& var, const std::string& help);
    std::vector<std::string> layered_args(const std::vector<std::string>& args);
    void resolve();
    void echo_config(const std::vector<std::string>& args) const;

    void do_segment();
    void do_embed();
    void do_score();
    void do_rank();
    void do_gen_fixtures();
    void do_eval_docsim();
    void do_eval_spot();

    std::vector<match::PreparedDocument> prepare_all(const Inputs& in) const;

    std::ostream& out_;
    std::ostream& err_;
    const EnvLookup& env_;

    CLI::App app_{"Handwritten document similarity: segmentation, word embeddings, MODS/SWM scoring and evaluation.",
                  "mods"};
    RunConfig cfg_;
    desc::Lexicon lexicon_;
    std::vector<Setting> settings_;
    std::map<std::string, std::string> sources_;
    std::string config_path_;

    // subcommand arguments
    std::vector<std::string> images_;
    std::string out_path_ = "-";
    std::string manifest_path_, emb_path_, spec_path_, report_path_, truth_path_;
    std::string mode_ = "synth";
    std::vector<std::string> pair_, queries_;
    std::string metric_ = "mods";
    bool regions_ = false;
    std::string out_dir_ = ".";
    std::size_t ndcg_p_ = 0;
    bool table_ = false;
    bool inexact_ = false;
    bool stopword_queries_ = false;
};

template <typename T>
CLI::Option* Cli::setting(const std::string& key, T& var, const std::string& help)
{
    CLI::Option* opt = app_.add_option("--" + key, var, help)
                           ->capture_default_str()
                           ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)
                           ->group("Run settings (env MODS_<NAME>, config file key <name>)");
    settings_.push_back({key, opt});
    return opt;
}

void Cli::define()
{
    app_.set_help_all_flag("--help-all", "Show help for every subcommand");
    app_.require_subcommand(1);
    app_.fallthrough();
    app_.add_option("--config", config_path_, "Optional TOML config file (also MODS_CONFIG)");

    setting("seed", cfg_.seed, "Seed for every random choice");
    setting("jobs", cfg_.jobs, "Worker threads for scoring")->check(CLI::PositiveNumber);
    setting("lexicon", cfg_.lexicon, "Stopword list file (one word per line); empty = built-in list");

    setting("gamma", cfg_.match.gamma, "Cosine-distance cut for matched word pairs");
    setting("region-lines", cfg_.match.region_lines, "Text lines per region");
    setting("region-stride", cfg_.match.region_stride, "Lines between region starts");
    setting("tau", cfg_.match.stopword_tau, "Stopword probability threshold");
    setting("ann", cfg_.ann, "Nearest-neighbour index")->check(CLI::IsMember({"kdtree", "exact"}));
    setting("leaf-size", cfg_.match.ann_params.leaf_size, "KD-tree leaf size");
    setting("max-leaves", cfg_.match.ann_params.max_visited_leaves, "KD-tree leaves visited per query");

    setting("noise", cfg_.noise, "Writer noise of synthetic embeddings");
    setting("dimension", cfg_.dimension, "Dimension of synthetic embeddings");
    setting("desc-height", cfg_.descriptor.height, "Descriptor canvas height");
    setting("desc-width", cfg_.descriptor.width, "Descriptor canvas width");
    setting("desc-grid-rows", cfg_.descriptor.grid_rows, "Descriptor cell rows");
    setting("desc-grid-cols", cfg_.descriptor.grid_cols, "Descriptor cell columns");
    setting("desc-bins", cfg_.descriptor.orientation_bins, "Gradient orientation bins");
    setting("desc-profiles", cfg_.descriptor.include_profiles, "Append ink projection profiles");

    setting("seg-threshold", cfg_.seg_threshold, "Binarization threshold 0-255; -1 = Otsu");
    setting("seg-small", cfg_.segmenter.small_factor, "Small-component height factor");
    setting("seg-large", cfg_.segmenter.large_factor, "Large-component height factor");
    setting("seg-cost", cfg_.segmenter.cost_threshold, "Minimum pair cost for joining a line");
    setting("seg-scale", cfg_.segmenter.page_scale_factor, "Page scale in median component heights");
    setting("seg-gaps", cfg_.seg_gaps, "Comma-separated word-gap factors, one hypothesis set each");

    auto* seg = app_.add_subcommand("segment", "Segment page images into a word-box manifest");
    seg->add_option("images", images_, "Page images (doc_id = file stem)")->required();
    seg->add_option("--out", out_path_, "Manifest path, - for stdout")->capture_default_str();

    auto* emb = app_.add_subcommand("embed", "Compute word embeddings for a manifest");
    emb->add_option("manifest", manifest_path_, "Corpus manifest")->required();
    emb->add_option("--mode", mode_, "baseline (page pixels) or synth (labels)")
        ->check(CLI::IsMember({"baseline", "synth"}))
        ->capture_default_str();
    emb->add_option("--out", out_path_, "Embedding file path, - for stdout")->capture_default_str();

    auto* score = app_.add_subcommand("score", "Score document pairs; every ordered pair without --pair");
    score->add_option("manifest", manifest_path_, "Corpus manifest")->required();
    score->add_option("embeddings", emb_path_, "Embedding file")->required();
    score->add_option("--pair", pair_, "Query and target doc_id")->expected(2);
    score->add_flag("--regions", regions_, "Include region matches in the report");

    auto* rank = app_.add_subcommand("rank", "Rank the corpus against query documents");
    rank->add_option("manifest", manifest_path_, "Corpus manifest")->required();
    rank->add_option("embeddings", emb_path_, "Embedding file")->required();
    rank->add_option("--query", queries_, "Query doc_id(s); every document when omitted");
    rank->add_option("--metric", metric_, "Ranking score")
        ->check(CLI::IsMember({"mods", "swm"}))
        ->capture_default_str();
    rank->add_flag("--regions", regions_, "Include region matches in the report");

    auto* gen = app_.add_subcommand("gen-fixtures", "Generate a graded synthetic corpus from a JSON spec");
    gen->add_option("spec", spec_path_, "Fixture spec (JSON)")->required();
    gen->add_option("--out-dir", out_dir_, "Directory for corpus.jsonl, embeddings.bin, truth.jsonl")
        ->capture_default_str();

    auto* ev = app_.add_subcommand("eval-docsim", "nDCG and ROC-AUC of a score report against graded truth");
    ev->add_option("report", report_path_, "Score report from score or rank")->required();
    ev->add_option("truth", truth_path_, "Ground-truth grades")->required();
    ev->add_option("--p", ndcg_p_, "nDCG cut-off; 0 = targets per query")->capture_default_str();
    ev->add_flag("--table", table_, "Plain-text table instead of JSON");

    auto* spot = app_.add_subcommand("eval-spot", "Query-by-example word-spotting mAP over labeled words");
    spot->add_option("manifest", manifest_path_, "Corpus manifest")->required();
    spot->add_option("embeddings", emb_path_, "Embedding file")->required();
    spot->add_flag("--inexact", inexact_, "Words sharing a Porter stem count as relevant");
    spot->add_flag("--include-stopwords", stopword_queries_, "Also query with stopwords");
}

// Config file and environment values become leading tokens so that, with the
// last value winning, explicit flags override env, and env the file.
std::vector<std::string> Cli::layered_args(const std::vector<std::string>& args)
{
    std::optional<std::string> config;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
        else if (args[i].starts_with("--config=")) config = args[i].substr(9);
    }
    if (!config) config = env_("MODS_CONFIG");

    auto is_setting = [this](const std::string& key) {
        return std::any_of(settings_.begin(), settings_.end(), [&](const Setting& s) { return s.key == key; });
    };

    std::vector<std::string> out;
    if (config) {
        require_file(*config);
        std::vector<CLI::ConfigItem> items;
        try {
            items = CLI::ConfigTOML().from_file(*config);
        } catch (const CLI::Error& e) {
            throw DataError("config file " + *config + ": " + e.what());
        }
        for (const auto& item : items) {
            if (item.name == "++" || item.name == "--") continue;  // section markers
            std::string key = item.name;
            std::replace(key.begin(), key.end(), '_', '-');
            if (!is_setting(key)) throw UsageError("config file " + *config + ": unknown setting '" + item.name + "'");
            if (item.inputs.size() != 1)
                throw UsageError("config file " + *config + ": setting '" + item.name + "' needs one value");
            out.push_back("--" + key + "=" + item.inputs.front());
            sources_[key] = "file";
        }
    }
    for (const auto& s : settings_)
        if (auto v = env_(env_name(s.key))) {
            out.push_back("--" + s.key + "=" + *v);
            sources_[s.key] = "env";
        }
    for (const auto& a : args)
        for (const auto& s : settings_)
            if (a == "--" + s.key || a.starts_with("--" + s.key + "=")) sources_[s.key] = "flag";
    out.insert(out.end(), args.begin(), args.end());
    return out;
}

void Cli::resolve()
{
    cfg_.match.ann_mode = cfg_.ann == "exact" ? ann::Mode::exact : ann::Mode::kdtree;
    if (cfg_.seg_threshold < -1 || cfg_.seg_threshold > 255) throw UsageError("--seg-threshold must be in [-1, 255]");
    cfg_.segmenter.binarize_threshold =
        cfg_.seg_threshold < 0 ? std::nullopt : std::optional<int>(cfg_.seg_threshold);
    cfg_.segmenter.gap_factors = parse_list(cfg_.seg_gaps, "--seg-gaps");
    for (double g : cfg_.segmenter.gap_factors)
        if (!(g > 0.0)) throw UsageError("--seg-gaps values must be positive");
    if (!(cfg_.segmenter.small_factor > 0.0 && cfg_.segmenter.small_factor < cfg_.segmenter.large_factor))
        throw UsageError("--seg-small must be positive and below --seg-large");
    if (!(cfg_.segmenter.page_scale_factor > 0.0)) throw UsageError("--seg-scale must be positive");
    if (!(cfg_.noise >= 0.0)) throw UsageError("--noise must be non-negative");
    if (cfg_.dimension == 0) throw UsageError("--dimension must be positive");
    try {
        cfg_.match.validate();
        cfg_.descriptor.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    lexicon_ = cfg_.lexicon.empty() ? desc::default_lexicon() : desc::parse_lexicon(slurp(cfg_.lexicon));
}

void Cli::echo_config(const std::vector<std::string>& args) const
{
    nlohmann::ordered_json settings;
    for (const auto& s : settings_) {
        const std::string v = s.option->as<std::string>();
        settings[s.key] = {{"value", v.empty() ? s.option->get_default_str() : v},
                           {"source", sources_.contains(s.key) ? sources_.at(s.key) : "default"}};
    }
    nlohmann::ordered_json j;
    j["command"] = app_.get_subcommands().empty() ? "" : app_.get_subcommands().front()->get_name();
    j["args"] = args;
    if (!config_path_.empty()) j["config"] = config_path_;
    j["settings"] = settings;
    err_ << "run_config " << j.dump() << '\n';
}

std::vector<match::PreparedDocument> Cli::prepare_all(const Inputs& in) const
{
    std::vector<match::PreparedDocument> docs;
    docs.reserve(in.manifest.documents.size());
    for (const auto& d : in.manifest.documents) docs.push_back(match::prepare(d, in.store, cfg_.match, lexicon_));
    return docs;
}

void Cli::do_segment()
{
    CorpusManifest m;
    m.name = "segmented";
    m.params["seg_gaps"] = cfg_.seg_gaps;
    m.params["seg_threshold"] = std::to_string(cfg_.seg_threshold);
    const fs::path base = out_path_ == "-" ? fs::path() : fs::path(out_path_).parent_path();
    for (const auto& image : images_) {
        require_file(image);
        const cv::Mat gray = seg::load_gray(image);
        const auto sets = seg::segment_page(gray, cfg_.segmenter);
        // Page paths are stored relative to the manifest so the pair stays relocatable.
        std::string stored = image;
        if (!base.empty()) stored = fs::absolute(image).lexically_relative(fs::absolute(base)).generic_string();
        m.documents.push_back(seg::to_document(fs::path(image).stem().string(), sets, stored));
    }
    validate(m);
    emit(out_path_, serialize_manifest(m), out_);
}

void Cli::do_embed()
{
    const CorpusManifest m = parse_manifest(slurp(manifest_path_));
    const fs::path base = manifest_path_ == "-" ? fs::path() : fs::path(manifest_path_).parent_path();
    EmbeddingStore store;
    if (mode_ == "synth") {
        store = EmbeddingStore(static_cast<std::uint32_t>(cfg_.dimension));
        for (const auto& d : m.documents) {
            const std::uint64_t writer = desc::writer_seed(cfg_.seed, d.doc_id);
            for (const auto& w : d.words) {
                if (!w.label) throw DataError("synth mode needs labels; word '" + w.word_id + "' has none");
                store.add({w.word_id, w.stopword_prob, desc::synth_embed(*w.label, writer, cfg_.noise, cfg_.dimension)});
            }
        }
    } else {
        store = EmbeddingStore(static_cast<std::uint32_t>(cfg_.descriptor.dimension()));
        for (const auto& d : m.documents) {
            if (!d.page_image) throw DataError("baseline mode needs page images; document '" + d.doc_id + "' has none");
            fs::path page = *d.page_image;
            if (page.is_relative()) page = base / page;
            require_file(page.string());
            const cv::Mat gray = seg::load_gray(page.string());
            const cv::Rect bounds(0, 0, gray.cols, gray.rows);
            for (const auto& w : d.words) {
                const cv::Rect r = cv::Rect(w.bbox.x, w.bbox.y, w.bbox.w, w.bbox.h) & bounds;
                if (r.area() == 0) throw DataError("word '" + w.word_id + "' lies outside its page image");
                store.add({w.word_id, w.stopword_prob, desc::baseline_descriptor(gray(r), cfg_.descriptor)});
            }
        }
    }
    emit(out_path_, encode_embeddings(store), out_);
}

void Cli::do_score()
{
    const Inputs in = load_inputs(manifest_path_, emb_path_);
    std::map<std::string, const match::PreparedDocument*> by_id;
    std::vector<match::PreparedDocument> docs;
    if (!pair_.empty()) {
        docs.push_back(match::prepare(find_doc(in.manifest, pair_[0]), in.store, cfg_.match, lexicon_));
        docs.push_back(match::prepare(find_doc(in.manifest, pair_[1]), in.store, cfg_.match, lexicon_));
        const auto s = match::mods_score(docs[0], docs[1], cfg_.match);
        out_ << match::format_score_line(s, docs[0], docs[1], regions_) << '\n';
        return;
    }
    docs = prepare_all(in);
    for (const auto& d : docs) by_id[d.doc_id] = &d;
    for (const auto& q : docs) {
        // Report order follows the manifest, independent of the worker count.
        auto scores = match::rank_prepared(q, docs, cfg_.match, match::Metric::mods, cfg_.jobs);
        std::sort(scores.begin(), scores.end(), [&](const auto& a, const auto& b) {
            return in.manifest.find(a.target_doc) < in.manifest.find(b.target_doc);
        });
        out_ << score_lines(scores, q, by_id, regions_, false);
    }
}

void Cli::do_rank()
{
    const Inputs in = load_inputs(manifest_path_, emb_path_);
    for (const auto& q : queries_) find_doc(in.manifest, q);
    const auto docs = prepare_all(in);
    std::map<std::string, const match::PreparedDocument*> by_id;
    for (const auto& d : docs) by_id[d.doc_id] = &d;
    std::vector<std::string> queries = queries_;
    if (queries.empty())
        for (const auto& d : docs) queries.push_back(d.doc_id);
    const auto metric = metric_ == "swm" ? match::Metric::swm : match::Metric::mods;
    for (const auto& q : queries) {
        const auto& query = *by_id.at(q);
        out_ << score_lines(match::rank_prepared(query, docs, cfg_.match, metric, cfg_.jobs), query, by_id, regions_,
                            true);
    }
}

void Cli::do_gen_fixtures()
{
    eval::FixtureSpec spec = eval::parse_fixture_spec(slurp(spec_path_));
    // Explicit run settings override the spec file.
    if (sources_.contains("seed")) spec.seed = cfg_.seed;
    if (sources_.contains("noise")) spec.noise = cfg_.noise;
    if (sources_.contains("dimension")) spec.dimension = cfg_.dimension;
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("fixture spec: ") + e.what());
    }
    const eval::Fixture fx = eval::gen_fixtures(spec);
    std::error_code ec;
    fs::create_directories(out_dir_, ec);
    if (!fs::is_directory(out_dir_)) throw DataError("cannot create output directory '" + out_dir_ + "'");
    const fs::path dir(out_dir_);
    emit((dir / "corpus.jsonl").string(), serialize_manifest(fx.manifest), out_);
    emit((dir / "embeddings.bin").string(), encode_embeddings(fx.store), out_);
    emit((dir / "truth.jsonl").string(), eval::serialize_truth(fx.truth), out_);

    std::map<int, std::size_t> hist;
    for (const auto& g : fx.truth) ++hist[g.grade];
    nlohmann::ordered_json j;
    j["documents"] = fx.manifest.documents.size();
    j["sources"] = fx.source_ids;
    nlohmann::ordered_json h;
    for (const auto& [grade, n] : hist) h[std::to_string(grade)] = n;
    j["grade_histogram"] = h;
    j["params"] = fx.manifest.params;
    out_ << j.dump() << '\n';
}

void Cli::do_eval_docsim()
{
    const auto scores = match::parse_score_report(slurp(report_path_));
    const auto truth = eval::parse_truth(slurp(truth_path_));
    eval::DocsimReport r;
    try {
        r = eval::evaluate_docsim(scores, truth, ndcg_p_ ? std::optional<std::size_t>(ndcg_p_) : std::nullopt);
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }
    if (table_) {
        out_ << "metric     nDCG@" << r.p << "  AUC\n";
        out_ << "mods_norm  " << fmt(r.mods.mean_ndcg) << "  " << fmt(r.mods.auc) << '\n';
        out_ << "swm        " << fmt(r.swm.mean_ndcg) << "  " << fmt(r.swm.auc) << '\n';
        out_ << "pairs      " << r.pairs << '\n';
        return;
    }
    auto summary = [](const eval::MetricSummary& m) {
        nlohmann::ordered_json j;
        j["mean_ndcg"] = m.mean_ndcg;
        j["auc"] = m.auc;
        nlohmann::ordered_json per;
        for (const auto& [q, v] : m.ndcg_per_query) per[q] = v;
        j["ndcg_per_query"] = per;
        return j;
    };
    nlohmann::ordered_json j;
    j["p"] = r.p;
    j["pairs"] = r.pairs;
    j["mods_norm"] = summary(r.mods);
    j["swm"] = summary(r.swm);
    out_ << j.dump() << '\n';
}

void Cli::do_eval_spot()
{
    const Inputs in = load_inputs(manifest_path_, emb_path_);
    eval::SpotConfig sc;
    sc.inexact = inexact_;
    sc.include_stopword_queries = stopword_queries_;
    sc.stopword_tau = cfg_.match.stopword_tau;
    const auto r = eval::evaluate_word_spotting(in.manifest, in.store, sc, lexicon_);
    nlohmann::ordered_json j;
    j["map"] = r.map;
    j["evaluated"] = r.evaluated;
    j["skipped"] = r.skipped;
    j["inexact"] = inexact_;
    out_ << j.dump() << '\n';
}

int Cli::run(const std::vector<std::string>& args)
{
    try {
        define();
        const auto layered = layered_args(args);
        // CLI11 wants the arguments reversed when given as a vector.
        std::vector<std::string> reversed(layered.rbegin(), layered.rend());
        app_.parse(reversed);
        resolve();
        echo_config(args);
        const std::string cmd = app_.get_subcommands().front()->get_name();
        if (cmd == "segment") do_segment();
        else if (cmd == "embed") do_embed();
        else if (cmd == "score") do_score();
        else if (cmd == "rank") do_rank();
        else if (cmd == "gen-fixtures") do_gen_fixtures();
        else if (cmd == "eval-docsim") do_eval_docsim();
        else do_eval_spot();
    } catch (const CLI::CallForHelp&) {
        out_ << app_.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out_ << app_.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err_ << "usage error: " << e.what() << "\nRun 'mods --help' for usage.\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        err_ << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        err_ << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err_ << "data error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env)
{
    Cli cli(out, err, env);
    return cli.run(args);
}

}  // namespace mods::cli
