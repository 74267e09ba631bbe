#include "regcore/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "regcore/exchange.hpp"

namespace regcore {

namespace fs = std::filesystem;

Mode parse_mode(const std::string& text) {
    if (text == "monolingual") return Mode::Monolingual;
    if (text == "cross-lingual" || text == "crosslingual" || text == "zero-shot") return Mode::CrossLingual;
    throw ExperimentError("unknown mode '" + text + "' (monolingual | cross-lingual)");
}

ModelKind parse_model(const std::string& text) {
    if (text == "cnn") return ModelKind::Cnn;
    if (text == "external" || text == "external-predictions") return ModelKind::ExternalPredictions;
    throw ExperimentError("unknown model '" + text + "' (cnn | external-predictions)");
}

std::string_view mode_name(Mode m) { return m == Mode::Monolingual ? "monolingual" : "cross-lingual"; }

void GridSpec::validate() const {
    if (kernels.empty() || learning_rates.empty() || thresholds.empty()) {
        throw ExperimentError("grid axes must be nonempty");
    }
}

GridResult grid_search(const GridSpec& grid, const CnnConfig& base, const LabeledData& train_set,
                       const LabeledData& dev_set, const EmbeddingTable& table, const Trainer& trainer) {
    grid.validate();
    GridResult result;
    bool have_best = false;
    GridCell best{};
    for (auto kernel : grid.kernels) {
        for (auto lr : grid.learning_rates) {
            for (auto threshold : grid.thresholds) {
                CnnConfig cfg = base;
                cfg.kernel = kernel;
                cfg.learning_rate = lr;
                cfg.threshold = threshold;
                GridCell cell{kernel, lr, threshold, 0.0, 0};
                try {
                    auto trained = trainer(cfg, train_set, dev_set, table);
                    cell.dev_f1 = trained.history.best_dev_f1();
                    cell.best_epoch = trained.history.chosen_epoch;
                } catch (const std::exception& e) {
                    result.failures.push_back({kernel, lr, threshold, e.what()});
                    continue;
                }
                result.cells.push_back(cell);
                auto better = [](const GridCell& a, const GridCell& b) {
                    if (a.dev_f1 != b.dev_f1) return a.dev_f1 > b.dev_f1;
                    if (a.best_epoch != b.best_epoch) return a.best_epoch < b.best_epoch;
                    if (a.learning_rate != b.learning_rate) return a.learning_rate < b.learning_rate;
                    return a.kernel < b.kernel;
                };
                if (!have_best || better(cell, best)) {
                    best = cell;
                    have_best = true;
                }
            }
        }
    }
    if (!have_best) {
        std::string msg = "every grid cell failed";
        if (!result.failures.empty()) msg += ": " + result.failures.front().error;
        throw ExperimentError(msg);
    }
    result.best = base;
    result.best.kernel = best.kernel;
    result.best.learning_rate = best.learning_rate;
    result.best.threshold = best.threshold;
    return result;
}

void write_grid_tsv(std::ostream& out, const GridResult& r) {
    out << "kernel\tlearning_rate\tthreshold\tdev_micro_f1\tbest_epoch\n";
    for (const auto& c : r.cells) {
        out << c.kernel << '\t' << c.learning_rate << '\t' << c.threshold << '\t' << c.dev_f1 << '\t'
            << c.best_epoch << '\n';
    }
    for (const auto& f : r.failures) {
        out << "# failed\t" << f.kernel << '\t' << f.learning_rate << '\t' << f.threshold << '\t' << f.error << '\n';
    }
}

bool DataAudit::read_before_training(const std::string& language) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const Entry& e) { return e.language == language && !e.after_training; });
}

LanguagePaths default_paths(const std::string& language) {
    LanguagePaths p;
    p.train = language + "/train.tsv";
    p.dev = language + "/dev.tsv";
    p.test = language + "/test.tsv";
    p.vectors = "vectors/wiki." + language + ".align.vec";
    p.aliases = language + "/labels.map";
    return p;
}

Corpus DataSource::corpus(const std::string& language, Part part) {
    std::string role(part_name(part));
    audit_.record(describe(language, role), language, role);
    return load_corpus(language, part);
}

const EmbeddingTable& DataSource::table(const std::string& language, std::size_t dim) {
    auto it = tables_.find(language);
    if (it != tables_.end()) {
        if (it->second->dim() != dim) throw ExperimentError("vector dimension mismatch for " + language);
        return *it->second;
    }
    audit_.record(describe(language, "vectors"), language, "vectors");
    auto table = std::make_unique<EmbeddingTable>(load_table(language, dim));
    return *tables_.emplace(language, std::move(table)).first->second;
}

LanguagePaths FileDataSource::paths_for(const std::string& language) const {
    auto it = paths_.find(language);
    LanguagePaths p = it != paths_.end() ? it->second : default_paths(language);
    auto fill = [](std::string& s) { s = resolve_data_path(s); };
    fill(p.train);
    fill(p.dev);
    fill(p.test);
    fill(p.vectors);
    fill(p.aliases);
    return p;
}

void FileDataSource::check_available(const std::vector<std::string>& languages, bool need_vectors) const {
    std::vector<std::string> missing;
    for (const auto& lang : languages) {
        auto p = paths_for(lang);
        std::vector<std::string> files = {p.train, p.dev, p.test};
        if (need_vectors) files.push_back(p.vectors);
        for (const auto& f : files) {
            if (!fs::is_regular_file(f)) missing.push_back(f);
        }
    }
    if (!missing.empty()) {
        std::string msg = "missing input files:";
        for (const auto& f : missing) msg += " " + f;
        throw ExperimentError(msg);
    }
}

Corpus FileDataSource::load_corpus(const std::string& language, Part part) {
    auto p = paths_for(language);
    const std::string& path = part == Part::Train ? p.train : part == Part::Dev ? p.dev : p.test;
    LabelAdapter adapter;
    if (!p.aliases.empty() && fs::is_regular_file(p.aliases)) {
        std::ifstream in(p.aliases);
        adapter = load_label_aliases(in);
    }
    return read_corpus_file(path, language, adapter);
}

EmbeddingTable FileDataSource::load_table(const std::string& language, std::size_t dim) {
    EmbeddingLoadOptions opts;
    opts.language = language;
    opts.expected_dim = dim;
    opts.max_words = max_vocab_;
    return load_embeddings_file(paths_for(language).vectors, opts);
}

std::string FileDataSource::describe(const std::string& language, const std::string& role) const {
    auto p = paths_for(language);
    if (role == "train") return p.train;
    if (role == "dev") return p.dev;
    if (role == "test") return p.test;
    return p.vectors;
}

void MemoryDataSource::add(const std::string& language, SplitCorpora parts, EmbeddingTable table) {
    corpora_[language] = std::move(parts);
    tables_[language] = std::move(table);
}

void MemoryDataSource::check_available(const std::vector<std::string>& languages, bool need_vectors) const {
    for (const auto& lang : languages) {
        if (!corpora_.count(lang) || (need_vectors && !tables_.count(lang))) {
            throw ExperimentError("missing in-memory data for language " + lang);
        }
    }
}

Corpus MemoryDataSource::load_corpus(const std::string& language, Part part) {
    const auto& parts = corpora_.at(language);
    return part == Part::Train ? parts.train : part == Part::Dev ? parts.dev : parts.test;
}

EmbeddingTable MemoryDataSource::load_table(const std::string& language, std::size_t) {
    return tables_.at(language);
}

std::string MemoryDataSource::describe(const std::string& language, const std::string& role) const {
    return "memory:" + language + "/" + role;
}

void ExperimentSpec::validate() const {
    if (!is_supported_language(train_language)) throw ExperimentError("unsupported train language " + train_language);
    if (!is_supported_language(eval_language)) throw ExperimentError("unsupported eval language " + eval_language);
    if (mode == Mode::CrossLingual && train_language == eval_language) {
        throw ExperimentError("cross-lingual mode needs different train and eval languages");
    }
    if (mode == Mode::Monolingual && train_language != eval_language) {
        throw ExperimentError("monolingual mode needs identical train and eval languages");
    }
    if (seeds.empty()) throw ExperimentError("at least one seed is required");
    if (model == ModelKind::ExternalPredictions && external_dir.empty()) {
        throw ExperimentError("external predictions need a prediction directory");
    }
    if (grid) grid->validate();
    config.validate();
}

namespace {

LabeledData labeled(const Corpus& corpus, const EmbeddingTable& table, std::size_t max_len) {
    LabeledData out;
    out.docs = encode_corpus(corpus, table, max_len);
    for (const auto& d : corpus.documents) out.labels.push_back(d.labels);
    return out;
}

std::vector<LabelSet> gold_of(const Corpus& c) {
    std::vector<LabelSet> out;
    for (const auto& d : c.documents) out.push_back(d.labels);
    return out;
}

std::vector<std::string> languages_of(const ExperimentSpec& spec) {
    std::vector<std::string> langs{spec.train_language};
    if (spec.eval_language != spec.train_language) langs.push_back(spec.eval_language);
    return langs;
}

ExperimentResult run_external(const ExperimentSpec& spec, DataSource& data) {
    data.check_available({spec.eval_language}, false);
    auto dev = data.corpus(spec.eval_language, Part::Dev);
    auto test = data.corpus(spec.eval_language, Part::Test);
    ExperimentResult result;
    result.config = spec.config;
    std::vector<EvalReport> dev_reports, test_reports;
    std::vector<ConfusionMatrix> matrices;
    for (auto seed : spec.seeds) {
        auto file = [&](const char* part) {
            return (fs::path(spec.external_dir) / (std::string(part) + ".seed" + std::to_string(seed) + ".tsv")).string();
        };
        auto dev_eval = evaluate_external(read_predictions_file(file("dev")), dev);
        auto test_eval = evaluate_external(read_predictions_file(file("test")), test);
        result.runs.push_back({seed, {}, dev_eval.report, test_eval.report});
        dev_reports.push_back(dev_eval.report);
        test_reports.push_back(test_eval.report);
        matrices.push_back(test_eval.confusion);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < result.runs.size(); ++i) {
        if (result.runs[i].dev.micro_f1 > result.runs[best].dev.micro_f1) best = i;
    }
    result.dev = aggregate_runs(dev_reports);
    result.test = aggregate_runs(test_reports);
    result.confusion = matrices[best];
    result.confusion_seed = spec.seeds[best];
    return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, DataSource& data) {
    spec.validate();
    if (spec.model == ModelKind::ExternalPredictions) return run_external(spec, data);

    data.check_available(languages_of(spec), true);
    const auto dim = spec.config.embedding_dim;
    const auto max_len = spec.config.max_len;

    const auto& source_table = data.table(spec.train_language, dim);
    auto train_set = labeled(data.corpus(spec.train_language, Part::Train), source_table, max_len);
    auto dev_set = labeled(data.corpus(spec.train_language, Part::Dev), source_table, max_len);

    ExperimentResult result;
    result.config = spec.config;
    if (spec.grid) {
        result.grid = grid_search(*spec.grid, spec.config, train_set, dev_set, source_table);
        result.config = result.grid->best;
    }

    std::vector<CnnParams> models;
    std::vector<TrainHistory> histories;
    for (auto seed : spec.seeds) {
        CnnConfig cfg = result.config;
        cfg.seed = seed;
        auto trained = train(cfg, train_set, dev_set, source_table);
        models.push_back(std::move(trained.params));
        histories.push_back(std::move(trained.history));
    }
    data.audit().mark_training_done();

    const auto& eval_table = data.table(spec.eval_language, dim);
    auto eval_dev = data.corpus(spec.eval_language, Part::Dev);
    auto eval_test = data.corpus(spec.eval_language, Part::Test);
    auto dev_docs = encode_corpus(eval_dev, eval_table, max_len);
    auto test_docs = encode_corpus(eval_test, eval_table, max_len);
    auto dev_gold = gold_of(eval_dev);
    auto test_gold = gold_of(eval_test);

    std::vector<EvalReport> dev_reports, test_reports;
    std::size_t best = 0;
    for (std::size_t i = 0; i < models.size(); ++i) {
        auto dev_pred = predict(models[i], dev_docs, eval_table, result.config.threshold);
        auto test_pred = predict(models[i], test_docs, eval_table, result.config.threshold);
        SeedRun run{spec.seeds[i], histories[i], evaluate(dev_gold, dev_pred), evaluate(test_gold, test_pred)};
        dev_reports.push_back(run.dev);
        test_reports.push_back(run.test);
        if (histories[i].best_dev_f1() > histories[best].best_dev_f1()) best = i;
        result.runs.push_back(std::move(run));
    }
    result.dev = aggregate_runs(dev_reports);
    result.test = aggregate_runs(test_reports);
    result.confusion_seed = spec.seeds[best];
    result.confusion = confusion(test_gold, predict(models[best], test_docs, eval_table, result.config.threshold));
    return result;
}

void CurveSpec::validate() const {
    if (sizes.empty()) throw ExperimentError("curve needs at least one train size");
    if (seeds_per_size < 1) throw ExperimentError("curve needs at least one seed per size");
    for (std::size_t i = 1; i < sizes.size(); ++i) {
        if (sizes[i] <= sizes[i - 1]) throw ExperimentError("curve sizes must be strictly ascending");
    }
}

CurveResult learning_curve(const CurveSpec& curve, const ExperimentSpec& spec, DataSource& data,
                           std::optional<double> reference_f1) {
    curve.validate();
    spec.validate();
    if (spec.mode != Mode::Monolingual) throw ExperimentError("learning curves are monolingual");
    if (spec.model != ModelKind::Cnn) throw ExperimentError("learning curves train the CNN");
    const auto& lang = spec.eval_language;
    data.check_available({lang}, true);

    const auto& table = data.table(lang, spec.config.embedding_dim);
    auto train_corpus = data.corpus(lang, Part::Train);
    std::vector<std::size_t> too_big;
    for (auto s : curve.sizes) {
        if (s > train_corpus.size()) too_big.push_back(s);
    }
    if (!too_big.empty()) {
        std::string msg = "curve sizes exceed the " + std::to_string(train_corpus.size()) + "-document train set:";
        for (auto s : too_big) msg += " " + std::to_string(s);
        throw ExperimentError(msg);
    }
    auto dev_set = labeled(data.corpus(lang, Part::Dev), table, spec.config.max_len);
    auto test_corpus = data.corpus(lang, Part::Test);
    auto test_docs = encode_corpus(test_corpus, table, spec.config.max_len);
    auto test_gold = gold_of(test_corpus);

    CurveResult result;
    result.reference_f1 = reference_f1;
    for (auto size : curve.sizes) {
        CurvePoint point;
        point.size = size;
        for (std::uint64_t seed = 1; seed <= curve.seeds_per_size; ++seed) {
            auto subset = stratified_subsample(train_corpus, size, seed);
            auto train_set = labeled(subset, table, spec.config.max_len);
            CnnConfig cfg = spec.config;
            cfg.seed = seed;
            auto trained = train(cfg, train_set, dev_set, table);
            ++result.runs_executed;
            point.values.push_back(micro_f1(test_gold, predict(trained.params, test_docs, table, cfg.threshold)));
        }
        point.test_f1 = mean_std(point.values);
        result.points.push_back(std::move(point));
    }
    return result;
}

void write_curve_tsv(std::ostream& out, const CurveResult& r) {
    out << "size\tmean_f1\tstd_f1\truns\n";
    for (const auto& p : r.points) {
        out << p.size << '\t' << p.test_f1.mean << '\t' << p.test_f1.std << '\t' << p.values.size() << '\n';
    }
    if (r.reference_f1) out << "# zero-shot reference\t" << *r.reference_f1 << '\n';
}

void write_experiment_outputs(const std::string& dir, const ExperimentResult& r) {
    fs::create_directories(dir);
    auto open = [&](const std::string& name) {
        std::ofstream out(fs::path(dir) / name);
        if (!out) throw ExperimentError("cannot write " + (fs::path(dir) / name).string());
        return out;
    };
    {
        auto out = open("summary.txt");
        out << "kernel " << r.config.kernel << ", learning rate " << r.config.learning_rate << ", threshold "
            << r.config.threshold << "\n\n[dev]\n";
        write_aggregate_text(out, r.dev);
        out << "\n[test]\n";
        write_aggregate_text(out, r.test);
    }
    {
        auto out = open("dev_aggregate.tsv");
        write_aggregate_tsv(out, r.dev);
    }
    {
        auto out = open("test_aggregate.tsv");
        write_aggregate_tsv(out, r.test);
    }
    for (const auto& run : r.runs) {
        auto dev = open("dev.seed" + std::to_string(run.seed) + ".tsv");
        write_report_tsv(dev, run.dev);
        auto test = open("test.seed" + std::to_string(run.seed) + ".tsv");
        write_report_tsv(test, run.test);
    }
    {
        auto out = open("confusion.tsv");
        out << "# seed " << r.confusion_seed << '\n';
        write_confusion_tsv(out, r.confusion);
    }
    if (r.grid) {
        auto out = open("grid.tsv");
        write_grid_tsv(out, *r.grid);
    }
}

void write_manifest(const std::string& dir, const std::string& command, const ConfigMap& settings,
                    const std::vector<std::uint64_t>& seeds, const std::vector<std::string>& inputs) {
    fs::create_directories(dir);
    nlohmann::json j;
    j["tool"] = "regcore";
    j["version"] = REGCORE_VERSION;
    j["command"] = command;
    j["settings"] = settings.values();
    j["seeds"] = seeds;
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["created"] = stamp;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& path : inputs) {
        if (path.empty() || !fs::is_regular_file(path)) continue;
        files.push_back({{"path", path}, {"fnv1a64", file_checksum(path)}, {"bytes", fs::file_size(path)}});
    }
    j["inputs"] = files;
    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw ExperimentError("cannot write manifest in " + dir);
    out << j.dump(2) << '\n';
}

}  // namespace regcore
