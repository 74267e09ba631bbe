// regcore: command-line driver for register corpora, the CNN classifier and
// the evaluation harness.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <list>
#include <map>
#include <string>

#include "regcore/cnn.hpp"
#include "regcore/config.hpp"
#include "regcore/corpus.hpp"
#include "regcore/dedup.hpp"
#include "regcore/embeddings.hpp"
#include "regcore/evaluation.hpp"
#include "regcore/exchange.hpp"
#include "regcore/experiment.hpp"
#include "regcore/splits.hpp"

namespace fs = std::filesystem;
using namespace regcore;

namespace {

/// Flag values keyed by setting name; merged over the --config file. Several
/// subcommands share setting names, so every option owns its own slot.
struct Settings {
    struct Flag {
        std::string key;
        CLI::Option* option = nullptr;
        std::string value;
    };
    std::string config_file;
    std::list<Flag> flags;

    void add(CLI::App* app, const std::string& key, const std::string& help) {
        auto& flag = flags.emplace_back();
        flag.key = key;
        flag.option = app->add_option("--" + key, flag.value, help);
    }

    ConfigMap resolve() const {
        ConfigMap cfg = config_file.empty() ? ConfigMap{} : ConfigMap::load_file(config_file);
        for (const auto& flag : flags) {
            if (flag.option->count() > 0) cfg.set(flag.key, flag.value);
        }
        return cfg;
    }
};

std::string require(const ConfigMap& cfg, const std::string& key) {
    auto v = cfg.get(key);
    if (!v || v->empty()) throw ConfigError("missing required setting '" + key + "'");
    return *v;
}

LanguagePaths language_paths(const ConfigMap& cfg, const std::string& lang) {
    LanguagePaths p = default_paths(lang);
    p.train = cfg.get_string(lang + ".train", p.train);
    p.dev = cfg.get_string(lang + ".dev", p.dev);
    p.test = cfg.get_string(lang + ".test", p.test);
    p.vectors = cfg.get_string(lang + ".vectors", p.vectors);
    p.aliases = cfg.get_string(lang + ".aliases", p.aliases);
    return p;
}

CnnConfig cnn_config(const ConfigMap& cfg) {
    CnnConfig c;
    c.kernel = cfg.get_uint("kernel", c.kernel);
    c.filters = cfg.get_uint("filters", c.filters);
    c.embedding_dim = cfg.get_uint("dim", c.embedding_dim);
    c.learning_rate = cfg.get_double("learning-rate", c.learning_rate);
    c.threshold = cfg.get_double("threshold", c.threshold);
    c.batch_size = cfg.get_uint("batch-size", c.batch_size);
    c.max_epochs = cfg.get_uint("epochs", c.max_epochs);
    c.patience = cfg.get_uint("patience", c.patience);
    c.seed = cfg.get_uint("seed", c.seed);
    c.max_len = cfg.get_uint("max-len", c.max_len);
    c.validate();
    return c;
}

GridSpec grid_spec(const ConfigMap& cfg) {
    GridSpec g;
    g.kernels.clear();
    for (auto k : cfg.get_uints("kernels", {1, 2})) g.kernels.push_back(static_cast<std::size_t>(k));
    g.learning_rates = cfg.get_doubles("learning-rates", g.learning_rates);
    g.thresholds = cfg.get_doubles("thresholds", g.thresholds);
    g.validate();
    return g;
}

std::string run_dir(const ConfigMap& cfg, const std::string& command) {
    return cfg.get_string("run-dir", "runs/" + command);
}

Corpus read_input(const ConfigMap& cfg) {
    return read_corpus_file(require(cfg, "in"), cfg.get_string("lang", "en"));
}

void add_cnn_options(Settings& s, CLI::App* app) {
    s.add(app, "kernel", "convolution kernel size in tokens");
    s.add(app, "filters", "number of convolution filters");
    s.add(app, "dim", "embedding dimension");
    s.add(app, "learning-rate", "Adam learning rate");
    s.add(app, "threshold", "prediction threshold");
    s.add(app, "batch-size", "mini-batch size");
    s.add(app, "epochs", "maximum epochs");
    s.add(app, "patience", "early-stopping patience (epochs)");
    s.add(app, "seed", "random seed");
    s.add(app, "max-len", "maximum tokens per document");
    s.add(app, "max-vocab", "load at most this many vectors per language (0 = all)");
    s.add(app, "run-dir", "output directory");
}

int cmd_dedup(const ConfigMap& cfg) {
    auto corpus = read_input(cfg);
    DedupConfig dc;
    dc.n = cfg.get_uint("n", dc.n);
    dc.threshold = cfg.get_double("threshold", dc.threshold);
    auto result = deduplicate(corpus, dc);
    write_corpus_file(result.kept, require(cfg, "out"));
    if (auto log = cfg.get("log")) {
        std::ofstream out(*log);
        write_removal_log(out, result.removed);
    }
    std::cout << "kept " << result.kept.size() << ", removed " << result.removed.size() << " of " << corpus.size()
              << '\n';
    return 0;
}

int cmd_split(const ConfigMap& cfg) {
    auto corpus = read_input(cfg);
    auto ratios = SplitRatios::parse(cfg.get_string("ratios", "50,20,30"));
    auto assignment = stratified_split(corpus, ratios, cfg.get_uint("seed", 1));
    auto parts = apply_split(corpus, assignment);
    auto prefix = require(cfg, "out-prefix");
    write_corpus_file(parts.train, prefix + ".train.tsv");
    write_corpus_file(parts.dev, prefix + ".dev.tsv");
    write_corpus_file(parts.test, prefix + ".test.tsv");
    std::ofstream out(prefix + ".assignment.tsv");
    write_assignment(out, corpus, assignment);
    std::cout << "train " << parts.train.size() << ", dev " << parts.dev.size() << ", test " << parts.test.size()
              << '\n';
    return 0;
}

int cmd_stats(const ConfigMap& cfg) {
    auto corpus = read_input(cfg);
    auto stats = corpus_stats(corpus);
    std::printf("%-9s %10s %8s %10s %10s\n", "category", "share", "count", "mean len", "std len");
    for (std::size_t b = 0; b < kNumBuckets; ++b) {
        const auto& row = stats.buckets[b];
        std::printf("%-9s %8s %% %8zu %10.0f %10.0f\n", std::string(bucket_name(static_cast<Bucket>(b))).c_str(),
                    percent(row.proportion).c_str(), row.count, row.mean_length, row.std_length);
    }
    std::printf("%-9s %10s %8zu %10.0f %10.0f\n", "All", "", stats.total, stats.all.mean_length,
                stats.all.std_length);
    return 0;
}

int cmd_embed_info(const std::string& file, const ConfigMap& cfg) {
    EmbeddingLoadOptions opts;
    opts.language = cfg.get_string("lang", "");
    opts.expected_dim = cfg.get_uint("dim", 0);
    auto table = load_embeddings_file(file, opts);
    std::printf("vocab %zu\ndim %zu\nduplicates %zu\nchecksum %016llx\n", table.vocab_size(), table.dim(),
                table.duplicates(), static_cast<unsigned long long>(table.checksum()));
    return 0;
}

int cmd_train(const ConfigMap& cfg) {
    auto lang = cfg.get_string("lang", "fi");
    auto config = cnn_config(cfg);
    FileDataSource data({{lang, language_paths(cfg, lang)}}, cfg.get_uint("max-vocab", 0));
    auto paths = data.paths_for(lang);
    const auto& table = data.table(lang, config.embedding_dim);
    auto to_data = [&](const Corpus& c) {
        LabeledData d;
        d.docs = encode_corpus(c, table, config.max_len);
        for (const auto& doc : c.documents) d.labels.push_back(doc.labels);
        return d;
    };
    auto train_set = to_data(data.corpus(lang, Part::Train));
    auto dev_set = to_data(data.corpus(lang, Part::Dev));
    auto result = train(config, train_set, dev_set, table);

    auto dir = run_dir(cfg, "train");
    write_manifest(dir, "train", cfg, {config.seed}, {paths.train, paths.dev, paths.vectors});
    save_checkpoint_file((fs::path(dir) / "model.ckpt").string(), config, result.params);
    {
        std::ofstream out(fs::path(dir) / "history.tsv");
        out << "epoch\ttrain_loss\tdev_micro_f1\n";
        for (std::size_t e = 0; e < result.history.train_loss.size(); ++e) {
            out << e + 1 << '\t' << result.history.train_loss[e] << '\t' << result.history.dev_f1[e] << '\n';
        }
        out << "# chosen epoch " << result.history.chosen_epoch << '\n';
    }
    std::cout << "best dev micro-F1 " << percent(result.history.best_dev_f1()) << " % at epoch "
              << result.history.chosen_epoch << "; outputs in " << dir << '\n';

    // Optional: probabilities for another corpus in the exchange format.
    if (auto target = cfg.get("predict-in")) {
        auto plang = cfg.get_string("predict-lang", lang);
        FileDataSource pdata({{plang, language_paths(cfg, plang)}}, cfg.get_uint("max-vocab", 0));
        const auto& ptable = pdata.table(plang, config.embedding_dim);
        auto corpus = read_corpus_file(resolve_data_path(*target), plang);
        auto docs = encode_corpus(corpus, ptable, config.max_len);
        auto probs = forward(result.params, docs, ptable);
        PredictionFile file;
        file.threshold = config.threshold;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            file.ids.push_back(corpus.documents[i].id);
            std::array<double, kNumRegisters> row{};
            for (std::size_t l = 0; l < kNumRegisters; ++l) row[l] = probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l));
            file.probabilities.push_back(row);
        }
        auto out = cfg.get_string("predictions", (fs::path(dir) / "predictions.tsv").string());
        write_predictions_file(out, file);
        std::cout << "wrote " << out << '\n';
    }
    return 0;
}

int cmd_grid(const ConfigMap& cfg) {
    auto lang = cfg.get_string("lang", "fi");
    auto base = cnn_config(cfg);
    auto grid = grid_spec(cfg);
    FileDataSource data({{lang, language_paths(cfg, lang)}}, cfg.get_uint("max-vocab", 0));
    data.check_available({lang}, true);
    const auto& table = data.table(lang, base.embedding_dim);
    auto to_data = [&](const Corpus& c) {
        LabeledData d;
        d.docs = encode_corpus(c, table, base.max_len);
        for (const auto& doc : c.documents) d.labels.push_back(doc.labels);
        return d;
    };
    auto result = grid_search(grid, base, to_data(data.corpus(lang, Part::Train)), to_data(data.corpus(lang, Part::Dev)),
                              table);
    auto dir = run_dir(cfg, "grid");
    auto paths = data.paths_for(lang);
    write_manifest(dir, "grid", cfg, {base.seed}, {paths.train, paths.dev, paths.vectors});
    std::ofstream out(fs::path(dir) / "grid.tsv");
    write_grid_tsv(out, result);
    write_grid_tsv(std::cout, result);
    std::cout << "best: kernel " << result.best.kernel << ", learning rate " << result.best.learning_rate
              << ", threshold " << result.best.threshold << '\n';
    return 0;
}

int cmd_eval(const ConfigMap& cfg) {
    // Single prediction file against a gold corpus.
    if (auto pred = cfg.get("predictions")) {
        auto gold = read_corpus_file(resolve_data_path(require(cfg, "gold")), cfg.get_string("lang", "en"));
        auto result = evaluate_external(read_predictions_file(resolve_data_path(*pred)), gold);
        write_report_text(std::cout, result.report);
        if (cfg.has("run-dir")) {
            auto dir = run_dir(cfg, "eval");
            write_manifest(dir, "eval", cfg, {}, {resolve_data_path(*pred), resolve_data_path(require(cfg, "gold"))});
            std::ofstream report(fs::path(dir) / "report.tsv");
            write_report_tsv(report, result.report);
            std::ofstream conf(fs::path(dir) / "confusion.tsv");
            write_confusion_tsv(conf, result.confusion);
        }
        return 0;
    }

    ExperimentSpec spec;
    spec.mode = parse_mode(cfg.get_string("mode", "monolingual"));
    spec.train_language = cfg.get_string("train-lang", "fi");
    spec.eval_language = cfg.get_string("eval-lang", spec.train_language);
    spec.model = parse_model(cfg.get_string("model", "cnn"));
    spec.config = cnn_config(cfg);
    spec.seeds = cfg.get_uints("seeds", spec.seeds);
    spec.external_dir = resolve_data_path(cfg.get_string("external-dir", ""));
    if (cfg.get_string("grid", "0") != "0") spec.grid = grid_spec(cfg);

    std::map<std::string, LanguagePaths> paths;
    for (const auto& lang : {spec.train_language, spec.eval_language}) paths[lang] = language_paths(cfg, lang);
    FileDataSource data(paths, cfg.get_uint("max-vocab", 0));
    auto result = run_experiment(spec, data);

    auto dir = run_dir(cfg, "eval");
    std::vector<std::string> inputs;
    for (const auto& e : data.audit().entries()) inputs.push_back(e.source);
    write_manifest(dir, "eval", cfg, spec.seeds, inputs);
    write_experiment_outputs(dir, result);
    std::cout << spec.train_language << "-" << spec.eval_language << " (" << mode_name(spec.mode) << ")\n[dev]\n";
    write_aggregate_text(std::cout, result.dev);
    std::cout << "[test]\n";
    write_aggregate_text(std::cout, result.test);
    return 0;
}

int cmd_curve(const ConfigMap& cfg) {
    ExperimentSpec spec;
    spec.train_language = spec.eval_language = cfg.get_string("lang", "fi");
    spec.config = cnn_config(cfg);
    CurveSpec curve;
    auto sizes = cfg.get_uints("sizes", {});
    if (!sizes.empty()) curve.sizes.assign(sizes.begin(), sizes.end());
    curve.seeds_per_size = cfg.get_uint("curve-seeds", curve.seeds_per_size);
    std::optional<double> reference;
    if (cfg.has("reference")) reference = cfg.get_double("reference", 0.0);

    FileDataSource data({{spec.eval_language, language_paths(cfg, spec.eval_language)}}, cfg.get_uint("max-vocab", 0));
    auto result = learning_curve(curve, spec, data, reference);
    auto dir = run_dir(cfg, "curve");
    std::vector<std::string> inputs;
    for (const auto& e : data.audit().entries()) inputs.push_back(e.source);
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 1; s <= curve.seeds_per_size; ++s) seeds.push_back(s);
    write_manifest(dir, "curve", cfg, seeds, inputs);
    std::ofstream out(fs::path(dir) / "curve.tsv");
    write_curve_tsv(out, result);
    write_curve_tsv(std::cout, result);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regcore: web register corpora, CNN classifier and evaluation"};
    app.require_subcommand(1);
    Settings s;
    app.add_option("--config", s.config_file, "key = value settings file (flags override it)");

    auto* dedup = app.add_subcommand("dedup", "n-gram overlap deduplication");
    s.add(dedup, "n", "n-gram length (default 5)");
    s.add(dedup, "threshold", "overlap threshold (default 0.7)");
    s.add(dedup, "in", "input corpus");
    s.add(dedup, "out", "output corpus");
    s.add(dedup, "log", "removal log TSV");
    s.add(dedup, "lang", "corpus language");

    auto* split_cmd = app.add_subcommand("split", "stratified train/dev/test split");
    s.add(split_cmd, "ratios", "train,dev,test weights (default 50,20,30)");
    s.add(split_cmd, "seed", "random seed");
    s.add(split_cmd, "in", "input corpus");
    s.add(split_cmd, "out-prefix", "output prefix");
    s.add(split_cmd, "lang", "corpus language");

    auto* stats = app.add_subcommand("stats", "register distribution and document lengths");
    s.add(stats, "in", "input corpus");
    s.add(stats, "lang", "corpus language");

    std::string vec_file;
    auto* info = app.add_subcommand("embed-info", "vector file summary");
    info->add_option("file", vec_file, "vector file")->required();
    s.add(info, "dim", "expected dimension (0 = infer)");

    auto* train_cmd = app.add_subcommand("train", "train one CNN");
    s.add(train_cmd, "lang", "language");
    add_cnn_options(s, train_cmd);
    s.add(train_cmd, "predict-in", "corpus to score after training");
    s.add(train_cmd, "predict-lang", "language of --predict-in");
    s.add(train_cmd, "predictions", "prediction file to write");

    auto* grid = app.add_subcommand("grid", "CNN grid search on dev micro-F1");
    s.add(grid, "lang", "language");
    add_cnn_options(s, grid);
    s.add(grid, "kernels", "kernel sizes, comma separated");
    s.add(grid, "learning-rates", "learning rates, comma separated");
    s.add(grid, "thresholds", "thresholds, comma separated");

    auto* eval = app.add_subcommand("eval", "run an experiment or score a prediction file");
    s.add(eval, "mode", "monolingual | cross-lingual");
    s.add(eval, "train-lang", "training language");
    s.add(eval, "eval-lang", "evaluation language");
    s.add(eval, "model", "cnn | external-predictions");
    s.add(eval, "seeds", "seeds, comma separated (default 1,2,3)");
    s.add(eval, "grid", "1 to grid-search before the seeded runs");
    s.add(eval, "kernels", "grid kernel sizes");
    s.add(eval, "learning-rates", "grid learning rates");
    s.add(eval, "thresholds", "grid thresholds");
    s.add(eval, "external-dir", "directory with {dev,test}.seed<S>.tsv prediction files");
    s.add(eval, "predictions", "single prediction file to score");
    s.add(eval, "gold", "gold corpus for --predictions");
    s.add(eval, "lang", "language of --gold");
    add_cnn_options(s, eval);

    auto* curve = app.add_subcommand("curve", "learning curve over train sizes");
    s.add(curve, "lang", "language");
    s.add(curve, "sizes", "train sizes, comma separated");
    s.add(curve, "curve-seeds", "seeds per size (default 6)");
    s.add(curve, "reference", "zero-shot reference F1 to draw");
    add_cnn_options(s, curve);

    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = s.resolve();
        if (dedup->parsed()) return cmd_dedup(cfg);
        if (split_cmd->parsed()) return cmd_split(cfg);
        if (stats->parsed()) return cmd_stats(cfg);
        if (info->parsed()) return cmd_embed_info(vec_file, cfg);
        if (train_cmd->parsed()) return cmd_train(cfg);
        if (grid->parsed()) return cmd_grid(cfg);
        if (eval->parsed()) return cmd_eval(cfg);
        if (curve->parsed()) return cmd_curve(cfg);
    } catch (const std::exception& e) {
        std::cerr << "regcore: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
