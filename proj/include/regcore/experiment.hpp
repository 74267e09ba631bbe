#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "regcore/cnn.hpp"
#include "regcore/config.hpp"
#include "regcore/corpus.hpp"
#include "regcore/embeddings.hpp"
#include "regcore/evaluation.hpp"
#include "regcore/splits.hpp"

namespace regcore {

class ExperimentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Mode { Monolingual, CrossLingual };
enum class ModelKind { Cnn, ExternalPredictions };

Mode parse_mode(const std::string& text);
ModelKind parse_model(const std::string& text);
std::string_view mode_name(Mode m);

/// CNN hyperparameter grid. Defaults: kernel {1,2} x lr {1e-4,1e-3,1e-2}
/// x threshold {0.4,0.5,0.6}.
struct GridSpec {
    std::vector<std::size_t> kernels{1, 2};
    std::vector<double> learning_rates{1e-4, 1e-3, 1e-2};
    std::vector<double> thresholds{0.4, 0.5, 0.6};

    std::size_t cell_count() const { return kernels.size() * learning_rates.size() * thresholds.size(); }
    void validate() const;
};

struct GridCell {
    std::size_t kernel = 0;
    double learning_rate = 0.0;
    double threshold = 0.0;
    double dev_f1 = 0.0;
    std::size_t best_epoch = 0;
};

struct GridFailure {
    std::size_t kernel = 0;
    double learning_rate = 0.0;
    double threshold = 0.0;
    std::string error;
};

struct GridResult {
    CnnConfig best;
    /// Successful cells in enumeration order (kernel, then lr, then threshold).
    std::vector<GridCell> cells;
    std::vector<GridFailure> failures;
};

using Trainer = std::function<TrainResult(const CnnConfig&, const LabeledData&, const LabeledData&,
                                          const EmbeddingTable&)>;

/// Trains one model per cell with `base.seed` and keeps the best dev micro-F1.
/// Ties go to fewer epochs at best, then lower learning rate, then smaller
/// kernel, then enumeration order. A failing cell is recorded and skipped;
/// if every cell fails an ExperimentError is thrown.
GridResult grid_search(const GridSpec& grid, const CnnConfig& base, const LabeledData& train_set,
                       const LabeledData& dev_set, const EmbeddingTable& table, const Trainer& trainer = train);

void write_grid_tsv(std::ostream& out, const GridResult& result);

/// Records every corpus and vector file an experiment reads, in order.
class DataAudit {
public:
    struct Entry {
        std::string source;
        std::string language;
        std::string role;  // train, dev, test, vectors
        bool after_training = false;
    };

    void record(std::string source, std::string language, std::string role) {
        entries_.push_back({std::move(source), std::move(language), std::move(role), training_done_});
    }
    void mark_training_done() { training_done_ = true; }

    const std::vector<Entry>& entries() const { return entries_; }
    /// True when some read of `language` data happened before training finished.
    bool read_before_training(const std::string& language) const;

private:
    std::vector<Entry> entries_;
    bool training_done_ = false;
};

/// File locations for one language.
struct LanguagePaths {
    std::string train;
    std::string dev;
    std::string test;
    std::string vectors;
    /// Optional raw-label alias table (see load_label_aliases).
    std::string aliases;
};

/// `<lang>/{train,dev,test}.tsv`, `vectors/wiki.<lang>.align.vec`,
/// `<lang>/labels.map`, all relative to $REGCORE_DATA_ROOT.
LanguagePaths default_paths(const std::string& language);

/// Where an experiment gets its corpora and vectors. Every load is recorded
/// in audit().
class DataSource {
public:
    DataSource() = default;
    DataSource(DataSource&&) = default;
    DataSource& operator=(DataSource&&) = default;
    virtual ~DataSource() = default;
    Corpus corpus(const std::string& language, Part part);
    const EmbeddingTable& table(const std::string& language, std::size_t dim);
    /// Throws ExperimentError listing every missing input.
    virtual void check_available(const std::vector<std::string>& languages, bool need_vectors) const = 0;
    DataAudit& audit() { return audit_; }

protected:
    virtual Corpus load_corpus(const std::string& language, Part part) = 0;
    virtual EmbeddingTable load_table(const std::string& language, std::size_t dim) = 0;
    virtual std::string describe(const std::string& language, const std::string& role) const = 0;

private:
    DataAudit audit_;
    std::map<std::string, std::unique_ptr<EmbeddingTable>> tables_;
};

class FileDataSource : public DataSource {
public:
    explicit FileDataSource(std::map<std::string, LanguagePaths> paths = {}, std::size_t max_vocab = 0)
        : paths_(std::move(paths)), max_vocab_(max_vocab) {}
    void check_available(const std::vector<std::string>& languages, bool need_vectors) const override;
    LanguagePaths paths_for(const std::string& language) const;

protected:
    Corpus load_corpus(const std::string& language, Part part) override;
    EmbeddingTable load_table(const std::string& language, std::size_t dim) override;
    std::string describe(const std::string& language, const std::string& role) const override;

private:
    std::map<std::string, LanguagePaths> paths_;
    std::size_t max_vocab_;
};

/// In-memory corpora and tables (tests, synthetic experiments).
class MemoryDataSource : public DataSource {
public:
    void add(const std::string& language, SplitCorpora parts, EmbeddingTable table);
    void check_available(const std::vector<std::string>& languages, bool need_vectors) const override;

protected:
    Corpus load_corpus(const std::string& language, Part part) override;
    EmbeddingTable load_table(const std::string& language, std::size_t dim) override;
    std::string describe(const std::string& language, const std::string& role) const override;

private:
    std::map<std::string, SplitCorpora> corpora_;
    std::map<std::string, EmbeddingTable> tables_;
};

struct ExperimentSpec {
    Mode mode = Mode::Monolingual;
    std::string train_language = "fi";
    std::string eval_language = "fi";
    ModelKind model = ModelKind::Cnn;
    /// Used as is when `grid` is empty; otherwise the grid's base config.
    CnnConfig config;
    std::optional<GridSpec> grid;
    std::vector<std::uint64_t> seeds{1, 2, 3};
    /// External predictions: `<dir>/{dev,test}.seed<S>.tsv` per seed.
    std::string external_dir;

    void validate() const;
};

struct SeedRun {
    std::uint64_t seed = 0;
    TrainHistory history;
    EvalReport dev;
    EvalReport test;
};

struct ExperimentResult {
    CnnConfig config;
    std::optional<GridResult> grid;
    std::vector<SeedRun> runs;
    RunAggregate dev;
    RunAggregate test;
    /// Test-set confusion matrix of the seed with the best selection score.
    ConfusionMatrix confusion;
    std::uint64_t confusion_seed = 0;
};

/**
 * @brief Monolingual or zero-shot cross-lingual experiment over N seeds.
 *
 * Hyperparameters (grid) and early stopping only ever see the training
 * language's train and dev parts. Evaluation-language data is loaded after
 * all training is finished, then every seed is scored on its dev and test
 * parts. The confusion matrix comes from the seed with the best
 * training-language dev F1.
 */
ExperimentResult run_experiment(const ExperimentSpec& spec, DataSource& data);

/// Learning-curve sizes and repetitions; defaults 100..900 step 100, 6 seeds.
struct CurveSpec {
    std::vector<std::size_t> sizes{100, 200, 300, 400, 500, 600, 700, 800, 900};
    std::size_t seeds_per_size = 6;
    void validate() const;
};

struct CurvePoint {
    std::size_t size = 0;
    MeanStd test_f1;
    std::vector<double> values;
};

struct CurveResult {
    std::vector<CurvePoint> points;
    std::size_t runs_executed = 0;
    /// Zero-shot reference line drawn alongside the curve, when supplied.
    std::optional<double> reference_f1;
};

/// Trains `seeds_per_size` models (seeds 1..n) on stratified subsamples of the
/// evaluation language's train part for each size, with the fixed
/// `spec.config`, and scores them on its test part.
CurveResult learning_curve(const CurveSpec& curve, const ExperimentSpec& spec, DataSource& data,
                           std::optional<double> reference_f1 = std::nullopt);

void write_curve_tsv(std::ostream& out, const CurveResult& result);

/// Writes aggregate, per-seed and confusion reports into `dir`.
void write_experiment_outputs(const std::string& dir, const ExperimentResult& result);

/// Creates `dir` and writes `manifest.json`: command, settings, seeds,
/// version and a checksum of every existing input file.
void write_manifest(const std::string& dir, const std::string& command, const ConfigMap& settings,
                    const std::vector<std::uint64_t>& seeds, const std::vector<std::string>& inputs);

}  // namespace regcore
