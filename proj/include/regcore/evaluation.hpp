#pragma once

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "regcore/labels.hpp"

namespace regcore {

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pooled label counts over aligned gold/predicted label sets.
struct LabelCounts {
    std::size_t tp = 0;
    std::size_t predicted = 0;  // sum of |pred_i|
    std::size_t gold = 0;       // sum of |gold_i|

    std::size_t fp() const { return predicted - tp; }
    std::size_t fn() const { return gold - tp; }
    double precision() const;
    double recall() const;
    /// 2TP / (|pred| + |gold|), 1.0 when both are zero.
    double f1() const;
};

LabelCounts count_labels(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred);

/// Micro-averaged multi-label F1. Throws EvalError on length mismatch.
double micro_f1(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred);

struct ClassScore {
    std::size_t tp = 0;
    std::size_t predicted = 0;
    std::size_t support = 0;  // gold occurrences
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    /// False when the class appears in neither gold nor predictions. Such a
    /// class reports F1 0 and is left out of the macro average.
    bool defined() const { return support + predicted > 0; }
};

using PerClassReport = std::array<ClassScore, kNumRegisters>;

PerClassReport per_class_f1(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred);

struct EvalReport {
    double micro_f1 = 0.0;
    double micro_precision = 0.0;
    double micro_recall = 0.0;
    double macro_f1 = 0.0;
    PerClassReport per_class{};
    std::size_t n_documents = 0;
};

EvalReport evaluate(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred);

/// Confusion-matrix classes: the 8 registers, then HYB and ∅.
inline constexpr std::size_t kNumConfusionClasses = 10;
inline constexpr std::size_t kHybridClass = 8;
inline constexpr std::size_t kEmptyClass = 9;

std::size_t collapse_class(LabelSet labels);
std::string_view confusion_class_name(std::size_t cls);

struct ConfusionMatrix {
    using Counts = std::array<std::array<std::size_t, kNumConfusionClasses>, kNumConfusionClasses>;
    using Proportions = std::array<std::array<double, kNumConfusionClasses>, kNumConfusionClasses>;

    /// counts[observed][predicted]
    Counts counts{};
    /// Row-normalized counts; all-zero rows stay zero.
    Proportions proportions{};

    std::size_t row_total(std::size_t observed) const;
};

ConfusionMatrix confusion(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation, 0 for a single value
};

/// Mean and sample (N-1) standard deviation. Throws EvalError when empty.
MeanStd mean_std(const std::vector<double>& values);

struct RunAggregate {
    std::size_t runs = 0;
    MeanStd micro_f1;
    MeanStd micro_precision;
    MeanStd micro_recall;
    MeanStd macro_f1;
    std::array<MeanStd, kNumRegisters> class_f1{};
    /// Whether each class was defined in at least one run.
    std::array<bool, kNumRegisters> class_defined{};
};

RunAggregate aggregate_runs(const std::vector<EvalReport>& reports);

/// "64.03" style percentage with two decimals.
std::string percent(double fraction);

void write_report_text(std::ostream& out, const EvalReport& report);
void write_report_tsv(std::ostream& out, const EvalReport& report);
void write_aggregate_text(std::ostream& out, const RunAggregate& agg);
void write_aggregate_tsv(std::ostream& out, const RunAggregate& agg);
/// Fixed class order NA IN OP ID HI IP LY SP HYB ∅; counts then proportions.
void write_confusion_tsv(std::ostream& out, const ConfusionMatrix& matrix);

}  // namespace regcore
