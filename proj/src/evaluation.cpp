#include "regcore/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace regcore {

namespace {

void check_aligned(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred) {
    if (gold.size() != pred.size()) {
        throw EvalError("gold and predictions differ in length (" + std::to_string(gold.size()) +
                        " vs " + std::to_string(pred.size()) + ")");
    }
}

double ratio(std::size_t num, std::size_t den) {
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double LabelCounts::precision() const {
    if (predicted == 0) return gold == 0 ? 1.0 : 0.0;
    return ratio(tp, predicted);
}

double LabelCounts::recall() const {
    if (gold == 0) return predicted == 0 ? 1.0 : 0.0;
    return ratio(tp, gold);
}

double LabelCounts::f1() const {
    if (predicted + gold == 0) return 1.0;
    return ratio(2 * tp, predicted + gold);
}

LabelCounts count_labels(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred) {
    check_aligned(gold, pred);
    LabelCounts c;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        c.tp += (gold[i] & pred[i]).size();
        c.predicted += pred[i].size();
        c.gold += gold[i].size();
    }
    return c;
}

double micro_f1(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred) {
    return count_labels(gold, pred).f1();
}

PerClassReport per_class_f1(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred) {
    check_aligned(gold, pred);
    PerClassReport report{};
    for (std::size_t i = 0; i < gold.size(); ++i) {
        for (Register r : kAllRegisters) {
            auto& s = report[index_of(r)];
            bool g = gold[i].contains(r);
            bool p = pred[i].contains(r);
            s.support += g;
            s.predicted += p;
            s.tp += g && p;
        }
    }
    for (auto& s : report) {
        if (!s.defined()) continue;
        s.precision = s.predicted ? ratio(s.tp, s.predicted) : 0.0;
        s.recall = s.support ? ratio(s.tp, s.support) : 0.0;
        s.f1 = ratio(2 * s.tp, s.predicted + s.support);
    }
    return report;
}

EvalReport evaluate(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred) {
    auto counts = count_labels(gold, pred);
    EvalReport r;
    r.n_documents = gold.size();
    r.micro_f1 = counts.f1();
    r.micro_precision = counts.precision();
    r.micro_recall = counts.recall();
    r.per_class = per_class_f1(gold, pred);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : r.per_class) {
        if (!s.defined()) continue;
        sum += s.f1;
        ++n;
    }
    r.macro_f1 = n ? sum / static_cast<double>(n) : 1.0;
    return r;
}

std::size_t collapse_class(LabelSet labels) {
    if (labels.empty()) return kEmptyClass;
    if (labels.is_hybrid()) return kHybridClass;
    return index_of(labels.members().front());
}

std::string_view confusion_class_name(std::size_t cls) {
    if (cls == kHybridClass) return "HYB";
    if (cls == kEmptyClass) return "∅";
    return register_code(static_cast<Register>(cls));
}

std::size_t ConfusionMatrix::row_total(std::size_t observed) const {
    std::size_t total = 0;
    for (auto c : counts[observed]) total += c;
    return total;
}

ConfusionMatrix confusion(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred) {
    check_aligned(gold, pred);
    ConfusionMatrix m;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        ++m.counts[collapse_class(gold[i])][collapse_class(pred[i])];
    }
    for (std::size_t row = 0; row < kNumConfusionClasses; ++row) {
        auto total = m.row_total(row);
        if (total == 0) continue;
        for (std::size_t col = 0; col < kNumConfusionClasses; ++col) {
            m.proportions[row][col] = ratio(m.counts[row][col], total);
        }
    }
    return m;
}

MeanStd mean_std(const std::vector<double>& values) {
    if (values.empty()) throw EvalError("mean_std: no values");
    MeanStd out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

RunAggregate aggregate_runs(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw EvalError("aggregate_runs: no reports");
    RunAggregate agg;
    agg.runs = reports.size();
    auto collect = [&](auto getter) {
        std::vector<double> v;
        v.reserve(reports.size());
        for (const auto& r : reports) v.push_back(getter(r));
        return mean_std(v);
    };
    agg.micro_f1 = collect([](const EvalReport& r) { return r.micro_f1; });
    agg.micro_precision = collect([](const EvalReport& r) { return r.micro_precision; });
    agg.micro_recall = collect([](const EvalReport& r) { return r.micro_recall; });
    agg.macro_f1 = collect([](const EvalReport& r) { return r.macro_f1; });
    for (std::size_t c = 0; c < kNumRegisters; ++c) {
        agg.class_f1[c] = collect([c](const EvalReport& r) { return r.per_class[c].f1; });
        for (const auto& r : reports) agg.class_defined[c] = agg.class_defined[c] || r.per_class[c].defined();
    }
    return agg;
}

std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
    return buf;
}

void write_report_text(std::ostream& out, const EvalReport& r) {
    out << "documents      " << r.n_documents << '\n'
        << "micro F1       " << percent(r.micro_f1) << " %\n"
        << "micro P / R    " << percent(r.micro_precision) << " / " << percent(r.micro_recall) << " %\n"
        << "macro F1       " << percent(r.macro_f1) << " %\n\n"
        << "class      F1       P        R   support\n";
    for (Register reg : kAllRegisters) {
        const auto& s = r.per_class[index_of(reg)];
        char line[96];
        if (s.defined()) {
            std::snprintf(line, sizeof line, "%-5s %8s %8s %8s %9zu\n", std::string(register_code(reg)).c_str(),
                          percent(s.f1).c_str(), percent(s.precision).c_str(), percent(s.recall).c_str(),
                          s.support);
        } else {
            std::snprintf(line, sizeof line, "%-5s %8s %8s %8s %9zu\n", std::string(register_code(reg)).c_str(),
                          "--", "--", "--", s.support);
        }
        out << line;
    }
}

void write_report_tsv(std::ostream& out, const EvalReport& r) {
    out << "metric\tvalue\n"
        << "documents\t" << r.n_documents << '\n'
        << "micro_f1\t" << r.micro_f1 << '\n'
        << "micro_precision\t" << r.micro_precision << '\n'
        << "micro_recall\t" << r.micro_recall << '\n'
        << "macro_f1\t" << r.macro_f1 << '\n';
    out << "class\tf1\tprecision\trecall\tsupport\tpredicted\ttp\tdefined\n";
    for (Register reg : kAllRegisters) {
        const auto& s = r.per_class[index_of(reg)];
        out << register_code(reg) << '\t' << s.f1 << '\t' << s.precision << '\t' << s.recall << '\t'
            << s.support << '\t' << s.predicted << '\t' << s.tp << '\t' << (s.defined() ? 1 : 0) << '\n';
    }
}

void write_aggregate_text(std::ostream& out, const RunAggregate& a) {
    out << "runs           " << a.runs << '\n'
        << "micro F1       " << percent(a.micro_f1.mean) << " (" << percent(a.micro_f1.std) << ")\n"
        << "macro F1       " << percent(a.macro_f1.mean) << " (" << percent(a.macro_f1.std) << ")\n";
    for (Register reg : kAllRegisters) {
        auto c = index_of(reg);
        out << register_code(reg) << "             ";
        if (a.class_defined[c]) {
            out << percent(a.class_f1[c].mean) << " (" << percent(a.class_f1[c].std) << ")\n";
        } else {
            out << "--\n";
        }
    }
}

void write_aggregate_tsv(std::ostream& out, const RunAggregate& a) {
    out << "metric\tmean\tstd\truns\n";
    auto row = [&](std::string_view name, const MeanStd& m) {
        out << name << '\t' << m.mean << '\t' << m.std << '\t' << a.runs << '\n';
    };
    row("micro_f1", a.micro_f1);
    row("micro_precision", a.micro_precision);
    row("micro_recall", a.micro_recall);
    row("macro_f1", a.macro_f1);
    for (Register reg : kAllRegisters) {
        row("f1_" + std::string(register_code(reg)), a.class_f1[index_of(reg)]);
    }
}

void write_confusion_tsv(std::ostream& out, const ConfusionMatrix& m) {
    auto header = [&](std::string_view corner) {
        out << corner;
        for (std::size_t c = 0; c < kNumConfusionClasses; ++c) out << '\t' << confusion_class_name(c);
        out << '\n';
    };
    header("counts");
    for (std::size_t r = 0; r < kNumConfusionClasses; ++r) {
        out << confusion_class_name(r);
        for (auto v : m.counts[r]) out << '\t' << v;
        out << '\n';
    }
    header("proportions");
    for (std::size_t r = 0; r < kNumConfusionClasses; ++r) {
        out << confusion_class_name(r);
        for (auto v : m.proportions[r]) out << '\t' << v;
        out << '\n';
    }
}

}  // namespace regcore
