#include "regcore/exchange.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "regcore/text.hpp"

namespace regcore {

std::vector<LabelSet> PredictionFile::labels() const {
    std::vector<LabelSet> out(probabilities.size());
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        for (std::size_t l = 0; l < kNumRegisters; ++l) {
            if (probabilities[i][l] >= threshold) out[i].insert(static_cast<Register>(l));
        }
    }
    return out;
}

namespace {

double parse_probability(std::string_view s, std::size_t line_no) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError(line_no, "non-numeric probability '" + std::string(s) + "'");
    }
    if (!(v >= 0.0 && v <= 1.0)) throw ParseError(line_no, "probability outside [0, 1]");
    return v;
}

}  // namespace

PredictionFile read_predictions(std::istream& in) {
    PredictionFile file;
    bool have_labels = false;
    bool have_threshold = false;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            auto fields = whitespace_tokens(line);
            if (fields[0] == "#labels") {
                if (fields.size() != kNumRegisters + 1) throw ParseError(line_no, "#labels needs 8 codes");
                for (std::size_t l = 0; l < kNumRegisters; ++l) {
                    if (fields[l + 1] != register_code(static_cast<Register>(l))) {
                        throw ExchangeError("line " + std::to_string(line_no) +
                                            ": label order must be NA IN OP ID HI IP LY SP");
                    }
                }
                have_labels = true;
            } else if (fields[0] == "#threshold") {
                if (fields.size() != 2) throw ParseError(line_no, "#threshold needs one value");
                file.threshold = parse_probability(fields[1], line_no);
                have_threshold = true;
            }
            continue;
        }
        if (!have_labels || !have_threshold) {
            throw ParseError(line_no, "data row before the #labels and #threshold header lines");
        }
        auto cols = split(line, '\t');
        if (cols.size() != 2) throw ParseError(line_no, "expected id<TAB>probabilities");
        std::string id(cols[0]);
        if (id.empty()) throw ParseError(line_no, "empty document id");
        auto values = whitespace_tokens(cols[1]);
        if (values.size() != kNumRegisters) {
            throw ParseError(line_no, "expected 8 probabilities, found " + std::to_string(values.size()));
        }
        std::array<double, kNumRegisters> row{};
        for (std::size_t l = 0; l < kNumRegisters; ++l) row[l] = parse_probability(values[l], line_no);
        if (!seen.insert(id).second) throw ParseError(line_no, "duplicate id '" + id + "'");
        file.ids.push_back(std::move(id));
        file.probabilities.push_back(row);
    }
    if (!have_labels || !have_threshold) throw ExchangeError("prediction file lacks #labels/#threshold header");
    return file;
}

PredictionFile read_predictions_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ExchangeError("cannot open prediction file " + path);
    return read_predictions(in);
}

void write_predictions(std::ostream& out, const PredictionFile& file) {
    out << "#labels";
    for (Register r : kAllRegisters) out << ' ' << register_code(r);
    char buf[64];
    auto emit = [&](double v) {
        auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
        if (res.ec != std::errc()) {
            res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general);
        }
        out.write(buf, res.ptr - buf);
    };
    out << "\n#threshold ";
    emit(file.threshold);
    out << '\n';
    for (std::size_t i = 0; i < file.ids.size(); ++i) {
        out << file.ids[i] << '\t';
        for (std::size_t l = 0; l < kNumRegisters; ++l) {
            if (l) out << ' ';
            emit(file.probabilities[i][l]);
        }
        out << '\n';
    }
}

void write_predictions_file(const std::string& path, const PredictionFile& file) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ExchangeError("cannot write prediction file " + path);
    write_predictions(out, file);
}

ExternalEvaluation evaluate_external(const PredictionFile& predictions, const Corpus& gold) {
    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < predictions.ids.size(); ++i) row_of.emplace(predictions.ids[i], i);

    std::vector<std::string> missing;
    std::unordered_set<std::string> gold_ids;
    for (const auto& doc : gold.documents) {
        gold_ids.insert(doc.id);
        if (!row_of.count(doc.id)) missing.push_back(doc.id);
    }
    std::vector<std::string> extra;
    for (const auto& id : predictions.ids) {
        if (!gold_ids.count(id)) extra.push_back(id);
    }
    if (!missing.empty() || !extra.empty()) {
        std::string msg = "prediction ids do not cover the gold corpus:";
        std::vector<std::string> all;
        for (const auto& id : missing) {
            msg += " missing " + id;
            all.push_back(id);
        }
        for (const auto& id : extra) {
            msg += " extra " + id;
            all.push_back(id);
        }
        throw ExchangeError(msg, std::move(all));
    }

    auto pred_all = predictions.labels();
    std::vector<LabelSet> gold_labels;
    std::vector<LabelSet> pred_labels;
    for (const auto& doc : gold.documents) {
        gold_labels.push_back(doc.labels);
        pred_labels.push_back(pred_all[row_of.at(doc.id)]);
    }
    return {evaluate(gold_labels, pred_labels), confusion(gold_labels, pred_labels)};
}

}  // namespace regcore
