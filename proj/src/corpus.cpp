#include "regcore/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "regcore/evaluation.hpp"
#include "regcore/text.hpp"

namespace regcore {

bool is_supported_language(const std::string& lang) {
    const auto& langs = supported_languages();
    return std::find(langs.begin(), langs.end(), lang) != langs.end();
}

std::vector<std::string> Document::tokens() const {
    std::vector<std::string> out;
    for (auto t : whitespace_tokens(text)) out.emplace_back(t);
    return out;
}

Corpus parse_corpus(std::istream& in, const ParseOptions& options) {
    if (!is_supported_language(options.language)) {
        throw CorpusError("unsupported language '" + options.language + "'");
    }
    const Taxonomy& taxonomy = options.taxonomy ? *options.taxonomy : Taxonomy::core();

    Corpus corpus;
    corpus.language = options.language;
    std::unordered_set<std::string> seen_ids;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();

        auto fields = split(line, '\t');
        if (fields.size() != 2) {
            throw ParseError(line_no, "expected 2 tab-separated fields, found " +
                                          std::to_string(fields.size()));
        }

        Document doc;
        doc.language = options.language;
        doc.text = std::string(fields[1]);
        for (auto raw : whitespace_tokens(fields[0])) {
            std::string code(raw);
            std::optional<std::vector<std::string>> mapped;
            if (options.adapter) mapped = options.adapter(code);
            if (mapped) {
                doc.codes.insert(doc.codes.end(), mapped->begin(), mapped->end());
            } else {
                doc.codes.push_back(std::move(code));
            }
        }
        try {
            doc.labels = collapse_to_main(doc.codes, taxonomy);
        } catch (const LabelError& e) {
            throw LabelError("line " + std::to_string(line_no) + ": " + e.what());
        }

        if (options.ids) {
            std::string id;
            if (!std::getline(*options.ids, id)) {
                throw ParseError(line_no, "id file has fewer lines than the corpus");
            }
            if (!id.empty() && id.back() == '\r') id.pop_back();
            doc.id = std::move(id);
        } else {
            doc.id = options.language + "-" + std::to_string(line_no);
        }
        if (!seen_ids.insert(doc.id).second) {
            throw ParseError(line_no, "duplicate document id '" + doc.id + "'");
        }
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

Corpus read_corpus_file(const std::string& path, const std::string& language,
                        const LabelAdapter& adapter) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorpusError("cannot open corpus file " + path);
    std::ifstream ids(path + ".ids", std::ios::binary);
    ParseOptions opts;
    opts.language = language;
    opts.adapter = adapter;
    if (ids) opts.ids = &ids;
    return parse_corpus(in, opts);
}

void write_corpus(const Corpus& corpus, std::ostream& out, std::ostream* ids) {
    for (const auto& doc : corpus.documents) {
        if (doc.text.find_first_of("\t\n") != std::string::npos) {
            throw CorpusError("document " + doc.id + ": text contains a tab or newline");
        }
        for (std::size_t i = 0; i < doc.codes.size(); ++i) {
            if (i) out << ' ';
            out << doc.codes[i];
        }
        out << '\t' << doc.text << '\n';
        if (ids) *ids << doc.id << '\n';
    }
}

void write_corpus_file(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    std::ofstream ids(path + ".ids", std::ios::binary);
    if (!out || !ids) throw CorpusError("cannot write corpus file " + path);
    write_corpus(corpus, out, &ids);
}

LabelAdapter load_label_aliases(std::istream& in) {
    std::map<std::string, std::vector<std::string>> table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto fields = split(line, '\t');
        if (fields.size() != 2) throw ParseError(line_no, "alias line needs raw<TAB>codes");
        std::vector<std::string> codes;
        for (auto c : whitespace_tokens(fields[1])) codes.emplace_back(c);
        table[std::string(fields[0])] = std::move(codes);
    }
    return [table = std::move(table)](const std::string& raw)
               -> std::optional<std::vector<std::string>> {
        auto it = table.find(raw);
        if (it == table.end()) return std::nullopt;
        return it->second;
    };
}

std::string_view bucket_name(Bucket b) {
    switch (b) {
        case Bucket::Empty: return "Empty";
        case Bucket::Hybrids: return "Hybrids";
        default: return register_code(static_cast<Register>(b));
    }
}

Bucket bucket_of(LabelSet labels) {
    if (labels.empty()) return Bucket::Empty;
    if (labels.is_hybrid()) return Bucket::Hybrids;
    return static_cast<Bucket>(index_of(labels.members().front()));
}

namespace {

StatsReport::Row summarize(const std::vector<double>& lengths, std::size_t total) {
    StatsReport::Row row;
    row.count = lengths.size();
    row.proportion = total ? static_cast<double>(row.count) / static_cast<double>(total) : 0.0;
    if (lengths.empty()) return row;
    double sum = 0.0;
    for (double x : lengths) sum += x;
    row.mean_length = sum / static_cast<double>(lengths.size());
    double ss = 0.0;
    for (double x : lengths) ss += (x - row.mean_length) * (x - row.mean_length);
    row.std_length = std::sqrt(ss / static_cast<double>(lengths.size()));
    return row;
}

}  // namespace

StatsReport corpus_stats(const Corpus& corpus) {
    if (corpus.empty()) throw CorpusError("corpus_stats: empty corpus");
    std::array<std::vector<double>, kNumBuckets> lengths;
    std::vector<double> all;
    all.reserve(corpus.size());
    for (const auto& doc : corpus.documents) {
        auto n = static_cast<double>(count_whitespace_tokens(doc.text));
        lengths[static_cast<std::size_t>(bucket_of(doc.labels))].push_back(n);
        all.push_back(n);
    }
    StatsReport report;
    report.total = corpus.size();
    for (std::size_t b = 0; b < kNumBuckets; ++b) report.buckets[b] = summarize(lengths[b], report.total);
    report.all = summarize(all, report.total);
    return report;
}

double iaa_f1(const std::vector<LabelSet>& a, const std::vector<LabelSet>& b) {
    if (a.size() != b.size()) {
        throw CorpusError("iaa_f1: annotation lengths differ (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
    }
    return micro_f1(a, b);
}

}  // namespace regcore
