#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "regcore/labels.hpp"

namespace regcore {

/// Languages with a register corpus.
inline const std::vector<std::string>& supported_languages() {
    static const std::vector<std::string> langs = {"en", "fi", "fr", "sv"};
    return langs;
}
bool is_supported_language(const std::string& lang);

struct Document {
    std::string id;
    std::string language;
    std::string text;
    /// Register codes exactly as annotated (may include sub-registers).
    std::vector<std::string> codes;
    /// Main-level labels after collapsing `codes`.
    LabelSet labels;

    /// Whitespace tokens of `text`.
    std::vector<std::string> tokens() const;
    bool operator==(const Document&) const = default;
};

struct Corpus {
    std::string language;
    std::vector<Document> documents;

    std::size_t size() const { return documents.size(); }
    bool empty() const { return documents.empty(); }
    bool operator==(const Corpus&) const = default;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class CorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CorpusFormat {
    /// `LABELS<TAB>TEXT`, one document per line.
    LabelsTabText,
};

/// Adapter hook for corpora whose raw label codes differ from the taxonomy
/// codes: maps a raw code to zero or more taxonomy codes. Returning nullopt
/// leaves the code untouched (it is then validated as usual).
using LabelAdapter = std::function<std::optional<std::vector<std::string>>(const std::string&)>;

struct ParseOptions {
    std::string language;
    CorpusFormat format = CorpusFormat::LabelsTabText;
    const Taxonomy* taxonomy = &Taxonomy::core();
    LabelAdapter adapter;
    /// Optional sidecar: one id per line, aligned with the corpus lines.
    std::istream* ids = nullptr;
};

/// Parses a corpus stream. Ids default to `<lang>-<line#>` (1-based).
/// Throws ParseError (wrong field count, with line number) and LabelError
/// (unknown register code, naming it).
Corpus parse_corpus(std::istream& in, const ParseOptions& options);

/// Convenience wrapper: reads `path`, and `path + ".ids"` when present.
Corpus read_corpus_file(const std::string& path, const std::string& language,
                        const LabelAdapter& adapter = {});

/// Writes the `LABELS<TAB>TEXT` layout; when `ids` is given, writes the
/// sidecar id file too. Rejects text containing tab or newline characters.
void write_corpus(const Corpus& corpus, std::ostream& out, std::ostream* ids = nullptr);
void write_corpus_file(const Corpus& corpus, const std::string& path);

/// Alias table adapter: lines `raw<TAB>code [code ...]`.
LabelAdapter load_label_aliases(std::istream& in);

/// Statistics buckets: the 8 pure single-label classes, Empty, Hybrids.
enum class Bucket : std::uint8_t { NA = 0, IN, OP, ID, HI, IP, LY, SP, Empty, Hybrids };
inline constexpr std::size_t kNumBuckets = 10;
std::string_view bucket_name(Bucket b);
Bucket bucket_of(LabelSet labels);

struct StatsReport {
    struct Row {
        std::size_t count = 0;
        double proportion = 0.0;
        double mean_length = 0.0;
        double std_length = 0.0;  // population standard deviation
    };
    std::size_t total = 0;
    std::array<Row, kNumBuckets> buckets{};
    Row all;
};

/// Per-bucket proportions and whitespace-token length statistics.
/// Throws CorpusError on an empty corpus.
StatsReport corpus_stats(const Corpus& corpus);

/// Micro-F1 agreement between two annotators' label sets (A as reference).
/// Symmetric; 1.0 when neither annotation has any label.
double iaa_f1(const std::vector<LabelSet>& a, const std::vector<LabelSet>& b);

}  // namespace regcore
