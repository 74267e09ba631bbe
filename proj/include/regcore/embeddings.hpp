#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "regcore/corpus.hpp"

namespace regcore {

class EmbeddingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kPadIndex = 0;
inline constexpr std::uint32_t kUnkIndex = 1;
inline constexpr std::size_t kDefaultEmbeddingDim = 300;
inline constexpr std::size_t kDefaultMaxLen = 1000;

/// Frozen word vectors for one language in a shared cross-lingual space.
/// Row 0 is PAD and row 1 is UNK, both all-zero; words start at row 2.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::string language, std::size_t dim);

    /// Appends a word; returns false (and counts a duplicate) when the word
    /// is already present. `vec.size()` must equal dim().
    bool add(const std::string& word, std::span<const float> vec);

    const std::string& language() const { return language_; }
    std::size_t dim() const { return dim_; }
    /// Number of words, excluding PAD and UNK.
    std::size_t vocab_size() const { return words_.size(); }
    /// Total rows including PAD and UNK.
    std::size_t rows() const { return words_.size() + 2; }
    std::size_t duplicates() const { return duplicates_; }

    /// Row index for `word`, or kUnkIndex.
    std::uint32_t lookup(const std::string& word) const;
    std::span<const float> row(std::uint32_t index) const {
        return {matrix_.data() + static_cast<std::size_t>(index) * dim_, dim_};
    }
    const std::vector<std::string>& words() const { return words_; }

    /// FNV-1a over words and the raw float bits of every row.
    std::uint64_t checksum() const;

private:
    std::string language_;
    std::size_t dim_ = 0;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::vector<std::string> words_;
    std::vector<float> matrix_;
    std::size_t duplicates_ = 0;
};

struct EmbeddingLoadOptions {
    std::string language;
    /// 0 infers the dimension from the header or the first row.
    std::size_t expected_dim = kDefaultEmbeddingDim;
    /// 0 loads every row.
    std::size_t max_words = 0;
};

/// Reads the plain-text vector format: optional `<count> <dim>` header, then
/// `word v1 ... vd` per line. Throws EmbeddingError with the line number on a
/// dimension mismatch or a non-numeric component.
EmbeddingTable load_embeddings(std::istream& in, const EmbeddingLoadOptions& options);
EmbeddingTable load_embeddings_file(const std::string& path, const EmbeddingLoadOptions& options);

/// Writes the table (without PAD/UNK) in the same text format, with header.
void write_embeddings(std::ostream& out, const EmbeddingTable& table);

struct EncodedDoc {
    std::vector<std::uint32_t> indices;
    /// Token count before truncation.
    std::size_t original_length = 0;

    std::size_t length() const { return indices.size(); }
};

/// Maps tokens to table rows (OOV -> UNK) keeping the first `max_len`.
EncodedDoc encode(const std::vector<std::string>& tokens, const EmbeddingTable& table, std::size_t max_len);

/// tokenize() + encode() for every document.
std::vector<EncodedDoc> encode_corpus(const Corpus& corpus, const EmbeddingTable& table, std::size_t max_len);

}  // namespace regcore
