#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "regcore/corpus.hpp"

namespace regcore {

struct DedupConfig {
    std::size_t n = 5;
    double threshold = 0.7;

    /// Throws std::invalid_argument unless n >= 1 and 0 <= threshold <= 1.
    void validate() const;
};

struct Removal {
    std::string id;
    double ratio = 0.0;
};

struct DedupResult {
    Corpus kept;
    std::vector<Removal> removed;
};

using Ngram = std::vector<std::string>;

/// All distinct contiguous n-token windows. Empty when tokens.size() < n.
std::set<Ngram> shingles(const std::vector<std::string>& tokens, std::size_t n);

/// 64-bit fingerprints of the distinct n-token windows of `text`
/// (whitespace tokens). Used internally by deduplicate().
std::unordered_set<std::uint64_t> shingle_hashes(std::string_view text, std::size_t n);

/// Fraction of `doc` shingles already in `seen`; 0 when `doc` is empty.
double overlap_ratio(const std::unordered_set<std::uint64_t>& doc,
                     const std::unordered_set<std::uint64_t>& seen);

/**
 * @brief Single-pass n-gram overlap deduplication in corpus order.
 *
 * A document whose shingle overlap with everything kept so far reaches
 * `config.threshold` is removed; otherwise it is kept and its shingles join
 * the seen set. The first occurrence always wins.
 */
DedupResult deduplicate(const Corpus& corpus, const DedupConfig& config = {});

/// Removal log, `id<TAB>ratio` per line.
void write_removal_log(std::ostream& out, const std::vector<Removal>& removed);

}  // namespace regcore
