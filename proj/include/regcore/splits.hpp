#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "regcore/corpus.hpp"

namespace regcore {

enum class Part : std::uint8_t { Train = 0, Dev = 1, Test = 2 };
std::string_view part_name(Part p);

class SplitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Integer weights for train/dev/test, e.g. {50, 20, 30}. Integer weights
/// keep the apportionment exact.
struct SplitRatios {
    std::array<std::uint32_t, 3> weights{50, 20, 30};

    std::uint64_t total() const { return std::uint64_t{weights[0]} + weights[1] + weights[2]; }
    double fraction(Part p) const;
    void validate() const;

    /// Parses "50,20,30" (any positive integers) or "0.5,0.2,0.3".
    static SplitRatios parse(const std::string& text);
};

struct SplitAssignment {
    std::map<std::string, Part> part_of;
    std::uint64_t seed = 0;
    SplitRatios ratios;

    std::size_t count(Part p) const;
};

struct SplitCorpora {
    Corpus train;
    Corpus dev;
    Corpus test;
};

/// Largest-remainder apportionment of `n` seats over `weights`; remainder
/// ties go to the lower index.
std::vector<std::size_t> largest_remainder(std::size_t n, const std::vector<std::uint64_t>& weights);

/// Stratification key: the document's full label combination ("∅" for none).
std::string stratum_key(const Document& doc);

/**
 * @brief Deterministic stratified train/dev/test split.
 *
 * Documents are grouped by exact label combination. Each stratum is shuffled
 * with the seeded generator (strata visited in key order) and apportioned by
 * largest remainder. A stratum of one document goes to train; a stratum of
 * two goes one to train, one to test.
 */
SplitAssignment stratified_split(const Corpus& corpus, const SplitRatios& ratios, std::uint64_t seed);

/// The three parts, each in original corpus order.
SplitCorpora apply_split(const Corpus& corpus, const SplitAssignment& assignment);

/// Stratified, seeded subsample of the train part (corpus order preserved).
/// Throws SplitError when `size` exceeds the train part.
Corpus subsample_train(const SplitAssignment& assignment, const Corpus& corpus, std::size_t size,
                       std::uint64_t seed);

/// Same as above for an already materialized train corpus.
Corpus stratified_subsample(const Corpus& train, std::size_t size, std::uint64_t seed);

/// `id<TAB>part` per line, in corpus order.
void write_assignment(std::ostream& out, const Corpus& corpus, const SplitAssignment& assignment);

}  // namespace regcore
