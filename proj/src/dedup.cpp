#include "regcore/dedup.hpp"

#include <ostream>
#include <stdexcept>

#include "regcore/text.hpp"

namespace regcore {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = kFnvOffset;
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

}  // namespace

void DedupConfig::validate() const {
    if (n < 1) throw std::invalid_argument("dedup: n-gram length must be >= 1");
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw std::invalid_argument("dedup: threshold must lie in [0, 1]");
    }
}

std::set<Ngram> shingles(const std::vector<std::string>& tokens, std::size_t n) {
    std::set<Ngram> out;
    if (n == 0 || tokens.size() < n) return out;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        out.emplace(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                    tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    }
    return out;
}

std::unordered_set<std::uint64_t> shingle_hashes(std::string_view text, std::size_t n) {
    std::unordered_set<std::uint64_t> out;
    auto tokens = whitespace_tokens(text);
    if (n == 0 || tokens.size() < n) return out;
    std::vector<std::uint64_t> token_hash(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) token_hash[i] = fnv1a(tokens[i]);
    out.reserve(tokens.size() - n + 1);
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        // Order-sensitive combination of the window's token hashes.
        std::uint64_t h = kFnvOffset ^ n;
        for (std::size_t j = 0; j < n; ++j) h = mix(h ^ token_hash[i + j]) + j;
        out.insert(h);
    }
    return out;
}

double overlap_ratio(const std::unordered_set<std::uint64_t>& doc,
                     const std::unordered_set<std::uint64_t>& seen) {
    if (doc.empty()) return 0.0;
    std::size_t hits = 0;
    for (auto h : doc) hits += seen.count(h);
    return static_cast<double>(hits) / static_cast<double>(doc.size());
}

DedupResult deduplicate(const Corpus& corpus, const DedupConfig& config) {
    config.validate();
    DedupResult result;
    result.kept.language = corpus.language;
    std::unordered_set<std::uint64_t> seen;
    for (const auto& doc : corpus.documents) {
        auto own = shingle_hashes(doc.text, config.n);
        double r = overlap_ratio(own, seen);
        if (!own.empty() && r >= config.threshold) {
            result.removed.push_back({doc.id, r});
            continue;
        }
        seen.insert(own.begin(), own.end());
        result.kept.documents.push_back(doc);
    }
    return result;
}

void write_removal_log(std::ostream& out, const std::vector<Removal>& removed) {
    for (const auto& r : removed) out << r.id << '\t' << r.ratio << '\n';
}

}  // namespace regcore
