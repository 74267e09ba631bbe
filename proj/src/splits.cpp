#include "regcore/splits.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>

#include "regcore/rng.hpp"
#include "regcore/text.hpp"

namespace regcore {

std::string_view part_name(Part p) {
    switch (p) {
        case Part::Train: return "train";
        case Part::Dev: return "dev";
        case Part::Test: return "test";
    }
    return "?";
}

double SplitRatios::fraction(Part p) const {
    return static_cast<double>(weights[static_cast<std::size_t>(p)]) / static_cast<double>(total());
}

void SplitRatios::validate() const {
    for (auto w : weights) {
        if (w == 0) throw SplitError("split ratios must all be positive");
    }
}

SplitRatios SplitRatios::parse(const std::string& text) {
    auto fields = split(text, ',');
    if (fields.size() != 3) throw SplitError("expected three ratios, got '" + text + "'");
    bool decimal = text.find('.') != std::string::npos;
    SplitRatios r;
    double sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        double v = 0.0;
        auto f = fields[i];
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc() || ptr != f.data() + f.size() || !(v > 0.0)) {
            throw SplitError("invalid ratio '" + std::string(f) + "'");
        }
        sum += v;
        double scaled = decimal ? v * 1e6 : v;
        if (std::abs(scaled - std::round(scaled)) > 1e-6 || scaled > 4e9) {
            throw SplitError("ratio '" + std::string(f) + "' is not representable");
        }
        r.weights[i] = static_cast<std::uint32_t>(std::llround(scaled));
    }
    if (decimal && std::abs(sum - 1.0) > 1e-9) throw SplitError("decimal ratios must sum to 1");
    r.validate();
    return r;
}

std::size_t SplitAssignment::count(Part p) const {
    return static_cast<std::size_t>(
        std::count_if(part_of.begin(), part_of.end(), [p](const auto& kv) { return kv.second == p; }));
}

std::vector<std::size_t> largest_remainder(std::size_t n, const std::vector<std::uint64_t>& weights) {
    std::uint64_t total = std::accumulate(weights.begin(), weights.end(), std::uint64_t{0});
    std::vector<std::size_t> seats(weights.size(), 0);
    if (total == 0 || n == 0) return seats;
    std::vector<std::uint64_t> remainder(weights.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        // n * w fits comfortably: n is a document count, w a stratum size or ratio weight.
        std::uint64_t prod = static_cast<std::uint64_t>(n) * weights[i];
        seats[i] = static_cast<std::size_t>(prod / total);
        remainder[i] = prod % total;
        assigned += seats[i];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++seats[order[k]];
    return seats;
}

std::string stratum_key(const Document& doc) { return doc.labels.key(); }

namespace {

std::map<std::string, std::vector<std::size_t>> strata_of(const Corpus& corpus) {
    std::map<std::string, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < corpus.size(); ++i) strata[stratum_key(corpus.documents[i])].push_back(i);
    return strata;
}

}  // namespace

SplitAssignment stratified_split(const Corpus& corpus, const SplitRatios& ratios, std::uint64_t seed) {
    ratios.validate();
    if (corpus.empty()) throw SplitError("cannot split an empty corpus");

    SplitAssignment out;
    out.seed = seed;
    out.ratios = ratios;
    Rng rng(seed);
    const std::vector<std::uint64_t> weights(ratios.weights.begin(), ratios.weights.end());

    for (auto& [key, members] : strata_of(corpus)) {
        shuffle(members, rng);
        std::vector<std::size_t> sizes;
        if (members.size() == 1) {
            sizes = {1, 0, 0};
        } else if (members.size() == 2) {
            sizes = {1, 0, 1};
        } else {
            sizes = largest_remainder(members.size(), weights);
        }
        std::size_t pos = 0;
        for (std::size_t p = 0; p < 3; ++p) {
            for (std::size_t k = 0; k < sizes[p]; ++k, ++pos) {
                out.part_of[corpus.documents[members[pos]].id] = static_cast<Part>(p);
            }
        }
    }
    return out;
}

SplitCorpora apply_split(const Corpus& corpus, const SplitAssignment& assignment) {
    SplitCorpora out;
    out.train.language = out.dev.language = out.test.language = corpus.language;
    for (const auto& doc : corpus.documents) {
        auto it = assignment.part_of.find(doc.id);
        if (it == assignment.part_of.end()) throw SplitError("document " + doc.id + " has no split assignment");
        switch (it->second) {
            case Part::Train: out.train.documents.push_back(doc); break;
            case Part::Dev: out.dev.documents.push_back(doc); break;
            case Part::Test: out.test.documents.push_back(doc); break;
        }
    }
    return out;
}

Corpus stratified_subsample(const Corpus& train, std::size_t size, std::uint64_t seed) {
    if (size > train.size()) {
        throw SplitError("subsample size " + std::to_string(size) + " exceeds train size " +
                         std::to_string(train.size()));
    }
    auto strata = strata_of(train);
    std::vector<std::uint64_t> weights;
    for (const auto& [key, members] : strata) weights.push_back(members.size());
    auto quota = largest_remainder(size, weights);

    Rng rng(seed);
    std::vector<bool> chosen(train.size(), false);
    std::size_t s = 0;
    for (auto& [key, members] : strata) {
        shuffle(members, rng);
        for (std::size_t k = 0; k < quota[s]; ++k) chosen[members[k]] = true;
        ++s;
    }
    Corpus out;
    out.language = train.language;
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (chosen[i]) out.documents.push_back(train.documents[i]);
    }
    return out;
}

Corpus subsample_train(const SplitAssignment& assignment, const Corpus& corpus, std::size_t size,
                       std::uint64_t seed) {
    return stratified_subsample(apply_split(corpus, assignment).train, size, seed);
}

void write_assignment(std::ostream& out, const Corpus& corpus, const SplitAssignment& assignment) {
    for (const auto& doc : corpus.documents) {
        auto it = assignment.part_of.find(doc.id);
        if (it == assignment.part_of.end()) continue;
        out << doc.id << '\t' << part_name(it->second) << '\n';
    }
}

}  // namespace regcore
