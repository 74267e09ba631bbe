#include "regcore/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "regcore/text.hpp"

namespace regcore {

EmbeddingTable::EmbeddingTable(std::string language, std::size_t dim)
    : language_(std::move(language)), dim_(dim), matrix_(2 * dim, 0.0f) {}

bool EmbeddingTable::add(const std::string& word, std::span<const float> vec) {
    if (vec.size() != dim_) {
        throw EmbeddingError("vector for '" + word + "' has " + std::to_string(vec.size()) +
                             " components, expected " + std::to_string(dim_));
    }
    auto [it, inserted] = index_.emplace(word, static_cast<std::uint32_t>(rows()));
    if (!inserted) {
        ++duplicates_;
        return false;
    }
    words_.push_back(word);
    matrix_.insert(matrix_.end(), vec.begin(), vec.end());
    return true;
}

std::uint32_t EmbeddingTable::lookup(const std::string& word) const {
    auto it = index_.find(word);
    return it == index_.end() ? kUnkIndex : it->second;
}

std::uint64_t EmbeddingTable::checksum() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& w : words_) {
        feed(w.data(), w.size());
        feed("\n", 1);
    }
    for (float v : matrix_) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        feed(&bits, sizeof bits);
    }
    return h;
}

namespace {

std::vector<std::string_view> space_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

bool parse_unsigned(std::string_view s, std::size_t& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

EmbeddingTable load_embeddings(std::istream& in, const EmbeddingLoadOptions& options) {
    std::size_t dim = options.expected_dim;
    EmbeddingTable table;
    bool have_table = false;
    std::vector<float> vec;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto fields = space_fields(line);
        if (fields.empty()) continue;

        if (line_no == 1 && fields.size() == 2) {
            std::size_t count = 0;
            std::size_t header_dim = 0;
            if (parse_unsigned(fields[0], count) && parse_unsigned(fields[1], header_dim)) {
                if (dim != 0 && header_dim != dim) {
                    throw EmbeddingError("line 1: header declares dimension " + std::to_string(header_dim) +
                                         ", expected " + std::to_string(dim));
                }
                dim = header_dim;
                continue;
            }
        }
        if (dim == 0) dim = fields.size() - 1;
        if (!have_table) {
            if (dim == 0) throw EmbeddingError("line " + std::to_string(line_no) + ": vector has no components");
            table = EmbeddingTable(options.language, dim);
            have_table = true;
        }
        if (fields.size() != dim + 1) {
            throw EmbeddingError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                                 " components, found " + std::to_string(fields.size() - 1));
        }
        vec.resize(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            auto f = fields[k + 1];
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), vec[k]);
            if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(vec[k])) {
                throw EmbeddingError("line " + std::to_string(line_no) + ": non-numeric component '" +
                                     std::string(f) + "'");
            }
        }
        table.add(std::string(fields[0]), vec);
        if (options.max_words && table.vocab_size() >= options.max_words) break;
    }
    if (!have_table) {
        if (dim == 0) throw EmbeddingError("empty vector file and no expected dimension");
        table = EmbeddingTable(options.language, dim);
    }
    return table;
}

EmbeddingTable load_embeddings_file(const std::string& path, const EmbeddingLoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw EmbeddingError("cannot open vector file " + path);
    return load_embeddings(in, options);
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
    out << table.vocab_size() << ' ' << table.dim() << '\n';
    char buf[32];
    for (std::size_t w = 0; w < table.vocab_size(); ++w) {
        out << table.words()[w];
        for (float v : table.row(static_cast<std::uint32_t>(w + 2))) {
            auto res = std::to_chars(buf, buf + sizeof buf, v);
            out << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        }
        out << '\n';
    }
}

EncodedDoc encode(const std::vector<std::string>& tokens, const EmbeddingTable& table, std::size_t max_len) {
    if (max_len == 0) throw EmbeddingError("encode: max_len must be >= 1");
    EncodedDoc doc;
    doc.original_length = tokens.size();
    auto n = std::min(tokens.size(), max_len);
    doc.indices.reserve(n);
    for (std::size_t i = 0; i < n; ++i) doc.indices.push_back(table.lookup(tokens[i]));
    return doc;
}

std::vector<EncodedDoc> encode_corpus(const Corpus& corpus, const EmbeddingTable& table, std::size_t max_len) {
    std::vector<EncodedDoc> out;
    out.reserve(corpus.size());
    for (const auto& doc : corpus.documents) out.push_back(encode(tokenize(doc.text), table, max_len));
    return out;
}

}  // namespace regcore
