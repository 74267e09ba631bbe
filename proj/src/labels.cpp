#include "regcore/labels.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "regcore/text.hpp"

namespace regcore {

// Generated from data/taxonomy.tsv at configure time.
extern const char* const kTaxonomyTsv;

namespace {

struct RegisterInfo {
    std::string_view code;
    std::string_view name;
};

constexpr std::array<RegisterInfo, kNumRegisters> kRegisterInfo = {{
    {"NA", "Narrative"},
    {"IN", "Informational description"},
    {"OP", "Opinion"},
    {"ID", "Interactive discussion"},
    {"HI", "How-to/Instructions"},
    {"IP", "Informational persuasion"},
    {"LY", "Lyrical"},
    {"SP", "Spoken"},
}};

}  // namespace

std::string_view register_code(Register r) { return kRegisterInfo[index_of(r)].code; }
std::string_view register_name(Register r) { return kRegisterInfo[index_of(r)].name; }

std::optional<Register> register_from_code(std::string_view code) {
    for (std::size_t i = 0; i < kNumRegisters; ++i) {
        if (kRegisterInfo[i].code == code) return static_cast<Register>(i);
    }
    return std::nullopt;
}

std::vector<Register> LabelSet::members() const {
    std::vector<Register> out;
    for (Register r : kAllRegisters) {
        if (contains(r)) out.push_back(r);
    }
    return out;
}

std::string LabelSet::to_string() const {
    std::string out;
    for (Register r : kAllRegisters) {
        if (!contains(r)) continue;
        if (!out.empty()) out += ' ';
        out += register_code(r);
    }
    return out;
}

std::string LabelSet::key() const { return empty() ? std::string("∅") : to_string(); }

std::ostream& operator<<(std::ostream& os, LabelSet s) { return os << '{' << s.to_string() << '}'; }

const Taxonomy& Taxonomy::core() {
    static const Taxonomy instance = [] {
        std::istringstream in(kTaxonomyTsv);
        return Taxonomy::load(in);
    }();
    return instance;
}

Taxonomy Taxonomy::load(std::istream& in) {
    Taxonomy t;
    std::size_t mains_seen = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto fields = split(line, '\t');
        if (fields.size() != 4) {
            throw LabelError("taxonomy line " + std::to_string(line_no) + ": expected 4 fields");
        }
        auto main = register_from_code(fields[2]);
        if (!main) {
            throw LabelError("taxonomy line " + std::to_string(line_no) +
                             ": unknown main register '" + std::string(fields[2]) + "'");
        }
        if (fields[0] == "main") {
            if (fields[1] != fields[2] || index_of(*main) != mains_seen) {
                throw LabelError("taxonomy line " + std::to_string(line_no) +
                                 ": main registers must appear once, in canonical order");
            }
            ++mains_seen;
            t.lookup_.emplace(std::string(fields[1]), *main);
        } else if (fields[0] == "sub") {
            std::string code(fields[1]);
            if (register_from_code(code) || !t.lookup_.emplace(code, *main).second) {
                throw LabelError("taxonomy line " + std::to_string(line_no) +
                                 ": duplicate register code '" + code + "'");
            }
            t.subs_.push_back({std::move(code), *main, std::string(fields[3])});
        } else {
            throw LabelError("taxonomy line " + std::to_string(line_no) + ": unknown kind '" +
                             std::string(fields[0]) + "'");
        }
    }
    if (mains_seen != kNumRegisters) {
        throw LabelError("taxonomy must list exactly 8 main registers, found " +
                         std::to_string(mains_seen));
    }
    return t;
}

Taxonomy Taxonomy::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LabelError("cannot open taxonomy file " + path);
    return load(in);
}

std::optional<Register> Taxonomy::main_of(std::string_view code) const {
    auto it = lookup_.find(code);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

bool Taxonomy::operator==(const Taxonomy& o) const {
    if (subs_.size() != o.subs_.size() || lookup_ != o.lookup_) return false;
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        if (subs_[i].code != o.subs_[i].code || subs_[i].main != o.subs_[i].main ||
            subs_[i].display_name != o.subs_[i].display_name) {
            return false;
        }
    }
    return true;
}

LabelSet collapse_to_main(const std::vector<std::string>& codes, const Taxonomy& taxonomy) {
    LabelSet out;
    for (const auto& code : codes) {
        auto main = taxonomy.main_of(code);
        if (!main) throw LabelError("unknown register code '" + code + "'");
        out.insert(*main);
    }
    return out;
}

LabelSet parse_label_set(std::string_view text) {
    LabelSet out;
    for (auto tok : whitespace_tokens(text)) {
        auto r = register_from_code(tok);
        if (!r) throw LabelError("unknown register code '" + std::string(tok) + "'");
        out.insert(*r);
    }
    return out;
}

}  // namespace regcore
