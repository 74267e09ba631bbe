#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace regcore {

/// The eight main registers, in canonical order. Every label vector,
/// report row and matrix axis in the toolkit uses this order.
enum class Register : std::uint8_t { NA = 0, IN, OP, ID, HI, IP, LY, SP };

inline constexpr std::size_t kNumRegisters = 8;

inline constexpr std::array<Register, kNumRegisters> kAllRegisters = {
    Register::NA, Register::IN, Register::OP, Register::ID,
    Register::HI, Register::IP, Register::LY, Register::SP};

std::string_view register_code(Register r);
std::string_view register_name(Register r);
std::optional<Register> register_from_code(std::string_view code);

inline std::size_t index_of(Register r) { return static_cast<std::size_t>(r); }

class LabelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * @brief Set of main-register labels attached to one document.
 *
 * Stored as a bitmask in canonical order, so duplicates are impossible and
 * iteration always follows NA, IN, OP, ID, HI, IP, LY, SP.
 */
class LabelSet {
public:
    constexpr LabelSet() = default;
    LabelSet(std::initializer_list<Register> regs) {
        for (Register r : regs) insert(r);
    }

    static constexpr LabelSet from_bits(std::uint8_t bits) {
        LabelSet s;
        s.bits_ = bits;
        return s;
    }

    void insert(Register r) { bits_ |= bit(r); }
    void erase(Register r) { bits_ &= static_cast<std::uint8_t>(~bit(r)); }
    bool contains(Register r) const { return (bits_ & bit(r)) != 0; }

    std::size_t size() const { return static_cast<std::size_t>(__builtin_popcount(bits_)); }
    bool empty() const { return bits_ == 0; }
    bool is_hybrid() const { return size() >= 2; }

    std::uint8_t bits() const { return bits_; }
    std::vector<Register> members() const;

    LabelSet operator&(LabelSet o) const { return from_bits(bits_ & o.bits_); }
    LabelSet operator|(LabelSet o) const { return from_bits(bits_ | o.bits_); }
    bool operator==(const LabelSet&) const = default;

    /// Codes joined by single spaces in canonical order ("" when empty).
    std::string to_string() const;
    /// Stratification / display key: like to_string(), but "∅" for the empty set.
    std::string key() const;

private:
    static constexpr std::uint8_t bit(Register r) {
        return static_cast<std::uint8_t>(1u << static_cast<unsigned>(r));
    }
    std::uint8_t bits_ = 0;
};

std::ostream& operator<<(std::ostream& os, LabelSet s);

/// Register hierarchy: the 8 main registers and their sub-registers.
/// Sub-register codes are qualified with their main code, e.g. "NA.news_report".
class Taxonomy {
public:
    struct SubRegister {
        std::string code;
        Register main;
        std::string display_name;
    };

    /// The CORE hierarchy compiled into the library.
    static const Taxonomy& core();

    /// Reads the taxonomy data file (see data/taxonomy.tsv).
    static Taxonomy load(std::istream& in);
    static Taxonomy load_file(const std::string& path);

    const std::vector<SubRegister>& subs() const { return subs_; }
    std::optional<Register> main_of(std::string_view code) const;
    bool knows(std::string_view code) const { return main_of(code).has_value(); }

    bool operator==(const Taxonomy& o) const;

private:
    std::vector<SubRegister> subs_;
    std::map<std::string, Register, std::less<>> lookup_;
};

/// Replaces every sub-register code with its main register and
/// deduplicates. Throws LabelError naming the first unknown code.
LabelSet collapse_to_main(const std::vector<std::string>& codes,
                          const Taxonomy& taxonomy = Taxonomy::core());

/// Parses space-separated main-register codes ("NA OP"); strict, mains only.
LabelSet parse_label_set(std::string_view text);

}  // namespace regcore
