#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace styloscope {

/// Penn Treebank part-of-speech tags plus a single PUNCT tag that replaces the
/// treebank punctuation classes.
enum class Tag : std::uint8_t {
    CC, CD, DT, EX, FW, IN, JJ, JJR, JJS, LS, MD, NN, NNS, NNP, NNPS, PDT, POS,
    PRP, PRPS, RB, RBR, RBS, RP, SYM, TO, UH, VB, VBD, VBG, VBN, VBP, VBZ, WDT,
    WP, WPS, WRB, PUNCT
};

inline constexpr std::size_t k_tag_count = static_cast<std::size_t>(Tag::PUNCT) + 1;

inline constexpr std::array<std::string_view, k_tag_count> k_tag_names{
    "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN",
    "NNS", "NNP", "NNPS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP",
    "SYM", "TO", "UH", "VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "WDT", "WP",
    "WP$", "WRB", "PUNCT"};

constexpr std::string_view to_string(Tag tag) {
    return k_tag_names[static_cast<std::size_t>(tag)];
}

constexpr std::optional<Tag> parse_tag(std::string_view name) {
    for (std::size_t i = 0; i < k_tag_count; ++i) {
        if (k_tag_names[i] == name) return static_cast<Tag>(i);
    }
    return std::nullopt;
}

constexpr bool is_noun(Tag t) {
    return t == Tag::NN || t == Tag::NNS || t == Tag::NNP || t == Tag::NNPS;
}
constexpr bool is_common_noun(Tag t) { return t == Tag::NN || t == Tag::NNS; }
constexpr bool is_verb(Tag t) {
    return t == Tag::VB || t == Tag::VBD || t == Tag::VBG || t == Tag::VBN ||
           t == Tag::VBP || t == Tag::VBZ;
}
constexpr bool is_adjective(Tag t) {
    return t == Tag::JJ || t == Tag::JJR || t == Tag::JJS;
}
constexpr bool is_adverb(Tag t) {
    return t == Tag::RB || t == Tag::RBR || t == Tag::RBS;
}
/// Finite verb forms; modals count as finite.
constexpr bool is_finite_verb(Tag t) {
    return t == Tag::VBD || t == Tag::VBP || t == Tag::VBZ || t == Tag::MD;
}

}  // namespace styloscope
