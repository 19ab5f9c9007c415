#pragma once

// Corpus ingestion: tokenization, a deterministic baseline POS tagger, the
// vertical (pre-tagged) format, and loading of class-organized corpora.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "styloscope/error.hpp"
#include "styloscope/tagset.hpp"
#include "styloscope/utf8.hpp"
#include "styloscope/wordlists.hpp"

namespace styloscope {

struct AnnotatedToken {
    std::string surface;
    Tag pos = Tag::NN;
    std::string lower;
    std::size_t index = 0;

    AnnotatedToken() = default;
    AnnotatedToken(std::string surface_, Tag pos_, std::size_t index_)
        : surface(std::move(surface_)), pos(pos_), lower(utf8::ascii_lower(surface)),
          index(index_) {}

    /// Words are all tokens other than punctuation.
    bool is_word() const { return pos != Tag::PUNCT; }
    friend bool operator==(const AnnotatedToken&, const AnnotatedToken&) = default;
};

using Document = std::vector<AnnotatedToken>;

// ---------------------------------------------------------------------------
// Tokenization

namespace detail {

inline bool is_abbreviation(std::string_view core) {
    static const std::unordered_set<std::string_view> titles{
        "Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "St.", "Jr.", "Sr.", "No.", "etc.", "vs.",
        "Gen.", "Gov.", "Sen.", "Rep.", "Inc.", "Ltd.", "Co."};
    if (titles.contains(core)) return true;
    // Letter-period sequences: U.S., e.g., i.e.
    if (core.size() < 4 || core.size() % 2) return false;
    for (std::size_t i = 0; i < core.size(); i += 2) {
        const char c = core[i];
        const bool letter = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
        if (!letter || core[i + 1] != '.') return false;
    }
    return true;
}

inline void split_clitics(std::string core, std::vector<std::string>& out) {
    const std::string lower = utf8::ascii_lower(core);
    if (lower == "cannot") {
        out.push_back(core.substr(0, 3));
        out.push_back(core.substr(3));
        return;
    }
    if (lower.size() > 3 && lower.ends_with("n't")) {
        // can't -> ca n't, won't -> wo n't (treebank stems)
        out.push_back(core.substr(0, core.size() - 3));
        out.push_back(core.substr(core.size() - 3));
        return;
    }
    for (std::string_view clitic : {"'s", "'re", "'ve", "'ll", "'d", "'m"}) {
        if (lower.size() > clitic.size() && lower.ends_with(clitic)) {
            const std::size_t cut = core.size() - clitic.size();
            out.push_back(core.substr(0, cut));
            out.push_back(core.substr(cut));
            return;
        }
    }
    out.push_back(std::move(core));
}

inline std::string normalize_apostrophes(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        if (text.compare(i, 3, "\xE2\x80\x99") == 0 || text.compare(i, 3, "\xE2\x80\x98") == 0) {
            out += '\'';
            i += 3;
        } else {
            out += text[i++];
        }
    }
    return out;
}

inline void split_chunk(std::string_view chunk, std::vector<std::string>& out) {
    // Leading punctuation, one code point per token. An apostrophe or hash
    // directly before a word is kept ('cause, 'em, #tag).
    std::size_t begin = 0;
    while (begin < chunk.size()) {
        std::size_t len = 0;
        const char32_t cp = utf8::decode(chunk, begin, len);
        if (utf8::is_word_char(cp)) break;
        if ((cp == U'\'' || cp == U'#') && begin + 1 < chunk.size()) {
            std::size_t next_len = 0;
            if (utf8::is_word_char(utf8::decode(chunk, begin + 1, next_len))) break;
        }
        out.emplace_back(chunk.substr(begin, len));
        begin += len;
    }
    if (begin == chunk.size()) return;

    // Trailing punctuation, collected right to left.
    std::size_t end = chunk.size();
    std::vector<std::string> trailing;
    while (end > begin) {
        std::size_t start = end - 1;
        while (start > begin && (static_cast<unsigned char>(chunk[start]) & 0xC0) == 0x80) --start;
        std::size_t len = 0;
        const char32_t cp = utf8::decode(chunk, start, len);
        if (utf8::is_word_char(cp)) break;
        if (cp == U'.' && is_abbreviation(chunk.substr(begin, end - begin))) break;
        trailing.emplace_back(chunk.substr(start, len));
        end = start;
    }

    // Dashes inside a chunk separate words ("so-called" keeps its hyphen).
    std::string_view core = chunk.substr(begin, end - begin);
    std::size_t piece = 0;
    for (std::size_t i = 0; i < core.size();) {
        std::size_t dash_len = 0;
        if (core.compare(i, 3, "\xE2\x80\x94") == 0 || core.compare(i, 3, "\xE2\x80\x93") == 0) {
            dash_len = 3;
        } else if (core.compare(i, 2, "--") == 0) {
            dash_len = 2;
        }
        if (dash_len == 0) {
            ++i;
            continue;
        }
        if (i > piece) split_clitics(std::string(core.substr(piece, i - piece)), out);
        out.emplace_back(core.substr(i, dash_len));
        i += dash_len;
        piece = i;
    }
    if (piece < core.size()) split_clitics(std::string(core.substr(piece)), out);

    std::move(trailing.rbegin(), trailing.rend(), std::back_inserter(out));
}

}  // namespace detail

/// Splits on whitespace, separates leading/trailing punctuation and clitic
/// contractions ("don't" -> "do" "n't"). Curly apostrophes become ASCII.
inline std::vector<std::string> tokenize(std::string_view raw) {
    const std::string text = detail::normalize_apostrophes(raw);
    std::vector<std::string> tokens;
    std::size_t i = 0;
    const auto is_space = [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    };
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        std::size_t j = i;
        while (j < text.size() && !is_space(text[j])) ++j;
        if (j > i) detail::split_chunk(std::string_view(text).substr(i, j - i), tokens);
        i = j;
    }
    return tokens;
}

// ---------------------------------------------------------------------------
// Baseline tagger

/// Lexicon lookup, then suffix rules, then default NN, refined by a single
/// left-to-right pass of local context rules. Deterministic.
class PosTagger {
public:
    explicit PosTagger(const Lexicon& lexicon = Lexicon::builtin()) : lex_(&lexicon) {}

    std::vector<AnnotatedToken> tag(std::span<const std::string> tokens) const {
        const std::size_t n = tokens.size();
        std::vector<Entry> e(n);
        for (std::size_t i = 0; i < n; ++i) {
            e[i].surface = &tokens[i];
            e[i].lower = utf8::ascii_lower(tokens[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            e[i].sentence_start = i == 0 || is_sentence_end(e[i - 1].lower) ||
                                  (e[i - 1].tag == Tag::PUNCT && e[i - 1].sentence_start);
            lexical(e, i);
        }
        for (std::size_t i = 0; i < n; ++i) contextual(e, i);
        std::vector<AnnotatedToken> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.emplace_back(tokens[i], e[i].tag, i);
        return out;
    }

private:
    struct Entry {
        const std::string* surface = nullptr;
        std::string lower;
        Tag tag = Tag::NN;
        const VerbForm* verb = nullptr;  // set while the token is verb-ambiguous
        bool closed = false;
        bool noun_listed = false;
        bool sentence_start = false;
    };

    static bool is_sentence_end(std::string_view lower) {
        return lower == "." || lower == "!" || lower == "?";
    }
    static bool is_be(std::string_view w) {
        return w == "be" || w == "am" || w == "is" || w == "are" || w == "was" || w == "were" ||
               w == "been" || w == "being" || w == "'m" || w == "'re";
    }
    static bool is_have(std::string_view w) {
        return w == "have" || w == "has" || w == "had" || w == "having" || w == "'ve";
    }
    static bool is_get(std::string_view w) {
        return w == "get" || w == "gets" || w == "got" || w == "gotten" || w == "getting";
    }
    static bool is_do(std::string_view w) { return w == "do" || w == "does" || w == "did"; }
    static bool is_subject_pronoun(std::string_view w) {
        return w == "i" || w == "we" || w == "you" || w == "they";
    }
    static bool is_capitalized(const std::string& s) { return !s.empty() && s[0] >= 'A' && s[0] <= 'Z'; }
    static bool is_all_caps(const std::string& s) {
        int letters = 0;
        for (char c : s) {
            if (c >= 'a' && c <= 'z') return false;
            if (c >= 'A' && c <= 'Z') ++letters;
        }
        return letters >= 2;
    }

    void lexical(std::vector<Entry>& e, std::size_t i) const {
        Entry& t = e[i];
        const std::string& w = t.lower;
        if (!utf8::has_word_char(*t.surface)) {
            t.tag = Tag::PUNCT;
            return;
        }
        if (w[0] >= '0' && w[0] <= '9') {
            t.tag = Tag::CD;
            return;
        }
        if (is_all_caps(*t.surface) && w != "i" && w != "ok") {
            t.tag = Tag::NNP;
            return;
        }
        if (auto closed = lex_->closed_class(w)) {
            t.tag = *closed;
            t.closed = true;
            return;
        }
        if (is_capitalized(*t.surface) && !t.sentence_start) {
            t.tag = Tag::NNP;
            return;
        }
        t.noun_listed = lex_->noun_lemma(w).has_value();
        if (const VerbForm* v = lex_->verb_form(w)) {
            t.verb = v;
            t.tag = (v->slots & k_slot_ing)          ? Tag::VBG
                    : (v->slots & k_slot_third)      ? Tag::VBZ
                    : (v->slots & k_slot_base)       ? Tag::VB
                    : (v->slots & k_slot_participle) ? Tag::VBN
                                                     : Tag::VBD;
            return;
        }
        if (lex_->is_known_adjective(w)) {
            t.tag = Tag::JJ;
            return;
        }
        if (t.noun_listed) {
            t.tag = *lex_->noun_lemma(w) == w ? Tag::NN : Tag::NNS;
            return;
        }
        t.tag = suffix_tag(w);
        if (t.tag == Tag::NN && is_capitalized(*t.surface)) t.tag = Tag::NNP;
    }

    Tag suffix_tag(const std::string& w) const {
        const auto ends = [&](std::string_view s) { return w.size() > s.size() + 1 && w.ends_with(s); };
        const auto comparative_of = [&](std::size_t cut) {
            const std::string stem = w.substr(0, w.size() - cut);
            if (lex_->is_known_adjective(stem) || lex_->is_known_adjective(stem + "e")) return true;
            if (stem.size() > 2 && stem[stem.size() - 1] == stem[stem.size() - 2]) {
                return lex_->is_known_adjective(stem.substr(0, stem.size() - 1));
            }
            if (stem.ends_with("i")) return lex_->is_known_adjective(stem.substr(0, stem.size() - 1) + "y");
            return false;
        };
        if (ends("est") && comparative_of(3)) return Tag::JJS;
        if (ends("er") && comparative_of(2)) return Tag::JJR;
        for (std::string_view s : {"tions", "sions", "ments", "nesses", "ities", "ances", "ences",
                                   "ships", "isms", "ists", "ers", "ors"}) {
            if (ends(s)) return Tag::NNS;
        }
        for (std::string_view s : {"tion", "sion", "ment", "ness", "ity", "ance", "ence", "ship",
                                   "ism", "ist", "hood", "dom"}) {
            if (ends(s)) return Tag::NN;
        }
        if (ends("ly")) return Tag::RB;
        if (ends("ing") && w.size() > 5) return Tag::VBG;
        if (ends("ed")) return Tag::VBN;
        for (std::string_view s : {"ous", "ful", "able", "ible", "ive", "ic", "less", "ary", "ish",
                                   "ese", "al", "ant", "ent"}) {
            if (ends(s)) return Tag::JJ;
        }
        if (w.size() > 3 && w.ends_with("s") && !w.ends_with("ss") && !w.ends_with("us") &&
            !w.ends_with("is")) {
            return Tag::NNS;
        }
        return Tag::NN;
    }

    // Previous token, skipping adverbs and negation.
    static std::ptrdiff_t previous_core(const std::vector<Entry>& e, std::size_t i) {
        std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) - 1;
        while (j >= 0 && (is_adverb(e[j].tag) || e[j].lower == "n't")) --j;
        return j;
    }

    void contextual(std::vector<Entry>& e, std::size_t i) const {
        Entry& t = e[i];
        const std::string& w = t.lower;
        const std::size_t n = e.size();
        const Entry* prev = i > 0 ? &e[i - 1] : nullptr;
        const Entry* next = i + 1 < n ? &e[i + 1] : nullptr;
        const std::ptrdiff_t pc = previous_core(e, i);
        const Entry* core = pc >= 0 ? &e[pc] : nullptr;
        const Tag prev_tag = prev ? prev->tag : Tag::PUNCT;
        const Tag next_tag = next ? next->tag : Tag::PUNCT;

        if (w == "that") {
            t.closed = true;
            const bool stance_noun = prev && lex_->noun_in("NSTNC", prev->lower);
            if (prev && (is_verb(prev_tag) || is_adjective(prev_tag) || prev->lower == "so" ||
                         prev->lower == "such" || prev->lower == "now" || prev->lower == "given")) {
                t.tag = Tag::IN;
            } else if (prev && is_noun(prev_tag)) {
                t.tag = stance_noun && !(is_verb(next_tag) || next_tag == Tag::MD) ? Tag::IN : Tag::WDT;
            } else if (is_noun(next_tag) || is_adjective(next_tag) || next_tag == Tag::CD) {
                t.tag = Tag::DT;
            } else if (is_verb(next_tag) || next_tag == Tag::MD) {
                t.tag = Tag::DT;
            } else {
                t.tag = Tag::IN;
            }
            return;
        }
        if (w == "such") {
            t.tag = next && (next->lower == "a" || next->lower == "an") ? Tag::PDT : Tag::JJ;
            return;
        }
        if (w == "her") {
            t.tag = is_noun(next_tag) || is_adjective(next_tag) ? Tag::PRPS : Tag::PRP;
            return;
        }
        if (w == "there" && t.tag == Tag::EX) {
            const bool be_next = next && (is_be(next->lower) || next->lower == "'s" ||
                                          next->lower == "seems" || next->lower == "remains" ||
                                          next_tag == Tag::MD);
            if (!be_next) t.tag = Tag::RB;
            return;
        }
        if (w == "'s") {
            const bool verbal = prev && (prev_tag == Tag::PRP || prev_tag == Tag::EX ||
                                         prev_tag == Tag::WP || prev_tag == Tag::WRB ||
                                         prev->lower == "that" || prev->lower == "there" ||
                                         prev->lower == "here");
            t.tag = verbal ? Tag::VBZ : Tag::POS;
            return;
        }
        if ((w == "up" || w == "down" || w == "out" || w == "off") && t.closed) {
            t.tag = prev && is_verb(prev_tag) ? Tag::RP : Tag::IN;
            if (w == "out" && next && next->lower == "of") t.tag = Tag::IN;
            return;
        }
        if (w == "like" && core && (core->tag == Tag::MD || core->tag == Tag::TO ||
                                    is_do(core->lower) || is_subject_pronoun(core->lower))) {
            t.tag = core->tag == Tag::MD || core->tag == Tag::TO || is_do(core->lower) ? Tag::VB
                                                                                         : Tag::VBP;
            return;
        }
        if (w == "'d") {
            // "we'd known" (had) versus "we'd know" (would)
            std::size_t j = i + 1;
            while (j < n && j < i + 3 && (is_adverb(e[j].tag) || e[j].lower == "n't")) ++j;
            const bool participle = j < n && e[j].verb && (e[j].verb->slots & k_slot_participle) &&
                                    !(e[j].verb->slots & k_slot_base);
            t.tag = participle || (j < n && e[j].lower == "better") ? Tag::VBD : Tag::MD;
            return;
        }
        if ((w == "have" || w == "do" || w == "'ve") && core && (core->tag == Tag::MD || core->tag == Tag::TO)) {
            t.tag = Tag::VB;
            return;
        }
        if (t.closed || t.tag == Tag::PUNCT || t.tag == Tag::CD || t.tag == Tag::NNP) return;

        if (t.verb) {
            t.tag = resolve_verb(e, i, core, prev, next);
            return;
        }
        if (t.tag == Tag::VBN) {  // unknown -ed word
            if (core && (is_be(core->lower) || is_have(core->lower) || is_get(core->lower))) return;
            if (prev && (prev_tag == Tag::DT || prev_tag == Tag::PRPS) && is_noun(next_tag)) {
                t.tag = Tag::JJ;
            } else if (core && (is_noun(core->tag) || core->tag == Tag::PRP || core->tag == Tag::WDT ||
                                core->tag == Tag::WP)) {
                t.tag = Tag::VBD;
            }
            return;
        }
        if (t.tag == Tag::VBG && prev &&
            (prev_tag == Tag::DT || prev_tag == Tag::PRPS || prev_tag == Tag::POS)) {
            t.tag = Tag::NN;
        }
    }

    Tag resolve_verb(const std::vector<Entry>& e, std::size_t i, const Entry* core,
                     const Entry* prev, const Entry* next) const {
        const Entry& t = e[i];
        const unsigned slots = t.verb->slots;
        const Tag prev_tag = prev ? prev->tag : Tag::PUNCT;
        const Tag next_tag = next ? next->tag : Tag::PUNCT;
        const bool after_determiner = prev && (prev_tag == Tag::DT || prev_tag == Tag::PRPS ||
                                               prev_tag == Tag::POS || is_adjective(prev_tag) ||
                                               prev_tag == Tag::CD);
        const bool adjective_capable = lex_->is_known_adjective(t.lower);

        if (slots & k_slot_ing) {
            return after_determiner ? Tag::NN : Tag::VBG;
        }
        if (slots & (k_slot_past | k_slot_participle)) {
            if (core && (is_be(core->lower) || is_have(core->lower) || is_get(core->lower))) {
                return (slots & k_slot_participle) ? Tag::VBN : Tag::VBD;
            }
            if (after_determiner && (is_noun(next_tag) || is_adjective(next_tag))) return Tag::JJ;
            if ((slots & k_slot_past) && core &&
                (is_noun(core->tag) || core->tag == Tag::PRP || core->tag == Tag::WDT ||
                 core->tag == Tag::WP || core->tag == Tag::EX)) {
                return Tag::VBD;
            }
            if (prev && (prev_tag == Tag::CC || prev->lower == ",")) {
                for (std::size_t j = i; j-- > 0;) {
                    if (e[j].tag == Tag::PUNCT && e[j].lower != ",") break;
                    if (e[j].tag == Tag::VBD) return (slots & k_slot_past) ? Tag::VBD : Tag::VBN;
                    if (e[j].tag == Tag::VBN) break;
                }
            }
            if (!(slots & k_slot_participle)) return Tag::VBD;
            return Tag::VBN;
        }
        if (slots & k_slot_third) {
            if (after_determiner || (prev && prev_tag == Tag::IN)) {
                return t.noun_listed || !(slots & k_slot_base) ? Tag::NNS : Tag::VBZ;
            }
            if (core && (is_noun(core->tag) || core->tag == Tag::PRP || core->tag == Tag::WDT ||
                         core->tag == Tag::WP || core->tag == Tag::EX)) {
                return Tag::VBZ;
            }
            return t.noun_listed ? Tag::NNS : Tag::VBZ;
        }
        // Base form.
        if (core && (core->tag == Tag::TO || core->tag == Tag::MD || is_do(core->lower))) {
            return Tag::VB;
        }
        if (after_determiner || (prev && prev_tag == Tag::IN)) {
            return adjective_capable && is_noun(next_tag) ? Tag::JJ : Tag::NN;
        }
        // Inverted auxiliary: "do n't we stop", "can you help".
        if (core && (core->tag == Tag::PRP || is_noun(core->tag))) {
            auto head = static_cast<std::size_t>(core - e.data());
            if (is_noun(core->tag)) {
                // walk back over the rest of the subject noun phrase
                for (int k = 0; k < 4 && head > 0; ++k) {
                    const Tag pt = e[head - 1].tag;
                    if (!(pt == Tag::DT || pt == Tag::PRPS || pt == Tag::CD || is_adjective(pt) || is_noun(pt))) break;
                    --head;
                }
            }
            const std::ptrdiff_t aux = previous_core(e, head);
            if (aux >= 0 && (e[aux].tag == Tag::MD || is_do(e[aux].lower))) return Tag::VB;
        }
        if (core && (is_subject_pronoun(core->lower) || core->tag == Tag::NNS ||
                     core->tag == Tag::WDT || core->tag == Tag::WP)) {
            return Tag::VBP;
        }
        if (t.sentence_start || (prev && prev->lower == "please")) {
            return t.noun_listed && (is_verb(next_tag) || next_tag == Tag::MD) ? Tag::NN : Tag::VB;
        }
        if (adjective_capable) return Tag::JJ;
        if (t.noun_listed) return Tag::NN;
        return Tag::VBP;
    }

    const Lexicon* lex_;
};

/// Tags with the built-in lexicon.
inline std::vector<AnnotatedToken> tag_pos(std::span<const std::string> tokens) {
    static const PosTagger tagger;
    return tagger.tag(tokens);
}

// ---------------------------------------------------------------------------
// Vertical format: "surface<TAB>tag" per line, blank line between documents.

inline std::vector<Document> read_pretagged(std::istream& in, std::string_view source = "<stream>") {
    std::vector<Document> docs;
    Document current;
    std::string line;
    std::size_t line_no = 0;
    const auto fail = [&](const std::string& what) {
        throw InputError(std::string(source) + ":" + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (!current.empty()) docs.push_back(std::move(current));
            current.clear();
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos) fail("expected surface<TAB>tag");
        if (line.find('\t', tab + 1) != std::string::npos) fail("more than one tab");
        std::string surface = line.substr(0, tab);
        if (surface.empty()) fail("empty surface");
        if (surface.find(' ') != std::string::npos) fail("surface contains a space");
        if (!utf8::is_valid(surface)) fail("invalid UTF-8");
        const auto tag = parse_tag(std::string_view(line).substr(tab + 1));
        if (!tag) fail("unknown tag '" + line.substr(tab + 1) + "'");
        const std::size_t index = current.size();
        current.emplace_back(std::move(surface), *tag, index);
    }
    if (!current.empty()) docs.push_back(std::move(current));
    return docs;
}

inline std::vector<Document> read_pretagged(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    return read_pretagged(in, path.string());
}

inline void write_pretagged(std::ostream& out, std::span<const Document> docs) {
    bool first = true;
    for (const Document& doc : docs) {
        if (doc.empty()) continue;
        if (!first) out << '\n';
        first = false;
        for (const AnnotatedToken& t : doc) out << t.surface << '\t' << to_string(t.pos) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Corpus sets

struct CorpusClass {
    std::string label;
    std::vector<Document> documents;
    std::vector<std::string> files;  // source file per document (vertical files may hold several)

    std::size_t token_count() const {
        std::size_t n = 0;
        for (const auto& d : documents) n += d.size();
        return n;
    }
    std::size_t word_count() const {
        std::size_t n = 0;
        for (const auto& d : documents) {
            n += static_cast<std::size_t>(std::count_if(d.begin(), d.end(),
                                                        [](const auto& t) { return t.is_word(); }));
        }
        return n;
    }
};

struct CorpusSet {
    std::vector<CorpusClass> classes;

    /// Throws InputError unless there are >= 2 uniquely labelled, non-empty classes.
    void validate() const {
        if (classes.size() < 2) throw InputError("corpus needs at least 2 classes");
        std::unordered_set<std::string> seen;
        for (const auto& c : classes) {
            if (!seen.insert(c.label).second) throw InputError("duplicate class label: " + c.label);
            if (c.documents.empty() || c.token_count() == 0) {
                throw InputError("empty class: " + c.label);
            }
        }
    }
};

struct CorpusLayout {
    enum class Format { Auto, Raw, Vertical };
    Format format = Format::Auto;
};

/// Reads <root>/<class>/<doc>.txt (raw, tokenized and tagged here) and
/// <doc>.vrt (vertical) files. Classes and documents are ordered by name.
inline CorpusSet load_corpus(const std::filesystem::path& root, const CorpusLayout& layout = {},
                             const PosTagger& tagger = PosTagger()) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw InputError("corpus directory not found: " + root.string());
    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && entry.path().filename().string().front() != '.') {
            class_dirs.push_back(entry.path());
        }
    }
    std::sort(class_dirs.begin(), class_dirs.end());

    CorpusSet corpus;
    for (const auto& dir : class_dirs) {
        CorpusClass cls;
        cls.label = dir.filename().string();
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (!entry.is_regular_file()) continue;
            const auto ext = entry.path().extension();
            const bool raw = ext == ".txt" && layout.format != CorpusLayout::Format::Vertical;
            const bool vertical = ext == ".vrt" && layout.format != CorpusLayout::Format::Raw;
            if (raw || vertical) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end(),
                  [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
        for (const auto& file : files) {
            if (file.extension() == ".vrt") {
                for (auto& doc : read_pretagged(file)) {
                    cls.documents.push_back(std::move(doc));
                    cls.files.push_back(file.filename().string());
                }
                continue;
            }
            std::ifstream in(file, std::ios::binary);
            if (!in) throw InputError("cannot open " + file.string());
            const std::string text{std::istreambuf_iterator<char>(in), {}};
            if (!utf8::is_valid(text)) throw InputError("not valid UTF-8: " + file.string());
            const auto tokens = tokenize(text);
            cls.documents.push_back(tagger.tag(tokens));
            cls.files.push_back(file.filename().string());
        }
        if (cls.documents.empty() || cls.token_count() == 0) {
            throw InputError("empty class: " + cls.label + " (" + dir.string() + ")");
        }
        corpus.classes.push_back(std::move(cls));
    }
    corpus.validate();
    return corpus;
}

}  // namespace styloscope
