#pragma once

// Word-list resources and the verb morphology derived from them.
//
// Every list lives in resources/wordlists/<ID>.txt: one item per line, '#'
// starts a comment, items with spaces are multi-word phrases. The lists are
// compiled into the library (styloscope/wordlist_data.hpp, generated by CMake)
// and can also be loaded from a directory for inspection or experiments.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "styloscope/error.hpp"
#include "styloscope/tagset.hpp"
#include "styloscope/wordlist_data.hpp"

namespace styloscope {

class WordList {
public:
    WordList() = default;

    static WordList parse(std::string id, std::string_view text) {
        WordList list;
        list.id_ = std::move(id);
        std::istringstream in{std::string(text)};
        std::string line;
        while (std::getline(in, line)) {
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            std::istringstream words(line);
            std::vector<std::string> parts;
            for (std::string w; words >> w;) parts.push_back(std::move(w));
            if (parts.empty()) continue;
            if (parts.size() == 1) {
                list.words_.insert(parts.front());
            } else {
                list.phrases_.push_back(std::move(parts));
            }
        }
        // Longest phrases first so match() is leftmost-longest.
        std::stable_sort(list.phrases_.begin(), list.phrases_.end(),
                         [](const auto& a, const auto& b) { return a.size() > b.size(); });
        return list;
    }

    const std::string& id() const { return id_; }
    bool contains(std::string_view word) const { return words_.contains(std::string(word)); }
    const std::unordered_set<std::string>& words() const { return words_; }
    const std::vector<std::vector<std::string>>& phrases() const { return phrases_; }
    std::size_t size() const { return words_.size() + phrases_.size(); }

    /// Length in tokens of the longest item matching the lower-cased sequence
    /// starting at `lowers[pos]`, or 0.
    template <typename LowerAt>
    std::size_t match(LowerAt&& lower_at, std::size_t pos, std::size_t count) const {
        for (const auto& phrase : phrases_) {
            if (pos + phrase.size() > count) continue;
            bool ok = true;
            for (std::size_t k = 0; k < phrase.size() && ok; ++k) {
                ok = lower_at(pos + k) == phrase[k];
            }
            if (ok) return phrase.size();
        }
        return contains(lower_at(pos)) ? 1 : 0;
    }

private:
    std::string id_;
    std::unordered_set<std::string> words_;
    std::vector<std::vector<std::string>> phrases_;
};

/// Inflectional slots a verb form can fill.
enum VerbSlot : unsigned {
    k_slot_base = 1u << 0,
    k_slot_third = 1u << 1,
    k_slot_past = 1u << 2,
    k_slot_participle = 1u << 3,
    k_slot_ing = 1u << 4,
};

struct VerbForm {
    std::string lemma;
    unsigned slots = 0;
};

namespace detail {

inline bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

// Final consonant doubles before -ed/-ing: short CVC stems and stressed-final
// two-syllable stems.
inline bool doubles_final(std::string_view lemma) {
    static const std::unordered_set<std::string_view> stressed{
        "admit", "commit", "compel", "confer", "control", "equip", "occur",
        "omit", "patrol", "permit", "prefer", "refer", "regret", "submit",
        "transfer", "upset", "begin", "forget", "dispel", "propel"};
    if (stressed.contains(lemma)) return true;
    const auto n = lemma.size();
    if (n < 3 || n > 4) return false;
    const char last = lemma[n - 1];
    if (is_vowel(last) || last == 'w' || last == 'x' || last == 'y') return false;
    if (!is_vowel(lemma[n - 2]) || is_vowel(lemma[n - 3])) return false;
    // Exactly one vowel in the stem (stop, plan, beg; not "visit" or "rain").
    return std::count_if(lemma.begin(), lemma.end(), is_vowel) == 1;
}

inline std::string third_person(const std::string& lemma) {
    const auto ends = [&](std::string_view s) { return lemma.ends_with(s); };
    if (ends("s") || ends("x") || ends("z") || ends("ch") || ends("sh") || lemma == "go" ||
        lemma == "do") {
        return lemma + "es";
    }
    if (lemma.size() > 1 && ends("y") && !is_vowel(lemma[lemma.size() - 2])) {
        return lemma.substr(0, lemma.size() - 1) + "ies";
    }
    return lemma + "s";
}

inline std::string regular_past(const std::string& lemma) {
    if (lemma.ends_with("e")) return lemma + "d";
    if (lemma.size() > 1 && lemma.ends_with("y") && !is_vowel(lemma[lemma.size() - 2])) {
        return lemma.substr(0, lemma.size() - 1) + "ied";
    }
    if (doubles_final(lemma)) return lemma + lemma.back() + "ed";
    return lemma + "ed";
}

inline std::string present_participle(const std::string& lemma) {
    if (lemma.ends_with("ie")) return lemma.substr(0, lemma.size() - 2) + "ying";
    if (lemma.ends_with("e") && !lemma.ends_with("ee") && lemma != "be") {
        return lemma.substr(0, lemma.size() - 1) + "ing";
    }
    if (doubles_final(lemma)) return lemma + lemma.back() + "ing";
    return lemma + "ing";
}

}  // namespace detail

/// All word lists plus the tagger's closed-class lexicon and verb morphology.
class Lexicon {
public:
    /// Ids of the lists whose entries are verb lemmas.
    static constexpr std::array<std::string_view, 16> k_verb_lists{
        "ACT", "ASPECT", "CAUSE", "COMM", "EXIST", "MENTAL", "OCCUR", "PRIV",
        "PUBV", "SMP", "SUAV", "VDSR", "VEFRT", "VFCT", "VLIK", "VPROB"};
    static constexpr std::array<std::string_view, 9> k_adjective_lists{
        "JATD", "JEPST", "JEVAL", "JREL", "JSIZE", "JTIME", "JLIK", "JFCT", "QUAN"};
    static constexpr std::array<std::string_view, 9> k_noun_lists{
        "NNABSPROC", "NNCOG", "NNCONC", "NNGRP", "NNHUMAN", "NNPLACE", "NNQUANT",
        "NNTECH", "NSTNC"};

    /// The lists compiled into the library.
    static const Lexicon& builtin() {
        static const Lexicon lexicon = [] {
            std::map<std::string, std::string, std::less<>> sources;
            for (const auto& [id, text] : embedded::k_wordlists) {
                sources.emplace(std::string(id), std::string(text));
            }
            return Lexicon(sources);
        }();
        return lexicon;
    }

    /// Loads every <ID>.txt under `dir`.
    static Lexicon from_directory(const std::filesystem::path& dir) {
        if (!std::filesystem::is_directory(dir)) {
            throw InputError("word-list directory not found: " + dir.string());
        }
        std::map<std::string, std::string, std::less<>> sources;
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            if (entry.path().extension() != ".txt") continue;
            std::ifstream in(entry.path(), std::ios::binary);
            std::ostringstream text;
            text << in.rdbuf();
            sources.emplace(entry.path().stem().string(), text.str());
        }
        return Lexicon(sources);
    }

    const WordList& list(std::string_view id) const {
        auto it = lists_.find(id);
        if (it == lists_.end()) throw Error("unknown word list: " + std::string(id));
        return it->second;
    }
    bool has_list(std::string_view id) const { return lists_.find(id) != lists_.end(); }
    const std::map<std::string, WordList, std::less<>>& lists() const { return lists_; }

    /// Closed-class default tag for a lower-cased word.
    std::optional<Tag> closed_class(std::string_view lower) const {
        auto it = closed_.find(std::string(lower));
        if (it == closed_.end()) return std::nullopt;
        return it->second;
    }

    const VerbForm* verb_form(std::string_view lower) const {
        auto it = verbs_.find(std::string(lower));
        return it == verbs_.end() ? nullptr : &it->second;
    }

    /// Lemma of a known verb form, or the form itself.
    std::string_view verb_lemma(std::string_view lower) const {
        const VerbForm* form = verb_form(lower);
        return form ? std::string_view(form->lemma) : lower;
    }

    bool is_known_adjective(std::string_view lower) const {
        return adjectives_.contains(std::string(lower));
    }

    /// Singular of a listed noun, if `lower` is one of its forms.
    std::optional<std::string> noun_lemma(std::string_view lower) const {
        std::string w(lower);
        if (nouns_.contains(w)) return w;
        if (w.ends_with("ies") && w.size() > 3) {
            std::string s = w.substr(0, w.size() - 3) + "y";
            if (nouns_.contains(s)) return s;
        }
        if (w.ends_with("es") && w.size() > 2) {
            std::string s = w.substr(0, w.size() - 2);
            if (nouns_.contains(s)) return s;
        }
        if (w.ends_with("s") && w.size() > 1) {
            std::string s = w.substr(0, w.size() - 1);
            if (nouns_.contains(s)) return s;
        }
        if (w == "people") return w;
        return std::nullopt;
    }

    /// True when the singular form of `lower` is in list `id`.
    bool noun_in(std::string_view id, std::string_view lower) const {
        const WordList& l = list(id);
        if (l.contains(lower)) return true;
        auto lemma = noun_lemma(lower);
        return lemma && l.contains(*lemma);
    }

private:
    explicit Lexicon(const std::map<std::string, std::string, std::less<>>& sources) {
        for (const auto& [id, text] : sources) lists_.emplace(id, WordList::parse(id, text));
        if (auto it = sources.find("TAGGER_LEXICON"); it != sources.end()) {
            parse_closed_class(it->second);
        }
        if (auto it = sources.find("IRREGULAR_VERBS"); it != sources.end()) {
            parse_irregular(it->second);
        }
        for (auto id : k_verb_lists) {
            if (!has_list(id)) continue;
            for (const auto& lemma : list(id).words()) add_regular_verb(lemma);
        }
        for (auto id : k_adjective_lists) {
            if (!has_list(id)) continue;
            for (const auto& w : list(id).words()) adjectives_.insert(w);
        }
        for (auto id : k_noun_lists) {
            if (!has_list(id)) continue;
            for (const auto& w : list(id).words()) nouns_.insert(w);
        }
    }

    void parse_closed_class(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            std::istringstream fields(line);
            std::string word, tag_name;
            if (!(fields >> word)) continue;
            if (!(fields >> tag_name)) {
                throw InputError("TAGGER_LEXICON line " + std::to_string(line_no) + ": missing tag");
            }
            auto tag = parse_tag(tag_name);
            if (!tag) {
                throw InputError("TAGGER_LEXICON line " + std::to_string(line_no) +
                                 ": unknown tag " + tag_name);
            }
            closed_.emplace(word, *tag);
        }
    }

    void add_form(const std::string& form, const std::string& lemma, unsigned slots) {
        auto [it, inserted] = verbs_.try_emplace(form, VerbForm{lemma, 0});
        if (it->second.lemma == lemma) it->second.slots |= slots;
    }

    void parse_irregular(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            std::istringstream fields(line);
            std::string base, past, participle;
            if (!(fields >> base >> past >> participle)) continue;
            irregular_.insert(base);
            add_form(base, base, k_slot_base);
            add_form(detail::third_person(base), base, k_slot_third);
            add_form(detail::present_participle(base), base, k_slot_ing);
            std::istringstream alternatives(past);
            for (std::string p; std::getline(alternatives, p, '/');) add_form(p, base, k_slot_past);
            add_form(participle, base, k_slot_participle);
        }
    }

    void add_regular_verb(const std::string& lemma) {
        if (irregular_.contains(lemma)) return;
        add_form(lemma, lemma, k_slot_base);
        add_form(detail::third_person(lemma), lemma, k_slot_third);
        add_form(detail::regular_past(lemma), lemma, k_slot_past | k_slot_participle);
        add_form(detail::present_participle(lemma), lemma, k_slot_ing);
    }

    std::map<std::string, WordList, std::less<>> lists_;
    std::unordered_map<std::string, Tag> closed_;
    std::unordered_map<std::string, VerbForm> verbs_;
    std::unordered_set<std::string> irregular_;
    std::unordered_set<std::string> adjectives_;
    std::unordered_set<std::string> nouns_;
};

}  // namespace styloscope
