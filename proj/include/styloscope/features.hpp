#pragma once

// Linguistic feature catalog and extraction.
//
// Each rule is a predicate anchored at a word token that looks at most four
// tokens around the anchor. Counting is a single left-to-right pass per rule:
// a match of length m consumes m tokens, so a rule never counts overlapping
// matches and never counts more than one match per word. Count features are
// reported per `FeatureOptions::per_words` words (1000 by default); the
// statistics Words, AWL, TTR and LDE are reported as-is.

#include <algorithm>
#include <array>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "styloscope/corpus.hpp"
#include "styloscope/csv.hpp"
#include "styloscope/error.hpp"
#include "styloscope/sampler.hpp"
#include "styloscope/wordlists.hpp"

namespace styloscope {

enum class RuleKind { CountPattern, LexicalList, Statistic };

inline std::string_view to_string(RuleKind kind) {
    switch (kind) {
        case RuleKind::CountPattern: return "count-pattern";
        case RuleKind::LexicalList: return "lexical-list";
        case RuleKind::Statistic: return "statistic";
    }
    return "?";
}

enum class Normalization { PerWords, Ratio };

class WindowContext;

/// Returns the number of tokens matched at the anchor (0 = no match).
using Matcher = std::function<std::size_t(const WindowContext&, std::size_t)>;

struct FeatureRule {
    std::string id;
    std::string category;
    RuleKind kind = RuleKind::CountPattern;
    Normalization normalization = Normalization::PerWords;
    std::string description;
    Matcher matcher;  // empty for statistics
};

/// Read-only view of a token window with the lookups the rules share.
class WindowContext {
public:
    WindowContext(std::span<const AnnotatedToken> tokens, const Lexicon& lexicon)
        : tokens_(tokens), lex_(&lexicon), sentence_start_(tokens.size()),
          question_(tokens.size()) {
        bool start = true;
        std::size_t sentence_begin = 0;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            sentence_start_[i] = start && tokens[i].is_word();
            if (tokens[i].is_word()) start = false;
            const auto& w = tokens[i].lower;
            if (w == "." || w == "!" || w == "?") {
                for (std::size_t k = sentence_begin; k <= i; ++k) question_[k] = w == "?";
                sentence_begin = i + 1;
                start = true;
            }
        }
    }

    std::size_t size() const { return tokens_.size(); }
    const Lexicon& lexicon() const { return *lex_; }
    const AnnotatedToken& token(std::size_t i) const { return tokens_[i]; }

    Tag tag(std::ptrdiff_t i) const {
        return in_range(i) ? tokens_[static_cast<std::size_t>(i)].pos : Tag::PUNCT;
    }
    std::string_view lower(std::ptrdiff_t i) const {
        return in_range(i) ? std::string_view(tokens_[static_cast<std::size_t>(i)].lower)
                           : std::string_view();
    }
    bool sentence_start(std::size_t i) const { return sentence_start_[i]; }
    bool in_question(std::size_t i) const { return question_[i]; }

    bool is(std::ptrdiff_t i, std::initializer_list<std::string_view> words) const {
        const auto w = lower(i);
        return std::find(words.begin(), words.end(), w) != words.end();
    }
    bool in(std::ptrdiff_t i, std::string_view list) const {
        return in_range(i) && lex_->list(list).contains(lower(i));
    }
    std::size_t phrase(std::size_t i, std::string_view list) const {
        return lex_->list(list).match([this](std::size_t k) { return lower(static_cast<std::ptrdiff_t>(k)); },
                                      i, tokens_.size());
    }
    bool verb_in(std::ptrdiff_t i, std::string_view list) const {
        return in_range(i) && is_verb(tag(i)) && lex_->list(list).contains(lex_->verb_lemma(lower(i)));
    }
    bool adjective_in(std::ptrdiff_t i, std::string_view list) const {
        return in_range(i) && is_adjective(tag(i)) && lex_->list(list).contains(lower(i));
    }
    bool adverb_in(std::ptrdiff_t i, std::string_view list) const {
        return in_range(i) && is_adverb(tag(i)) && lex_->list(list).contains(lower(i));
    }
    bool noun_in(std::ptrdiff_t i, std::string_view list) const {
        return in_range(i) && is_common_noun(tag(i)) && lex_->noun_in(list, lower(i));
    }

    bool is_be(std::ptrdiff_t i) const {
        return is(i, {"be", "am", "is", "are", "was", "were", "been", "being", "'m", "'re"}) ||
               (lower(i) == "'s" && tag(i) == Tag::VBZ);
    }
    bool is_have(std::ptrdiff_t i) const {
        return is(i, {"have", "has", "had", "having", "'ve"});
    }
    bool is_get(std::ptrdiff_t i) const {
        return is(i, {"get", "gets", "got", "gotten", "getting"});
    }
    bool is_do(std::ptrdiff_t i) const { return is(i, {"do", "does", "did"}); }
    bool is_negation(std::ptrdiff_t i) const { return is(i, {"not", "n't"}); }

    /// First index after `from` that is not an adverb or negation, looking at
    /// no more than `max_skip` skipped tokens.
    std::ptrdiff_t skip_adverbs(std::ptrdiff_t from, int max_skip = 2) const {
        std::ptrdiff_t j = from + 1;
        for (int k = 0; k < max_skip && in_range(j) && (is_adverb(tag(j)) || is_negation(j)); ++k) ++j;
        return j;
    }
    /// Last index before `from` that is not an adverb or negation.
    std::ptrdiff_t skip_adverbs_back(std::ptrdiff_t from, int max_skip = 2) const {
        std::ptrdiff_t j = from - 1;
        for (int k = 0; k < max_skip && in_range(j) && (is_adverb(tag(j)) || is_negation(j)); ++k) --j;
        return j;
    }

private:
    bool in_range(std::ptrdiff_t i) const {
        return i >= 0 && static_cast<std::size_t>(i) < tokens_.size();
    }

    std::span<const AnnotatedToken> tokens_;
    const Lexicon* lex_;
    std::vector<bool> sentence_start_;
    std::vector<bool> question_;
};

// ---------------------------------------------------------------------------
// Catalog

namespace detail {

inline const std::unordered_set<std::string_view>& wh_words() {
    static const std::unordered_set<std::string_view> words{
        "what", "where", "when", "how", "why", "who", "whom", "whose", "which"};
    return words;
}

inline bool nominal_suffix(std::string_view w) {
    for (std::string_view s : {"tion", "tions", "ment", "ments", "ness", "nesses", "ity", "ities"}) {
        if (w.ends_with(s)) return true;
    }
    return false;
}

inline bool followed_by_that_clause(const WindowContext& c, std::size_t i) {
    return c.lower(static_cast<std::ptrdiff_t>(i) + 1) == "that" &&
           c.tag(static_cast<std::ptrdiff_t>(i) + 1) == Tag::IN;
}

inline bool followed_by_to_infinitive(const WindowContext& c, std::size_t i) {
    const auto k = static_cast<std::ptrdiff_t>(i);
    return c.tag(k + 1) == Tag::TO && c.tag(k + 2) == Tag::VB;
}

// Single-word items of a mixed phrase list only count with an adverb tag.
inline std::size_t adverb_phrase(const WindowContext& c, std::size_t i, std::string_view list) {
    const std::size_t m = c.phrase(i, list);
    if (m == 1 && !is_adverb(c.tag(static_cast<std::ptrdiff_t>(i)))) return 0;
    return m;
}

inline Matcher tag_is(std::initializer_list<Tag> tags) {
    std::vector<Tag> set(tags);
    return [set](const WindowContext& c, std::size_t i) -> std::size_t {
        return std::find(set.begin(), set.end(), c.tag(static_cast<std::ptrdiff_t>(i))) != set.end();
    };
}

inline Matcher words_are(std::initializer_list<std::string_view> words,
                         std::initializer_list<Tag> tags = {}) {
    std::vector<std::string> set(words.begin(), words.end());
    std::vector<Tag> tag_set(tags);
    return [set, tag_set](const WindowContext& c, std::size_t i) -> std::size_t {
        const auto k = static_cast<std::ptrdiff_t>(i);
        if (std::find(set.begin(), set.end(), c.lower(k)) == set.end()) return 0;
        return tag_set.empty() || std::find(tag_set.begin(), tag_set.end(), c.tag(k)) != tag_set.end();
    };
}

inline Matcher verb_list(std::string list) {
    return [list](const WindowContext& c, std::size_t i) -> std::size_t {
        return c.verb_in(static_cast<std::ptrdiff_t>(i), list);
    };
}

inline Matcher adjective_list(std::string list) {
    return [list](const WindowContext& c, std::size_t i) -> std::size_t {
        return c.adjective_in(static_cast<std::ptrdiff_t>(i), list);
    };
}

inline Matcher adverb_list(std::string list) {
    return [list](const WindowContext& c, std::size_t i) -> std::size_t {
        return c.adverb_in(static_cast<std::ptrdiff_t>(i), list);
    };
}

inline Matcher noun_list(std::string list) {
    return [list](const WindowContext& c, std::size_t i) -> std::size_t {
        return c.noun_in(static_cast<std::ptrdiff_t>(i), list);
    };
}

inline Matcher to_clause_after_verb(std::string list) {
    return [list](const WindowContext& c, std::size_t i) -> std::size_t {
        return c.verb_in(static_cast<std::ptrdiff_t>(i), list) && followed_by_to_infinitive(c, i);
    };
}

inline std::vector<FeatureRule> build_catalog() {
    using C = const WindowContext&;
    using I = std::size_t;
    using P = std::ptrdiff_t;
    std::vector<FeatureRule> rules;
    std::string category;
    auto stat = [&](std::string id, Normalization norm, std::string description) {
        rules.push_back({std::move(id), category, RuleKind::Statistic, norm, std::move(description), {}});
    };
    auto pattern = [&](std::string id, std::string description, Matcher m) {
        rules.push_back({std::move(id), category, RuleKind::CountPattern, Normalization::PerWords,
                         std::move(description), std::move(m)});
    };
    auto lexical = [&](std::string id, std::string description, Matcher m) {
        rules.push_back({std::move(id), category, RuleKind::LexicalList, Normalization::PerWords,
                         std::move(description), std::move(m)});
    };

    category = "General text properties";
    stat("Words", Normalization::Ratio, "number of words (non-punctuation tokens)");
    stat("AWL", Normalization::Ratio, "mean characters per word");
    stat("TTR", Normalization::Ratio, "distinct lower-cased words among the first 400 words / 400");
    stat("LDE", Normalization::Ratio, "nouns, lexical verbs, adjectives and adverbs / words");
    pattern("FV", "finite verbs: VBD, VBP, VBZ, MD", tag_is({Tag::VBD, Tag::VBP, Tag::VBZ, Tag::MD}));

    category = "Adjectives";
    pattern("JJAT", "attributive adjective: adjective before an adjective or noun", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        return is_adjective(c.tag(k)) && (is_adjective(c.tag(k + 1)) || is_noun(c.tag(k + 1)));
    });
    pattern("JJPR", "predicative adjective: be (+ adverbs) + adjective not before a noun",
            [](C c, I i) -> I {
                const auto k = static_cast<P>(i);
                return is_adjective(c.tag(k)) && c.is_be(c.skip_adverbs_back(k)) && !is_noun(c.tag(k + 1));
            });

    category = "Adverbials";
    lexical("FREQ", "frequency adverbs", adverb_list("FREQ"));
    lexical("PLACE", "place adverbs", adverb_list("PLACE"));
    lexical("TIME", "time adverbials", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        return c.in(k, "TIME") && (is_adverb(c.tag(k)) || is_common_noun(c.tag(k)));
    });
    pattern("RB", "adverbs not covered by another adverb feature", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        if (!is_adverb(c.tag(k)) || c.is(k, {"not", "n't", "never"})) return 0;
        for (std::string_view list : {"FREQ", "PLACE", "TIME", "AMP", "DWNT", "EMPH", "HDG", "RATT",
                                      "RFACT", "RLIKELY", "RNONFACT"}) {
            if (c.in(k, list)) return 0;
        }
        return 1;
    });

    category = "Determinatives";
    pattern("POS", "s-genitive marker", tag_is({Tag::POS}));
    pattern("DT", "determiners", tag_is({Tag::DT, Tag::PDT}));
    lexical("QUAN", "quantifier before an adjective, noun or number", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        const Tag next = c.tag(k + 1);
        return c.in(k, "QUAN") && (is_adjective(next) || is_noun(next) || next == Tag::CD);
    });
    pattern("CD", "numbers", tag_is({Tag::CD}));
    pattern("DEMO", "demonstrative determiners", words_are({"this", "that", "these", "those"}, {Tag::DT}));

    category = "Discourse organization";
    lexical("ELAB", "elaborating conjunctions", [](C c, I i) -> I { return c.phrase(i, "ELAB"); });
    pattern("CC", "coordinators", tag_is({Tag::CC}));
    lexical("CUZ", "causal conjunctions", [](C c, I i) -> I { return c.in(static_cast<P>(i), "CUZ"); });
    lexical("CONC", "concessive conjunctions", [](C c, I i) -> I { return c.in(static_cast<P>(i), "CONC"); });
    lexical("COND", "conditional conjunctions", [](C c, I i) -> I { return c.in(static_cast<P>(i), "COND"); });
    lexical("DMA", "sentence-initial discourse marker followed by a comma", [](C c, I i) -> I {
        return c.sentence_start(i) && c.in(static_cast<P>(i), "DMA") && c.lower(static_cast<P>(i) + 1) == ",";
    });
    lexical("FPUH", "filled pauses and interjections", [](C c, I i) -> I { return c.in(static_cast<P>(i), "FPUH"); });
    pattern("WHQU", "direct WH-question: sentence-initial wh-word in a sentence ending in '?'",
            [](C c, I i) -> I {
                return c.sentence_start(i) && c.in_question(i) && wh_words().contains(c.lower(static_cast<P>(i)));
            });
    pattern("QUTAG", "question tag: ', AUX (n't) PRONOUN ?'", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        if (c.lower(k - 1) != ",") return 0;
        if (!(c.tag(k) == Tag::MD || c.is_be(k) || c.is_have(k) || c.is_do(k))) return 0;
        P j = k + 1;
        if (c.is_negation(j)) ++j;
        return c.tag(j) == Tag::PRP && c.lower(j + 1) == "?";
    });
    pattern("YNQU", "yes/no question: sentence-initial auxiliary or modal in a question", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        return c.sentence_start(i) && c.in_question(i) &&
               (c.tag(k) == Tag::MD || c.is_be(k) || c.is_have(k) || c.is_do(k));
    });
    pattern("TRHC", "that relative clause", words_are({"that"}, {Tag::WDT}));
    pattern("THSC", "that subordinate clause other than relatives", words_are({"that"}, {Tag::IN}));
    pattern("THATD", "subordinator that omitted after a public, private or suasive verb",
            [](C c, I i) -> I {
                const auto k = static_cast<P>(i);
                if (!(c.verb_in(k, "PRIV") || c.verb_in(k, "PUBV") || c.verb_in(k, "SUAV"))) return 0;
                if (c.is(k + 1, {"i", "we", "he", "she", "they"})) return 1;
                return c.is(k + 1, {"it", "this", "there"}) &&
                       (is_verb(c.tag(k + 2)) || c.tag(k + 2) == Tag::MD);
            });
    pattern("WHSC", "WH subordinate clause: wh-word or whether directly after a verb", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        return (wh_words().contains(c.lower(k)) || c.lower(k) == "whether") && !c.sentence_start(i) &&
               is_verb(c.tag(k - 1));
    });

    category = "Lexis";
    pattern("NN", "nouns including proper nouns", tag_is({Tag::NN, Tag::NNS, Tag::NNP, Tag::NNPS}));
    pattern("NCOMP", "noun compound: common noun followed by a common noun", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        return is_common_noun(c.tag(k)) && is_common_noun(c.tag(k + 1));
    });
    pattern("HST", "hashtags", [](C c, I i) -> I {
        const auto w = c.lower(static_cast<P>(i));
        return w.size() > 1 && w.front() == '#';
    });
    pattern("SUPER", "superlatives", tag_is({Tag::JJS, Tag::RBS}));
    pattern("COMPAR", "comparatives", tag_is({Tag::JJR, Tag::RBR}));
    pattern("NOMZ", "nominalizations: common nouns in -tion/-ment/-ness/-ity, 6+ characters",
            [](C c, I i) -> I {
                const auto k = static_cast<P>(i);
                const auto w = c.lower(k);
                return is_common_noun(c.tag(k)) && utf8::code_points(w) >= 6 && nominal_suffix(w) &&
                       !c.in(k, "NOMZ_EXCLUDE");
            });

    category = "Negation";
    pattern("XX0", "negation: not, n't, never, no, nor, neither",
            words_are({"not", "n't", "never", "no", "nor", "neither"}));

    category = "Prepositions";
    pattern("IN", "prepositions (IN other than subordinators)", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        return c.tag(k) == Tag::IN && !c.is(k, {"that", "if", "because", "although", "though", "whether",
                                                "unless", "whereas", "whilst", "while"});
    });

    category = "Pronouns";
    const std::initializer_list<Tag> pronoun_tags{Tag::PRP, Tag::PRPS};
    pattern("PP1S", "first person singular", words_are({"i", "me", "my", "mine", "myself"}, pronoun_tags));
    pattern("PP1P", "first person plural", words_are({"we", "us", "our", "ours", "ourselves"}, pronoun_tags));
    pattern("PP2", "second person", words_are({"you", "your", "yours", "yourself", "yourselves"}, pronoun_tags));
    pattern("PIT", "it pronoun", words_are({"it", "its", "itself"}, pronoun_tags));
    pattern("PPOther", "personal pronouns outside the other pronoun features", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        if (c.tag(k) != Tag::PRP && c.tag(k) != Tag::PRPS) return 0;
        return !c.is(k, {"i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "ourselves",
                         "you", "your", "yours", "yourself", "yourselves", "it", "its", "itself",
                         "he", "him", "his", "himself", "she", "her", "hers", "herself", "they",
                         "them", "their", "theirs", "themselves"});
    });
    pattern("PP3m", "single male third person", words_are({"he", "him", "his", "himself"}, pronoun_tags));
    pattern("PP3f", "single female third person", words_are({"she", "her", "hers", "herself"}, pronoun_tags));
    pattern("TPP3t", "third person plural and singular they",
            words_are({"they", "them", "their", "theirs", "themselves"}, pronoun_tags));
    lexical("QUPR", "quantifying pronouns", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        return c.in(k, "QUPR") || (c.in(k, "QUPR_OF") && c.lower(k + 1) == "of");
    });

    category = "Stance-taking devices";
    lexical("POLITE", "politeness markers", [](C c, I i) -> I { return c.in(static_cast<P>(i), "POLITE"); });
    lexical("AMP", "amplifiers", adverb_list("AMP"));
    lexical("DWNT", "downtoners", adverb_list("DWNT"));
    lexical("EMPH", "emphatics", [](C c, I i) -> I { return c.phrase(i, "EMPH"); });
    lexical("HDG", "hedges (kind of / sort of not after a determiner or adjective)", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        const std::size_t m = c.phrase(i, "HDG");
        if (m == 2 && c.is(k, {"kind", "sort"})) {
            const Tag prev = c.tag(k - 1);
            if (prev == Tag::DT || is_adjective(prev) || prev == Tag::PRPS) return 0;
        }
        return m;
    });

    category = "Stative forms";
    pattern("EX", "existential there", tag_is({Tag::EX}));
    pattern("BEMA", "be as main verb: be (+ adverbs) before a nominal, adjectival or prepositional complement",
            [](C c, I i) -> I {
                const auto k = static_cast<P>(i);
                if (!c.is_be(k)) return 0;
                const Tag next = c.tag(c.skip_adverbs(k));
                return next == Tag::DT || next == Tag::PDT || next == Tag::PRPS || is_adjective(next) ||
                       next == Tag::IN || next == Tag::CD || is_noun(next) || next == Tag::PRP;
            });

    category = "Verb features";
    pattern("CONT", "contractions: n't, 'm, 're, 've, 'll, 'd and verbal 's", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        return c.is(k, {"n't", "'m", "'re", "'ve", "'ll", "'d"}) || (c.lower(k) == "'s" && c.tag(k) == Tag::VBZ);
    });
    pattern("RP", "particles", tag_is({Tag::RP}));
    pattern("PASS", "be-passive: be (+ up to two adverbs/negation) + VBN", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        return c.is_be(k) && c.tag(c.skip_adverbs(k)) == Tag::VBN;
    });
    pattern("PGET", "get-passive: get (+ adverbs) + VBN", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        return c.is_get(k) && c.tag(c.skip_adverbs(k)) == Tag::VBN;
    });
    pattern("GTO", "going to + base verb", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        return c.lower(k) == "going" && c.tag(k + 1) == Tag::TO && c.tag(k + 2) == Tag::VB;
    });
    pattern("VBD", "past tense", tag_is({Tag::VBD}));
    pattern("VBG", "non-finite -ing forms (VBG not after be)", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        return c.tag(k) == Tag::VBG && !c.is_be(c.skip_adverbs_back(k));
    });
    pattern("VBN", "non-finite -ed forms (VBN not after be, have or get)", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        if (c.tag(k) != Tag::VBN) return 0;
        const auto prev = c.skip_adverbs_back(k);
        return !(c.is_be(prev) || c.is_have(prev) || c.is_get(prev));
    });
    pattern("VIMP", "imperatives: sentence-initial base verb (optionally after please)", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        if (c.tag(k) != Tag::VB) return 0;
        return c.sentence_start(i) || (c.lower(k - 1) == "please" && c.sentence_start(i - 1));
    });
    pattern("VPRT", "present tense", tag_is({Tag::VBP, Tag::VBZ}));
    pattern("PEAS", "perfect aspect: have or 'd as had (+ adverbs/negation) + VBN", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        const bool have = c.is_have(k) || (c.lower(k) == "'d" && c.tag(k) == Tag::VBD);
        return have && c.tag(c.skip_adverbs(k)) == Tag::VBN;
    });
    pattern("PROG", "progressive aspect: be (+ adverbs) + VBG", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        return c.is_be(k) && c.tag(c.skip_adverbs(k)) == Tag::VBG;
    });
    pattern("HGOT", "have got", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        const bool have = c.is(k, {"have", "has", "'ve"}) || (c.lower(k) == "'s" && c.tag(k) == Tag::VBZ);
        return have && c.lower(c.skip_adverbs(k)) == "got";
    });

    category = "Verb semantics";
    pattern("DOAUX", "do auxiliary: do-form followed by a base verb", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        if (!c.is_do(k)) return 0;
        P j = k + 1;
        for (int s = 0; s < 3 && (is_adverb(c.tag(j)) || c.is_negation(j) || c.tag(j) == Tag::PRP); ++s) ++j;
        return c.tag(j) == Tag::VB;
    });
    pattern("MDNE", "necessity modals", words_are({"must", "should", "ought"}, {Tag::MD}));
    pattern("MDCA", "modal can", words_are({"can", "ca"}, {Tag::MD}));
    pattern("MDCO", "modal could", words_are({"could"}, {Tag::MD}));
    pattern("MDMM", "modals may and might", words_are({"may", "might"}, {Tag::MD}));
    pattern("MDWS", "modals will and shall", words_are({"will", "shall", "'ll", "wo"}, {Tag::MD}));
    pattern("MDWO", "modal would", words_are({"would", "'d"}, {Tag::MD}));
    pattern("ABLE", "be able to", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        return c.is_be(k) && c.lower(k + 1) == "able" && c.lower(k + 2) == "to";
    });
    lexical("ACT", "activity verbs", verb_list("ACT"));
    lexical("ASPECT", "aspectual verbs", verb_list("ASPECT"));
    lexical("SUAV", "suasive verbs", verb_list("SUAV"));
    lexical("CAUSE", "facilitation and causative verbs", verb_list("CAUSE"));
    lexical("COMM", "communication verbs", verb_list("COMM"));
    lexical("EXIST", "existence and relationship verbs", verb_list("EXIST"));
    lexical("MENTAL", "mental verbs", verb_list("MENTAL"));
    lexical("PRIV", "private verbs", verb_list("PRIV"));
    lexical("PUBV", "public verbs", verb_list("PUBV"));
    lexical("SMP", "seem and appear", verb_list("SMP"));
    lexical("OCCUR", "occurrence verbs", verb_list("OCCUR"));
    lexical("VCOMMother", "communication verbs not followed by that, a wh-word or to", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        const auto next = c.lower(k + 1);
        return c.verb_in(k, "COMM") && next != "that" && next != "to" && !wh_words().contains(next);
    });
    lexical("VFCTother", "factive verbs not followed by that or a wh-word", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        const auto next = c.lower(k + 1);
        return c.verb_in(k, "VFCT") && next != "that" && !wh_words().contains(next);
    });
    lexical("VLIKother", "likelihood verbs not followed by that or to", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        const auto next = c.lower(k + 1);
        return c.verb_in(k, "VLIK") && next != "that" && next != "to";
    });

    category = "Adjective semantics";
    lexical("JJATDother", "attitudinal adjectives not followed by that or to", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        const auto next = c.lower(k + 1);
        return c.adjective_in(k, "JATD") && next != "that" && next != "to";
    });
    lexical("JJEPSTother", "epistemic adjectives not followed by that", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        return c.adjective_in(k, "JEPST") && c.lower(k + 1) != "that";
    });
    lexical("JJEVAL", "evaluative adjectives", adjective_list("JEVAL"));
    lexical("JJREL", "relational adjectives", adjective_list("JREL"));
    lexical("JJSIZE", "size adjectives", adjective_list("JSIZE"));
    lexical("JJTIME", "time adjectives", adjective_list("JTIME"));

    category = "Adverb semantics";
    lexical("RATT", "attitudinal adverbs", adverb_list("RATT"));
    lexical("RFACT", "factive adverbs", [](C c, I i) -> I { return adverb_phrase(c, i, "RFACT"); });
    lexical("RLIKELY", "likelihood adverbs", adverb_list("RLIKELY"));
    lexical("RNONFACT", "non-factive adverbs", [](C c, I i) -> I { return adverb_phrase(c, i, "RNONFACT"); });

    category = "Noun semantics";
    lexical("NNABSPROC", "abstract and process nouns", noun_list("NNABSPROC"));
    lexical("NNCOG", "cognitive nouns", noun_list("NNCOG"));
    lexical("NNCONC", "concrete nouns", noun_list("NNCONC"));
    lexical("NNGRP", "group nouns", noun_list("NNGRP"));
    lexical("NNHUMAN", "human nouns", noun_list("NNHUMAN"));
    lexical("NNPLACE", "place nouns", noun_list("NNPLACE"));
    lexical("NNQUANT", "quantity nouns", noun_list("NNQUANT"));
    lexical("NNTECH", "technical nouns", noun_list("NNTECH"));
    pattern("NNP", "proper nouns", tag_is({Tag::NNP, Tag::NNPS}));
    lexical("NSTNCother", "stance nouns not followed by that, to or a preposition", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        const auto next = c.lower(k + 1);
        return c.noun_in(k, "NSTNC") && next != "that" && next != "to" && c.tag(k + 1) != Tag::IN;
    });

    category = "Syntax";
    pattern("ThJLIK", "that clause after a likelihood adjective", [](C c, I i) -> I {
        return c.adjective_in(static_cast<P>(i), "JLIK") && followed_by_that_clause(c, i);
    });
    pattern("ThJFCT", "that clause after a factive adjective", [](C c, I i) -> I {
        return c.adjective_in(static_cast<P>(i), "JFCT") && followed_by_that_clause(c, i);
    });
    pattern("ThVCOM", "that clause after a communication verb", [](C c, I i) -> I {
        return c.verb_in(static_cast<P>(i), "COMM") && followed_by_that_clause(c, i);
    });
    pattern("ThVLIK", "that clause after a likelihood verb", [](C c, I i) -> I {
        return c.verb_in(static_cast<P>(i), "VLIK") && followed_by_that_clause(c, i);
    });
    pattern("ThSTNCall", "that clause after any stance verb, adjective or noun", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        if (!followed_by_that_clause(c, i)) return 0;
        for (std::string_view list : {"COMM", "PRIV", "PUBV", "SUAV", "VFCT", "VLIK"}) {
            if (c.verb_in(k, list)) return 1;
        }
        for (std::string_view list : {"JATD", "JEPST", "JEVAL", "JLIK", "JFCT"}) {
            if (c.adjective_in(k, list)) return 1;
        }
        return c.noun_in(k, "NSTNC");
    });
    pattern("ToVDSR", "to clause after a verb of desire", to_clause_after_verb("VDSR"));
    pattern("ToVEFRT", "to clause after a verb of effort", to_clause_after_verb("VEFRT"));
    pattern("ToVPROB", "to clause after a verb of probability", to_clause_after_verb("VPROB"));
    pattern("ToNSTNC", "to clause after a stance noun", [](C c, I i) -> I {
        return c.noun_in(static_cast<P>(i), "NSTNC") && followed_by_to_infinitive(c, i);
    });
    pattern("PrepNSTNC", "preposition after a stance noun", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        return c.noun_in(k, "NSTNC") && c.tag(k + 1) == Tag::IN && c.lower(k + 1) != "that";
    });
    pattern("SPLIT", "split auxiliary or infinitive: modal/to + adverb(s) + base verb", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        if (c.tag(k) != Tag::MD && c.tag(k) != Tag::TO) return 0;
        P j = k + 1;
        if (!is_adverb(c.tag(j)) || c.is_negation(j)) return 0;
        if (is_adverb(c.tag(j + 1)) && !c.is_negation(j + 1)) ++j;
        return c.tag(j + 1) == Tag::VB;
    });
    pattern("STPR", "stranded preposition: preposition before clause-final punctuation", [](C c, I i) -> I {
        const auto k = static_cast<P>(i);
        return c.tag(k) == Tag::IN && c.lower(k) != "that" && c.is(k + 1, {".", "!", "?", ",", ";"});
    });
    return rules;
}

}  // namespace detail

/// The fixed feature catalog (121 rules, in reporting order).
inline const std::vector<FeatureRule>& catalog() {
    static const std::vector<FeatureRule> rules = detail::build_catalog();
    return rules;
}

inline std::vector<std::string> catalog_ids() {
    std::vector<std::string> ids;
    for (const auto& r : catalog()) ids.push_back(r.id);
    return ids;
}

/// Maps alternative spellings used in published loading tables onto catalog
/// ids (PP1s -> PP1S, NNGROUP -> NNGRP, ThVCOMM -> ThVCOM, THAHD -> THATD).
inline std::string resolve_feature_id(std::string_view id) {
    static const std::map<std::string, std::string, std::less<>> aliases{
        {"PP1s", "PP1S"}, {"NNGROUP", "NNGRP"}, {"ThVCOMM", "ThVCOM"}, {"THAHD", "THATD"}};
    if (auto it = aliases.find(id); it != aliases.end()) return it->second;
    return std::string(id);
}

inline std::ptrdiff_t catalog_index(std::string_view id) {
    const auto& rules = catalog();
    const std::string resolved = resolve_feature_id(id);
    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (rules[i].id == resolved) return static_cast<std::ptrdiff_t>(i);
    }
    return -1;
}

// ---------------------------------------------------------------------------
// Extraction

struct FeatureOptions {
    double per_words = 1000.0;
    std::size_t ttr_basis = 400;
};

/// Raw (unnormalized) results for a token span, in catalog order.
struct FeatureCounts {
    std::vector<double> raw;  // match counts for count rules; statistic values otherwise
    std::size_t words = 0;
    std::vector<std::string> flags;
};

struct FeatureVector {
    std::string sample_id;
    std::string class_label;
    std::vector<double> values;  // catalog order
    std::vector<std::string> flags;
};

class FeatureExtractor {
public:
    explicit FeatureExtractor(const Lexicon& lexicon = Lexicon::builtin(), FeatureOptions options = {})
        : lex_(&lexicon), options_(options) {}

    const FeatureOptions& options() const { return options_; }

    FeatureCounts count(std::span<const AnnotatedToken> tokens) const {
        const WindowContext ctx(tokens, *lex_);
        const auto& rules = catalog();
        FeatureCounts out;
        out.raw.assign(rules.size(), 0.0);

        std::size_t chars = 0, lexical = 0;
        std::vector<std::size_t> word_positions;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const auto& t = tokens[i];
            if (!t.is_word()) continue;
            word_positions.push_back(i);
            chars += utf8::code_points(t.surface);
            if (is_lexical_word(t)) ++lexical;
        }
        out.words = word_positions.size();

        const std::size_t basis = std::min(options_.ttr_basis, out.words);
        if (out.words < options_.ttr_basis) {
            out.flags.push_back("TTR computed over " + std::to_string(out.words) + " words (fewer than " +
                                std::to_string(options_.ttr_basis) + ")");
        }
        std::unordered_set<std::string_view> types;
        for (std::size_t k = 0; k < basis; ++k) types.insert(tokens[word_positions[k]].lower);

        for (std::size_t r = 0; r < rules.size(); ++r) {
            const FeatureRule& rule = rules[r];
            if (rule.kind == RuleKind::Statistic) {
                const double words = static_cast<double>(out.words);
                if (rule.id == "Words") out.raw[r] = words;
                else if (rule.id == "AWL") out.raw[r] = out.words ? static_cast<double>(chars) / words : 0.0;
                else if (rule.id == "TTR") out.raw[r] = basis ? static_cast<double>(types.size()) / static_cast<double>(basis) : 0.0;
                else if (rule.id == "LDE") out.raw[r] = out.words ? static_cast<double>(lexical) / words : 0.0;
                continue;
            }
            std::size_t matches = 0;
            for (std::size_t i = 0; i < tokens.size();) {
                if (!tokens[i].is_word()) {
                    ++i;
                    continue;
                }
                const std::size_t m = rule.matcher(ctx, i);
                if (m > 0) {
                    ++matches;
                    i += m;
                } else {
                    ++i;
                }
            }
            out.raw[r] = static_cast<double>(matches);
        }
        return out;
    }

    FeatureVector extract(const SampleWindow& window) const {
        return normalize(count(window.tokens), window.id(), window.class_label);
    }

    FeatureVector normalize(const FeatureCounts& counts, std::string sample_id, std::string label) const {
        const auto& rules = catalog();
        FeatureVector v{std::move(sample_id), std::move(label), counts.raw, counts.flags};
        if (counts.words == 0) {
            v.flags.push_back("window has no words");
            return v;
        }
        const double scale = options_.per_words / static_cast<double>(counts.words);
        for (std::size_t r = 0; r < rules.size(); ++r) {
            if (rules[r].normalization == Normalization::PerWords) v.values[r] *= scale;
        }
        return v;
    }

    /// Nouns, adjectives, adverbs (other than negation) and verbs other than
    /// forms of be, have and do.
    static bool is_lexical_word(const AnnotatedToken& t) {
        if (is_noun(t.pos) || is_adjective(t.pos)) return true;
        if (is_adverb(t.pos)) return t.lower != "not" && t.lower != "n't";
        if (!is_verb(t.pos)) return false;
        static const std::unordered_set<std::string_view> auxiliaries{
            "be", "am", "is", "are", "was", "were", "been", "being", "'m", "'re", "'s",
            "have", "has", "had", "having", "'ve", "'d", "do", "does", "did", "doing", "done"};
        return !auxiliaries.contains(t.lower);
    }

private:
    const Lexicon* lex_;
    FeatureOptions options_;
};

// ---------------------------------------------------------------------------
// Feature matrix

struct FeatureMatrix {
    std::vector<std::string> feature_ids;
    std::vector<std::string> sample_ids;
    std::vector<std::string> labels;
    Eigen::MatrixXd values;  // samples x features

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }

    /// Column of `id` (aliases accepted), or -1.
    std::ptrdiff_t column_index(std::string_view id) const {
        const std::string resolved = resolve_feature_id(id);
        for (std::size_t j = 0; j < feature_ids.size(); ++j) {
            if (feature_ids[j] == resolved) return static_cast<std::ptrdiff_t>(j);
        }
        return -1;
    }

    /// Copy restricted to `ids`, in the given order.
    FeatureMatrix select(std::span<const std::string> ids) const {
        FeatureMatrix out{{}, sample_ids, labels, Eigen::MatrixXd(values.rows(), static_cast<Eigen::Index>(ids.size()))};
        for (std::size_t k = 0; k < ids.size(); ++k) {
            const auto j = column_index(ids[k]);
            if (j < 0) throw InputError("feature not in matrix: " + ids[k]);
            out.feature_ids.push_back(feature_ids[static_cast<std::size_t>(j)]);
            out.values.col(static_cast<Eigen::Index>(k)) = values.col(j);
        }
        return out;
    }

    /// Distinct labels in first-appearance order.
    std::vector<std::string> classes() const {
        std::vector<std::string> out;
        for (const auto& l : labels) {
            if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
        }
        return out;
    }

    void write_csv(std::ostream& out) const {
        csv::Row header{"sample", "class"};
        header.insert(header.end(), feature_ids.begin(), feature_ids.end());
        csv::write_row(out, header);
        for (std::size_t i = 0; i < rows(); ++i) {
            csv::Row row{sample_ids[i], labels[i]};
            for (std::size_t j = 0; j < cols(); ++j) {
                row.push_back(csv::format_double(values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
            }
            csv::write_row(out, row);
        }
    }

    static FeatureMatrix read_csv(std::istream& in) {
        const auto rows = csv::read_all(in);
        if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "sample" || rows[0][1] != "class") {
            throw InputError("feature matrix: header must start with sample,class");
        }
        FeatureMatrix m;
        m.feature_ids.assign(rows[0].begin() + 2, rows[0].end());
        m.values.resize(static_cast<Eigen::Index>(rows.size() - 1), static_cast<Eigen::Index>(m.feature_ids.size()));
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].size() != rows[0].size()) {
                throw InputError("feature matrix: row " + std::to_string(i) + " has " +
                                 std::to_string(rows[i].size()) + " fields");
            }
            m.sample_ids.push_back(rows[i][0]);
            m.labels.push_back(rows[i][1]);
            for (std::size_t j = 0; j < m.feature_ids.size(); ++j) {
                m.values(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j)) = csv::parse_double(rows[i][j + 2]);
            }
        }
        return m;
    }
};

struct FeatureMatrixResult {
    FeatureMatrix matrix;
    std::vector<std::string> flags;  // "<sample>: <flag>"
};

/// One row per window, ordered by (class label, window index).
inline FeatureMatrixResult build_matrix(std::span<const SampleWindow> windows,
                                        const FeatureExtractor& extractor = FeatureExtractor()) {
    if (windows.empty()) throw InputError("build_matrix: no windows");
    std::vector<const SampleWindow*> order;
    for (const auto& w : windows) order.push_back(&w);
    std::stable_sort(order.begin(), order.end(), [](const SampleWindow* a, const SampleWindow* b) {
        return std::tie(a->class_label, a->window_index) < std::tie(b->class_label, b->window_index);
    });
    const auto& rules = catalog();
    FeatureMatrixResult result;
    auto& m = result.matrix;
    m.feature_ids = catalog_ids();
    m.values.resize(static_cast<Eigen::Index>(order.size()), static_cast<Eigen::Index>(rules.size()));
    for (std::size_t i = 0; i < order.size(); ++i) {
        FeatureVector v = extractor.extract(*order[i]);
        m.sample_ids.push_back(v.sample_id);
        m.labels.push_back(v.class_label);
        for (std::size_t j = 0; j < rules.size(); ++j) {
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v.values[j];
        }
        for (auto& f : v.flags) result.flags.push_back(v.sample_id + ": " + f);
    }
    return result;
}

}  // namespace styloscope
