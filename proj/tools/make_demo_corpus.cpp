// Writes the synthetic three-class demo corpus shipped under data/demo_corpus.
//
//   make_demo_corpus <out_dir> [seed]
//
// Each class draws sentences from shared templates with class-specific
// weights: HT leans on personal pronouns, contractions and narrative past;
// NMT on agentful passives and "of" chains; ChatGPT on nominalizations,
// connectives and hedges. Every document also draws its own multipliers for
// three template groups so windows vary within a class.

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "styloscope/random.hpp"

namespace {

using styloscope::Random;
using Words = std::vector<std::string>;

const Words k_nouns{"committee", "report",  "government", "policy",  "agreement", "system",  "market",
                    "city",      "village", "teacher",    "family",  "project",   "proposal", "country",
                    "student",   "company", "problem",    "result",  "river",     "museum",  "hospital",
                    "farmer",    "letter",  "book",       "road",    "station",   "garden",  "budget"};
const Words k_plural{"students", "workers", "farmers", "visitors", "children", "teachers", "companies",
                     "families", "houses",  "books",   "letters",  "cities",   "villages", "projects"};
const Words k_nomz{"implementation", "development",  "assessment", "management",   "organization",
                   "improvement",    "cooperation",  "regulation", "establishment", "investigation",
                   "evaluation",     "consideration", "transformation", "integration", "application"};
const Words k_adj{"important", "clear",    "difficult", "simple", "useful",  "strong",   "small", "large",
                  "new",       "old",      "careful",   "quiet",  "bright",  "complex",  "modern", "local",
                  "possible",  "necessary", "effective", "happy", "serious", "national", "public", "final"};
const Words k_vb{"improve", "support", "build", "change", "study", "protect", "explain", "develop",
                 "review",  "open",    "visit", "help",   "find",  "keep",    "follow",  "finish"};
const Words k_vbd{"walked", "looked", "turned", "stayed", "waited", "smiled", "laughed", "listened", "arrived",
                  "stopped"};
const Words k_vbn{"written",   "reviewed",  "approved",  "examined",   "published", "discussed",
                  "translated", "adopted",  "considered", "reported",  "organized", "built",
                  "improved",  "supported", "developed", "completed", "prepared",  "presented"};
const Words k_vbz{"requires", "involves", "reflects", "suggests", "shows", "supports", "creates", "provides"};
const Words k_think{"think", "believe", "feel", "know", "guess", "suppose"};
const Words k_modal{"should", "can", "will", "must", "could", "might", "would"};
const Words k_names{"Anna", "Peter", "Maria", "John", "Lena", "Tom", "Sara", "David"};
const Words k_places{"kitchen", "station", "market", "garden", "office", "school", "harbour", "square"};
const Words k_adv{"quickly", "slowly", "carefully", "often", "again", "together", "finally", "early"};
const Words k_connect{"However", "Moreover", "Additionally", "Furthermore", "Therefore", "Consequently"};
const Words k_hedge{"perhaps", "probably", "possibly", "generally", "relatively", "somewhat"};
const Words k_amp{"very", "really", "extremely", "quite", "totally", "absolutely"};
const Words k_number{"two", "three", "four", "five", "ten", "twenty", "12", "45", "100", "300"};
const Words k_years{"1998", "2004", "2010", "2015", "2019", "2021"};

const std::string& pick(Random& rng, const Words& w) { return w[rng.uniform_index(w.size())]; }

// Sentence template families.
enum Group { Personal, Contraction, Narrative, Question, Passive, OfChain, Nominal, Connective, Hedge, Plain, Count };
constexpr int k_groups = Count;

std::string sentence(Group g, Random& rng) {
    std::ostringstream s;
    switch (g) {
        case Personal: {
            static const Words subj{"I", "We", "You"};
            static const Words obj{"we", "you", "they", "I"};
            s << pick(rng, subj) << " " << pick(rng, k_think) << " that " << pick(rng, obj) << " "
              << pick(rng, k_modal) << " " << pick(rng, k_vb) << " the " << pick(rng, k_nouns) << " with our "
              << pick(rng, k_plural) << ".";
            break;
        }
        case Contraction: {
            static const Words lead{"I'm", "We're", "It's", "That's", "You're", "They're"};
            static const Words neg{"don't", "can't", "won't", "didn't", "shouldn't", "couldn't"};
            static const Words subj{"we", "they", "you", "I"};
            s << pick(rng, lead) << " " << pick(rng, k_amp) << " " << pick(rng, k_adj) << ", but " << pick(rng, subj)
              << " " << pick(rng, neg) << " " << pick(rng, k_vb) << " the " << pick(rng, k_nouns) << ".";
            break;
        }
        case Narrative: {
            static const Words say{"said", "thought", "knew", "felt"};
            s << pick(rng, k_names) << " " << pick(rng, k_vbd) << " to the " << pick(rng, k_places) << " and "
              << pick(rng, say) << " that she had been " << pick(rng, k_adj) << " all day.";
            break;
        }
        case Question: {
            static const Words aux{"do", "did", "should", "can"};
            static const Words subj{"we", "they", "you"};
            static const Words wh{"Why", "How", "When", "Where"};
            s << pick(rng, wh) << " " << pick(rng, aux) << " " << pick(rng, subj) << " " << pick(rng, k_vb)
              << " the " << pick(rng, k_nouns) << "?";
            break;
        }
        case Passive: {
            static const Words be{"was", "is", "has been", "were", "had been"};
            s << "The " << pick(rng, k_nouns) << " " << pick(rng, be) << " " << pick(rng, k_vbn) << " by the "
              << pick(rng, k_nouns) << " of the " << pick(rng, k_nouns) << " in " << pick(rng, k_years) << ".";
            break;
        }
        case OfChain: {
            s << "The " << pick(rng, k_nouns) << " of the " << pick(rng, k_plural) << " of the "
              << pick(rng, k_nouns) << " in the " << pick(rng, k_places) << " " << pick(rng, k_vbz) << " the "
              << pick(rng, k_nouns) << " of " << pick(rng, k_number) << " " << pick(rng, k_plural) << ".";
            break;
        }
        case Nominal: {
            s << "The " << pick(rng, k_nomz) << " of " << pick(rng, k_adj) << " " << pick(rng, k_plural) << " "
              << pick(rng, k_vbz) << " a " << pick(rng, k_adj) << " " << pick(rng, k_nomz) << " and "
              << pick(rng, k_nomz) << ".";
            break;
        }
        case Connective: {
            s << pick(rng, k_connect) << ", the " << pick(rng, k_nomz) << " of the " << pick(rng, k_nouns)
              << " remains " << pick(rng, k_adj) << ", because it " << pick(rng, k_vbz) << " "
              << pick(rng, k_adj) << " " << pick(rng, k_plural) << ".";
            break;
        }
        case Hedge: {
            s << "This is " << pick(rng, k_hedge) << " a " << pick(rng, k_adj) << " " << pick(rng, k_nomz)
              << ", which " << pick(rng, k_modal) << " " << pick(rng, k_vb) << " the " << pick(rng, k_nouns)
              << " " << pick(rng, k_adv) << ".";
            break;
        }
        case Plain:
        case Count: {
            s << "There were " << pick(rng, k_number) << " " << pick(rng, k_plural) << " near the "
              << pick(rng, k_adj) << " " << pick(rng, k_nouns) << ", and they " << pick(rng, k_vbd) << " "
              << pick(rng, k_adv) << ".";
            break;
        }
    }
    return s.str();
}

struct Profile {
    std::string label;
    std::array<double, k_groups> weights;
};

// Personal, Contraction, Narrative, Question, Passive, OfChain, Nominal, Connective, Hedge, Plain
const std::array<Profile, 3> k_profiles{{
    {"ChatGPT", {1.0, 0.3, 0.4, 0.6, 1.2, 0.8, 3.0, 2.5, 2.2, 1.0}},
    {"HT", {3.0, 2.6, 2.4, 1.4, 0.6, 0.5, 0.6, 0.5, 0.6, 1.2}},
    {"NMT", {1.2, 0.5, 1.0, 0.6, 3.0, 2.6, 1.0, 0.7, 0.5, 1.2}},
}};

// Document-level style groups: involved, informational, elaborated.
constexpr std::array<int, k_groups> k_style_group{0, 0, 0, 0, 1, 1, 2, 2, 2, 1};

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: make_demo_corpus <out_dir> [seed]\n";
        return 1;
    }
    const std::filesystem::path out = argv[1];
    const std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 20240601ULL;
    constexpr int k_docs = 36;
    constexpr int k_doc_words = 1000;

    for (const auto& profile : k_profiles) {
        Random rng(seed, Random::stream_id("demo:" + profile.label));
        const auto dir = out / profile.label;
        std::filesystem::create_directories(dir);
        for (int d = 0; d < k_docs; ++d) {
            std::array<double, 3> style{};
            for (auto& m : style) m = std::exp(0.5 * rng.normal());
            std::array<double, k_groups> w{};
            double total = 0;
            for (int g = 0; g < k_groups; ++g) {
                w[g] = profile.weights[g] * style[k_style_group[g]];
                total += w[g];
            }
            std::ostringstream doc;
            int words = 0, in_paragraph = 0;
            while (words < k_doc_words) {
                double u = rng.uniform01() * total;
                int g = 0;
                while (g < k_groups - 1 && u >= w[g]) u -= w[g++];
                const std::string s = sentence(static_cast<Group>(g), rng);
                words += static_cast<int>(std::count(s.begin(), s.end(), ' ')) + 1;
                doc << s;
                if (++in_paragraph == 6) {
                    doc << "\n\n";
                    in_paragraph = 0;
                } else {
                    doc << " ";
                }
            }
            char name[32];
            std::snprintf(name, sizeof name, "doc_%03d.txt", d + 1);
            std::ofstream f(dir / name, std::ios::binary);
            f << doc.str() << "\n";
        }
    }
    return 0;
}
