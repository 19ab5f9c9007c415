#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "styloscope/features.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace styloscope;
namespace ts = testing_support;

namespace {

std::vector<AnnotatedToken> tag_text(std::string_view text) { return tag_pos(tokenize(text)); }

double count_of(const FeatureCounts& c, std::string_view id) {
    return c.raw[static_cast<std::size_t>(catalog_index(id))];
}

}  // namespace

TEST(Catalog, SizeOrderAndUniqueness) {
    const auto ids = catalog_ids();
    ASSERT_EQ(ids.size(), 121u);
    EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), ids.size());
    EXPECT_EQ(ids[0], "Words");
    EXPECT_EQ(ids[1], "AWL");
    EXPECT_EQ(ids[2], "TTR");
    EXPECT_EQ(ids[3], "LDE");
    EXPECT_EQ(ids.back(), "STPR");
    for (const auto& rule : catalog()) {
        EXPECT_FALSE(rule.category.empty()) << rule.id;
        EXPECT_EQ(rule.kind == RuleKind::Statistic, !rule.matcher) << rule.id;
    }
}

TEST(Catalog, AliasesResolve) {
    EXPECT_EQ(resolve_feature_id("PP1s"), "PP1S");
    EXPECT_EQ(resolve_feature_id("NNGROUP"), "NNGRP");
    EXPECT_EQ(resolve_feature_id("ThVCOMM"), "ThVCOM");
    EXPECT_EQ(resolve_feature_id("THAHD"), "THATD");
    EXPECT_EQ(catalog_index("PP1s"), catalog_index("PP1S"));
    EXPECT_LT(catalog_index("NOPE"), 0);
}

TEST(Extractor, HandAnnotatedFixture) {
    const auto expected = oracles::read_annotation(ts::data_dir() / "feature_fixture_counts.tsv");
    const FeatureExtractor ex;
    const auto c = ex.count(tag_text(ts::slurp(ts::data_dir() / "feature_fixture.txt")));
    for (const char* id : {"PASS", "PEAS", "NOMZ", "XX0", "CONT", "CD", "WHQU"}) {
        EXPECT_EQ(count_of(c, id), expected.at(id)) << id;
    }
    const double words = expected.at("words");
    EXPECT_EQ(c.words, static_cast<std::size_t>(words));
    EXPECT_DOUBLE_EQ(count_of(c, "TTR"), expected.at("types") / words);
    EXPECT_DOUBLE_EQ(count_of(c, "AWL"), expected.at("chars") / words);
    EXPECT_DOUBLE_EQ(count_of(c, "LDE"), expected.at("lexical") / words);
    ASSERT_EQ(c.flags.size(), 1u);  // under 400 words
}

TEST(Extractor, SpotChecks) {
    const FeatureExtractor ex;
    auto c = ex.count(tag_text("I think you know that we can't stay."));
    EXPECT_EQ(count_of(c, "PP1S"), 1);
    EXPECT_EQ(count_of(c, "PP2"), 1);
    EXPECT_EQ(count_of(c, "PP1P"), 1);
    EXPECT_EQ(count_of(c, "XX0"), 1);
    EXPECT_EQ(count_of(c, "CONT"), 1);
    c = ex.count(tag_text("Is it raining? Yes."));
    EXPECT_EQ(count_of(c, "YNQU"), 1);
    c = ex.count(tag_text("The house is big. There are two cats."));
    EXPECT_EQ(count_of(c, "EX"), 1);
    EXPECT_EQ(count_of(c, "JJPR"), 1);
    EXPECT_EQ(count_of(c, "CD"), 1);
}

TEST(Extractor, PerThousandScaling) {
    std::string text;
    for (int i = 0; i < 100; ++i) text += i % 20 == 0 ? "We did not go. " : "Cats sleep all day long. ";
    const FeatureExtractor ex;
    const auto toks = tag_text(text);
    const auto counts = ex.count(toks);
    const auto v = ex.normalize(counts, "s", "c");
    const double words = static_cast<double>(counts.words);
    EXPECT_DOUBLE_EQ(v.values[static_cast<std::size_t>(catalog_index("XX0"))], 5.0 * 1000.0 / words);
    EXPECT_DOUBLE_EQ(v.values[static_cast<std::size_t>(catalog_index("Words"))], words);
    EXPECT_DOUBLE_EQ(v.values[static_cast<std::size_t>(catalog_index("TTR"))], counts.raw[2]);
}

TEST(Extractor, CountsBoundedByWords) {
    const FeatureExtractor ex;
    const auto text = ts::slurp(ts::source_dir() / "data/demo_corpus/HT/doc_002.txt");
    const auto c = ex.count(tag_text(text));
    for (std::size_t r = 0; r < catalog().size(); ++r) {
        if (catalog()[r].kind == RuleKind::Statistic) continue;
        EXPECT_GE(c.raw[r], 0.0);
        EXPECT_LE(c.raw[r], static_cast<double>(c.words)) << catalog()[r].id;
    }
    EXPECT_GT(count_of(c, "TTR"), 0.0);
    EXPECT_LE(count_of(c, "TTR"), 1.0);
    EXPECT_TRUE(c.flags.empty());
}

TEST(Extractor, EmptyWindowFlagged) {
    const FeatureExtractor ex;
    const auto v = ex.normalize(ex.count({}), "s", "c");
    ASSERT_FALSE(v.flags.empty());
    for (double x : v.values) EXPECT_EQ(x, 0.0);
}

TEST(FeatureMatrix, BuildSortsAndRoundTrips) {
    std::vector<SampleWindow> windows;
    for (const char* label : {"B", "A"}) {
        for (std::size_t w : {1u, 0u}) {
            SampleWindow s;
            s.class_label = label;
            s.window_index = w;
            s.tokens = tag_text(std::string("The committee has approved the ") + (w ? "plan." : "new regulation."));
            windows.push_back(s);
        }
    }
    const FeatureExtractor ex;
    const auto built = build_matrix(windows, ex);
    const auto& m = built.matrix;
    EXPECT_EQ(m.sample_ids, (std::vector<std::string>{"A_0", "A_1", "B_0", "B_1"}));
    EXPECT_EQ(m.classes(), (std::vector<std::string>{"A", "B"}));
    EXPECT_EQ(m.cols(), 121u);
    EXPECT_EQ(built.flags.size(), 4u);

    std::stringstream io;
    m.write_csv(io);
    const auto back = FeatureMatrix::read_csv(io);
    EXPECT_EQ(back.feature_ids, m.feature_ids);
    EXPECT_EQ(back.labels, m.labels);
    EXPECT_TRUE(back.values == m.values);  // exact: shortest round-trip formatting

    const auto sub = m.select(std::vector<std::string>{"NOMZ", "PP1s"});
    EXPECT_EQ(sub.feature_ids, (std::vector<std::string>{"NOMZ", "PP1S"}));
    EXPECT_THROW(m.select(std::vector<std::string>{"NOPE"}), InputError);
}

TEST(FeatureMatrix, RejectsBadCsv) {
    std::istringstream bad_header("id,label,X\r\n");
    EXPECT_THROW(FeatureMatrix::read_csv(bad_header), InputError);
    std::istringstream ragged("sample,class,X\r\na,b\r\n");
    EXPECT_THROW(FeatureMatrix::read_csv(ragged), InputError);
}
