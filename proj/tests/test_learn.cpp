#include <gtest/gtest.h>

#include <map>
#include <set>

#include "styloscope/learn.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace styloscope;
namespace ts = testing_support;

namespace {

struct Split {
    Eigen::MatrixXd x_train, x_test;
    std::vector<std::string> y_train, y_test;
};

Split make_split(const ts::Blobs& b, std::size_t n_test, std::uint64_t seed) {
    const auto s = learn::split(b.labels.size(), n_test, seed);
    const std::span<const std::string> labels(b.labels);
    return {learn::take_rows(b.x, s.train), learn::take_rows(b.x, s.test), learn::take(labels, s.train),
            learn::take(labels, s.test)};
}

}  // namespace

TEST(Split, DisjointSortedDeterministic) {
    const auto a = learn::split(150, 30, 42);
    const auto b = learn::split(150, 30, 42);
    const auto c = learn::split(150, 30, 43);
    EXPECT_EQ(a.test, b.test);
    EXPECT_NE(a.test, c.test);
    ASSERT_EQ(a.test.size(), 30u);
    ASSERT_EQ(a.train.size(), 120u);
    std::set<std::size_t> all(a.test.begin(), a.test.end());
    all.insert(a.train.begin(), a.train.end());
    EXPECT_EQ(all.size(), 150u);
    EXPECT_TRUE(std::is_sorted(a.test.begin(), a.test.end()));
    EXPECT_THROW(learn::split(10, 10, 1), InputError);
    EXPECT_EQ(learn::split(10, 0, 1).warnings.size(), 1u);
}

TEST(Split, StratifiedQuotas) {
    std::vector<std::string> labels;
    for (int i = 0; i < 50; ++i) labels.push_back("a");
    for (int i = 0; i < 30; ++i) labels.push_back("b");
    for (int i = 0; i < 20; ++i) labels.push_back("c");
    const auto s = learn::stratified_split(labels, 10, 5);
    std::map<std::string, int> counts;
    for (auto i : s.test) ++counts[labels[i]];
    EXPECT_EQ(counts["a"], 5);
    EXPECT_EQ(counts["b"], 3);
    EXPECT_EQ(counts["c"], 2);
}

TEST(Classifiers, SeparableBlobs) {
    Random rng(11, 0);
    const auto b = ts::blobs(50, 4, 6.0, 1.0, rng);
    const auto s = make_split(b, 30, 42);
    for (auto kind : learn::k_all_classifiers) {
        const auto model = learn::fit(kind, s.x_train, s.y_train, {}, 42);
        const auto report = learn::metrics(model.predict(s.x_test), s.y_test);
        EXPECT_GE(report.accuracy, 0.95) << learn::to_string(kind);
        EXPECT_EQ(model.classes, (std::vector<std::string>{"c0", "c1", "c2"}));
    }
}

TEST(Classifiers, DeterministicGivenSeed) {
    Random rng(12, 0);
    const auto b = ts::blobs(30, 3, 2.0, 1.0, rng);
    const auto s = make_split(b, 18, 1);
    for (auto kind : learn::k_all_classifiers) {
        const auto p1 = learn::fit(kind, s.x_train, s.y_train, {}, 9).predict(s.x_test);
        const auto p2 = learn::fit(kind, s.x_train, s.y_train, {}, 9).predict(s.x_test);
        EXPECT_EQ(p1, p2) << learn::to_string(kind);
    }
}

TEST(Classifiers, Errors) {
    Random rng(13, 0);
    const auto b = ts::blobs(10, 3, 4.0, 1.0, rng);
    const auto model = learn::fit(learn::ClassifierKind::NaiveBayes, b.x, b.labels);
    EXPECT_THROW(model.predict(Eigen::MatrixXd::Zero(2, 4)), InputError);
    EXPECT_THROW(learn::parse_classifier("knn"), InputError);
    EXPECT_EQ(learn::parse_classifier("random-forest"), learn::ClassifierKind::RandomForest);
    const std::vector<std::string> one(b.labels.size(), "x");
    EXPECT_THROW(learn::fit(learn::ClassifierKind::LinearSvm, b.x, one), InputError);
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
    Random rng(21, 0);
    learn::Mlp net(4, 5, 3, rng);
    const Eigen::MatrixXd x = ts::gaussian(7, 4, rng);
    const std::vector<std::size_t> y{0, 1, 2, 1, 0, 2, 2};
    const Eigen::VectorXd p0 = net.parameters();
    const Eigen::VectorXd g = net.gradient(x, y);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < p0.size(); ++i) {
        Eigen::VectorXd p = p0;
        p(i) += h;
        net.set_parameters(p);
        const double up = net.loss(x, y);
        p(i) -= 2 * h;
        net.set_parameters(p);
        const double down = net.loss(x, y);
        const double fd = (up - down) / (2 * h);
        const double rel = std::abs(fd - g(i)) / std::max(1e-8, std::abs(fd) + std::abs(g(i)));
        EXPECT_LT(rel, 1e-4) << "parameter " << i;
    }
    net.set_parameters(p0);
    EXPECT_TRUE(net.parameters() == p0);
}

TEST(Metrics, KnownConfusion) {
    const std::vector<std::string> truth{"a", "a", "a", "b", "b", "c"};
    const std::vector<std::string> pred{"a", "a", "b", "b", "b", "a"};
    const auto r = learn::metrics(pred, truth);
    EXPECT_DOUBLE_EQ(r.accuracy, 4.0 / 6.0);
    EXPECT_DOUBLE_EQ(r.per_class[0].precision, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(r.per_class[0].recall, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(r.per_class[1].precision, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(r.per_class[1].recall, 1.0);
    EXPECT_DOUBLE_EQ(r.per_class[1].f1, 0.8);
    EXPECT_EQ(r.per_class[2].support, 1u);
    EXPECT_EQ(r.confusion[2][0], 1u);
    // c is never predicted: precision and f1 undefined
    EXPECT_EQ(r.flags.size(), 2u);
    EXPECT_DOUBLE_EQ(r.macro_avg.recall, (2.0 / 3.0 + 1.0 + 0.0) / 3.0);
    EXPECT_DOUBLE_EQ(r.weighted_avg.recall, r.accuracy);
}

TEST(Standardizer, ZeroMeanUnitSd) {
    Random rng(3, 0);
    Eigen::MatrixXd x = ts::gaussian(20, 3, rng) * 5.0;
    x.col(2).setConstant(7.0);
    const auto s = learn::Standardizer::fit(x);
    const Eigen::MatrixXd z = s.apply(x);
    for (Eigen::Index j = 0; j < 2; ++j) {
        EXPECT_NEAR(z.col(j).mean(), 0.0, 1e-12);
        EXPECT_NEAR((z.col(j).array() - z.col(j).mean()).square().sum() / 19.0, 1.0, 1e-12);
    }
    EXPECT_EQ(s.sd(2), 1.0);
    EXPECT_NEAR(z.col(2).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Ward, MatchesBruteForceOracle) {
    Random rng(31, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::MatrixXd x = ts::gaussian(9, 3, rng);
        const auto d = learn::hca_ward(x);
        const auto oracle = oracles::ward_heights(x);
        ASSERT_EQ(d.merges.size(), 8u);
        for (std::size_t m = 0; m < oracle.size(); ++m) {
            EXPECT_NEAR(d.merges[m].height, oracle[m], 1e-9);
            if (m > 0) {
                EXPECT_GE(d.merges[m].height, d.merges[m - 1].height - 1e-12);
            }
        }
        EXPECT_EQ(d.merges.back().size, 9u);
        EXPECT_EQ(d.leaf_order().size(), 9u);
    }
}

TEST(Ward, RecoversThreeBlobs) {
    Random rng(32, 0);
    const auto b = ts::blobs(15, 3, 10.0, 1.0, rng);
    const auto d = learn::hca_ward(b.x, b.labels);
    const auto cut = learn::cut_tree(d, 3);
    EXPECT_EQ(cut.clusters, 3u);
    const auto table = learn::contingency(cut, b.labels);
    for (const auto& row : table.counts) {
        EXPECT_EQ(std::count(row.begin(), row.end(), 0u), 2) << "impure cluster";
        EXPECT_EQ(*std::max_element(row.begin(), row.end()), 15u);
    }
    EXPECT_THROW(learn::cut_tree(d, 0), InputError);
    EXPECT_THROW(learn::hca_ward(Eigen::MatrixXd::Zero(1, 2)), InputError);
}
