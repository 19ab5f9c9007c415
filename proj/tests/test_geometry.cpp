#include <gtest/gtest.h>

#include "styloscope/geometry.hpp"
#include "support.hpp"

using namespace styloscope;
namespace ts = testing_support;

TEST(Distances, RigidTransformInvariant) {
    Random rng(1, 0);
    const Eigen::MatrixXd x = ts::gaussian(10, 3, rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(ts::gaussian(3, 3, rng)).householderQ();
    Eigen::RowVectorXd shift(3);
    shift << 4, -2, 7;
    const Eigen::MatrixXd moved = (x * q).rowwise() + shift;
    const auto d = geometry::euclidean_matrix(x);
    EXPECT_LT((d - geometry::euclidean_matrix(moved)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(d.diagonal().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_TRUE(d.isApprox(d.transpose()));
    EXPECT_LT((geometry::squared_distances(x) - d.cwiseProduct(d)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Distances, GroupMeans) {
    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 10, 12;
    const std::vector<std::string> labels{"a", "a", "b", "b"};
    const auto g = geometry::group_mean_distances(geometry::euclidean_matrix(x), labels);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g[0].a, "a");
    EXPECT_EQ(g[0].pairs, 4u);
    EXPECT_DOUBLE_EQ(g[0].mean, (10 + 12 + 9 + 11) / 4.0);
    EXPECT_THROW(geometry::group_mean_distances(geometry::euclidean_matrix(x), std::vector<std::string>(4, "a")),
                 InputError);
}

TEST(Tsne, EntropyCalibration) {
    Random rng(2, 0);
    const Eigen::MatrixXd x = ts::gaussian(60, 5, rng);
    for (double perp : {5.0, 15.0}) {
        const auto c = geometry::calibrate(geometry::squared_distances(x), perp);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            EXPECT_NEAR(c.entropy(i), std::log2(perp), 1e-5);
            EXPECT_NEAR(c.conditional.row(i).sum(), 1.0, 1e-12);
            EXPECT_EQ(c.conditional(i, i), 0.0);
        }
        const auto p = geometry::joint_affinities(c);
        EXPECT_NEAR(p.sum(), 1.0, 1e-6);
        EXPECT_TRUE(p.isApprox(p.transpose()));
    }
}

TEST(Tsne, GradientMatchesFiniteDifferences) {
    Random rng(3, 0);
    const Eigen::MatrixXd x = ts::gaussian(5, 3, rng);
    const auto p = geometry::joint_affinities(geometry::calibrate(geometry::squared_distances(x), 1.5));
    const Eigen::MatrixXd y = ts::gaussian(5, 2, rng);
    const Eigen::MatrixXd g = geometry::tsne_gradient(p, y);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < 5; ++i) {
        for (Eigen::Index d = 0; d < 2; ++d) {
            Eigen::MatrixXd up = y, down = y;
            up(i, d) += h;
            down(i, d) -= h;
            const double fd = (geometry::tsne_kl(p, up) - geometry::tsne_kl(p, down)) / (2 * h);
            EXPECT_NEAR(g(i, d), fd, 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST(Tsne, SeparatesBlobsAndReducesKl) {
    Random rng(4, 0);
    const auto b = ts::blobs(30, 5, 8.0, 1.0, rng);
    geometry::TsneParams params;
    params.perplexity = 10;
    params.iterations = 500;
    const auto e = geometry::tsne(b.x, params, 42);
    EXPECT_LT(e.final_kl, e.kl_history.front().kl);
    EXPECT_EQ(e.kl_history.back().iteration, 500);
    EXPECT_GE(geometry::nearest_neighbor_accuracy(e.coords, b.labels), 0.9);
    EXPECT_NEAR(e.coords.col(0).mean(), 0.0, 1e-9);

    const auto again = geometry::tsne(b.x, params, 42);
    EXPECT_TRUE(again.coords == e.coords);
    const auto other = geometry::tsne(b.x, params, 43);
    EXPECT_FALSE(other.coords == e.coords);
}

TEST(Tsne, PerplexityBound) {
    Random rng(5, 0);
    const Eigen::MatrixXd x = ts::gaussian(150, 3, rng);
    geometry::TsneParams params;
    params.perplexity = 60;
    EXPECT_THROW(geometry::tsne(x, params), InputError);
    params.perplexity = 0;
    EXPECT_THROW(geometry::tsne(x, params), InputError);
    EXPECT_THROW(geometry::tsne(Eigen::MatrixXd::Zero(3, 2)), InputError);
}
