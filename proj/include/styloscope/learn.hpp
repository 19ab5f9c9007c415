#pragma once

// Supervised classifiers, evaluation metrics and Ward hierarchical clustering.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "styloscope/error.hpp"
#include "styloscope/random.hpp"

namespace styloscope::learn {

// ---------------------------------------------------------------------------
// Train/test split

struct SplitSpec {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
};

/// Uniform random split; `test` and `train` are each sorted ascending.
inline SplitSpec split(std::size_t n, std::size_t n_test, std::uint64_t seed) {
    if (n_test >= n) throw InputError("split: n_test must be smaller than the number of samples");
    SplitSpec s;
    s.seed = seed;
    if (n_test == 0) s.warnings.push_back("n_test is 0: empty test set");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Random rng(seed, Random::stream_id("split"));
    rng.shuffle(std::span<std::size_t>(order));
    s.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(s.test.begin(), s.test.end());
    std::sort(s.train.begin(), s.train.end());
    return s;
}

/// Per-class proportional split (largest remainders, ties to the earlier
/// class in sorted label order).
inline SplitSpec stratified_split(std::span<const std::string> labels, std::size_t n_test, std::uint64_t seed) {
    const std::size_t n = labels.size();
    if (n_test >= n) throw InputError("split: n_test must be smaller than the number of samples");
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
    std::vector<std::size_t> quota;
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0, c = 0;
    for (const auto& [label, idx] : by_class) {
        const double exact = static_cast<double>(n_test) * static_cast<double>(idx.size()) / static_cast<double>(n);
        quota.push_back(static_cast<std::size_t>(std::floor(exact)));
        assigned += quota.back();
        remainders.push_back({-(exact - std::floor(exact)), c++});
    }
    std::stable_sort(remainders.begin(), remainders.end());
    for (std::size_t r = 0; assigned < n_test; ++r, ++assigned) ++quota[remainders[r % remainders.size()].second];
    SplitSpec s;
    s.seed = seed;
    if (n_test == 0) s.warnings.push_back("n_test is 0: empty test set");
    Random rng(seed, Random::stream_id("stratified-split"));
    c = 0;
    for (auto& [label, idx] : by_class) {
        rng.shuffle(std::span<std::size_t>(idx));
        const std::size_t q = std::min(quota[c++], idx.size());
        s.test.insert(s.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(q));
        s.train.insert(s.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(q), idx.end());
    }
    std::sort(s.test.begin(), s.test.end());
    std::sort(s.train.begin(), s.train.end());
    return s;
}

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, std::span<const std::size_t> rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

template <typename T>
std::vector<T> take(std::span<const T> v, std::span<const std::size_t> idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(v[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Classifiers

enum class ClassifierKind { NaiveBayes, LinearSvm, RandomForest, AdaBoost, Mlp };

inline constexpr std::array<ClassifierKind, 5> k_all_classifiers{
    ClassifierKind::NaiveBayes, ClassifierKind::LinearSvm, ClassifierKind::RandomForest,
    ClassifierKind::AdaBoost, ClassifierKind::Mlp};

inline std::string_view to_string(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::NaiveBayes: return "naive-bayes";
        case ClassifierKind::LinearSvm: return "linear-svm";
        case ClassifierKind::RandomForest: return "random-forest";
        case ClassifierKind::AdaBoost: return "adaboost";
        case ClassifierKind::Mlp: return "mlp";
    }
    return "?";
}

inline ClassifierKind parse_classifier(std::string_view s) {
    for (auto k : k_all_classifiers) {
        if (to_string(k) == s) return k;
    }
    throw InputError("unknown classifier kind: " + std::string(s));
}

struct Hyperparams {
    double nb_var_floor = 1e-9;
    double svm_c = 1.0;
    int svm_epochs = 1000;
    double svm_learning_rate = 1.0;
    int rf_trees = 100;
    int rf_max_depth = 0;  // 0 = unlimited
    int ab_rounds = 100;
    int mlp_hidden = 64;
    double mlp_learning_rate = 0.01;
    int mlp_epochs = 500;
    int mlp_batch = 16;
    double mlp_momentum = 0.9;
};

/// Column means and sample standard deviations; a zero sd is replaced by 1.
struct Standardizer {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd sd;

    static Standardizer fit(const Eigen::MatrixXd& x) {
        Standardizer s;
        s.mean = x.colwise().mean();
        s.sd.resize(x.cols());
        const double n = static_cast<double>(x.rows());
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double var = n > 1 ? (x.col(j).array() - s.mean(j)).square().sum() / (n - 1.0) : 0.0;
            s.sd(j) = var > 0 ? std::sqrt(var) : 1.0;
        }
        return s;
    }
    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
        return (x.rowwise() - mean).array().rowwise() / sd.array();
    }
};

/// Learned scoring function over standardized inputs: one score per class,
/// higher is better.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual Eigen::VectorXd scores(const Eigen::RowVectorXd& x) const = 0;
};

struct ClassifierModel {
    ClassifierKind kind = ClassifierKind::NaiveBayes;
    std::vector<std::string> classes;  // sorted; ties resolve to the earlier class
    Standardizer standardizer;
    std::shared_ptr<const Scorer> scorer;

    std::size_t dimension() const { return static_cast<std::size_t>(standardizer.mean.size()); }

    std::vector<std::size_t> predict_index(const Eigen::MatrixXd& x) const {
        if (static_cast<std::size_t>(x.cols()) != dimension()) {
            throw InputError("predict: expected " + std::to_string(dimension()) + " features, got " +
                             std::to_string(x.cols()));
        }
        const Eigen::MatrixXd z = standardizer.apply(x);
        std::vector<std::size_t> out;
        out.reserve(static_cast<std::size_t>(z.rows()));
        for (Eigen::Index i = 0; i < z.rows(); ++i) {
            const Eigen::VectorXd s = scorer->scores(z.row(i));
            Eigen::Index best = 0;
            for (Eigen::Index c = 1; c < s.size(); ++c) {
                if (s(c) > s(best)) best = c;
            }
            out.push_back(static_cast<std::size_t>(best));
        }
        return out;
    }

    std::vector<std::string> predict(const Eigen::MatrixXd& x) const {
        std::vector<std::string> out;
        for (auto i : predict_index(x)) out.push_back(classes[i]);
        return out;
    }
};

namespace detail {

// Gaussian naive Bayes -------------------------------------------------------

class NaiveBayes final : public Scorer {
public:
    NaiveBayes(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t k, double floor) {
        const Eigen::Index d = x.cols();
        mean_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), d);
        var_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), d);
        log_prior_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
        std::vector<double> count(k, 0.0);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            count[y[static_cast<std::size_t>(i)]] += 1.0;
            mean_.row(static_cast<Eigen::Index>(y[static_cast<std::size_t>(i)])) += x.row(i);
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] == 0) throw InputError("naive-bayes: class without training samples");
            mean_.row(static_cast<Eigen::Index>(c)) /= count[c];
        }
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const auto c = static_cast<Eigen::Index>(y[static_cast<std::size_t>(i)]);
            var_.row(c) += (x.row(i) - mean_.row(c)).array().square().matrix();
        }
        const double n = static_cast<double>(x.rows());
        for (std::size_t c = 0; c < k; ++c) {
            const auto ci = static_cast<Eigen::Index>(c);
            var_.row(ci) = (var_.row(ci) / count[c]).array().max(floor).matrix();
            log_prior_(ci) = std::log(count[c] / n);
        }
    }

    Eigen::VectorXd scores(const Eigen::RowVectorXd& x) const override {
        Eigen::VectorXd s = log_prior_;
        for (Eigen::Index c = 0; c < s.size(); ++c) {
            const Eigen::ArrayXd diff = (x - mean_.row(c)).array();
            const Eigen::ArrayXd var = var_.row(c).array();
            s(c) += -0.5 * ((2.0 * M_PI * var).log() + diff.square() / var).sum();
        }
        return s;
    }

private:
    Eigen::MatrixXd mean_, var_;
    Eigen::VectorXd log_prior_;
};

// One-vs-rest linear SVM ---------------------------------------------------------
//
// Per class c minimizes (lambda/2)|w|^2 + mean_i max(0, 1 - y_i (w.x_i + b))
// with lambda = 1 / (C n), by full-batch subgradient descent with step
// eta0 / sqrt(t). The iterate with the lowest objective is kept.

class LinearSvm final : public Scorer {
public:
    LinearSvm(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t k, const Hyperparams& hp) {
        const Eigen::Index d = x.cols();
        const double n = static_cast<double>(x.rows());
        const double lambda = 1.0 / (hp.svm_c * n);
        w_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), d);
        b_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
        for (std::size_t c = 0; c < k; ++c) {
            Eigen::VectorXd t(x.rows());
            for (Eigen::Index i = 0; i < x.rows(); ++i) t(i) = y[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
            Eigen::VectorXd w = Eigen::VectorXd::Zero(d), best_w = w;
            double b = 0.0, best_b = 0.0, best_obj = std::numeric_limits<double>::infinity();
            for (int epoch = 1; epoch <= hp.svm_epochs; ++epoch) {
                const Eigen::VectorXd margin = t.array() * ((x * w).array() + b);
                const double obj = 0.5 * lambda * w.squaredNorm() + (1.0 - margin.array()).max(0.0).sum() / n;
                if (obj < best_obj) {
                    best_obj = obj;
                    best_w = w;
                    best_b = b;
                }
                Eigen::VectorXd gw = lambda * w;
                double gb = 0.0;
                for (Eigen::Index i = 0; i < x.rows(); ++i) {
                    if (margin(i) < 1.0) {
                        gw -= (t(i) / n) * x.row(i).transpose();
                        gb -= t(i) / n;
                    }
                }
                const double eta = hp.svm_learning_rate / std::sqrt(static_cast<double>(epoch));
                w -= eta * gw;
                b -= eta * gb;
            }
            const Eigen::VectorXd margin = t.array() * ((x * w).array() + b);
            if (0.5 * lambda * w.squaredNorm() + (1.0 - margin.array()).max(0.0).sum() / n < best_obj) {
                best_w = w;
                best_b = b;
            }
            w_.row(static_cast<Eigen::Index>(c)) = best_w.transpose();
            b_(static_cast<Eigen::Index>(c)) = best_b;
        }
    }

    Eigen::VectorXd scores(const Eigen::RowVectorXd& x) const override { return w_ * x.transpose() + b_; }

private:
    Eigen::MatrixXd w_;
    Eigen::VectorXd b_;
};

// CART / random forest --------------------------------------------------------------

struct TreeNode {
    int feature = -1;  // -1 = leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    Eigen::VectorXd distribution;  // leaf class proportions
};

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
};

inline double gini(const Eigen::VectorXd& counts, double total) {
    if (total <= 0) return 0.0;
    return 1.0 - (counts.array() / total).square().sum();
}

/// Best weighted-Gini threshold split of `rows` on `feature` (midpoints
/// between distinct sorted values).
inline void best_threshold(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t k,
                           std::span<const std::size_t> rows, std::span<const double> weight, int feature,
                           SplitChoice& best) {
    std::vector<std::size_t> order(rows.begin(), rows.end());
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x(static_cast<Eigen::Index>(a), feature) < x(static_cast<Eigen::Index>(b), feature); });
    Eigen::VectorXd left = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    Eigen::VectorXd right = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    double total = 0.0;
    for (auto r : order) {
        right(static_cast<Eigen::Index>(y[r])) += weight[r];
        total += weight[r];
    }
    double wl = 0.0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const auto r = order[i];
        left(static_cast<Eigen::Index>(y[r])) += weight[r];
        right(static_cast<Eigen::Index>(y[r])) -= weight[r];
        wl += weight[r];
        const double v0 = x(static_cast<Eigen::Index>(r), feature);
        const double v1 = x(static_cast<Eigen::Index>(order[i + 1]), feature);
        if (!(v1 > v0)) continue;
        const double wr = total - wl;
        const double imp = (wl * gini(left, wl) + wr * gini(right, wr)) / total;
        if (imp < best.impurity - 1e-15) {
            best.impurity = imp;
            best.feature = feature;
            best.threshold = 0.5 * (v0 + v1);
        }
    }
}

class DecisionTree {
public:
    DecisionTree(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t k,
                 std::vector<std::size_t> rows, std::size_t max_features, int max_depth, Random& rng)
        : k_(k) {
        const std::vector<double> unit(static_cast<std::size_t>(x.rows()), 1.0);
        build(x, y, rows, unit, max_features, max_depth, 0, rng);
    }

    const Eigen::VectorXd& distribution(const Eigen::RowVectorXd& x) const {
        int node = 0;
        while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
            const auto& n = nodes_[static_cast<std::size_t>(node)];
            node = x(n.feature) <= n.threshold ? n.left : n.right;
        }
        return nodes_[static_cast<std::size_t>(node)].distribution;
    }

private:
    int build(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::vector<std::size_t> rows,
              std::span<const double> unit, std::size_t max_features, int max_depth, int depth, Random& rng) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k_));
        for (auto r : rows) counts(static_cast<Eigen::Index>(y[r])) += 1.0;
        const double total = static_cast<double>(rows.size());
        const double node_gini = gini(counts, total);
        if (node_gini <= 0.0 || rows.size() < 2 || (max_depth > 0 && depth >= max_depth)) {
            nodes_[static_cast<std::size_t>(id)].distribution = counts / total;
            return id;
        }
        std::vector<int> features(static_cast<std::size_t>(x.cols()));
        std::iota(features.begin(), features.end(), 0);
        const std::size_t m = std::min(max_features, features.size());
        for (std::size_t i = 0; i < m; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.uniform_index(features.size() - i));
            std::swap(features[i], features[j]);
        }
        SplitChoice best;
        for (std::size_t i = 0; i < m; ++i) best_threshold(x, y, k_, rows, unit, features[i], best);
        if (best.feature < 0 || best.impurity >= node_gini) {
            nodes_[static_cast<std::size_t>(id)].distribution = counts / total;
            return id;
        }
        std::vector<std::size_t> lrows, rrows;
        for (auto r : rows) (x(static_cast<Eigen::Index>(r), best.feature) <= best.threshold ? lrows : rrows).push_back(r);
        const int l = build(x, y, std::move(lrows), unit, max_features, max_depth, depth + 1, rng);
        const int r = build(x, y, std::move(rrows), unit, max_features, max_depth, depth + 1, rng);
        auto& node = nodes_[static_cast<std::size_t>(id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    std::size_t k_;
    std::vector<TreeNode> nodes_;
};

/// Bagged CART trees with sqrt(p) candidate features per split. Tree t draws
/// from its own stream so trees are independent of build order.
class RandomForest final : public Scorer {
public:
    RandomForest(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t k, const Hyperparams& hp,
                 std::uint64_t seed)
        : k_(k) {
        const auto n = static_cast<std::size_t>(x.rows());
        const auto max_features = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(x.cols())))));
        for (int t = 0; t < hp.rf_trees; ++t) {
            Random rng(seed, Random::stream_id("forest") + static_cast<std::uint32_t>(t));
            std::vector<std::size_t> rows(n);
            for (auto& r : rows) r = static_cast<std::size_t>(rng.uniform_index(n));
            trees_.emplace_back(x, y, k, std::move(rows), max_features, hp.rf_max_depth, rng);
        }
    }

    Eigen::VectorXd scores(const Eigen::RowVectorXd& x) const override {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k_));
        for (const auto& t : trees_) s += t.distribution(x);
        return s / static_cast<double>(trees_.size());
    }

private:
    std::size_t k_;
    std::vector<DecisionTree> trees_;
};

// SAMME AdaBoost over decision stumps ---------------------------------------------

struct Stump {
    int feature = 0;
    double threshold = 0.0;
    std::size_t left_class = 0, right_class = 0;
    double alpha = 0.0;

    std::size_t predict(const Eigen::RowVectorXd& x) const {
        return x(feature) <= threshold ? left_class : right_class;
    }
};

/// Stump minimizing weighted error; each side predicts its heaviest class.
inline Stump fit_stump(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t k,
                       std::span<const double> w) {
    Stump best;
    double best_err = std::numeric_limits<double>::infinity();
    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<std::size_t> order(n);
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return x(static_cast<Eigen::Index>(a), f) < x(static_cast<Eigen::Index>(b), f); });
        Eigen::VectorXd left = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
        Eigen::VectorXd right = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
        for (auto r : order) right(static_cast<Eigen::Index>(y[r])) += w[r];
        const double total = right.sum();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const auto r = order[i];
            left(static_cast<Eigen::Index>(y[r])) += w[r];
            right(static_cast<Eigen::Index>(y[r])) -= w[r];
            const double v0 = x(static_cast<Eigen::Index>(r), f), v1 = x(static_cast<Eigen::Index>(order[i + 1]), f);
            if (!(v1 > v0)) continue;
            Eigen::Index lc = 0, rc = 0;
            left.maxCoeff(&lc);
            right.maxCoeff(&rc);
            const double err = total - left(lc) - right(rc);
            if (err < best_err - 1e-15) {
                best_err = err;
                best.feature = static_cast<int>(f);
                best.threshold = 0.5 * (v0 + v1);
                best.left_class = static_cast<std::size_t>(lc);
                best.right_class = static_cast<std::size_t>(rc);
            }
        }
    }
    if (!std::isfinite(best_err)) {  // every feature constant: predict the heaviest class
        Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
        for (std::size_t i = 0; i < n; ++i) mass(static_cast<Eigen::Index>(y[i])) += w[i];
        Eigen::Index c = 0;
        mass.maxCoeff(&c);
        best.threshold = std::numeric_limits<double>::infinity();
        best.left_class = best.right_class = static_cast<std::size_t>(c);
    }
    return best;
}

class AdaBoost final : public Scorer {
public:
    AdaBoost(const Eigen::MatrixXd& x, std::span<const std::size_t> y, std::size_t k, const Hyperparams& hp)
        : k_(k) {
        const auto n = static_cast<std::size_t>(x.rows());
        std::vector<double> w(n, 1.0 / static_cast<double>(n));
        const double kd = static_cast<double>(k);
        for (int round = 0; round < hp.ab_rounds; ++round) {
            Stump s = fit_stump(x, y, k, w);
            double err = 0.0;
            std::vector<bool> miss(n);
            for (std::size_t i = 0; i < n; ++i) {
                miss[i] = s.predict(x.row(static_cast<Eigen::Index>(i))) != y[i];
                if (miss[i]) err += w[i];
            }
            if (err >= 1.0 - 1.0 / kd) {
                if (stumps_.empty()) {
                    s.alpha = 1.0;
                    stumps_.push_back(s);
                }
                break;
            }
            if (err <= 1e-12) {
                s.alpha = std::log((1.0 - 1e-12) / 1e-12) + std::log(kd - 1.0);
                stumps_.push_back(s);
                break;
            }
            s.alpha = std::log((1.0 - err) / err) + std::log(kd - 1.0);
            stumps_.push_back(s);
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (miss[i]) w[i] *= std::exp(s.alpha);
                total += w[i];
            }
            for (auto& wi : w) wi /= total;
        }
    }

    Eigen::VectorXd scores(const Eigen::RowVectorXd& x) const override { return staged_scores(x, stumps_.size()); }

    Eigen::VectorXd staged_scores(const Eigen::RowVectorXd& x, std::size_t rounds) const {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k_));
        for (std::size_t r = 0; r < std::min(rounds, stumps_.size()); ++r) {
            s(static_cast<Eigen::Index>(stumps_[r].predict(x))) += stumps_[r].alpha;
        }
        return s;
    }

    std::size_t rounds() const { return stumps_.size(); }

private:
    std::size_t k_;
    std::vector<Stump> stumps_;
};

}  // namespace detail

// Multi-layer perceptron ------------------------------------------------------------
//
// One tanh hidden layer and a softmax output, trained on mean cross-entropy
// with mini-batch gradient descent plus momentum.

class Mlp final : public Scorer {
public:
    Mlp(std::size_t inputs, std::size_t hidden, std::size_t outputs, Random& rng)
        : w1_(static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(inputs)),
          b1_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden))),
          w2_(static_cast<Eigen::Index>(outputs), static_cast<Eigen::Index>(hidden)),
          b2_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(outputs))) {
        const double r1 = std::sqrt(6.0 / static_cast<double>(inputs + hidden));
        const double r2 = std::sqrt(6.0 / static_cast<double>(hidden + outputs));
        for (Eigen::Index i = 0; i < w1_.size(); ++i) w1_.data()[i] = rng.uniform(-r1, r1);
        for (Eigen::Index i = 0; i < w2_.size(); ++i) w2_.data()[i] = rng.uniform(-r2, r2);
    }

    std::size_t parameter_count() const {
        return static_cast<std::size_t>(w1_.size() + b1_.size() + w2_.size() + b2_.size());
    }

    Eigen::VectorXd parameters() const {
        Eigen::VectorXd p(static_cast<Eigen::Index>(parameter_count()));
        Eigen::Index o = 0;
        for (const Eigen::MatrixXd* m : {&w1_, &w2_}) {
            p.segment(o, m->size()) = Eigen::Map<const Eigen::VectorXd>(m->data(), m->size());
            o += m->size();
        }
        for (const Eigen::VectorXd* v : {&b1_, &b2_}) {
            p.segment(o, v->size()) = *v;
            o += v->size();
        }
        return p;
    }

    void set_parameters(const Eigen::VectorXd& p) {
        Eigen::Index o = 0;
        for (Eigen::MatrixXd* m : {&w1_, &w2_}) {
            Eigen::Map<Eigen::VectorXd>(m->data(), m->size()) = p.segment(o, m->size());
            o += m->size();
        }
        for (Eigen::VectorXd* v : {&b1_, &b2_}) {
            *v = p.segment(o, v->size());
            o += v->size();
        }
    }

    /// Mean cross-entropy over rows of `x` with integer targets.
    double loss(const Eigen::MatrixXd& x, std::span<const std::size_t> y) const {
        double total = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const Eigen::VectorXd p = probabilities(x.row(i));
            total -= std::log(std::max(p(static_cast<Eigen::Index>(y[static_cast<std::size_t>(i)])), 1e-300));
        }
        return total / static_cast<double>(x.rows());
    }

    /// Gradient of `loss` in the layout of `parameters()`.
    Eigen::VectorXd gradient(const Eigen::MatrixXd& x, std::span<const std::size_t> y) const {
        Eigen::MatrixXd gw1 = Eigen::MatrixXd::Zero(w1_.rows(), w1_.cols());
        Eigen::MatrixXd gw2 = Eigen::MatrixXd::Zero(w2_.rows(), w2_.cols());
        Eigen::VectorXd gb1 = Eigen::VectorXd::Zero(b1_.size());
        Eigen::VectorXd gb2 = Eigen::VectorXd::Zero(b2_.size());
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const Eigen::VectorXd in = x.row(i).transpose();
            const Eigen::VectorXd h = (w1_ * in + b1_).array().tanh();
            Eigen::VectorXd delta2 = softmax(w2_ * h + b2_);
            delta2(static_cast<Eigen::Index>(y[static_cast<std::size_t>(i)])) -= 1.0;
            const Eigen::VectorXd delta1 = (w2_.transpose() * delta2).array() * (1.0 - h.array().square());
            gw2 += delta2 * h.transpose();
            gb2 += delta2;
            gw1 += delta1 * in.transpose();
            gb1 += delta1;
        }
        Mlp g = *this;
        g.w1_ = gw1;
        g.w2_ = gw2;
        g.b1_ = gb1;
        g.b2_ = gb2;
        return g.parameters() / static_cast<double>(x.rows());
    }

    void train(const Eigen::MatrixXd& x, std::span<const std::size_t> y, const Hyperparams& hp, Random& rng) {
        std::vector<std::size_t> order(static_cast<std::size_t>(x.rows()));
        std::iota(order.begin(), order.end(), 0);
        Eigen::VectorXd velocity = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count()));
        const auto batch = static_cast<std::size_t>(std::max(1, hp.mlp_batch));
        for (int epoch = 0; epoch < hp.mlp_epochs; ++epoch) {
            rng.shuffle(std::span<std::size_t>(order));
            for (std::size_t start = 0; start < order.size(); start += batch) {
                const std::size_t end = std::min(order.size(), start + batch);
                const std::span<const std::size_t> idx(order.data() + start, end - start);
                const Eigen::MatrixXd xb = take_rows(x, idx);
                std::vector<std::size_t> yb;
                for (auto i : idx) yb.push_back(y[i]);
                velocity = hp.mlp_momentum * velocity - hp.mlp_learning_rate * gradient(xb, yb);
                set_parameters(parameters() + velocity);
            }
        }
    }

    Eigen::VectorXd probabilities(const Eigen::RowVectorXd& x) const {
        const Eigen::VectorXd h = (w1_ * x.transpose() + b1_).array().tanh();
        return softmax(w2_ * h + b2_);
    }

    Eigen::VectorXd scores(const Eigen::RowVectorXd& x) const override { return probabilities(x); }

private:
    static Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
        const Eigen::ArrayXd e = (z.array() - z.maxCoeff()).exp();
        return e / e.sum();
    }

    Eigen::MatrixXd w1_;
    Eigen::VectorXd b1_;
    Eigen::MatrixXd w2_;
    Eigen::VectorXd b2_;
};

/// Fits one classifier on `x` (raw features; standardized internally with
/// training-set statistics).
inline ClassifierModel fit(ClassifierKind kind, const Eigen::MatrixXd& x, std::span<const std::string> labels,
                           const Hyperparams& hp = {}, std::uint64_t seed = 0) {
    if (static_cast<std::size_t>(x.rows()) != labels.size()) throw InputError("fit: row/label count mismatch");
    ClassifierModel model;
    model.kind = kind;
    model.classes.assign(labels.begin(), labels.end());
    std::sort(model.classes.begin(), model.classes.end());
    model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
    if (model.classes.size() < 2) throw InputError("fit: need at least 2 classes in the training set");
    std::vector<std::size_t> y;
    for (const auto& l : labels) {
        y.push_back(static_cast<std::size_t>(std::lower_bound(model.classes.begin(), model.classes.end(), l) -
                                             model.classes.begin()));
    }
    model.standardizer = Standardizer::fit(x);
    const Eigen::MatrixXd z = model.standardizer.apply(x);
    const std::size_t k = model.classes.size();
    switch (kind) {
        case ClassifierKind::NaiveBayes:
            model.scorer = std::make_shared<detail::NaiveBayes>(z, y, k, hp.nb_var_floor);
            break;
        case ClassifierKind::LinearSvm:
            model.scorer = std::make_shared<detail::LinearSvm>(z, y, k, hp);
            break;
        case ClassifierKind::RandomForest:
            model.scorer = std::make_shared<detail::RandomForest>(z, y, k, hp, seed);
            break;
        case ClassifierKind::AdaBoost:
            model.scorer = std::make_shared<detail::AdaBoost>(z, y, k, hp);
            break;
        case ClassifierKind::Mlp: {
            Random rng(seed, Random::stream_id("mlp"));
            auto mlp = std::make_shared<Mlp>(static_cast<std::size_t>(z.cols()),
                                             static_cast<std::size_t>(hp.mlp_hidden), k, rng);
            mlp->train(z, y, hp, rng);
            model.scorer = std::move(mlp);
            break;
        }
    }
    return model;
}

// ---------------------------------------------------------------------------
// Metrics

struct ClassMetrics {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct ClassificationReport {
    std::vector<ClassMetrics> per_class;
    double accuracy = 0.0;
    ClassMetrics macro_avg{"macro avg"};
    ClassMetrics weighted_avg{"weighted avg"};
    std::vector<std::vector<std::size_t>> confusion;  // [truth][predicted]
    std::vector<std::string> flags;
};

/// Per-class precision/recall/F1 over the union of labels (sorted). Undefined
/// ratios are reported as 0 and flagged.
inline ClassificationReport metrics(std::span<const std::string> predicted, std::span<const std::string> truth) {
    if (predicted.size() != truth.size()) throw InputError("metrics: length mismatch");
    std::vector<std::string> classes(truth.begin(), truth.end());
    classes.insert(classes.end(), predicted.begin(), predicted.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    const std::size_t k = classes.size();
    auto index = [&](const std::string& l) {
        return static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), l) - classes.begin());
    };
    ClassificationReport r;
    r.confusion.assign(k, std::vector<std::size_t>(k, 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++r.confusion[index(truth[i])][index(predicted[i])];
        if (truth[i] == predicted[i]) ++correct;
    }
    const double n = static_cast<double>(truth.size());
    r.accuracy = truth.empty() ? 0.0 : static_cast<double>(correct) / n;
    if (truth.empty()) r.flags.push_back("accuracy undefined on an empty set");
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t tp = r.confusion[c][c], pred = 0, actual = 0;
        for (std::size_t o = 0; o < k; ++o) {
            pred += r.confusion[o][c];
            actual += r.confusion[c][o];
        }
        ClassMetrics m{classes[c]};
        m.support = actual;
        if (pred > 0) m.precision = static_cast<double>(tp) / static_cast<double>(pred);
        else r.flags.push_back("precision undefined for " + classes[c] + " (no predictions), set to 0");
        if (actual > 0) m.recall = static_cast<double>(tp) / static_cast<double>(actual);
        else r.flags.push_back("recall undefined for " + classes[c] + " (no true samples), set to 0");
        if (m.precision + m.recall > 0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        else r.flags.push_back("f1 undefined for " + classes[c] + ", set to 0");
        r.per_class.push_back(m);
    }
    for (const auto& m : r.per_class) {
        r.macro_avg.precision += m.precision / static_cast<double>(k);
        r.macro_avg.recall += m.recall / static_cast<double>(k);
        r.macro_avg.f1 += m.f1 / static_cast<double>(k);
        if (n > 0) {
            const double share = static_cast<double>(m.support) / n;
            r.weighted_avg.precision += m.precision * share;
            r.weighted_avg.recall += m.recall * share;
            r.weighted_avg.f1 += m.f1 * share;
        }
    }
    r.macro_avg.support = r.weighted_avg.support = truth.size();
    return r;
}

// ---------------------------------------------------------------------------
// Ward hierarchical clustering

struct Merge {
    std::size_t a = 0, b = 0;  // node ids: leaves 0..n-1, merge m creates node n+m
    double height = 0.0;
    std::size_t size = 0;
};

struct Dendrogram {
    std::vector<std::string> leaf_labels;
    std::vector<Merge> merges;

    std::size_t leaves() const { return leaf_labels.size(); }

    /// Leaf order of a left-to-right drawing (a before b at every merge).
    std::vector<std::size_t> leaf_order() const {
        const std::size_t n = leaves();
        if (merges.empty()) {
            std::vector<std::size_t> o(n);
            std::iota(o.begin(), o.end(), 0);
            return o;
        }
        std::vector<std::size_t> out, stack{n + merges.size() - 1};
        while (!stack.empty()) {
            const std::size_t node = stack.back();
            stack.pop_back();
            if (node < n) {
                out.push_back(node);
            } else {
                const auto& m = merges[node - n];
                stack.push_back(m.b);
                stack.push_back(m.a);
            }
        }
        return out;
    }
};

/// Ward linkage via the Lance-Williams update on squared Euclidean distances.
/// Reported heights are the square roots (the usual dendrogram scale). Ties
/// pick the pair with the smallest node ids. Rows are used as given; callers
/// standardize first (see `stats::zscore`).
inline Dendrogram hca_ward(const Eigen::MatrixXd& x, std::vector<std::string> leaf_labels = {}) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (n < 2) throw InputError("hca: need at least 2 samples");
    if (leaf_labels.empty()) {
        for (std::size_t i = 0; i < n; ++i) leaf_labels.push_back(std::to_string(i));
    }
    Dendrogram d{std::move(leaf_labels), {}};
    const std::size_t total = 2 * n - 1;
    Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = (x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).squaredNorm();
            dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dist(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    }
    std::vector<std::size_t> active(n), size(total, 1);
    std::iota(active.begin(), active.end(), 0);
    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < active.size(); ++p) {
            for (std::size_t q = p + 1; q < active.size(); ++q) {
                const double v = dist(static_cast<Eigen::Index>(active[p]), static_cast<Eigen::Index>(active[q]));
                if (v < best) {
                    best = v;
                    bi = p;
                    bj = q;
                }
            }
        }
        const std::size_t a = active[bi], b = active[bj], node = n + step;
        const double na = static_cast<double>(size[a]), nb = static_cast<double>(size[b]);
        size[node] = size[a] + size[b];
        for (auto c : active) {
            if (c == a || c == b) continue;
            const double nc = static_cast<double>(size[c]);
            const auto ci = static_cast<Eigen::Index>(c);
            const double v = ((na + nc) * dist(ci, static_cast<Eigen::Index>(a)) +
                              (nb + nc) * dist(ci, static_cast<Eigen::Index>(b)) - nc * best) /
                             (na + nb + nc);
            dist(ci, static_cast<Eigen::Index>(node)) = dist(static_cast<Eigen::Index>(node), ci) = std::max(0.0, v);
        }
        d.merges.push_back({a, b, std::sqrt(std::max(0.0, best)), size[node]});
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
        active.push_back(node);
    }
    return d;
}

struct Contingency {
    std::vector<std::string> classes;             // sorted
    std::vector<std::vector<std::size_t>> counts;  // [cluster][class]
};

struct Cut {
    std::vector<std::size_t> labels;  // per leaf, clusters numbered by first leaf
    std::size_t clusters = 0;
};

/// Cuts the tree into k clusters by undoing the last k - 1 merges.
inline Cut cut_tree(const Dendrogram& d, std::size_t k) {
    const std::size_t n = d.leaves();
    if (k < 1 || k > n) throw InputError("cut_tree: need 1 <= k <= n");
    std::vector<std::size_t> parent(2 * n - 1);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (std::size_t m = 0; m < n - k; ++m) {
        const std::size_t node = n + m;
        parent[find(d.merges[m].a)] = node;
        parent[find(d.merges[m].b)] = node;
    }
    Cut out;
    out.labels.resize(n);
    std::map<std::size_t, std::size_t> ids;
    for (std::size_t i = 0; i < n; ++i) {
        const auto root = find(i);
        auto [it, inserted] = ids.emplace(root, ids.size());
        out.labels[i] = it->second;
    }
    out.clusters = ids.size();
    return out;
}

inline Contingency contingency(const Cut& cut, std::span<const std::string> labels) {
    Contingency c;
    c.classes.assign(labels.begin(), labels.end());
    std::sort(c.classes.begin(), c.classes.end());
    c.classes.erase(std::unique(c.classes.begin(), c.classes.end()), c.classes.end());
    c.counts.assign(cut.clusters, std::vector<std::size_t>(c.classes.size(), 0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto j = static_cast<std::size_t>(std::lower_bound(c.classes.begin(), c.classes.end(), labels[i]) - c.classes.begin());
        ++c.counts[cut.labels[i]][j];
    }
    return c;
}

}  // namespace styloscope::learn
