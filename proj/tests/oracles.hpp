#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary. Deliberately naive: counting, brute force, closed forms.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "styloscope/factor.hpp"
#include "styloscope/stats.hpp"
#include "support.hpp"

namespace oracles {

// Kruskal-Wallis H with ranks by counting: rank = #smaller + (#equal + 1) / 2.
inline double kruskal_h(const std::vector<std::vector<double>>& groups) {
    std::vector<double> all;
    for (const auto& g : groups) all.insert(all.end(), g.begin(), g.end());
    const double n = static_cast<double>(all.size());
    auto rank = [&](double v) {
        double less = 0, equal = 0;
        for (double u : all) {
            less += u < v;
            equal += u == v;
        }
        return less + (equal + 1.0) / 2.0;
    };
    double s = 0;
    for (const auto& g : groups) {
        double r = 0;
        for (double v : g) r += rank(v);
        s += r * r / static_cast<double>(g.size());
    }
    double ties = 0;
    std::vector<double> distinct;
    for (double v : all) {
        if (std::find(distinct.begin(), distinct.end(), v) != distinct.end()) continue;
        distinct.push_back(v);
        const double t = static_cast<double>(std::count(all.begin(), all.end(), v));
        ties += t * t * t - t;
    }
    return (12.0 / (n * (n + 1.0)) * s - 3.0 * (n + 1.0)) / (1.0 - ties / (n * n * n - n));
}

inline styloscope::stats::CorrMatrix corr_of(const Eigen::MatrixXd& r) {
    styloscope::stats::CorrMatrix c;
    c.r = r;
    for (Eigen::Index j = 0; j < r.rows(); ++j) c.ids.push_back("F" + std::to_string(j));
    return c;
}

inline double det3(const Eigen::Matrix3d& a) {
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

// KMO from the adjugate inverse.
inline double kmo3(const Eigen::Matrix3d& r) {
    Eigen::Matrix3d adj;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
            adj(i, j) = r(r0, c0) * r(r1, c1) - r(r0, c1) * r(r1, c0);
        }
    }
    const Eigen::Matrix3d inv = adj / det3(r);
    double sr = 0, sq = 0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (i == j) continue;
            sr += r(i, j) * r(i, j);
            const double q = -inv(i, j) / std::sqrt(inv(i, i) * inv(j, j));
            sq += q * q;
        }
    }
    return sr / (sr + sq);
}

inline double bartlett_chi2(double det, double n, double p) { return -(n - 1 - (2 * p + 5) / 6.0) * std::log(det); }

// Naive Ward: recompute every cluster-pair distance from centroids each step.
inline std::vector<double> ward_heights(const Eigen::MatrixXd& x) {
    std::vector<std::vector<Eigen::Index>> clusters;
    for (Eigen::Index i = 0; i < x.rows(); ++i) clusters.push_back({i});
    auto centroid = [&](const std::vector<Eigen::Index>& c) {
        Eigen::RowVectorXd m = Eigen::RowVectorXd::Zero(x.cols());
        for (auto i : c) m += x.row(i);
        return Eigen::RowVectorXd(m / static_cast<double>(c.size()));
    };
    std::vector<double> heights;
    while (clusters.size() > 1) {
        double best = 1e300;
        std::size_t bi = 0, bj = 1;
        for (std::size_t a = 0; a < clusters.size(); ++a) {
            for (std::size_t b = a + 1; b < clusters.size(); ++b) {
                const double na = static_cast<double>(clusters[a].size()), nb = static_cast<double>(clusters[b].size());
                const double d = std::sqrt(2.0 * na * nb / (na + nb)) * (centroid(clusters[a]) - centroid(clusters[b])).norm();
                if (d < best) {
                    best = d;
                    bi = a;
                    bj = b;
                }
            }
        }
        clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
        heights.push_back(best);
    }
    return heights;
}

// |congruence| per true factor under the column permutation maximising the minimum.
inline std::vector<double> aligned_congruence(const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth) {
    const auto k = static_cast<int>(truth.cols());
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> best;
    double best_min = -1;
    do {
        std::vector<double> c;
        for (int j = 0; j < k; ++j) c.push_back(std::abs(styloscope::factor::congruence(est.col(perm[j]), truth.col(j))));
        const double mn = *std::min_element(c.begin(), c.end());
        if (mn > best_min) {
            best_min = mn;
            best = c;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Planted k-factor model: p features, each loading on factor (i mod k).
struct Planted {
    Eigen::MatrixXd x;
    Eigen::MatrixXd lambda;
};

inline Planted planted_factors(Eigen::Index n, Eigen::Index p, Eigen::Index k, styloscope::Random& rng) {
    Planted out{Eigen::MatrixXd(), Eigen::MatrixXd::Zero(p, k)};
    for (Eigen::Index i = 0; i < p; ++i) out.lambda(i, i % k) = 0.7 + 0.1 * static_cast<double>(i % 3);
    out.x = testing_support::gaussian(n, k, rng) * out.lambda.transpose();
    for (Eigen::Index i = 0; i < p; ++i) {
        const double u = std::sqrt(1.0 - out.lambda.row(i).squaredNorm());
        out.x.col(i) += u * testing_support::gaussian(n, 1, rng);
    }
    return out;
}

// "id<TAB>count" lines; '#' comments.
inline std::map<std::string, double> read_annotation(const std::filesystem::path& p) {
    std::map<std::string, double> out;
    std::istringstream in(testing_support::slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        out[line.substr(0, tab)] = std::stod(line.substr(tab + 1));
    }
    return out;
}

}  // namespace oracles
