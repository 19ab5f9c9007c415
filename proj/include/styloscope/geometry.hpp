#pragma once

// Euclidean distance analysis and exact t-SNE.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "styloscope/csv.hpp"
#include "styloscope/error.hpp"
#include "styloscope/random.hpp"

namespace styloscope::geometry {

inline Eigen::MatrixXd euclidean_matrix(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (x.row(i) - x.row(j)).norm();
    }
    return d;
}

inline void write_distance_csv(std::ostream& out, const Eigen::MatrixXd& d, std::span<const std::string> ids) {
    csv::Row header{"sample"};
    header.insert(header.end(), ids.begin(), ids.end());
    csv::write_row(out, header);
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        csv::Row row{ids[static_cast<std::size_t>(i)]};
        for (Eigen::Index j = 0; j < d.cols(); ++j) row.push_back(csv::format_double(d(i, j)));
        csv::write_row(out, row);
    }
}

struct GroupDistance {
    std::string a, b;
    double mean = 0.0;
    std::size_t pairs = 0;
};

/// Mean cross-group distance for every unordered pair of groups. Groups are
/// taken in the given order (sorted labels by default) and pairs are listed
/// (g0,g1), (g0,g2), ..., (g1,g2), ...
inline std::vector<GroupDistance> group_mean_distances(const Eigen::MatrixXd& d, std::span<const std::string> labels,
                                                       std::vector<std::string> groups = {}) {
    if (groups.empty()) {
        groups.assign(labels.begin(), labels.end());
        std::sort(groups.begin(), groups.end());
        groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
    }
    if (groups.size() < 2) throw InputError("group_mean_distances: need at least 2 groups");
    std::vector<std::vector<Eigen::Index>> members(groups.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto it = std::find(groups.begin(), groups.end(), labels[i]);
        if (it != groups.end()) members[static_cast<std::size_t>(it - groups.begin())].push_back(static_cast<Eigen::Index>(i));
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (members[g].empty()) throw InputError("group_mean_distances: group '" + groups[g] + "' has no samples");
    }
    std::vector<GroupDistance> out;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (std::size_t h = g + 1; h < groups.size(); ++h) {
            double sum = 0.0;
            for (auto i : members[g]) {
                for (auto j : members[h]) sum += d(i, j);
            }
            const std::size_t pairs = members[g].size() * members[h].size();
            out.push_back({groups[g], groups[h], sum / static_cast<double>(pairs), pairs});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// t-SNE

struct TsneParams {
    double perplexity = 30.0;
    int iterations = 1000;
    double learning_rate = 200.0;
    double early_exaggeration = 12.0;
    int exaggeration_iters = 250;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    int momentum_switch = 250;
    int kl_every = 50;
    double entropy_tol = 1e-5;
};

struct Calibration {
    Eigen::MatrixXd conditional;  // row i = p_{j|i}
    Eigen::VectorXd beta;         // precision 1 / (2 sigma_i^2)
    Eigen::VectorXd entropy;      // bits
};

/// Shannon entropy (bits) of a probability row, ignoring zeros.
inline double entropy_bits(const Eigen::VectorXd& p) {
    double h = 0.0;
    for (Eigen::Index j = 0; j < p.size(); ++j) {
        if (p(j) > 0) h -= p(j) * std::log2(p(j));
    }
    return h;
}

/// Per-point bisection on the Gaussian precision so that the entropy of the
/// conditional affinities equals log2(perplexity).
inline Calibration calibrate(const Eigen::MatrixXd& sq_dist, double perplexity, double tol = 1e-5, int max_iter = 200) {
    const Eigen::Index n = sq_dist.rows();
    const double target = std::log2(perplexity);
    Calibration c{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Ones(n), Eigen::VectorXd::Zero(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        double dmin = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) dmin = std::min(dmin, sq_dist(i, j));
        }
        auto row_for = [&](double beta) {
            Eigen::VectorXd p(n);
            for (Eigen::Index j = 0; j < n; ++j) p(j) = j == i ? 0.0 : std::exp(-beta * (sq_dist(i, j) - dmin));
            return Eigen::VectorXd(p / p.sum());
        };
        double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
        Eigen::VectorXd p = row_for(beta);
        double h = entropy_bits(p);
        for (int it = 0; it < max_iter && std::abs(h - target) > tol; ++it) {
            if (h > target) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
            } else {
                hi = beta;
                beta = 0.5 * (beta + lo);
            }
            p = row_for(beta);
            h = entropy_bits(p);
        }
        c.conditional.row(i) = p.transpose();
        c.beta(i) = beta;
        c.entropy(i) = h;
    }
    return c;
}

inline Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (x.row(i) - x.row(j)).squaredNorm();
    }
    return d;
}

/// Symmetrized joint affinities (p_{j|i} + p_{i|j}) / 2n, floored at 1e-12.
inline Eigen::MatrixXd joint_affinities(const Calibration& c) {
    const Eigen::Index n = c.conditional.rows();
    Eigen::MatrixXd p = (c.conditional + c.conditional.transpose()) / (2.0 * static_cast<double>(n));
    p = p.array().max(1e-12);
    p.diagonal().setZero();
    return p;
}

/// Student-t similarities and their normalizer.
inline Eigen::MatrixXd student_kernel(const Eigen::MatrixXd& y) {
    const Eigen::Index n = y.rows();
    Eigen::MatrixXd num = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) num(i, j) = num(j, i) = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
    }
    return num;
}

inline double tsne_kl(const Eigen::MatrixXd& p, const Eigen::MatrixXd& y) {
    const Eigen::MatrixXd num = student_kernel(y);
    const double z = num.sum();
    double kl = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            if (i == j || p(i, j) <= 0) continue;
            kl += p(i, j) * std::log(p(i, j) / std::max(num(i, j) / z, 1e-300));
        }
    }
    return kl;
}

/// dKL/dy_i = 4 sum_j (p_ij - q_ij) (y_i - y_j) / (1 + |y_i - y_j|^2).
inline Eigen::MatrixXd tsne_gradient(const Eigen::MatrixXd& p, const Eigen::MatrixXd& y) {
    const Eigen::MatrixXd num = student_kernel(y);
    const double z = num.sum();
    Eigen::MatrixXd w = (p - num / z).cwiseProduct(num);
    w.diagonal().setZero();
    const Eigen::VectorXd row_sum = w.rowwise().sum();
    return 4.0 * (row_sum.asDiagonal() * y - w * y);
}

struct KlCheckpoint {
    int iteration = 0;
    double kl = 0.0;
};

struct Embedding2D {
    Eigen::MatrixXd coords;  // n x 2
    std::vector<KlCheckpoint> kl_history;
    double final_kl = 0.0;
    std::uint64_t seed = 0;
    TsneParams params;
    Eigen::VectorXd entropy;  // calibrated entropy per point (bits)
};

/// Exact t-SNE to two dimensions. KL is recorded on the unexaggerated
/// affinities at iteration 0 and every `kl_every` iterations.
inline Embedding2D tsne(const Eigen::MatrixXd& x, const TsneParams& params = {}, std::uint64_t seed = 0) {
    const Eigen::Index n = x.rows();
    if (n < 4) throw InputError("tsne: need at least 4 samples");
    if (!(params.perplexity > 0) || params.perplexity >= static_cast<double>(n - 1) / 3.0) {
        throw InputError("tsne: perplexity must be below (n - 1) / 3 = " +
                         csv::format_double(static_cast<double>(n - 1) / 3.0));
    }
    const Calibration cal = calibrate(squared_distances(x), params.perplexity, params.entropy_tol);
    const Eigen::MatrixXd p = joint_affinities(cal);

    Embedding2D e;
    e.seed = seed;
    e.params = params;
    e.entropy = cal.entropy;
    e.coords.resize(n, 2);
    Random rng(seed, Random::stream_id("tsne"));
    for (Eigen::Index i = 0; i < n; ++i) {
        e.coords(i, 0) = rng.normal(0.0, 1e-2);
        e.coords(i, 1) = rng.normal(0.0, 1e-2);
    }
    Eigen::MatrixXd update = Eigen::MatrixXd::Zero(n, 2);
    Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
    e.kl_history.push_back({0, tsne_kl(p, e.coords)});
    for (int it = 1; it <= params.iterations; ++it) {
        const bool early = it <= params.exaggeration_iters;
        const Eigen::MatrixXd grad = tsne_gradient(early ? Eigen::MatrixXd(p * params.early_exaggeration) : p, e.coords);
        const double momentum = it <= params.momentum_switch ? params.initial_momentum : params.final_momentum;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index d = 0; d < 2; ++d) {
                const bool same = (grad(i, d) > 0) == (update(i, d) > 0);
                gains(i, d) = std::max(0.01, same ? gains(i, d) * 0.8 : gains(i, d) + 0.2);
                update(i, d) = momentum * update(i, d) - params.learning_rate * gains(i, d) * grad(i, d);
            }
        }
        e.coords += update;
        e.coords.rowwise() -= e.coords.colwise().mean();
        if (params.kl_every > 0 && it % params.kl_every == 0) e.kl_history.push_back({it, tsne_kl(p, e.coords)});
    }
    e.final_kl = tsne_kl(p, e.coords);
    if (e.kl_history.back().iteration != params.iterations) e.kl_history.push_back({params.iterations, e.final_kl});
    return e;
}

/// Fraction of points whose nearest other point shares their label.
inline double nearest_neighbor_accuracy(const Eigen::MatrixXd& y, std::span<const std::string> labels) {
    const Eigen::Index n = y.rows();
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = (y.row(i) - y.row(j)).squaredNorm();
            if (d < bd) {
                bd = d;
                best = j;
            }
        }
        if (best >= 0 && labels[static_cast<std::size_t>(best)] == labels[static_cast<std::size_t>(i)]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace styloscope::geometry
