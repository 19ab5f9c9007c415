#pragma once

// Principal-component factor extraction, varimax rotation and dimension scores.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "styloscope/csv.hpp"
#include "styloscope/error.hpp"
#include "styloscope/features.hpp"
#include "styloscope/stats.hpp"

namespace styloscope::factor {

struct Eigensystem {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // column j pairs with values(j)
};

/// Cyclic Jacobi eigensolver for symmetric matrices. Each eigenvector is
/// signed so its components sum to a non-negative value.
inline Eigensystem eigendecompose(const Eigen::MatrixXd& input, double tol = 1e-14, int max_sweeps = 100) {
    if (input.rows() != input.cols()) throw InputError("eigendecompose: matrix is not square");
    const Eigen::Index n = input.rows();
    if ((input - input.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
        throw InputError("eigendecompose: matrix is not symmetric");
    }
    Eigen::MatrixXd a = 0.5 * (input + input.transpose());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double scale = std::max(1.0, a.norm());
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        }
        if (std::sqrt(off) <= tol * scale) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
    Eigensystem out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index src = order[static_cast<std::size_t>(j)];
        out.values(j) = a(src, src);
        out.vectors.col(j) = v.col(src);
        if (out.vectors.col(j).sum() < 0.0) out.vectors.col(j) *= -1.0;
    }
    return out;
}

struct ScreeRow {
    std::size_t factor = 0;  // 1-based
    double eigenvalue = 0.0;
    double variance_pct = 0.0;
    double cumulative_pct = 0.0;
};

inline std::vector<ScreeRow> scree(std::span<const double> eigenvalues, std::size_t p) {
    std::vector<ScreeRow> rows;
    double cumulative = 0.0;
    for (std::size_t j = 0; j < eigenvalues.size(); ++j) {
        const double pct = 100.0 * eigenvalues[j] / static_cast<double>(p);
        cumulative += pct;
        rows.push_back({j + 1, eigenvalues[j], pct, cumulative});
    }
    return rows;
}

inline std::vector<ScreeRow> scree(const Eigen::VectorXd& eigenvalues) {
    return scree(std::span<const double>(eigenvalues.data(), static_cast<std::size_t>(eigenvalues.size())),
                 static_cast<std::size_t>(eigenvalues.size()));
}

inline void write_scree_csv(std::ostream& out, std::span<const ScreeRow> rows) {
    csv::write_row(out, {"factor", "eigenvalue", "variance_pct", "cumulative_pct"});
    for (const auto& r : rows) {
        csv::write_row(out, {std::to_string(r.factor), csv::format_double(r.eigenvalue),
                             csv::format_double(r.variance_pct), csv::format_double(r.cumulative_pct)});
    }
}

/// Unrotated principal-component loadings: column j = sqrt(lambda_j) v_j.
inline Eigen::MatrixXd extract_loadings(const Eigensystem& es, std::size_t k) {
    const auto p = static_cast<std::size_t>(es.values.size());
    if (k == 0 || k > p) throw InputError("extract_loadings: need 1 <= k <= p");
    Eigen::MatrixXd l(es.vectors.rows(), static_cast<Eigen::Index>(k));
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j) {
        if (es.values(j) <= 0.0) throw NumericError("k exceeds positive spectrum");
        l.col(j) = std::sqrt(es.values(j)) * es.vectors.col(j);
    }
    return l;
}

inline Eigen::MatrixXd extract_loadings(const Eigen::MatrixXd& corr, std::size_t k) {
    return extract_loadings(eigendecompose(corr), k);
}

/// Raw varimax criterion: sum over columns of sum(a^4) - (sum a^2)^2 / p.
inline double varimax_criterion(const Eigen::MatrixXd& a) {
    const double p = static_cast<double>(a.rows());
    double v = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        const Eigen::ArrayXd sq = a.col(j).array().square();
        v += sq.square().sum() - sq.sum() * sq.sum() / p;
    }
    return v;
}

struct Rotation {
    Eigen::MatrixXd loadings;  // rotated, de-normalized
    Eigen::MatrixXd rotation;  // orthogonal k x k, loadings = input * rotation
    int sweeps = 0;
    double criterion = 0.0;    // criterion of the (normalized) rotated loadings
};

/// Varimax by pairwise planar rotations, on Kaiser-normalized rows unless
/// `kaiser` is false. Columns of the result are signed so that their sums are
/// non-negative.
inline Rotation varimax(const Eigen::MatrixXd& loadings, bool kaiser = true, double tol = 1e-10,
                        int max_sweeps = 100) {
    const Eigen::Index p = loadings.rows(), k = loadings.cols();
    Rotation out{loadings, Eigen::MatrixXd::Identity(k, k), 0, 0.0};
    Eigen::VectorXd h = kaiser ? Eigen::VectorXd(loadings.rowwise().norm()) : Eigen::VectorXd::Ones(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        if (h(i) == 0.0) h(i) = 1.0;
    }
    Eigen::MatrixXd a = loadings.array().colwise() / h.array();
    out.criterion = varimax_criterion(a);
    if (k < 2) return out;

    const double pd = static_cast<double>(p);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        const double before = varimax_criterion(a);
        for (Eigen::Index x = 0; x < k - 1; ++x) {
            for (Eigen::Index y = x + 1; y < k; ++y) {
                const Eigen::ArrayXd ax = a.col(x).array(), ay = a.col(y).array();
                const Eigen::ArrayXd u = ax.square() - ay.square();
                const Eigen::ArrayXd w = 2.0 * ax * ay;
                const double A = u.sum(), B = w.sum();
                const double C = (u.square() - w.square()).sum();
                const double D = 2.0 * (u * w).sum();
                const double phi = 0.25 * std::atan2(D - 2.0 * A * B / pd, C - (A * A - B * B) / pd);
                if (std::abs(phi) < 1e-15) continue;
                const double c = std::cos(phi), s = std::sin(phi);
                const Eigen::VectorXd nx = c * a.col(x) + s * a.col(y);
                const Eigen::VectorXd ny = -s * a.col(x) + c * a.col(y);
                a.col(x) = nx;
                a.col(y) = ny;
                const Eigen::VectorXd rx = c * out.rotation.col(x) + s * out.rotation.col(y);
                const Eigen::VectorXd ry = -s * out.rotation.col(x) + c * out.rotation.col(y);
                out.rotation.col(x) = rx;
                out.rotation.col(y) = ry;
            }
        }
        out.sweeps = sweep + 1;
        if (varimax_criterion(a) - before < tol) break;
    }
    out.criterion = varimax_criterion(a);
    for (Eigen::Index j = 0; j < k; ++j) {
        if (a.col(j).sum() < 0.0) {
            a.col(j) *= -1.0;
            out.rotation.col(j) *= -1.0;
        }
    }
    out.loadings = a.array().colwise() * h.array();
    return out;
}

struct FactorAssignment {
    std::vector<std::string> positive;
    std::vector<std::string> negative;
};

struct Assignments {
    double threshold = 0.30;
    std::vector<FactorAssignment> factors;
    std::vector<std::string> unassigned;
    std::vector<std::string> cross_loadings;  // features whose runner-up |loading| also passes
};

/// Each feature goes to the factor with its largest |loading| when that value
/// reaches the threshold; the sign picks the positive or negative set.
inline Assignments assign_features(const Eigen::MatrixXd& rotated, std::span<const std::string> ids,
                                   double threshold = 0.30) {
    Assignments out;
    out.threshold = threshold;
    out.factors.resize(static_cast<std::size_t>(rotated.cols()));
    for (Eigen::Index i = 0; i < rotated.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < rotated.cols(); ++j) {
            if (std::abs(rotated(i, j)) > std::abs(rotated(i, best))) best = j;
        }
        const std::string& id = ids[static_cast<std::size_t>(i)];
        const double value = rotated(i, best);
        if (std::abs(value) < threshold) {
            out.unassigned.push_back(id);
            continue;
        }
        auto& f = out.factors[static_cast<std::size_t>(best)];
        (value > 0 ? f.positive : f.negative).push_back(id);
        for (Eigen::Index j = 0; j < rotated.cols(); ++j) {
            if (j != best && std::abs(rotated(i, j)) >= threshold) {
                out.cross_loadings.push_back(id + " also loads " + csv::format_double(rotated(i, j)) +
                                             " on factor " + std::to_string(j + 1));
            }
        }
    }
    return out;
}

inline void write_loadings_csv(std::ostream& out, const Eigen::MatrixXd& loadings,
                               std::span<const std::string> ids) {
    csv::Row header{"feature"};
    for (Eigen::Index j = 0; j < loadings.cols(); ++j) header.push_back("factor" + std::to_string(j + 1));
    csv::write_row(out, header);
    for (Eigen::Index i = 0; i < loadings.rows(); ++i) {
        csv::Row row{ids[static_cast<std::size_t>(i)]};
        for (Eigen::Index j = 0; j < loadings.cols(); ++j) row.push_back(csv::format_double(loadings(i, j)));
        csv::write_row(out, row);
    }
}

struct DimensionScores {
    std::vector<std::string> sample_ids;
    std::vector<std::string> labels;
    Eigen::MatrixXd scores;  // samples x factors, each column z-transformed
    std::vector<stats::TestResult> tests;
    std::vector<std::string> flags;
};

inline DimensionScores dimension_scores(const FeatureMatrix& m, const Assignments& assignments) {
    const Eigen::MatrixXd z = stats::zscore(m.values);
    const auto k = static_cast<Eigen::Index>(assignments.factors.size());
    DimensionScores out{m.sample_ids, m.labels, Eigen::MatrixXd::Zero(z.rows(), k), {}, {}};
    for (Eigen::Index f = 0; f < k; ++f) {
        const auto& a = assignments.factors[static_cast<std::size_t>(f)];
        if (a.positive.empty() && a.negative.empty()) {
            out.flags.push_back("dimension " + std::to_string(f + 1) + ": no assigned features, score is 0");
            continue;
        }
        for (const auto& id : a.positive) {
            const auto j = m.column_index(id);
            if (j < 0) throw InputError("dimension_scores: feature not in matrix: " + id);
            out.scores.col(f) += z.col(j);
        }
        for (const auto& id : a.negative) {
            const auto j = m.column_index(id);
            if (j < 0) throw InputError("dimension_scores: feature not in matrix: " + id);
            out.scores.col(f) -= z.col(j);
        }
    }
    out.scores = stats::zscore(out.scores);
    const auto classes = m.classes();
    for (Eigen::Index f = 0; f < k; ++f) {
        stats::TestResult t;
        try {
            t = stats::kruskal_wallis(stats::group_column(out.scores, f, m.labels, classes));
        } catch (const NumericError&) {
            t.df = static_cast<int>(classes.size()) - 1;
        }
        t.feature = "dim" + std::to_string(f + 1);
        out.tests.push_back(t);
    }
    return out;
}

inline void write_dimension_scores_csv(std::ostream& out, const DimensionScores& d) {
    csv::Row header{"sample", "class"};
    for (Eigen::Index j = 0; j < d.scores.cols(); ++j) header.push_back("dim" + std::to_string(j + 1));
    csv::write_row(out, header);
    for (Eigen::Index i = 0; i < d.scores.rows(); ++i) {
        csv::Row row{d.sample_ids[static_cast<std::size_t>(i)], d.labels[static_cast<std::size_t>(i)]};
        for (Eigen::Index j = 0; j < d.scores.cols(); ++j) row.push_back(csv::format_double(d.scores(i, j)));
        csv::write_row(out, row);
    }
}

/// Tucker's congruence coefficient between two loading columns.
inline double congruence(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double denom = std::sqrt(x.squaredNorm() * y.squaredNorm());
    return denom > 0 ? x.dot(y) / denom : 0.0;
}

}  // namespace styloscope::factor
