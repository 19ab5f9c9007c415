#pragma once

// Univariate screening and factorability diagnostics.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "styloscope/csv.hpp"
#include "styloscope/error.hpp"
#include "styloscope/features.hpp"

namespace styloscope::stats {

/// Upper tail of the chi-square distribution, Q(df/2, x/2).
inline double chi2_sf(double x, int df) {
    if (df < 1) throw InputError("chi2_sf: df must be >= 1");
    if (!(x >= 0.0)) throw InputError("chi2_sf: x must be >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

struct TestResult {
    std::string feature;
    double H = 0.0;
    int df = 0;
    double p_raw = 1.0;
    double p_adj = 1.0;
    double eta_sq = 0.0;
};

/// Mid-ranks (1-based) of `values`; ties share the average rank.
inline std::vector<double> mid_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

inline TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    const std::size_t k = groups.size();
    if (k < 2) throw InputError("kruskal_wallis: need at least 2 groups");
    std::vector<double> pooled;
    for (const auto& g : groups) {
        if (g.empty()) throw InputError("kruskal_wallis: empty group");
        pooled.insert(pooled.end(), g.begin(), g.end());
    }
    for (double v : pooled) {
        if (!std::isfinite(v)) throw NumericError("kruskal_wallis: non-finite value");
    }
    const auto ranks = mid_ranks(pooled);
    const double n = static_cast<double>(pooled.size());

    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_sum = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        tie_sum += t * t * t - t;
        i = j;
    }
    const double correction = 1.0 - tie_sum / (n * n * n - n);
    if (correction <= 0.0) throw NumericError("degenerate: zero rank variance");

    double h = 0.0;
    std::size_t offset = 0;
    for (const auto& g : groups) {
        double r = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) r += ranks[offset + i];
        offset += g.size();
        h += r * r / static_cast<double>(g.size());
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
    h = std::max(0.0, h / correction);

    TestResult res;
    res.H = h;
    res.df = static_cast<int>(k) - 1;
    res.p_raw = chi2_sf(h, res.df);
    res.p_adj = res.p_raw;
    const double kk = static_cast<double>(k);
    res.eta_sq = n > kk ? std::max(0.0, (h - kk + 1.0) / (n - kk)) : 0.0;
    return res;
}

inline double bonferroni(double p, std::size_t m) { return std::min(1.0, p * static_cast<double>(m)); }

inline std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m) {
    if (m < p_values.size()) throw InputError("bonferroni: m must be >= number of p-values");
    std::vector<double> out;
    out.reserve(p_values.size());
    for (double p : p_values) out.push_back(bonferroni(p, m));
    return out;
}

/// Splits column `j` of `values` into groups by label, in `classes` order.
inline std::vector<std::vector<double>> group_column(const Eigen::MatrixXd& values, Eigen::Index j,
                                                    std::span<const std::string> labels,
                                                    std::span<const std::string> classes) {
    std::vector<std::vector<double>> groups(classes.size());
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        const auto it = std::find(classes.begin(), classes.end(), labels[static_cast<std::size_t>(i)]);
        groups[static_cast<std::size_t>(it - classes.begin())].push_back(values(i, j));
    }
    return groups;
}

struct Screening {
    std::vector<TestResult> tests;       // every feature, matrix column order
    std::vector<std::string> selected;   // p_adj < alpha, column order
    std::vector<std::string> flags;
};

/// Kruskal-Wallis per feature with Bonferroni over all tested features.
/// Features constant over every sample cannot be ranked and are reported with
/// H = 0, p = 1 and a flag.
inline Screening select_significant(const FeatureMatrix& m, double alpha = 0.05) {
    const auto classes = m.classes();
    if (classes.size() < 2) throw InputError("select_significant: need at least 2 classes");
    Screening out;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        const auto groups = group_column(m.values, static_cast<Eigen::Index>(j), m.labels, classes);
        TestResult t;
        try {
            t = kruskal_wallis(groups);
        } catch (const NumericError&) {
            t.df = static_cast<int>(classes.size()) - 1;
            out.flags.push_back(m.feature_ids[j] + ": constant across all samples");
        }
        t.feature = m.feature_ids[j];
        out.tests.push_back(t);
    }
    for (auto& t : out.tests) {
        t.p_adj = bonferroni(t.p_raw, out.tests.size());
        if (t.p_adj < alpha) out.selected.push_back(t.feature);
    }
    return out;
}

inline void write_significance_csv(std::ostream& out, std::span<const TestResult> tests) {
    csv::write_row(out, {"feature", "H", "df", "p_raw", "p_adj", "eta_sq"});
    for (const auto& t : tests) {
        csv::write_row(out, {t.feature, csv::format_double(t.H), std::to_string(t.df), csv::format_double(t.p_raw),
                             csv::format_double(t.p_adj), csv::format_double(t.eta_sq)});
    }
}

/// Column-wise z-scores (sample sd, n - 1). Constant columns become 0.
inline Eigen::MatrixXd zscore(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd z = x;
    const double n = static_cast<double>(x.rows());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double mean = x.col(j).mean();
        const double sd = n > 1 ? std::sqrt((x.col(j).array() - mean).square().sum() / (n - 1.0)) : 0.0;
        if (sd > 0) z.col(j) = (x.col(j).array() - mean) / sd;
        else z.col(j).setZero();
    }
    return z;
}

// ---------------------------------------------------------------------------
// Correlation and factorability

struct CorrMatrix {
    std::vector<std::string> ids;
    Eigen::MatrixXd r;
    std::vector<std::string> flags;
};

/// Pearson correlations between columns. A constant column correlates 0 with
/// everything else (flagged); the diagonal is always 1.
inline CorrMatrix correlation_matrix(const FeatureMatrix& m) {
    if (m.rows() < 2) throw InputError("correlation_matrix: need at least 2 rows");
    const Eigen::Index p = m.values.cols();
    const Eigen::RowVectorXd mean = m.values.colwise().mean();
    const Eigen::MatrixXd centered = m.values.rowwise() - mean;
    const Eigen::VectorXd norm = centered.colwise().norm().transpose();
    CorrMatrix c{m.feature_ids, Eigen::MatrixXd::Identity(p, p), {}};
    for (Eigen::Index j = 0; j < p; ++j) {
        if (norm(j) == 0.0) c.flags.push_back(m.feature_ids[static_cast<std::size_t>(j)] + ": constant column, r set to 0");
    }
    for (Eigen::Index a = 0; a < p; ++a) {
        for (Eigen::Index b = a + 1; b < p; ++b) {
            double r = 0.0;
            if (norm(a) > 0.0 && norm(b) > 0.0) {
                r = centered.col(a).dot(centered.col(b)) / (norm(a) * norm(b));
                r = std::clamp(r, -1.0, 1.0);
            }
            c.r(a, b) = c.r(b, a) = r;
        }
    }
    return c;
}

struct Removal {
    std::string feature;
    std::string trigger;
};

struct PruneResult {
    FeatureMatrix matrix;
    CorrMatrix corr;
    std::vector<Removal> removals;
};

inline double min_eigenvalue(const Eigen::MatrixXd& r) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// Removes features until the correlation matrix is well conditioned: while
/// the smallest eigenvalue is below `epsilon` or some |r| exceeds `max_r`,
/// drop the feature with the largest sum of squared off-diagonal r (ties go to
/// the later column).
inline PruneResult prune_collinear(const CorrMatrix& corr, const FeatureMatrix& m, double epsilon = 1e-8,
                                   double max_r = 0.99) {
    std::vector<std::size_t> keep(corr.ids.size());
    std::iota(keep.begin(), keep.end(), 0);
    std::vector<Removal> removals;
    auto sub = [&]() {
        Eigen::MatrixXd s(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t a = 0; a < keep.size(); ++a) {
            for (std::size_t b = 0; b < keep.size(); ++b) {
                s(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    corr.r(static_cast<Eigen::Index>(keep[a]), static_cast<Eigen::Index>(keep[b]));
            }
        }
        return s;
    };
    while (true) {
        const Eigen::MatrixXd s = sub();
        const Eigen::MatrixXd off = s - Eigen::MatrixXd::Identity(s.rows(), s.cols());
        const double lambda_min = min_eigenvalue(s);
        const double r_max = off.cwiseAbs().maxCoeff();
        std::string trigger;
        if (lambda_min < epsilon) {
            trigger = "min eigenvalue " + csv::format_double(lambda_min) + " < " + csv::format_double(epsilon);
        } else if (r_max > max_r) {
            trigger = "max |r| " + csv::format_double(r_max) + " > " + csv::format_double(max_r);
        } else {
            break;
        }
        const Eigen::VectorXd load = off.cwiseAbs2().rowwise().sum();
        Eigen::Index worst = 0;
        for (Eigen::Index i = 1; i < load.size(); ++i) {
            if (load(i) >= load(worst)) worst = i;
        }
        removals.push_back({corr.ids[keep[static_cast<std::size_t>(worst)]], trigger});
        keep.erase(keep.begin() + worst);
        if (keep.size() < 3) throw NumericError("prune_collinear: fewer than 3 features remain");
    }
    std::vector<std::string> ids;
    for (auto k : keep) ids.push_back(corr.ids[k]);
    PruneResult out{m.select(ids), CorrMatrix{ids, sub(), {}}, std::move(removals)};
    return out;
}

/// Kaiser-Meyer-Olkin sampling adequacy from the anti-image correlations.
inline double kmo(const CorrMatrix& corr) {
    const Eigen::MatrixXd& r = corr.r;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(r);
    if (!lu.isInvertible()) throw NumericError("kmo: singular correlation matrix; run prune_collinear first");
    const Eigen::MatrixXd s = lu.inverse();
    double r2 = 0.0, q2 = 0.0;
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        for (Eigen::Index j = 0; j < r.cols(); ++j) {
            if (i == j) continue;
            const double q = -s(i, j) / std::sqrt(s(i, i) * s(j, j));
            r2 += r(i, j) * r(i, j);
            q2 += q * q;
        }
    }
    if (r2 + q2 == 0.0) throw NumericError("kmo: all correlations are zero");
    return r2 / (r2 + q2);
}

struct BartlettResult {
    double chi2 = 0.0;
    int df = 0;
    double p = 1.0;
};

inline BartlettResult bartlett(const CorrMatrix& corr, std::size_t n) {
    const auto p = static_cast<double>(corr.r.rows());
    Eigen::LLT<Eigen::MatrixXd> llt(corr.r);
    if (llt.info() != Eigen::Success) throw NumericError("bartlett: correlation matrix is not positive definite");
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    BartlettResult b;
    b.chi2 = std::max(0.0, -(static_cast<double>(n) - 1.0 - (2.0 * p + 5.0) / 6.0) * log_det);
    b.df = static_cast<int>(p * (p - 1.0) / 2.0);
    b.p = b.df > 0 ? chi2_sf(b.chi2, b.df) : 1.0;
    return b;
}

}  // namespace styloscope::stats
