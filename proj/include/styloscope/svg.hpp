#pragma once

// Standalone SVG charts: scatter, boxplots and dendrogram.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "styloscope/learn.hpp"

namespace styloscope::svg {

struct Chart {
    std::string text;
    std::vector<std::string> warnings;
};

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s = buf;
    if (s == "-0.000") s = "0.000";
    return s;
}

inline std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

/// CSS-safe token derived from a label.
inline std::string css_token(std::string_view s) {
    std::string out;
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
        out += ok ? c : '_';
    }
    return out;
}

inline constexpr std::array<const char*, 8> k_palette{"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                                      "#66a61e", "#e6ab02", "#a6761d", "#666666"};

inline std::string color(std::size_t i) { return k_palette[i % k_palette.size()]; }

struct Frame {
    double width = 640, height = 480;
    double left = 60, right = 140, top = 40, bottom = 50;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

    double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
    double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

inline void pad_range(double& lo, double& hi) {
    if (!(hi > lo)) {
        lo -= 1.0;
        hi += 1.0;
        return;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
}

inline void open(std::ostringstream& o, const Frame& f, std::string_view title) {
    o << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << num(f.width) << R"(" height=")" << num(f.height)
      << R"(" viewBox="0 0 )" << num(f.width) << ' ' << num(f.height) << R"(" font-family="sans-serif" font-size="11">)"
      << '\n';
    o << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
    o << R"(<text x=")" << num(f.width / 2) << R"(" y="20" text-anchor="middle" font-size="14">)" << escape(title)
      << "</text>\n";
}

inline void axes(std::ostringstream& o, const Frame& f, std::string_view xlabel, std::string_view ylabel, bool x_ticks = true) {
    const double xa = f.left, xb = f.width - f.right, ya = f.height - f.bottom, yb = f.top;
    o << R"(<g class="axes" stroke="black" fill="none">)" << '\n';
    o << R"(<line x1=")" << num(xa) << R"(" y1=")" << num(ya) << R"(" x2=")" << num(xb) << R"(" y2=")" << num(ya) << R"("/>)" << '\n';
    o << R"(<line x1=")" << num(xa) << R"(" y1=")" << num(ya) << R"(" x2=")" << num(xa) << R"(" y2=")" << num(yb) << R"("/>)" << '\n';
    o << "</g>\n";
    for (int t = 0; t <= 4; ++t) {
        const double yv = f.y0 + (f.y1 - f.y0) * t / 4.0;
        o << R"(<text x=")" << num(xa - 4) << R"(" y=")" << num(f.py(yv) + 4) << R"(" text-anchor="end">)" << num(yv)
          << "</text>\n";
        if (x_ticks) {
            const double xv = f.x0 + (f.x1 - f.x0) * t / 4.0;
            o << R"(<text x=")" << num(f.px(xv)) << R"(" y=")" << num(ya + 14) << R"(" text-anchor="middle">)"
              << num(xv) << "</text>\n";
        }
    }
    o << R"(<text x=")" << num((xa + xb) / 2) << R"(" y=")" << num(f.height - 10) << R"(" text-anchor="middle">)"
      << escape(xlabel) << "</text>\n";
    o << R"(<text x="14" y=")" << num((ya + yb) / 2) << R"(" text-anchor="middle" transform="rotate(-90 14 )"
      << num((ya + yb) / 2) << R"lit()">)lit" << escape(ylabel) << "</text>\n";
}

inline void legend(std::ostringstream& o, const Frame& f, std::span<const std::string> labels,
                   std::span<const std::size_t> color_index) {
    o << R"(<g class="legend">)" << '\n';
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double y = f.top + 16.0 * static_cast<double>(i);
        const double x = f.width - f.right + 16;
        o << R"(<circle cx=")" << num(x) << R"(" cy=")" << num(y) << R"(" r="4" fill=")" << color(color_index[i])
          << R"("/>)";
        o << R"(<text x=")" << num(x + 10) << R"(" y=")" << num(y + 4) << R"(">)" << escape(labels[i]) << "</text>\n";
    }
    o << "</g>\n";
}

/// Scatter plot with one glyph class per label. `classes` fixes legend order
/// and colors; classes without points are omitted from the legend.
inline Chart scatter(const Eigen::MatrixXd& xy, std::span<const std::string> labels, std::vector<std::string> classes = {},
                     std::string_view title = "Embedding") {
    Chart chart;
    if (classes.empty()) {
        classes.assign(labels.begin(), labels.end());
        std::sort(classes.begin(), classes.end());
        classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    }
    Frame f;
    if (xy.rows() > 0) {
        f.x0 = xy.col(0).minCoeff();
        f.x1 = xy.col(0).maxCoeff();
        f.y0 = xy.col(1).minCoeff();
        f.y1 = xy.col(1).maxCoeff();
    }
    pad_range(f.x0, f.x1);
    pad_range(f.y0, f.y1);
    std::ostringstream o;
    open(o, f, title);
    axes(o, f, "dimension 1", "dimension 2");
    std::vector<std::string> shown;
    std::vector<std::size_t> shown_color;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        std::ostringstream pts;
        std::size_t count = 0;
        for (Eigen::Index i = 0; i < xy.rows(); ++i) {
            if (labels[static_cast<std::size_t>(i)] != classes[c]) continue;
            ++count;
            pts << R"(<circle cx=")" << num(f.px(xy(i, 0))) << R"(" cy=")" << num(f.py(xy(i, 1))) << R"(" r="3"/>)" << '\n';
        }
        if (count == 0) {
            chart.warnings.push_back("class '" + classes[c] + "' has no points; omitted from legend");
            continue;
        }
        o << R"(<g class="glyph-)" << css_token(classes[c]) << R"(" fill=")" << color(c) << R"(" fill-opacity="0.8">)"
          << '\n' << pts.str() << "</g>\n";
        shown.push_back(classes[c]);
        shown_color.push_back(c);
    }
    legend(o, f, shown, shown_color);
    o << "</svg>\n";
    chart.text = o.str();
    return chart;
}

/// Type-7 (linear interpolation) sample quantile of sorted data.
inline double quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct BoxStats {
    double q1 = 0, median = 0, q3 = 0;
    double whisker_lo = 0, whisker_hi = 0;  // most extreme data within 1.5 IQR
    std::vector<double> outliers;
    std::size_t n = 0;
};

inline BoxStats box_stats(std::vector<double> values) {
    BoxStats b;
    b.n = values.size();
    if (values.empty()) return b;
    std::sort(values.begin(), values.end());
    b.q1 = quantile(values, 0.25);
    b.median = quantile(values, 0.5);
    b.q3 = quantile(values, 0.75);
    const double iqr = b.q3 - b.q1;
    const double lo = b.q1 - 1.5 * iqr, hi = b.q3 + 1.5 * iqr;
    b.whisker_lo = b.q1;
    b.whisker_hi = b.q3;
    bool have_lo = false;
    for (double v : values) {
        if (v < lo || v > hi) {
            b.outliers.push_back(v);
            continue;
        }
        if (!have_lo) {
            b.whisker_lo = v;
            have_lo = true;
        }
        b.whisker_hi = v;
    }
    return b;
}

/// One box per group, in the given order.
inline Chart boxplots(std::span<const std::string> groups, std::span<const std::vector<double>> values,
                      std::string_view title, std::string_view ylabel = "score") {
    Chart chart;
    Frame f;
    f.right = 40;
    bool any = false;
    for (const auto& v : values) {
        for (double x : v) {
            if (!any) {
                f.y0 = f.y1 = x;
                any = true;
            }
            f.y0 = std::min(f.y0, x);
            f.y1 = std::max(f.y1, x);
        }
    }
    pad_range(f.y0, f.y1);
    f.x0 = 0;
    f.x1 = static_cast<double>(std::max<std::size_t>(1, groups.size()));
    std::ostringstream o;
    open(o, f, title);
    axes(o, f, "", ylabel, false);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double cx = f.px(static_cast<double>(g) + 0.5);
        o << R"(<text x=")" << num(cx) << R"(" y=")" << num(f.height - f.bottom + 14) << R"(" text-anchor="middle">)"
          << escape(groups[g]) << "</text>\n";
        if (values[g].empty()) {
            chart.warnings.push_back("group '" + groups[g] + "' is empty");
            continue;
        }
        const BoxStats b = box_stats(values[g]);
        const double half = 0.25 * (f.px(1.0) - f.px(0.0));
        o << R"(<g class="box box-)" << css_token(groups[g]) << R"(" stroke="black" fill=")" << color(g)
          << R"(" fill-opacity="0.5">)" << '\n';
        o << R"(<line class="whisker" x1=")" << num(cx) << R"(" y1=")" << num(f.py(b.whisker_lo)) << R"(" x2=")" << num(cx)
          << R"(" y2=")" << num(f.py(b.q1)) << R"("/>)" << '\n';
        o << R"(<line class="whisker" x1=")" << num(cx) << R"(" y1=")" << num(f.py(b.q3)) << R"(" x2=")" << num(cx)
          << R"(" y2=")" << num(f.py(b.whisker_hi)) << R"("/>)" << '\n';
        o << R"(<rect x=")" << num(cx - half) << R"(" y=")" << num(f.py(b.q3)) << R"(" width=")" << num(2 * half)
          << R"(" height=")" << num(f.py(b.q1) - f.py(b.q3)) << R"(" data-q1=")" << num(b.q1) << R"(" data-q3=")"
          << num(b.q3) << R"("/>)" << '\n';
        o << R"(<line class="median" x1=")" << num(cx - half) << R"(" y1=")" << num(f.py(b.median)) << R"(" x2=")"
          << num(cx + half) << R"(" y2=")" << num(f.py(b.median)) << R"(" data-median=")" << num(b.median)
          << R"(" stroke-width="2"/>)" << '\n';
        for (double v : b.outliers) {
            o << R"(<circle class="outlier" cx=")" << num(cx) << R"(" cy=")" << num(f.py(v)) << R"(" r="2.5"/>)" << '\n';
        }
        o << "</g>\n";
    }
    o << "</svg>\n";
    chart.text = o.str();
    return chart;
}

/// Dendrogram with leaves along the x axis, colored by class label.
inline Chart dendrogram(const learn::Dendrogram& d, std::span<const std::string> classes_of_leaves,
                        std::string_view title = "Ward clustering") {
    Chart chart;
    const std::size_t n = d.leaves();
    Frame f;
    f.width = std::max(640.0, 6.0 * static_cast<double>(n) + 200.0);
    f.x0 = 0;
    f.x1 = static_cast<double>(n);
    f.y0 = 0;
    f.y1 = d.merges.empty() ? 1.0 : d.merges.back().height * 1.05;
    if (!(f.y1 > 0)) f.y1 = 1.0;
    const auto order = d.leaf_order();
    std::vector<double> x(2 * n - 1, 0.0), h(2 * n - 1, 0.0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) x[order[pos]] = static_cast<double>(pos) + 0.5;
    std::ostringstream o;
    open(o, f, title);
    axes(o, f, "samples", "height", false);
    o << R"(<g class="links" stroke="black" fill="none">)" << '\n';
    for (std::size_t m = 0; m < d.merges.size(); ++m) {
        const auto& mg = d.merges[m];
        const std::size_t node = n + m;
        x[node] = 0.5 * (x[mg.a] + x[mg.b]);
        h[node] = mg.height;
        o << R"(<path d="M)" << num(f.px(x[mg.a])) << ' ' << num(f.py(h[mg.a])) << " V" << num(f.py(mg.height)) << " H"
          << num(f.px(x[mg.b])) << " V" << num(f.py(h[mg.b])) << R"("/>)" << '\n';
    }
    o << "</g>\n";
    std::vector<std::string> classes(classes_of_leaves.begin(), classes_of_leaves.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    std::vector<std::size_t> idx(classes.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t c = 0; c < classes.size(); ++c) {
        o << R"(<g class="glyph-)" << css_token(classes[c]) << R"(" fill=")" << color(c) << R"(">)" << '\n';
        for (std::size_t leaf = 0; leaf < n; ++leaf) {
            if (classes_of_leaves[leaf] != classes[c]) continue;
            o << R"(<circle cx=")" << num(f.px(x[leaf])) << R"(" cy=")" << num(f.py(0)) << R"(" r="2.5"><title>)"
              << escape(d.leaf_labels[leaf]) << "</title></circle>\n";
        }
        o << "</g>\n";
    }
    legend(o, f, classes, idx);
    o << "</svg>\n";
    chart.text = o.str();
    return chart;
}

}  // namespace styloscope::svg
