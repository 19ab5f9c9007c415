#pragma once

// Rolling-window sampling over concatenated class streams.
//
// Window count convention: W = floor((N - L) / S) windows for N > L, one
// window for N == L and none for N < L (N words in the stream, L words per
// window, S words of step). This reproduces 38697 -> 67, 40675 -> 71 and
// 41162 -> 72 at L = 5000, S = 500; the common floor(...) + 1 would give one
// more window per class. Trailing words that do not fill a window are dropped.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "styloscope/corpus.hpp"
#include "styloscope/csv.hpp"
#include "styloscope/error.hpp"
#include "styloscope/random.hpp"

namespace styloscope {

struct SampleWindow {
    std::string class_label;
    std::size_t window_index = 0;
    std::size_t start_offset = 0;  // in words
    std::vector<AnnotatedToken> tokens;

    std::string id() const { return class_label + "_" + std::to_string(window_index); }
    std::size_t word_count() const {
        return static_cast<std::size_t>(
            std::count_if(tokens.begin(), tokens.end(), [](const auto& t) { return t.is_word(); }));
    }
};

/// Joins documents in order and renumbers token indices.
inline std::vector<AnnotatedToken> concatenate(std::span<const Document> docs) {
    std::vector<AnnotatedToken> stream;
    for (const auto& doc : docs) {
        for (const auto& t : doc) {
            stream.push_back(t);
            stream.back().index = stream.size() - 1;
        }
    }
    return stream;
}

inline std::size_t window_count(std::size_t words, std::size_t length, std::size_t step) {
    if (length == 0 || step == 0 || step > length) {
        throw InputError("window length must be positive and 0 < step <= length");
    }
    if (words < length) return 0;
    if (words == length) return 1;
    return (words - length) / step;
}

struct WindowingResult {
    std::vector<SampleWindow> windows;
    std::vector<std::string> warnings;
};

/// Window i spans words [i*step, i*step + length). Punctuation following the
/// last word (up to the next word) belongs to the window.
inline WindowingResult rolling_windows(std::span<const AnnotatedToken> stream, std::size_t length,
                                       std::size_t step, const std::string& class_label = {}) {
    std::vector<std::size_t> word_pos;  // token position of each word
    for (std::size_t i = 0; i < stream.size(); ++i) {
        if (stream[i].is_word()) word_pos.push_back(i);
    }
    WindowingResult result;
    const std::size_t count = window_count(word_pos.size(), length, step);
    if (count == 0) {
        result.warnings.push_back("class '" + class_label + "': " + std::to_string(word_pos.size()) +
                                  " words is fewer than the window length " +
                                  std::to_string(length) + "; no windows");
        return result;
    }
    result.windows.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        const std::size_t first_word = w * step;
        const std::size_t begin = word_pos[first_word];
        const std::size_t end = first_word + length < word_pos.size() ? word_pos[first_word + length]
                                                                       : stream.size();
        SampleWindow window;
        window.class_label = class_label;
        window.window_index = w;
        window.start_offset = first_word;
        window.tokens.assign(stream.begin() + static_cast<std::ptrdiff_t>(begin),
                             stream.begin() + static_cast<std::ptrdiff_t>(end));
        for (std::size_t k = 0; k < window.tokens.size(); ++k) window.tokens[k].index = k;
        result.windows.push_back(std::move(window));
    }
    return result;
}

/// Picks k windows uniformly without replacement (partial Fisher-Yates on the
/// portable generator); survivors keep their original order.
inline std::vector<SampleWindow> subsample(std::span<const SampleWindow> windows, std::size_t k,
                                           Random& rng) {
    if (k > windows.size()) {
        throw InputError("cannot draw " + std::to_string(k) + " samples from " +
                         std::to_string(windows.size()) + " windows");
    }
    std::vector<std::size_t> order(windows.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.uniform_index(order.size() - i));
        std::swap(order[i], order[j]);
    }
    order.resize(k);
    std::sort(order.begin(), order.end());
    std::vector<SampleWindow> out;
    out.reserve(k);
    for (auto idx : order) out.push_back(windows[idx]);
    return out;
}

inline std::vector<SampleWindow> subsample(std::span<const SampleWindow> windows, std::size_t k,
                                           std::uint64_t seed) {
    Random rng(seed, Random::stream_id("subsample"));
    return subsample(windows, k, rng);
}

/// Manifest CSV: class, window_index, start_offset.
inline void write_window_manifest(std::ostream& out, std::span<const SampleWindow> windows) {
    csv::write_row(out, {"class", "window_index", "start_offset"});
    for (const auto& w : windows) {
        csv::write_row(out, {w.class_label, std::to_string(w.window_index),
                             std::to_string(w.start_offset)});
    }
}

}  // namespace styloscope
