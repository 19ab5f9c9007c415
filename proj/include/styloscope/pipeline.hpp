#pragma once

// End-to-end orchestration: configuration, validation, stage execution with a
// content-addressed cache, and the run report.
//
// Stages and the artifacts they own (all under the output directory):
//   ingest    tagged/<class>.vrt, ingest_summary.json
//   sample    windows.csv
//   tag       features.csv
//   screen    significance.csv, diagnostics.json
//   factor    scree.csv, loadings.csv, assignments.json, dimension_scores.csv, dim<k>_boxplot.svg
//   classify  classification_report.json
//   cluster   dendrogram.json, dendrogram.svg, contingency.csv
//   distance  distances.csv, group_distances.json
//   embed     embedding.csv, embedding.json, embedding.svg
// Every run also writes config_echo.txt and report.json.

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "styloscope/corpus.hpp"
#include "styloscope/error.hpp"
#include "styloscope/factor.hpp"
#include "styloscope/features.hpp"
#include "styloscope/geometry.hpp"
#include "styloscope/learn.hpp"
#include "styloscope/sampler.hpp"
#include "styloscope/stats.hpp"
#include "styloscope/svg.hpp"

#ifndef STYLOSCOPE_VERSION
#define STYLOSCOPE_VERSION "0.0.0"
#endif

namespace styloscope::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Configuration

struct PipelineConfig {
    fs::path corpus = "data/demo_corpus";
    std::string format = "auto";  // auto | raw | vrt
    fs::path out = "styloscope_out";
    std::size_t window_length = 5000;
    std::size_t step = 500;
    std::size_t per_class = 50;
    std::uint64_t seed = 42;
    double alpha = 0.05;
    double threshold = 0.30;
    std::size_t n_factors = 5;
    std::size_t n_test = 30;
    std::string classifiers = "naive-bayes,linear-svm,random-forest,adaboost,mlp";
    std::string classifier_features = "all";  // all | significant
    bool stratified = false;
    std::size_t clusters = 0;  // 0 = number of classes
    double per_words = 1000.0;
    std::string distance_input = "dimensions";  // dimensions | features
    std::string embed_input = "dimensions";
    double perplexity = 30.0;
    int tsne_iterations = 1000;
    double tsne_learning_rate = 200.0;
    learn::Hyperparams hyper;

    std::vector<learn::ClassifierKind> classifier_kinds() const {
        std::vector<learn::ClassifierKind> out;
        std::stringstream ss(classifiers);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto b = item.find_first_not_of(" \t");
            const auto e = item.find_last_not_of(" \t");
            if (b == std::string::npos) continue;
            out.push_back(learn::parse_classifier(item.substr(b, e - b + 1)));
        }
        return out;
    }

    geometry::TsneParams tsne_params() const {
        geometry::TsneParams p;
        p.perplexity = perplexity;
        p.iterations = tsne_iterations;
        p.learning_rate = tsne_learning_rate;
        return p;
    }
};

namespace detail {

template <typename T>
T parse_number(std::string_view key, const std::string& value) {
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) {
        throw InputError("config: invalid value for " + std::string(key) + ": '" + value + "'");
    }
    return out;
}

inline bool parse_bool(std::string_view key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw InputError("config: invalid boolean for " + std::string(key) + ": '" + v + "'");
}

struct Field {
    std::string_view key;
    std::function<void(PipelineConfig&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

template <typename T>
Field number_field(std::string_view key, T PipelineConfig::*member) {
    return {key, [key, member](PipelineConfig& c, const std::string& v) { c.*member = parse_number<T>(key, v); },
            [member](const PipelineConfig& c) {
                if constexpr (std::is_floating_point_v<T>) return csv::format_double(c.*member);
                else return std::to_string(c.*member);
            }};
}

template <typename T>
Field hyper_field(std::string_view key, T learn::Hyperparams::*member) {
    return {key, [key, member](PipelineConfig& c, const std::string& v) { c.hyper.*member = parse_number<T>(key, v); },
            [member](const PipelineConfig& c) {
                if constexpr (std::is_floating_point_v<T>) return csv::format_double(c.hyper.*member);
                else return std::to_string(c.hyper.*member);
            }};
}

inline Field string_field(std::string_view key, std::string PipelineConfig::*member) {
    return {key, [member](PipelineConfig& c, const std::string& v) { c.*member = v; },
            [member](const PipelineConfig& c) { return c.*member; }};
}

inline Field path_field(std::string_view key, fs::path PipelineConfig::*member) {
    return {key, [member](PipelineConfig& c, const std::string& v) { c.*member = v; },
            [member](const PipelineConfig& c) { return (c.*member).generic_string(); }};
}

inline const std::vector<Field>& fields() {
    static const std::vector<Field> f{
        path_field("corpus", &PipelineConfig::corpus),
        string_field("format", &PipelineConfig::format),
        path_field("out", &PipelineConfig::out),
        number_field("window_length", &PipelineConfig::window_length),
        number_field("step", &PipelineConfig::step),
        number_field("per_class", &PipelineConfig::per_class),
        number_field("seed", &PipelineConfig::seed),
        number_field("alpha", &PipelineConfig::alpha),
        number_field("threshold", &PipelineConfig::threshold),
        number_field("n_factors", &PipelineConfig::n_factors),
        number_field("n_test", &PipelineConfig::n_test),
        string_field("classifiers", &PipelineConfig::classifiers),
        string_field("classifier_features", &PipelineConfig::classifier_features),
        {"stratified", [](PipelineConfig& c, const std::string& v) { c.stratified = parse_bool("stratified", v); },
         [](const PipelineConfig& c) { return std::string(c.stratified ? "true" : "false"); }},
        number_field("clusters", &PipelineConfig::clusters),
        number_field("per_words", &PipelineConfig::per_words),
        string_field("distance_input", &PipelineConfig::distance_input),
        string_field("embed_input", &PipelineConfig::embed_input),
        number_field("perplexity", &PipelineConfig::perplexity),
        number_field("tsne_iterations", &PipelineConfig::tsne_iterations),
        number_field("tsne_learning_rate", &PipelineConfig::tsne_learning_rate),
        hyper_field("svm_c", &learn::Hyperparams::svm_c),
        hyper_field("svm_epochs", &learn::Hyperparams::svm_epochs),
        hyper_field("rf_trees", &learn::Hyperparams::rf_trees),
        hyper_field("rf_max_depth", &learn::Hyperparams::rf_max_depth),
        hyper_field("ab_rounds", &learn::Hyperparams::ab_rounds),
        hyper_field("mlp_hidden", &learn::Hyperparams::mlp_hidden),
        hyper_field("mlp_learning_rate", &learn::Hyperparams::mlp_learning_rate),
        hyper_field("mlp_epochs", &learn::Hyperparams::mlp_epochs),
        hyper_field("mlp_batch", &learn::Hyperparams::mlp_batch),
    };
    return f;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

inline void set_option(PipelineConfig& c, std::string_view key, const std::string& value) {
    for (const auto& f : detail::fields()) {
        if (f.key == key) {
            f.set(c, value);
            return;
        }
    }
    throw InputError("config: unknown key '" + std::string(key) + "'");
}

/// Ordered key/value pairs of every setting.
inline std::vector<std::pair<std::string, std::string>> config_entries(const PipelineConfig& c) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : detail::fields()) out.emplace_back(std::string(f.key), f.get(c));
    return out;
}

/// Parses "key = value" lines ('#' starts a comment). Relative paths are
/// resolved against `base_dir`.
inline void apply_config_text(PipelineConfig& c, std::string_view text, std::string_view source = "<config>",
                              const fs::path& base_dir = {}) {
    std::map<std::string, int> seen;
    std::size_t line_no = 0, pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string line(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        const auto eq = line.find('=');
        const std::string where = std::string(source) + ":" + std::to_string(line_no);
        if (eq == std::string::npos) throw InputError(where + ": expected key = value");
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        std::string value = detail::trim(std::string_view(line).substr(eq + 1));
        if (seen.count(key)) throw InputError(where + ": duplicate key '" + key + "'");
        seen[key] = static_cast<int>(line_no);
        if ((key == "corpus" || key == "out") && !base_dir.empty() && fs::path(value).is_relative()) {
            value = (base_dir / value).lexically_normal().generic_string();
        }
        try {
            set_option(c, key, value);
        } catch (const InputError& e) {
            throw InputError(where + ": " + e.what());
        }
        if (end == text.size()) break;
    }
}

inline void apply_config_file(PipelineConfig& c, const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open config file " + path.string());
    const std::string text{std::istreambuf_iterator<char>(in), {}};
    apply_config_text(c, text, path.string(), path.parent_path());
}

inline std::string config_echo(const PipelineConfig& c) {
    std::string out = "# styloscope " STYLOSCOPE_VERSION " effective configuration\n";
    for (const auto& [k, v] : config_entries(c)) out += k + " = " + v + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Validation

enum class Severity { Warning, Error };

struct Finding {
    Severity severity;
    std::string key;
    std::string message;
};

/// Structural checks. `n_classes` and `windows_available` tighten the checks
/// once the corpus is known.
inline std::vector<Finding> validate(const PipelineConfig& c, std::optional<std::size_t> n_classes = std::nullopt,
                                     const std::map<std::string, std::size_t>& windows_available = {}) {
    std::vector<Finding> f;
    auto error = [&](std::string key, std::string msg) { f.push_back({Severity::Error, std::move(key), std::move(msg)}); };
    auto warn = [&](std::string key, std::string msg) { f.push_back({Severity::Warning, std::move(key), std::move(msg)}); };

    if (c.window_length == 0) error("window_length", "must be positive");
    if (c.step == 0) error("step", "must be positive");
    if (c.step > c.window_length) error("step", "must not exceed window_length");
    if (c.per_class == 0) error("per_class", "must be positive");
    if (c.n_factors == 0) error("n_factors", "must be positive");
    if (!(c.alpha > 0 && c.alpha < 1)) error("alpha", "must lie in (0, 1)");
    if (!(c.threshold > 0 && c.threshold < 1)) error("threshold", "must lie in (0, 1)");
    if (!(c.per_words > 0)) error("per_words", "must be positive");
    if (!(c.perplexity > 0)) error("perplexity", "must be positive");
    if (c.tsne_iterations <= 0) error("tsne_iterations", "must be positive");
    if (!(c.tsne_learning_rate > 0)) error("tsne_learning_rate", "must be positive");
    if (c.format != "auto" && c.format != "raw" && c.format != "vrt") error("format", "must be auto, raw or vrt");
    if (c.classifier_features != "all" && c.classifier_features != "significant") {
        error("classifier_features", "must be all or significant");
    }
    for (const auto* key : {"distance_input", "embed_input"}) {
        const auto& v = std::string_view(key) == "distance_input" ? c.distance_input : c.embed_input;
        if (v != "dimensions" && v != "features") error(key, "must be dimensions or features");
    }
    try {
        if (c.classifier_kinds().empty()) error("classifiers", "no classifier selected");
    } catch (const InputError& e) {
        error("classifiers", e.what());
    }
    const auto& h = c.hyper;
    if (!(h.svm_c > 0) || h.svm_epochs <= 0 || h.rf_trees <= 0 || h.rf_max_depth < 0 || h.ab_rounds <= 0 ||
        h.mlp_hidden <= 0 || !(h.mlp_learning_rate > 0) || h.mlp_epochs <= 0 || h.mlp_batch <= 0) {
        error("hyperparameters", "classifier hyperparameters must be positive");
    }

    if (n_classes) {
        const std::size_t n = c.per_class * *n_classes;
        if (*n_classes < 2) error("corpus", "need at least 2 classes");
        if (c.n_test >= n) {
            error("n_test", "must be smaller than the number of samples (" + std::to_string(n) + ")");
        } else if (n - c.n_test < *n_classes) {
            error("n_test", "leaves fewer training samples than classes");
        }
        if (c.n_test == 0) warn("n_test", "empty test set; classifier metrics are undefined");
        const double bound = (static_cast<double>(n) - 1.0) / 3.0;
        if (n < 4) error("per_class", "t-SNE needs at least 4 samples");
        if (c.perplexity >= bound) {
            error("perplexity", "must be below (n - 1) / 3 = " + csv::format_double(bound) + " for n = " + std::to_string(n));
        }
        if (c.clusters > n) error("clusters", "exceeds the number of samples");
    }
    for (const auto& [label, available] : windows_available) {
        if (available < c.per_class) {
            error("per_class", "class '" + label + "' yields " + std::to_string(available) + " windows, fewer than " +
                                   std::to_string(c.per_class));
        }
    }
    return f;
}

inline void throw_on_errors(const std::vector<Finding>& findings) {
    std::string msg;
    for (const auto& f : findings) {
        if (f.severity == Severity::Error) msg += "\n  " + f.key + ": " + f.message;
    }
    if (!msg.empty()) throw InputError("invalid configuration:" + msg);
}

// ---------------------------------------------------------------------------
// Stages

enum class Stage { Ingest, Sample, Tag, Screen, Factor, Classify, Cluster, Distance, Embed };

inline constexpr std::array<Stage, 9> k_stages{Stage::Ingest, Stage::Sample, Stage::Tag, Stage::Screen, Stage::Factor,
                                               Stage::Classify, Stage::Cluster, Stage::Distance, Stage::Embed};

inline std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::Ingest: return "ingest";
        case Stage::Sample: return "sample";
        case Stage::Tag: return "tag";
        case Stage::Screen: return "screen";
        case Stage::Factor: return "factor";
        case Stage::Classify: return "classify";
        case Stage::Cluster: return "cluster";
        case Stage::Distance: return "distance";
        case Stage::Embed: return "embed";
    }
    return "?";
}

inline std::optional<Stage> parse_stage(std::string_view s) {
    for (auto st : k_stages) {
        if (to_string(st) == s) return st;
    }
    return std::nullopt;
}

enum class LogLevel { Debug, Info, Warn, Error };
using Logger = std::function<void(LogLevel, const std::string&)>;

/// 64-bit FNV-1a, rendered as 16 hex digits.
class Hasher {
public:
    Hasher& add(std::string_view s) {
        for (unsigned char c : s) {
            h_ ^= c;
            h_ *= 0x100000001b3ULL;
        }
        // length suffix keeps concatenations unambiguous
        const auto n = s.size();
        for (int i = 0; i < 8; ++i) {
            h_ ^= static_cast<unsigned char>(n >> (8 * i));
            h_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
        return buf;
    }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputError("cannot open " + p.string());
    return {std::istreambuf_iterator<char>(in), {}};
}

inline void write_file(const fs::path& p, std::string_view content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + p.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("failed writing " + p.string());
}

/// Exclusive lock on an output directory, released on destruction.
class OutputLock {
public:
    explicit OutputLock(const fs::path& dir) : path_(dir / ".styloscope.lock") {
        fs::create_directories(dir);
        std::FILE* f = std::fopen(path_.c_str(), "wx");
        if (!f) {
            throw InputError("output directory is locked by another run: " + path_.string() +
                             " (delete it if no run is active)");
        }
        std::fprintf(f, "%ld\n", static_cast<long>(::getpid()));
        std::fclose(f);
    }
    ~OutputLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

private:
    fs::path path_;
};

struct StageRecord {
    std::vector<std::string> artifacts;
    bool cached = false;
    double wall_seconds = 0.0;
};

class Pipeline {
public:
    explicit Pipeline(PipelineConfig config, Logger log = {}) : cfg_(std::move(config)), log_(std::move(log)) {
        if (!log_) log_ = [](LogLevel, const std::string&) {};
    }

    const PipelineConfig& config() const { return cfg_; }
    const std::map<std::string, StageRecord>& records() const { return records_; }

    /// Runs one stage, skipping it when its cached input hash and outputs match.
    void run(Stage stage) {
        throw_on_errors(validate(cfg_));
        OutputLock lock(cfg_.out);
        run_locked(stage);
        finish();
    }

    void run_all() {
        throw_on_errors(validate(cfg_));
        OutputLock lock(cfg_.out);
        for (auto s : k_stages) run_locked(s);
        finish();
    }

    static std::vector<std::string> inputs_of(Stage s, const PipelineConfig& c) {
        switch (s) {
            case Stage::Ingest: return {};
            case Stage::Sample: return {"ingest_summary.json"};
            case Stage::Tag: return {"ingest_summary.json", "windows.csv"};
            case Stage::Screen: return {"features.csv"};
            case Stage::Factor: return {"features.csv", "diagnostics.json"};
            case Stage::Classify:
                return c.classifier_features == "significant" ? std::vector<std::string>{"features.csv", "diagnostics.json"}
                                                              : std::vector<std::string>{"features.csv"};
            case Stage::Cluster: return {"features.csv"};
            case Stage::Distance:
                return {c.distance_input == "features" ? "features.csv" : "dimension_scores.csv"};
            case Stage::Embed: return {c.embed_input == "features" ? "features.csv" : "dimension_scores.csv"};
        }
        return {};
    }

    static Stage producer_of(std::string_view artifact) {
        if (artifact == "ingest_summary.json") return Stage::Ingest;
        if (artifact == "windows.csv") return Stage::Sample;
        if (artifact == "features.csv") return Stage::Tag;
        if (artifact == "diagnostics.json" || artifact == "significance.csv") return Stage::Screen;
        return Stage::Factor;
    }

private:
    fs::path at(std::string_view name) const { return cfg_.out / name; }

    void info(const std::string& m) const { log_(LogLevel::Info, m); }
    void warn(const std::string& m) const { log_(LogLevel::Warn, m); }

    std::string emit(std::string_view name, std::string_view content) {
        write_file(at(name), content);
        current_.push_back(std::string(name));
        return std::string(name);
    }

    /// Config keys that influence a stage's outputs.
    std::vector<std::string> keys_of(Stage s) const {
        switch (s) {
            case Stage::Ingest: return {"format"};
            case Stage::Sample: return {"window_length", "step", "per_class", "seed", "n_test", "perplexity", "clusters"};
            case Stage::Tag: return {"window_length", "step", "per_words"};
            case Stage::Screen: return {"alpha"};
            case Stage::Factor: return {"n_factors", "threshold"};
            case Stage::Classify:
                return {"seed", "n_test", "classifiers", "classifier_features", "stratified", "svm_c", "svm_epochs",
                        "rf_trees", "rf_max_depth", "ab_rounds", "mlp_hidden", "mlp_learning_rate", "mlp_epochs",
                        "mlp_batch"};
            case Stage::Cluster: return {"clusters"};
            case Stage::Distance: return {"distance_input"};
            case Stage::Embed: return {"seed", "embed_input", "perplexity", "tsne_iterations", "tsne_learning_rate"};
        }
        return {};
    }

    std::string input_hash(Stage s) const {
        Hasher h;
        h.add(to_string(s)).add(STYLOSCOPE_VERSION);
        const auto entries = config_entries(cfg_);
        for (const auto& key : keys_of(s)) {
            for (const auto& [k, v] : entries) {
                if (k == key) h.add(k).add(v);
            }
        }
        if (s == Stage::Ingest) {
            if (!fs::is_directory(cfg_.corpus)) throw InputError("corpus directory not found: " + cfg_.corpus.string());
            std::vector<fs::path> files;
            for (const auto& e : fs::recursive_directory_iterator(cfg_.corpus)) {
                if (e.is_regular_file()) files.push_back(e.path());
            }
            std::sort(files.begin(), files.end());
            for (const auto& f : files) h.add(fs::relative(f, cfg_.corpus).generic_string()).add(read_file(f));
        } else {
            for (const auto& name : inputs_of(s, cfg_)) {
                if (!fs::exists(at(name))) {
                    throw InputError("missing artifact " + at(name).string() + ": run `styloscope " +
                                     std::string(to_string(producer_of(name))) + "` first");
                }
                h.add(name).add(read_file(at(name)));
            }
            if (s == Stage::Sample || s == Stage::Tag) {
                for (const auto& label : class_labels()) {
                    const std::string name = "tagged/" + label + ".vrt";
                    h.add(name).add(read_file(at(name)));
                }
            }
        }
        return h.hex();
    }

    fs::path cache_file(Stage s) const { return cfg_.out / ".cache" / (std::string(to_string(s)) + ".hash"); }

    bool cache_hit(Stage s, const std::string& hash, std::vector<std::string>& artifacts) const {
        std::ifstream in(cache_file(s), std::ios::binary);
        if (!in) return false;
        std::string line;
        if (!std::getline(in, line) || line != hash) return false;
        std::vector<std::string> names;
        while (std::getline(in, line)) {
            const auto sp = line.rfind(' ');
            if (sp == std::string::npos) return false;
            const std::string name = line.substr(0, sp);
            if (!fs::exists(at(name)) || Hasher().add(read_file(at(name))).hex() != line.substr(sp + 1)) return false;
            names.push_back(name);
        }
        artifacts = names;
        return true;
    }

    void store_cache(Stage s, const std::string& hash) const {
        std::string text = hash + "\n";
        for (const auto& name : current_) text += name + " " + Hasher().add(read_file(at(name))).hex() + "\n";
        write_file(cache_file(s), text);
    }

    void run_locked(Stage s) {
        const auto start = std::chrono::steady_clock::now();
        const std::string hash = input_hash(s);
        StageRecord rec;
        if (cache_hit(s, hash, rec.artifacts)) {
            rec.cached = true;
            info(std::string(to_string(s)) + ": up to date (cached)");
        } else {
            info(std::string(to_string(s)) + ": running");
            current_.clear();
            execute(s);
            store_cache(s, hash);
            rec.artifacts = current_;
        }
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        records_[std::string(to_string(s))] = rec;
    }

    void execute(Stage s) {
        switch (s) {
            case Stage::Ingest: ingest(); break;
            case Stage::Sample: sample(); break;
            case Stage::Tag: tag(); break;
            case Stage::Screen: screen(); break;
            case Stage::Factor: factor_stage(); break;
            case Stage::Classify: classify(); break;
            case Stage::Cluster: cluster(); break;
            case Stage::Distance: distance(); break;
            case Stage::Embed: embed(); break;
        }
    }

    // -- ingest ----------------------------------------------------------------

    void ingest() {
        CorpusLayout layout;
        layout.format = cfg_.format == "raw"   ? CorpusLayout::Format::Raw
                        : cfg_.format == "vrt" ? CorpusLayout::Format::Vertical
                                               : CorpusLayout::Format::Auto;
        const CorpusSet corpus = load_corpus(cfg_.corpus, layout);
        std::error_code ec;
        fs::remove_all(at("tagged"), ec);
        json summary;
        summary["corpus"] = cfg_.corpus.generic_string();
        summary["classes"] = json::array();
        for (const auto& cls : corpus.classes) {
            std::ostringstream vrt;
            write_pretagged(vrt, cls.documents);
            emit("tagged/" + cls.label + ".vrt", vrt.str());
            json c;
            c["label"] = cls.label;
            c["documents"] = cls.documents.size();
            c["files"] = cls.files;
            c["tokens"] = cls.token_count();
            c["words"] = cls.word_count();
            summary["classes"].push_back(c);
            info("ingest: " + cls.label + ": " + std::to_string(cls.documents.size()) + " documents, " +
                 std::to_string(cls.word_count()) + " words");
        }
        emit("ingest_summary.json", summary.dump(2) + "\n");
    }

    std::vector<std::string> class_labels() const {
        const json summary = json::parse(read_file(at("ingest_summary.json")));
        std::vector<std::string> labels;
        for (const auto& c : summary.at("classes")) labels.push_back(c.at("label").get<std::string>());
        return labels;
    }

    std::vector<AnnotatedToken> class_stream(const std::string& label) const {
        const fs::path p = at("tagged/" + label + ".vrt");
        if (!fs::exists(p)) throw InputError("missing artifact " + p.string() + ": run `styloscope ingest` first");
        const auto docs = read_pretagged(p);
        return concatenate(docs);
    }

    // -- sample ----------------------------------------------------------------

    void sample() {
        const auto labels = class_labels();
        std::map<std::string, std::size_t> available;
        std::vector<WindowingResult> all;
        for (const auto& label : labels) {
            const auto stream = class_stream(label);
            all.push_back(rolling_windows(stream, cfg_.window_length, cfg_.step, label));
            available[label] = all.back().windows.size();
            for (const auto& w : all.back().warnings) warn("sample: " + w);
            info("sample: " + label + ": " + std::to_string(available[label]) + " windows available");
        }
        const auto findings = validate(cfg_, labels.size(), available);
        for (const auto& f : findings) {
            if (f.severity == Severity::Warning) warn("sample: " + f.key + ": " + f.message);
        }
        throw_on_errors(findings);
        std::vector<SampleWindow> chosen;
        for (std::size_t c = 0; c < labels.size(); ++c) {
            Random rng(cfg_.seed, Random::stream_id("subsample:" + labels[c]));
            auto picked = subsample(all[c].windows, cfg_.per_class, rng);
            chosen.insert(chosen.end(), std::make_move_iterator(picked.begin()), std::make_move_iterator(picked.end()));
        }
        std::ostringstream out;
        write_window_manifest(out, chosen);
        emit("windows.csv", out.str());
    }

    // -- tag -------------------------------------------------------------------

    void tag() {
        std::ifstream in(at("windows.csv"), std::ios::binary);
        const auto rows = csv::read_all(in);
        if (rows.empty() || rows[0] != csv::Row{"class", "window_index", "start_offset"}) {
            throw InputError("windows.csv: unexpected header");
        }
        std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> wanted;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].size() != 3) throw InputError("windows.csv: malformed row " + std::to_string(i));
            wanted[rows[i][0]].push_back({static_cast<std::size_t>(csv::parse_double(rows[i][1])),
                                          static_cast<std::size_t>(csv::parse_double(rows[i][2]))});
        }
        std::vector<SampleWindow> windows;
        for (const auto& [label, picks] : wanted) {
            const auto stream = class_stream(label);
            auto result = rolling_windows(stream, cfg_.window_length, cfg_.step, label);
            for (const auto& [index, offset] : picks) {
                if (index >= result.windows.size() || result.windows[index].start_offset != offset) {
                    throw InputError("windows.csv does not match tagged/" + label + ".vrt; rerun `styloscope sample`");
                }
                windows.push_back(std::move(result.windows[index]));
            }
        }
        FeatureOptions opts;
        opts.per_words = cfg_.per_words;
        const FeatureExtractor extractor(Lexicon::builtin(), opts);
        const auto built = build_matrix(windows, extractor);
        for (const auto& f : built.flags) warn("tag: " + f);
        std::ostringstream out;
        built.matrix.write_csv(out);
        emit("features.csv", out.str());
    }

    FeatureMatrix read_matrix(std::string_view name) const {
        std::ifstream in(at(name), std::ios::binary);
        if (!in) throw InputError("missing artifact " + at(name).string());
        return FeatureMatrix::read_csv(in);
    }

    // -- screen ----------------------------------------------------------------

    void screen() {
        const FeatureMatrix m = read_matrix("features.csv");
        const auto scr = stats::select_significant(m, cfg_.alpha);
        for (const auto& f : scr.flags) warn("screen: " + f);
        std::ostringstream sig;
        stats::write_significance_csv(sig, scr.tests);
        emit("significance.csv", sig.str());
        info("screen: " + std::to_string(scr.selected.size()) + " of " + std::to_string(scr.tests.size()) +
             " features significant");
        if (scr.selected.size() < 3) {
            throw InputError("only " + std::to_string(scr.selected.size()) +
                             " significant features; factor analysis needs at least 3");
        }
        const FeatureMatrix sel = m.select(scr.selected);
        const auto corr = stats::correlation_matrix(sel);
        const auto pruned = stats::prune_collinear(corr, sel);
        for (const auto& r : pruned.removals) info("screen: removed " + r.feature + " (" + r.trigger + ")");
        json d;
        d["alpha"] = cfg_.alpha;
        d["n_samples"] = m.rows();
        d["tested"] = scr.tests.size();
        d["significant"] = scr.selected;
        d["removals"] = json::array();
        for (const auto& r : pruned.removals) d["removals"].push_back({{"feature", r.feature}, {"trigger", r.trigger}});
        d["retained"] = pruned.corr.ids;
        d["kmo"] = stats::kmo(pruned.corr);
        const auto b = stats::bartlett(pruned.corr, m.rows());
        d["bartlett"] = {{"chi2", b.chi2}, {"df", b.df}, {"p", b.p}};
        d["flags"] = scr.flags;
        for (const auto& f : corr.flags) d["flags"].push_back(f);
        emit("diagnostics.json", d.dump(2) + "\n");
    }

    // -- factor ----------------------------------------------------------------

    void factor_stage() {
        const FeatureMatrix m = read_matrix("features.csv");
        const json diag = json::parse(read_file(at("diagnostics.json")));
        const auto retained = diag.at("retained").get<std::vector<std::string>>();
        const FeatureMatrix sub = m.select(retained);
        const auto corr = stats::correlation_matrix(sub);
        const auto es = factor::eigendecompose(corr.r);
        std::ostringstream sc;
        const auto rows = factor::scree(es.values);
        factor::write_scree_csv(sc, rows);
        emit("scree.csv", sc.str());
        if (cfg_.n_factors > retained.size()) {
            throw InputError("n_factors = " + std::to_string(cfg_.n_factors) + " exceeds the " +
                             std::to_string(retained.size()) + " retained features");
        }
        const auto loadings = factor::extract_loadings(es, cfg_.n_factors);
        const auto rot = factor::varimax(loadings);
        std::ostringstream lo;
        factor::write_loadings_csv(lo, rot.loadings, retained);
        emit("loadings.csv", lo.str());
        const auto assign = factor::assign_features(rot.loadings, retained, cfg_.threshold);
        for (const auto& c : assign.cross_loadings) info("factor: cross-loading: " + c);
        const auto scores = factor::dimension_scores(sub, assign);
        for (const auto& f : scores.flags) warn("factor: " + f);

        json a;
        a["threshold"] = assign.threshold;
        a["varimax"] = {{"sweeps", rot.sweeps}, {"criterion", rot.criterion}};
        a["factors"] = json::array();
        for (std::size_t f = 0; f < assign.factors.size(); ++f) {
            auto loading_of = [&](const std::string& id) {
                const auto i = std::find(retained.begin(), retained.end(), id) - retained.begin();
                return rot.loadings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f));
            };
            json fac;
            fac["factor"] = f + 1;
            fac["eigenvalue"] = es.values(static_cast<Eigen::Index>(f));
            fac["positive"] = json::array();
            for (const auto& id : assign.factors[f].positive) fac["positive"].push_back({{"feature", id}, {"loading", loading_of(id)}});
            fac["negative"] = json::array();
            for (const auto& id : assign.factors[f].negative) fac["negative"].push_back({{"feature", id}, {"loading", loading_of(id)}});
            const auto& t = scores.tests[f];
            fac["kruskal_wallis"] = {{"H", t.H}, {"df", t.df}, {"p", t.p_raw}, {"eta_sq", t.eta_sq}};
            a["factors"].push_back(fac);
        }
        a["unassigned"] = assign.unassigned;
        a["cross_loadings"] = assign.cross_loadings;
        emit("assignments.json", a.dump(2) + "\n");

        std::ostringstream ds;
        factor::write_dimension_scores_csv(ds, scores);
        emit("dimension_scores.csv", ds.str());

        const auto classes = sorted_classes(m.labels);
        for (Eigen::Index f = 0; f < scores.scores.cols(); ++f) {
            const auto groups = stats::group_column(scores.scores, f, m.labels, classes);
            const auto& t = scores.tests[static_cast<std::size_t>(f)];
            const std::string title = "Dimension " + std::to_string(f + 1) + ": H(" + std::to_string(t.df) + ", " +
                                      std::to_string(m.rows()) + ") = " + svg::num(t.H);
            const auto chart = svg::boxplots(classes, groups, title, "dimension score");
            for (const auto& w : chart.warnings) warn("factor: " + w);
            emit("dim" + std::to_string(f + 1) + "_boxplot.svg", chart.text);
        }
    }

    static std::vector<std::string> sorted_classes(std::vector<std::string> labels) {
        std::sort(labels.begin(), labels.end());
        labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
        return labels;
    }

    // -- classify --------------------------------------------------------------

    void classify() {
        FeatureMatrix m = read_matrix("features.csv");
        if (cfg_.classifier_features == "significant") {
            const json diag = json::parse(read_file(at("diagnostics.json")));
            m = m.select(diag.at("significant").get<std::vector<std::string>>());
        }
        const auto sp = cfg_.stratified ? learn::stratified_split(m.labels, cfg_.n_test, cfg_.seed)
                                        : learn::split(m.rows(), cfg_.n_test, cfg_.seed);
        for (const auto& w : sp.warnings) warn("classify: " + w);
        const Eigen::MatrixXd xtr = learn::take_rows(m.values, sp.train);
        const Eigen::MatrixXd xte = learn::take_rows(m.values, sp.test);
        const auto ytr = learn::take<std::string>(m.labels, sp.train);
        const auto yte = learn::take<std::string>(m.labels, sp.test);

        json r;
        r["features"] = cfg_.classifier_features;
        r["n_features"] = m.cols();
        r["split"] = {{"seed", cfg_.seed},
                      {"stratified", cfg_.stratified},
                      {"n_train", sp.train.size()},
                      {"n_test", sp.test.size()},
                      {"test_samples", learn::take<std::string>(m.sample_ids, sp.test)}};
        const auto& h = cfg_.hyper;
        r["hyperparameters"] = {
            {"naive-bayes", {{"var_floor", h.nb_var_floor}}},
            {"linear-svm", {{"C", h.svm_c}, {"epochs", h.svm_epochs}, {"learning_rate", h.svm_learning_rate}}},
            {"random-forest", {{"trees", h.rf_trees}, {"max_depth", h.rf_max_depth}, {"max_features", "sqrt"}}},
            {"adaboost", {{"rounds", h.ab_rounds}, {"base", "stump"}}},
            {"mlp", {{"hidden", h.mlp_hidden}, {"activation", "tanh"}, {"learning_rate", h.mlp_learning_rate},
                     {"epochs", h.mlp_epochs}, {"batch", h.mlp_batch}, {"momentum", h.mlp_momentum}}}};
        r["classifiers"] = json::array();
        for (auto kind : cfg_.classifier_kinds()) {
            const auto model = learn::fit(kind, xtr, ytr, cfg_.hyper, cfg_.seed);
            const auto pred = model.predict(xte);
            const auto rep = learn::metrics(pred, yte);
            json c;
            c["kind"] = std::string(learn::to_string(kind));
            c["accuracy"] = rep.accuracy;
            auto metric_json = [](const learn::ClassMetrics& cm) {
                return json{{"label", cm.label}, {"precision", cm.precision}, {"recall", cm.recall}, {"f1", cm.f1},
                            {"support", cm.support}};
            };
            c["classes"] = json::array();
            for (const auto& cm : rep.per_class) c["classes"].push_back(metric_json(cm));
            c["macro_avg"] = metric_json(rep.macro_avg);
            c["weighted_avg"] = metric_json(rep.weighted_avg);
            c["confusion"] = rep.confusion;
            c["flags"] = rep.flags;
            r["classifiers"].push_back(c);
            info("classify: " + std::string(learn::to_string(kind)) + " accuracy " + csv::format_double(rep.accuracy));
        }
        emit("classification_report.json", r.dump(2) + "\n");
    }

    // -- cluster ---------------------------------------------------------------

    void cluster() {
        const FeatureMatrix m = read_matrix("features.csv");
        const auto d = learn::hca_ward(stats::zscore(m.values), m.sample_ids);
        json j;
        j["linkage"] = "ward";
        j["input"] = "z-scored features";
        j["leaves"] = json::array();
        for (std::size_t i = 0; i < m.rows(); ++i) j["leaves"].push_back({{"id", m.sample_ids[i]}, {"class", m.labels[i]}});
        j["merges"] = json::array();
        for (const auto& mg : d.merges) {
            j["merges"].push_back({{"a", mg.a}, {"b", mg.b}, {"height", mg.height}, {"size", mg.size}});
        }
        emit("dendrogram.json", j.dump(2) + "\n");
        emit("dendrogram.svg", svg::dendrogram(d, m.labels).text);
        const auto classes = sorted_classes(m.labels);
        const std::size_t k = cfg_.clusters ? cfg_.clusters : classes.size();
        const auto cut = learn::cut_tree(d, k);
        const auto table = learn::contingency(cut, m.labels);
        std::ostringstream out;
        csv::Row header{"cluster"};
        header.insert(header.end(), table.classes.begin(), table.classes.end());
        csv::write_row(out, header);
        for (std::size_t c = 0; c < table.counts.size(); ++c) {
            csv::Row row{std::to_string(c + 1)};
            for (auto v : table.counts[c]) row.push_back(std::to_string(v));
            csv::write_row(out, row);
        }
        emit("contingency.csv", out.str());
    }

    // -- distance / embed ------------------------------------------------------

    FeatureMatrix geometry_input(const std::string& choice) const {
        if (choice == "features") {
            FeatureMatrix m = read_matrix("features.csv");
            m.values = stats::zscore(m.values);
            return m;
        }
        return read_matrix("dimension_scores.csv");
    }

    void distance() {
        const FeatureMatrix m = geometry_input(cfg_.distance_input);
        const auto d = geometry::euclidean_matrix(m.values);
        std::ostringstream out;
        geometry::write_distance_csv(out, d, m.sample_ids);
        emit("distances.csv", out.str());
        json j;
        j["input"] = cfg_.distance_input;
        j["pairs"] = json::array();
        for (const auto& g : geometry::group_mean_distances(d, m.labels)) {
            j["pairs"].push_back({{"a", g.a}, {"b", g.b}, {"mean", g.mean}, {"pairs", g.pairs}});
            info("distance: (" + g.a + ", " + g.b + ") mean " + csv::format_double(g.mean));
        }
        emit("group_distances.json", j.dump(2) + "\n");
    }

    void embed() {
        const FeatureMatrix m = geometry_input(cfg_.embed_input);
        const auto e = geometry::tsne(m.values, cfg_.tsne_params(), cfg_.seed);
        std::ostringstream out;
        csv::write_row(out, {"sample", "class", "x", "y"});
        for (std::size_t i = 0; i < m.rows(); ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            csv::write_row(out, {m.sample_ids[i], m.labels[i], csv::format_double(e.coords(r, 0)),
                                 csv::format_double(e.coords(r, 1))});
        }
        emit("embedding.csv", out.str());
        json j;
        j["input"] = cfg_.embed_input;
        j["seed"] = cfg_.seed;
        const auto& p = e.params;
        j["parameters"] = {{"perplexity", p.perplexity},
                           {"iterations", p.iterations},
                           {"learning_rate", p.learning_rate},
                           {"early_exaggeration", p.early_exaggeration},
                           {"exaggeration_iterations", p.exaggeration_iters},
                           {"momentum", {p.initial_momentum, p.final_momentum}},
                           {"momentum_switch", p.momentum_switch},
                           {"entropy_base", 2}};
        j["kl_history"] = json::array();
        for (const auto& c : e.kl_history) j["kl_history"].push_back({{"iteration", c.iteration}, {"kl", c.kl}});
        j["final_kl"] = e.final_kl;
        emit("embedding.json", j.dump(2) + "\n");
        const auto chart = svg::scatter(e.coords, m.labels, {}, "t-SNE embedding");
        for (const auto& w : chart.warnings) warn("embed: " + w);
        emit("embedding.svg", chart.text);
        info("embed: final KL " + csv::format_double(e.final_kl));
    }

    // -- report ----------------------------------------------------------------

    void finish() {
        write_file(at("config_echo.txt"), config_echo(cfg_));
        json report;
        if (fs::exists(at("report.json"))) {
            try {
                report = json::parse(read_file(at("report.json")));
            } catch (const json::exception&) {
                report = json{};
            }
        }
        report["tool"] = "styloscope";
        report["version"] = STYLOSCOPE_VERSION;
        report["seed"] = cfg_.seed;
        json config;
        for (const auto& [k, v] : config_entries(cfg_)) config[k] = v;
        report["config"] = config;
        report["config_echo"] = "config_echo.txt";
        if (!report.contains("stages") || !report["stages"].is_object()) report["stages"] = json::object();
        for (auto s : k_stages) {
            const auto it = records_.find(std::string(to_string(s)));
            if (it == records_.end()) continue;
            for (const auto& a : it->second.artifacts) {
                if (!fs::exists(at(a))) throw Error("report: artifact missing at write time: " + a);
            }
            report["stages"][it->first] = {{"artifacts", it->second.artifacts},
                                           {"cached", it->second.cached},
                                           {"wall_seconds", it->second.wall_seconds}};
        }
        write_file(at("report.json"), report.dump(2) + "\n");
    }

    PipelineConfig cfg_;
    Logger log_;
    std::map<std::string, StageRecord> records_;
    std::vector<std::string> current_;
};

}  // namespace styloscope::pipeline
