// styloscope command-line driver.
//
// Settings are resolved as: built-in defaults, then the --config file, then
// --set key=value pairs, then the dedicated flags below.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "styloscope/pipeline.hpp"

namespace {

namespace sp = styloscope::pipeline;

spdlog::level::level_enum level_from_env() {
    const char* env = std::getenv("STYLOSCOPE_LOG");
    if (!env) return spdlog::level::info;
    const auto lvl = spdlog::level::from_str(env);
    // from_str returns "off" for unknown names
    return (lvl == spdlog::level::off && std::string(env) != "off") ? spdlog::level::info : lvl;
}

sp::Logger make_logger(const std::shared_ptr<spdlog::logger>& log) {
    return [log](sp::LogLevel level, const std::string& msg) {
        switch (level) {
            case sp::LogLevel::Debug: log->debug(msg); break;
            case sp::LogLevel::Info: log->info(msg); break;
            case sp::LogLevel::Warn: log->warn(msg); break;
            case sp::LogLevel::Error: log->error(msg); break;
        }
    };
}

struct Flags {
    std::string config;
    std::vector<std::string> sets;
    std::optional<std::string> corpus, out, format, classifiers;
    std::optional<std::size_t> window, step, per_class, n_factors, n_test, clusters;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha, threshold, perplexity;
    std::optional<int> iterations;
};

void add_flags(CLI::App& app, Flags& f) {
    app.add_option("--config", f.config, "Configuration file (key = value lines)");
    app.add_option("--set", f.sets, "Override any configuration key (key=value); repeatable");
    app.add_option("--corpus", f.corpus, "Corpus root: one subdirectory per class");
    app.add_option("--out", f.out, "Output directory");
    app.add_option("--format", f.format, "Corpus format: auto, raw or vrt");
    app.add_option("--window", f.window, "Window length in words");
    app.add_option("--step", f.step, "Window step in words");
    app.add_option("--per-class", f.per_class, "Windows sampled per class");
    app.add_option("--seed", f.seed, "Random seed");
    app.add_option("--alpha", f.alpha, "Family-wise significance level");
    app.add_option("--threshold", f.threshold, "Salient loading threshold");
    app.add_option("--n-factors", f.n_factors, "Number of factors");
    app.add_option("--n-test", f.n_test, "Held-out test samples");
    app.add_option("--classifiers", f.classifiers, "Comma-separated classifier kinds");
    app.add_option("--clusters", f.clusters, "Clusters for the dendrogram cut (0 = number of classes)");
    app.add_option("--perplexity", f.perplexity, "t-SNE perplexity");
    app.add_option("--iterations", f.iterations, "t-SNE iterations");
}

sp::PipelineConfig resolve(const Flags& f) {
    sp::PipelineConfig c;
    if (!f.config.empty()) sp::apply_config_file(c, f.config);
    for (const auto& kv : f.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw styloscope::InputError("--set expects key=value, got '" + kv + "'");
        sp::set_option(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (f.corpus) c.corpus = *f.corpus;
    if (f.out) c.out = *f.out;
    if (f.format) c.format = *f.format;
    if (f.window) c.window_length = *f.window;
    if (f.step) c.step = *f.step;
    if (f.per_class) c.per_class = *f.per_class;
    if (f.seed) c.seed = *f.seed;
    if (f.alpha) c.alpha = *f.alpha;
    if (f.threshold) c.threshold = *f.threshold;
    if (f.n_factors) c.n_factors = *f.n_factors;
    if (f.n_test) c.n_test = *f.n_test;
    if (f.classifiers) c.classifiers = *f.classifiers;
    if (f.clusters) c.clusters = *f.clusters;
    if (f.perplexity) c.perplexity = *f.perplexity;
    if (f.iterations) c.tsne_iterations = *f.iterations;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    auto log = spdlog::stderr_color_mt("styloscope");
    log->set_level(level_from_env());
    log->set_pattern("[%l] %v");

    CLI::App app{"styloscope: corpus stylometry pipeline"};
    app.set_version_flag("--version", STYLOSCOPE_VERSION);
    app.require_subcommand(1, 1);
    app.fallthrough();
    Flags flags;
    add_flags(app, flags);

    std::vector<std::pair<CLI::App*, std::string>> subs;
    for (auto stage : sp::k_stages) {
        const std::string name(sp::to_string(stage));
        subs.emplace_back(app.add_subcommand(name, "Run the " + name + " stage"), name);
    }
    subs.emplace_back(app.add_subcommand("all", "Run every stage in order"), "all");
    subs.emplace_back(app.add_subcommand("validate", "Check the configuration and exit"), "validate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    std::string command;
    for (const auto& [sub, name] : subs) {
        if (sub->parsed()) command = name;
    }

    try {
        const auto config = resolve(flags);
        if (command == "validate") {
            int errors = 0;
            for (const auto& f : sp::validate(config)) {
                const bool err = f.severity == sp::Severity::Error;
                errors += err;
                std::cout << (err ? "error" : "warning") << ": " << f.key << ": " << f.message << "\n";
            }
            if (errors == 0) std::cout << "configuration ok\n";
            return errors == 0 ? 0 : 1;
        }
        sp::Pipeline pipeline(config, make_logger(log));
        if (command == "all") {
            pipeline.run_all();
        } else {
            pipeline.run(*sp::parse_stage(command));
        }
        log->info("outputs in {}", config.out.string());
        return 0;
    } catch (const styloscope::InputError& e) {
        log->error("{}", e.what());
        return 1;
    } catch (const std::exception& e) {
        log->error("internal error: {}", e.what());
        return 2;
    }
}
