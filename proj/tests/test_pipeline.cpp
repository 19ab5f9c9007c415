#include <gtest/gtest.h>

#include <cstdlib>
#include <set>

#include <sys/wait.h>

#include "styloscope/pipeline.hpp"
#include "support.hpp"

using namespace styloscope;
using namespace styloscope::pipeline;
namespace fs = std::filesystem;
namespace ts = testing_support;

namespace {

bool has_error(const std::vector<Finding>& findings, std::string_view key) {
    return std::any_of(findings.begin(), findings.end(),
                       [&](const Finding& f) { return f.severity == Severity::Error && f.key == key; });
}

// Eight documents per class from the demo corpus.
fs::path small_corpus() {
    static const fs::path root = [] {
        const auto dir = ts::temp_dir("small_corpus");
        for (const char* cls : {"ChatGPT", "HT", "NMT"}) {
            fs::create_directories(dir / cls);
            for (int d = 1; d <= 8; ++d) {
                const std::string name = "doc_00" + std::to_string(d) + ".txt";
                fs::copy_file(ts::source_dir() / "data/demo_corpus" / cls / name, dir / cls / name);
            }
        }
        return dir;
    }();
    return root;
}

PipelineConfig small_config(const fs::path& out) {
    PipelineConfig c;
    c.corpus = small_corpus();
    c.out = out;
    c.window_length = 1000;
    c.step = 200;
    c.per_class = 10;
    c.n_test = 6;
    c.n_factors = 2;
    c.perplexity = 5;
    c.tsne_iterations = 300;
    c.hyper.mlp_epochs = 100;
    c.hyper.rf_trees = 30;
    return c;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(STYLOSCOPE_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesKeyValueText) {
    PipelineConfig c;
    apply_config_text(c, "# comment\nwindow_length = 2000\n\n  step=250   # trailing\nclassifiers = mlp, adaboost\n");
    EXPECT_EQ(c.window_length, 2000u);
    EXPECT_EQ(c.step, 250u);
    EXPECT_EQ(c.classifier_kinds(),
              (std::vector<learn::ClassifierKind>{learn::ClassifierKind::Mlp, learn::ClassifierKind::AdaBoost}));
}

TEST(Config, ErrorsCarryLocation) {
    const std::vector<std::pair<std::string, std::string>> cases{
        {"step = 5\nbogus = 1\n", "cfg:2"},
        {"step = 5\nstep = 6\n", "cfg:2"},
        {"window_length = ten\n", "cfg:1"},
        {"seed\n", "cfg:1"},
        {"step = -3\n", "cfg:1"},
    };
    for (const auto& [text, where] : cases) {
        PipelineConfig c;
        try {
            apply_config_text(c, text, "cfg");
            FAIL() << "accepted: " << text;
        } catch (const InputError& e) {
            EXPECT_NE(std::string(e.what()).find(where), std::string::npos) << e.what();
        }
    }
}

TEST(Config, RelativePathsFollowConfigFile) {
    const auto dir = ts::temp_dir("config_paths");
    std::ofstream(dir / "run.conf") << "corpus = texts\nout = results\n";
    PipelineConfig c;
    apply_config_file(c, dir / "run.conf");
    EXPECT_EQ(c.corpus, (dir / "texts").lexically_normal());
    EXPECT_EQ(c.out, (dir / "results").lexically_normal());
    EXPECT_THROW(apply_config_file(c, dir / "missing.conf"), InputError);
}

TEST(Config, EchoRoundTrips) {
    PipelineConfig c;
    c.alpha = 0.01;
    c.hyper.svm_c = 2.5;
    c.stratified = true;
    PipelineConfig back;
    apply_config_text(back, config_echo(c));
    EXPECT_EQ(config_entries(back), config_entries(c));
}

TEST(Validate, DefaultConfigIsClean) {
    EXPECT_TRUE(validate(PipelineConfig{}).empty());
    EXPECT_TRUE(validate(PipelineConfig{}, 3).empty());
}

TEST(Validate, PerplexityBoundForSampleCount) {
    PipelineConfig c;
    c.perplexity = 60;
    EXPECT_TRUE(has_error(validate(c, 3), "perplexity"));
    c.perplexity = 49.6;
    EXPECT_FALSE(has_error(validate(c, 3), "perplexity"));
    c.perplexity = 60;
    EXPECT_THROW(throw_on_errors(validate(c, 3)), InputError);
}

TEST(Validate, TooFewWindows) {
    PipelineConfig c;
    const auto f = validate(c, 3, {{"HT", 40}, {"NMT", 71}});
    ASSERT_TRUE(has_error(f, "per_class"));
    EXPECT_EQ(std::count_if(f.begin(), f.end(), [](const Finding& x) { return x.severity == Severity::Error; }), 1);
}

TEST(Validate, StructuralErrors) {
    PipelineConfig c;
    c.step = 6000;
    c.classifiers = "knn";
    c.n_test = 150;
    c.format = "xml";
    const auto f = validate(c, 3);
    for (const char* key : {"step", "classifiers", "n_test", "format"}) EXPECT_TRUE(has_error(f, key)) << key;
    c = PipelineConfig{};
    c.n_test = 0;
    const auto w = validate(c, 3);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0].severity, Severity::Warning);
}

TEST(Stages, NamesAndProducers) {
    for (auto s : k_stages) EXPECT_EQ(parse_stage(to_string(s)), s);
    EXPECT_FALSE(parse_stage("everything"));
    EXPECT_EQ(Pipeline::producer_of("diagnostics.json"), Stage::Screen);
    EXPECT_EQ(Pipeline::producer_of("dimension_scores.csv"), Stage::Factor);
}

class EndToEnd : public ::testing::Test {
protected:
    static fs::path out() { return fs::temp_directory_path() / "styloscope_test_e2e"; }

    static void SetUpTestSuite() {
        fs::remove_all(out());
        Pipeline p(small_config(out()));
        p.run_all();
    }
};

TEST_F(EndToEnd, ProducesEveryArtifact) {
    for (const char* name :
         {"ingest_summary.json", "windows.csv", "features.csv", "significance.csv", "diagnostics.json", "scree.csv",
          "loadings.csv", "assignments.json", "dimension_scores.csv", "dim1_boxplot.svg", "dim2_boxplot.svg",
          "classification_report.json", "dendrogram.json", "dendrogram.svg", "contingency.csv", "distances.csv",
          "group_distances.json", "embedding.csv", "embedding.json", "embedding.svg", "config_echo.txt",
          "report.json", "tagged/HT.vrt"}) {
        EXPECT_TRUE(fs::exists(out() / name)) << name;
    }
    EXPECT_FALSE(fs::exists(out() / ".styloscope.lock"));

    const auto report = nlohmann::json::parse(read_file(out() / "report.json"));
    EXPECT_EQ(report["stages"].size(), 9u);
    std::ifstream features(out() / "features.csv", std::ios::binary);
    const auto m = FeatureMatrix::read_csv(features);
    EXPECT_EQ(m.rows(), 30u);
    EXPECT_EQ(m.cols(), 121u);
    const auto cls = nlohmann::json::parse(read_file(out() / "classification_report.json"));
    EXPECT_EQ(cls["classifiers"].size(), 5u);
    for (const auto& c : cls["classifiers"]) EXPECT_EQ(c["confusion"].size(), 3u);
}

TEST_F(EndToEnd, CacheInvalidationFollowsDependencies) {
    const auto copy = ts::temp_dir("e2e_cache");
    fs::copy(out(), copy, fs::copy_options::recursive | fs::copy_options::overwrite_existing);

    Pipeline same(small_config(copy));
    same.run_all();
    for (const auto& [stage, rec] : same.records()) EXPECT_TRUE(rec.cached) << stage;

    auto changed = small_config(copy);
    changed.n_factors = 3;
    Pipeline p(changed);
    p.run_all();
    std::set<std::string> reran;
    for (const auto& [stage, rec] : p.records()) {
        if (!rec.cached) reran.insert(stage);
    }
    EXPECT_EQ(reran, (std::set<std::string>{"factor", "distance", "embed"}));
    EXPECT_TRUE(fs::exists(copy / "dim3_boxplot.svg"));
}

TEST_F(EndToEnd, MissingUpstreamArtifactNamesProducer) {
    const auto dir = ts::temp_dir("e2e_missing");
    for (const char* name : {"ingest_summary.json", "windows.csv", "features.csv"}) fs::copy_file(out() / name, dir / name);
    Pipeline p(small_config(dir));
    try {
        p.run(Stage::Factor);
        FAIL() << "factor ran without screen output";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("styloscope screen"), std::string::npos) << e.what();
    }
}

TEST(Lock, SecondRunRefused) {
    const auto dir = ts::temp_dir("lock");
    OutputLock held(dir);
    Pipeline p(small_config(dir));
    EXPECT_THROW(p.run(Stage::Ingest), InputError);
}

TEST(Cli, ExitCodes) {
    const auto dir = ts::temp_dir("cli");
    EXPECT_EQ(run_cli("--version"), 0);
    EXPECT_EQ(run_cli("frobnicate"), 1);
    EXPECT_EQ(run_cli(""), 1);
    EXPECT_EQ(run_cli("factor --out " + dir.string()), 1);
    EXPECT_EQ(run_cli("validate --set perplexity=-1"), 1);
    EXPECT_EQ(run_cli("validate --set nonsense=1"), 1);
    EXPECT_EQ(run_cli("validate --config " + (dir / "absent.conf").string()), 1);
}

TEST(Cli, Precedence) {
    const auto dir = ts::temp_dir("cli_precedence");
    std::ofstream(dir / "bad.conf") << "n_factors = 0\n";
    const std::string cfg = "validate --config " + (dir / "bad.conf").string();
    EXPECT_EQ(run_cli(cfg), 1);
    EXPECT_EQ(run_cli(cfg + " --set n_factors=3"), 0);
    EXPECT_EQ(run_cli(cfg + " --set n_factors=3 --n-factors 0"), 1);
    EXPECT_EQ(run_cli(cfg + " --n-factors 4"), 0);
}
