#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "regcore/cnn.hpp"
#include "regcore/config.hpp"
#include "regcore/corpus.hpp"
#include "regcore/embeddings.hpp"
#include "regcore/exchange.hpp"
#include "support/synthetic.hpp"

using namespace regcore;
namespace fs = std::filesystem;

namespace {

struct Run {
    int status = 0;
    std::string output;
};

Run cli(const std::string& args, const std::string& env = "") {
    std::string cmd = env + " " + REGCORE_CLI_PATH + " " + args + " 2>&1";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
    int status = pclose(pipe);
    r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / "regcore_cli_test";
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    /// Writes a tiny separable data root for language `lang`.
    void write_data_root(const std::string& lang) {
        regcore::testing::SeparableOptions o;
        o.dim = 8;
        o.docs_per_register = 15;
        auto parts = regcore::testing::split_parts(regcore::testing::separable_corpus(lang, o, 3), 1);
        fs::create_directories(dir_ / lang);
        fs::create_directories(dir_ / "vectors");
        write_corpus_file(parts.train, path(lang + "/train.tsv"));
        write_corpus_file(parts.dev, path(lang + "/dev.tsv"));
        write_corpus_file(parts.test, path(lang + "/test.tsv"));
        std::ofstream out(path("vectors/wiki." + lang + ".align.vec"));
        write_embeddings(out, regcore::testing::separable_table(lang, o, 1));
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, HelpAndUnknownCommand) {
    EXPECT_EQ(cli("--help").status, 0);
    EXPECT_NE(cli("frobnicate").status, 0);
}

TEST_F(CliTest, DedupSplitStats) {
    auto corpus = regcore::testing::random_corpus("fi", 200, 5, 2, 10, 40, 300);
    corpus.documents.push_back(corpus.documents[3]);
    corpus.documents.back().id = "copy";
    write_corpus_file(corpus, path("raw.tsv"));

    auto d = cli("dedup --n 5 --threshold 0.7 --lang fi --in " + path("raw.tsv") + " --out " + path("dedup.tsv") +
                 " --log " + path("removed.tsv"));
    ASSERT_EQ(d.status, 0) << d.output;
    std::ifstream log(path("removed.tsv"));
    std::string line;
    std::getline(log, line);
    EXPECT_EQ(line, "copy\t1");
    EXPECT_EQ(read_corpus_file(path("dedup.tsv"), "fi").size(), 200u);

    auto s = cli("split --ratios 50,20,30 --seed 3 --lang fi --in " + path("dedup.tsv") + " --out-prefix " +
                 path("part"));
    ASSERT_EQ(s.status, 0) << s.output;
    auto train = read_corpus_file(path("part.train.tsv"), "fi");
    auto dev = read_corpus_file(path("part.dev.tsv"), "fi");
    auto test = read_corpus_file(path("part.test.tsv"), "fi");
    EXPECT_EQ(train.size() + dev.size() + test.size(), 200u);
    EXPECT_TRUE(fs::exists(path("part.assignment.tsv")));
    EXPECT_EQ(train.documents[0].id.rfind("fi-", 0), 0u);

    auto st = cli("stats --in " + path("dedup.tsv"));
    ASSERT_EQ(st.status, 0) << st.output;
    EXPECT_NE(st.output.find("Hybrids"), std::string::npos);
    EXPECT_NE(st.output.find("All"), std::string::npos);

    EXPECT_NE(cli("stats --in " + path("missing.tsv")).status, 0);
}

TEST_F(CliTest, EmbedInfo) {
    {
        std::ofstream out(path("v.vec"));
        out << "2 3\nle 1 2 3\nla 4 5 6\n";
    }
    auto r = cli("embed-info " + path("v.vec"));
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_NE(r.output.find("vocab 2"), std::string::npos);
    EXPECT_NE(r.output.find("dim 3"), std::string::npos);
    EXPECT_NE(r.output.find("checksum "), std::string::npos);
}

TEST_F(CliTest, TrainWithConfigAndScoreExchangeFile) {
    write_data_root("fi");
    {
        std::ofstream cfg(path("run.conf"));
        cfg << "dim = 8\nfilters = 8\nepochs = 3\nlearning-rate = 0.01\nkernel = 2\n";
    }
    auto env = std::string(kDataRootEnv) + "=" + dir_.string();
    auto r = cli("--config " + path("run.conf") + " train --lang fi --kernel 1 --run-dir " + path("run") +
                     " --predict-in fi/test.tsv",
                 env);
    ASSERT_EQ(r.status, 0) << r.output;
    auto ck = load_checkpoint_file(path("run/model.ckpt"));
    EXPECT_EQ(ck.config.kernel, 1u);
    EXPECT_EQ(ck.config.filters, 8u);

    std::ifstream manifest(path("run/manifest.json"));
    auto j = nlohmann::json::parse(manifest);
    EXPECT_EQ(j["settings"]["kernel"], "1");
    EXPECT_EQ(j["inputs"].size(), 3u);

    auto preds = read_predictions_file(path("run/predictions.tsv"));
    EXPECT_EQ(preds.ids.size(), read_corpus_file(path("fi/test.tsv"), "fi").size());

    auto e = cli("eval --predictions " + path("run/predictions.tsv") + " --gold fi/test.tsv --lang fi", env);
    ASSERT_EQ(e.status, 0) << e.output;
    EXPECT_NE(e.output.find("micro"), std::string::npos);
}

TEST_F(CliTest, EvalExperimentWritesRunDirectory) {
    write_data_root("sv");
    auto env = std::string(kDataRootEnv) + "=" + dir_.string();
    auto r = cli("eval --train-lang sv --eval-lang sv --dim 8 --filters 8 --epochs 2 --seeds 1,2 --run-dir " +
                     path("exp"),
                 env);
    ASSERT_EQ(r.status, 0) << r.output;
    for (auto name : {"manifest.json", "summary.txt", "test_aggregate.tsv", "confusion.tsv", "test.seed2.tsv"}) {
        EXPECT_TRUE(fs::exists(dir_ / "exp" / name)) << name;
    }
    auto bad = cli("eval --mode cross-lingual --train-lang sv --eval-lang sv --dim 8", env);
    EXPECT_NE(bad.status, 0);
    EXPECT_NE(bad.output.find("cross-lingual"), std::string::npos);
}
