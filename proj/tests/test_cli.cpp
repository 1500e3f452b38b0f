#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hce/hce.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int status;
    std::string out;
};

Run run(const std::string& args) {
    static const fs::path dir = fs::temp_directory_path() / "hce_cli_test";
    fs::create_directories(dir);
    auto log = dir / "stdout.txt";
    std::string cmd = std::string("cd ") + dir.string() + " && " + HCE_CLI_PATH + " " + args + " > " + log.string() +
                      " 2> " + (dir / "stderr.txt").string();
    int status = std::system(cmd.c_str());
    return {status, slurp(log) + slurp(dir / "stderr.txt")};
}

fs::path work() { return fs::temp_directory_path() / "hce_cli_test"; }

const std::string kTrain =
    "train --corpus syn/corpus.tsv --hierarchy syn/hierarchy.tsv --dim 16 --epochs 2 --seed 3 -v 0";

}  // namespace

class Cli : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        fs::remove_all(work());
        ASSERT_EQ(run("gen-synthetic --output syn --seed 3").status, 0);
    }
};

TEST_F(Cli, GenSyntheticWritesWorld) {
    for (auto f : {"corpus.tsv", "hierarchy.tsv", "gold.tsv", "synthetic.config"})
        EXPECT_TRUE(fs::exists(work() / "syn" / f)) << f;
}

TEST_F(Cli, TrainIsDeterministicAndEchoesConfig) {
    ASSERT_EQ(run(kTrain + " --output a.txt").status, 0);
    ASSERT_EQ(run(kTrain + " --output b.txt").status, 0);
    EXPECT_EQ(slurp(work() / "a.txt"), slurp(work() / "b.txt"));
    ASSERT_TRUE(fs::exists(work() / "a.txt.config"));
    std::ifstream cfg(work() / "a.txt.config");
    auto c = hce::read_config(cfg);
    EXPECT_EQ(c.train.dim, 16u);
    EXPECT_EQ(c.train.seed, 3u);
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
    {
        std::ofstream f(work() / "run.config");
        f << "corpus=syn/corpus.tsv\nhierarchy=syn/hierarchy.tsv\ndim=8\nepochs=1\nseed=3\nverbosity=0\n";
    }
    ASSERT_EQ(run("train --config run.config --dim 12 --output c.txt").status, 0);
    std::ifstream in(work() / "c.txt");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header.substr(header.find(' ') + 1), "12");
}

TEST_F(Cli, Evaluations) {
    ASSERT_EQ(run(kTrain + " --output e.txt").status, 0);
    auto cat = run("eval-categorize --embeddings e.txt --gold syn/gold.tsv --output rep");
    ASSERT_EQ(cat.status, 0) << cat.out;
    EXPECT_NE(cat.out.find("nearest-neighbour"), std::string::npos);
    EXPECT_TRUE(fs::exists(work() / "rep.json"));
    auto j = hce::json::parse(slurp(work() / "rep.json"));
    EXPECT_TRUE(j.contains("cluster"));
    EXPECT_TRUE(j.contains("nn"));

    {
        std::ofstream ds(work() / "pairs.tsv");
        ds << "e0_0_0\te0_0_1\t9\ne0_0_0\te1_0_1\t1\nc0_0\te0_0_2\t8\ne2_0_3\te1_0_4\t2\nunknown\te0_0_1\t5\n";
    }
    auto rel = run("eval-relatedness --embeddings e.txt --dataset pairs.tsv");
    ASSERT_EQ(rel.status, 0) << rel.out;
    EXPECT_NE(rel.out.find("spearman"), std::string::npos);
    EXPECT_NE(rel.out.find("dropped: unknown"), std::string::npos);

    auto nb = run("neighbors --embeddings e.txt --label c:c0_0 --top 3");
    ASSERT_EQ(nb.status, 0) << nb.out;
    EXPECT_EQ(std::count(nb.out.begin(), nb.out.end(), '\n'), 3);
}

TEST_F(Cli, ExportRoundTrip) {
    ASSERT_EQ(run(kTrain + " --output x.txt").status, 0);
    ASSERT_EQ(run("export --embeddings x.txt --to binary --output x.bin").status, 0);
    ASSERT_EQ(run("export --embeddings x.bin --format binary --to text --output y.txt").status, 0);
    std::ifstream a(work() / "x.txt"), b(work() / "y.txt");
    auto sa = hce::read_text(a), sb = hce::read_text(b);
    ASSERT_EQ(sa.size(), sb.size());
    for (auto n : sa.nodes())
        for (std::size_t i = 0; i < sa.dim(); ++i) EXPECT_NEAR(sa.vector(n)[i], sb.vector(n)[i], 1e-5);
}

TEST_F(Cli, InspectWeightsAndCommandErrors) {
    auto w = run("inspect-weights --corpus syn/corpus.tsv --hierarchy syn/hierarchy.tsv --label e0_0_0");
    ASSERT_EQ(w.status, 0) << w.out;
    EXPECT_NE(w.out.find("c0_0\t0.000000\t0.666667"), std::string::npos) << w.out;

    auto missing = run("train --corpus nope.tsv --hierarchy syn/hierarchy.tsv --output z.txt");
    EXPECT_NE(missing.status, 0);
    EXPECT_NE(missing.out.find("error: cannot open 'nope.tsv'"), std::string::npos) << missing.out;
    EXPECT_NE(run(kTrain + " --mode word2vec --output z.txt").status, 0);
    EXPECT_NE(run("frobnicate").status, 0);
    auto noroot = run(kTrain + " --root nowhere --output z.txt");
    EXPECT_NE(noroot.status, 0);
    EXPECT_NE(noroot.out.find("error: "), std::string::npos);
}

TEST_F(Cli, BuildVocab) {
    ASSERT_EQ(run("build-vocab --corpus syn/corpus.tsv --output vocab.tsv").status, 0);
    auto v = slurp(work() / "vocab.tsv");
    EXPECT_NE(v.find("e:e0_0_0\t"), std::string::npos);
    EXPECT_NE(v.find("c:c0_0\t"), std::string::npos);
}
