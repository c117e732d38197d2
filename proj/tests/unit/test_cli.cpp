#include "instrank/cli.hpp"

#include "../test_util.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

using testutil::TempDir;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

RunResult run(const std::string& args, const TempDir& dir) {
    const auto out = dir.file("stdout.txt"), err = dir.file("stderr.txt");
    const std::string cmd = std::string("\"") + INSTRANK_CLI_PATH + "\" " + args + " >\"" + out + "\" 2>\"" + err + "\"";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = testutil::read_file(out);
    r.err = testutil::read_file(err);
    return r;
}

std::string mini(const std::string& name) { return testutil::data_dir() + "/mini/" + name; }
std::string corpus_args() { return "--conference CONF --papers \"" + mini("papers.tsv") + "\" --paa \"" + mini("paa.tsv") + "\""; }

// A collapses after 2012 and B rises; every later year repeats 2012's values.
std::string alpha_one_table() {
    std::string s;
    for (int y = 2008; y <= 2015; ++y) {
        const bool after = y >= 2012;
        s += "C\t" + std::to_string(y) + "\tA\t" + (after ? "1.000000" : "100.000000") + "\n";
        s += "C\t" + std::to_string(y) + "\tB\t" + (after ? "2.000000" : "0.500000") + "\n";
        s += "C\t" + std::to_string(y) + "\tC\t0.250000\n";
    }
    return s;
}

}  // namespace

TEST(Cli, MissingInputFileIsIoError) {
    TempDir dir;
    auto r = run("relscore --conference CONF --papers /nonexistent/papers.tsv --paa /nonexistent/paa.tsv --out \"" +
                     dir.file("r.tsv") + "\"",
                 dir);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("IoError"), std::string::npos) << r.err;
}

TEST(Cli, TooManyMalformedRowsIsFormatError) {
    TempDir dir;
    std::string papers;
    for (int i = 0; i < 50; ++i) papers += "P" + std::to_string(i) + "\tT\tt\t2015\tCONF\t8\t\n";
    papers += "broken line\nanother broken line\n";
    auto p = dir.write("papers.tsv", papers);
    auto a = dir.write("paa.tsv", "P1\tu\tX\n");
    auto r = run("ingest --conference CONF --papers \"" + p + "\" --paa \"" + a + "\" --out-dir \"" + dir.file("o") + "\"",
                 dir);
    EXPECT_EQ(r.code, 3) << r.err;

    std::string tolerable;
    for (int i = 0; i < 200; ++i) tolerable += "P" + std::to_string(i) + "\tT\tt\t2015\tCONF\t8\t\n";
    tolerable += "broken line\n";
    auto q = dir.write("papers_ok.tsv", tolerable);
    auto ok = run("ingest --conference CONF --papers \"" + q + "\" --paa \"" + a + "\" --out-dir \"" + dir.file("o2") + "\"",
                  dir);
    EXPECT_EQ(ok.code, 0) << ok.err;
    EXPECT_NE(ok.err.find("1 malformed"), std::string::npos) << ok.err;
}

TEST(Cli, IngestWritesCanonicalFiles) {
    TempDir dir;
    auto r = run("ingest " + corpus_args() + " --out-dir \"" + dir.file("corpus") + "\"", dir);
    ASSERT_EQ(r.code, 0) << r.err;
    auto papers = testutil::lines(testutil::read_file(dir.file("corpus/papers.tsv")));
    auto paa = testutil::lines(testutil::read_file(dir.file("corpus/paper_author_affiliations.tsv")));
    EXPECT_EQ(papers.size(), 184u);  // the ten OTHER-conference papers are dropped
    EXPECT_FALSE(paa.empty());
    EXPECT_TRUE(std::is_sorted(papers.begin(), papers.end()));
}

TEST(Cli, PipelineIsByteIdenticalAcrossRuns) {
    TempDir dir;
    for (const char* model : {"naive", "es", "arima", "last3"}) {
        std::string base = "pipeline " + corpus_args() + " --model " + model + " --year 2015 --evaluate --out ";
        auto a = run(base + "\"" + dir.file("a.tsv") + "\"", dir);
        auto b = run(base + "\"" + dir.file("b.tsv") + "\"", dir);
        ASSERT_EQ(a.code, 0) << a.err;
        ASSERT_EQ(b.code, 0) << b.err;
        EXPECT_EQ(a.out, b.out);
        EXPECT_EQ(testutil::read_file(dir.file("a.tsv")), testutil::read_file(dir.file("b.tsv"))) << model;
        EXPECT_NE(a.out.find("NDCG@20\t"), std::string::npos);
    }
}

TEST(Cli, ModelChoiceChangesScores) {
    TempDir dir;
    auto naive = run("pipeline " + corpus_args() + " --year 2015 --out \"" + dir.file("n.tsv") + "\"", dir);
    auto es = run("pipeline " + corpus_args() + " --year 2015 --model es --alpha 0.4 --out \"" + dir.file("e.tsv") + "\"",
                  dir);
    ASSERT_EQ(naive.code, 0);
    ASSERT_EQ(es.code, 0);
    EXPECT_NE(testutil::read_file(dir.file("n.tsv")), testutil::read_file(dir.file("e.tsv")));
}

TEST(Cli, ArimaFallbacksAreLogged) {
    TempDir dir;
    auto table = dir.write("r.tsv", "C\t2013\tA\t1.000000\nC\t2014\tA\t2.000000\nC\t2014\tB\t1.000000\n");
    auto r = run("forecast --conference C --relscores \"" + table + "\" --model arima --out \"" + dir.file("p.tsv") + "\"",
                 dir);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("2 fallbacks"), std::string::npos) << r.err;
    auto lines = testutil::lines(testutil::read_file(dir.file("p.tsv")));
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[0], "C\tA\t1.500000");
    EXPECT_EQ(lines[1], "C\tB\t0.500000");
}

TEST(Cli, EvaluateScoresPredictionFile) {
    TempDir dir;
    auto truth = dir.write("t.tsv", "C\t2015\tX\t0.750000\nC\t2015\tY\t0.250000\n");
    auto pred = dir.write("p.tsv", "C\tY\t2.0\nC\tX\t1.0\n");
    auto r = run("evaluate --conference C --year 2015 --truth \"" + truth + "\" --prediction \"" + pred + "\"", dir);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "NDCG@20\t0.796708\n");
}

TEST(Cli, CrossValidationReport) {
    TempDir dir;
    auto r = run("cv " + corpus_args() + " --years 2013,2014,2015 --out \"" + dir.file("cv.tsv") + "\"", dir);
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = testutil::lines(testutil::read_file(dir.file("cv.tsv")));
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].rfind("2013\t", 0), 0u);
    EXPECT_EQ(rows[3].rfind("mean\t", 0), 0u);
    EXPECT_NE(r.out.find("expected score"), std::string::npos);
}

TEST(Cli, SingletonGridEqualsPlainCv) {
    TempDir dir;
    auto table = dir.write("r.tsv", alpha_one_table());
    auto grid = run("cv --conference C --relscores \"" + table + "\" --years 2013,2014,2015 --grid 0.3 --out \"" +
                        dir.file("g.tsv") + "\"",
                    dir);
    auto plain = run("cv --conference C --relscores \"" + table + "\" --years 2013,2014,2015 --model es --alpha 0.3 --out \"" +
                         dir.file("p.tsv") + "\"",
                     dir);
    ASSERT_EQ(grid.code, 0) << grid.err;
    ASSERT_EQ(plain.code, 0) << plain.err;
    EXPECT_EQ(testutil::read_file(dir.file("g.tsv")), testutil::read_file(dir.file("p.tsv")));
}

TEST(Cli, GridSearchFindsAlphaOne) {
    TempDir dir;
    auto table = dir.write("r.tsv", alpha_one_table());
    auto r = run("cv --conference C --relscores \"" + table + "\" --years 2013,2014,2015 --grid 0.1,0.5,0.9,1.0", dir);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("best alpha 1.0000"), std::string::npos) << r.out;
}

TEST(Cli, TargetYearBeyondDataIsMissingTruth) {
    TempDir dir;
    auto r = run("cv " + corpus_args() + " --years 2016", dir);
    EXPECT_EQ(r.code, 4) << r.err;
}

TEST(Cli, NetrankWritesScores) {
    TempDir dir;
    auto r = run("netrank " + corpus_args() + " --out \"" + dir.file("pr.tsv") + "\"", dir);
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = testutil::lines(testutil::read_file(dir.file("pr.tsv")));
    EXPECT_EQ(rows.size(), 5u);
}

TEST(Cli, FilterPapersOnFixture) {
    TempDir dir;
    const auto f = testutil::data_dir() + "/filter/";
    auto r = run("filter-papers " + corpus_args() + " --proceedings \"" + f + "proceedings.tsv\" --section-train \"" + f +
                     "section_train.tsv\" --page-train \"" + f + "page_train.tsv\" --review \"" + dir.file("q.tsv") +
                     "\" --out \"" + dir.file("full.txt") + "\"",
                 dir);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(testutil::read_file(dir.file("full.txt")), "P0180\nP0181\n");
    EXPECT_EQ(testutil::lines(testutil::read_file(dir.file("q.tsv"))).size(), 2u);
}

TEST(Cli, FlagsOverrideConfigFile) {
    TempDir dir;
    auto table = dir.write("r.tsv", alpha_one_table());
    auto cfg = dir.write("run.cfg", "# defaults\nconference = C\nrelscores = " + table +
                                        "\nmodel = es\nalpha = 0.3\nyears = 2013,2014,2015\n");
    auto from_file = run("--config \"" + cfg + "\" cv", dir);
    auto overridden = run("--config \"" + cfg + "\" cv --alpha 1.0", dir);
    ASSERT_EQ(from_file.code, 0) << from_file.err;
    ASSERT_EQ(overridden.code, 0) << overridden.err;
    EXPECT_NE(from_file.out.find("alpha=0.3000"), std::string::npos) << from_file.out;
    EXPECT_NE(overridden.out.find("mean    1.0000"), std::string::npos) << overridden.out;
}

TEST(Cli, ConfigParsing) {
    instrank::cli::RunConfig cfg;
    instrank::cli::apply_setting(cfg, "orders", "1,1,1;0,1,1");
    ASSERT_EQ(cfg.orders.size(), 2u);
    EXPECT_EQ(cfg.orders[1], (instrank::ArimaOrder{0, 1, 1}));
    instrank::cli::apply_setting(cfg, "years", "2013,2014");
    EXPECT_EQ(cfg.years, (std::vector<int>{2013, 2014}));
    EXPECT_THROW(instrank::cli::apply_setting(cfg, "bogus", "1"), instrank::Error);
    EXPECT_THROW(instrank::cli::apply_setting(cfg, "n", "twenty"), instrank::Error);
}
