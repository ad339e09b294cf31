#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "stegica/cli/app.hpp"
#include "test_util.hpp"

using namespace stegica;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args) {
    args.insert(args.begin(), "stegica");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliRun r;
    r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

// One small corpus shared by the tests below.
const fs::path& corpus() {
    static const fs::path dir = [] {
        const fs::path d = test::scratch_dir("cli_corpus");
        const CliRun r = run({"gen", "--n", "12", "--size", "32", "--seed", "5", "--out", d.string(), "--force"});
        EXPECT_EQ(r.code, 0) << r.err;
        return d;
    }();
    return dir;
}

} // namespace

TEST(Cli, HelpAndUsageErrors) {
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"extract"}).code, 1); // --manifest is required
    EXPECT_EQ(run({"gen", "--mode", "xor"}).code, 1);
    const fs::path d = test::scratch_dir("cli_usage");
    EXPECT_EQ(run({"gen", "--n", "0", "--out", d.string()}).code, 1);
    EXPECT_EQ(run({"gen", "--alpha", "2", "--n", "1", "--size", "8", "--out", d.string()}).code, 1);
    EXPECT_EQ(run({"extract", "--manifest", (corpus() / "manifest.jsonl").string(), "--pair", "3", "3",
                   "--out", (d / "f.csv").string()}).code,
              1);
}

TEST(Cli, GenLayoutAndCollision) {
    const fs::path d = corpus();
    EXPECT_TRUE(fs::exists(d / "covers" / "cover_00000.png"));
    EXPECT_TRUE(fs::exists(d / "stegos" / "stego_00011.png"));
    EXPECT_TRUE(fs::exists(d / "payloads" / "payload_00011.png"));
    EXPECT_EQ(count_lines(slurp(d / "manifest.jsonl")), 24);
    EXPECT_EQ(count_lines(slurp(d / "triplets.jsonl")), 12);
    const CliRun again = run({"gen", "--n", "12", "--size", "32", "--seed", "5", "--out", d.string()});
    EXPECT_EQ(again.code, 1);
    EXPECT_NE(again.err.find("already exists"), std::string::npos);
}

TEST(Cli, GenIsDeterministic) {
    const fs::path d = test::scratch_dir("cli_gen_again");
    ASSERT_EQ(run({"gen", "--n", "12", "--size", "32", "--seed", "5", "--out", d.string()}).code, 0);
    for (const char* f : {"manifest.jsonl", "triplets.jsonl", "gen_params.json", "covers/cover_00007.png",
                          "stegos/stego_00007.png"})
        EXPECT_EQ(slurp(d / f), slurp(corpus() / f)) << f;
    const fs::path e = test::scratch_dir("cli_gen_other");
    ASSERT_EQ(run({"gen", "--n", "2", "--size", "32", "--seed", "6", "--out", e.string()}).code, 0);
    EXPECT_NE(slurp(e / "covers/cover_00000.png"), slurp(corpus() / "covers/cover_00000.png"));
}

TEST(Cli, InnModeRuns) {
    const fs::path d = test::scratch_dir("cli_inn");
    const CliRun r = run({"gen", "--mode", "inn", "--n", "2", "--size", "16", "--blocks", "2", "--out", d.string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(slurp(d / "gen_params.json").find("\"weight_cap\""), std::string::npos);
}

TEST(Cli, ExtractTrainEval) {
    const fs::path d = test::scratch_dir("cli_pipeline");
    const std::string manifest = (corpus() / "manifest.jsonl").string();
    const fs::path f1 = d / "f1.csv", f2 = d / "f2.csv";
    ASSERT_EQ(run({"extract", "--manifest", manifest, "--out", f1.string(), "--seed", "2"}).code, 0);
    ASSERT_EQ(run({"extract", "--manifest", manifest, "--out", f2.string(), "--seed", "2"}).code, 0);
    EXPECT_EQ(slurp(f1), slurp(f2));
    EXPECT_EQ(count_lines(slurp(f1)), 25);
    EXPECT_EQ(slurp(f1).rfind("path,label,mu1,mu2,sigma1,sigma2,gamma1,gamma2,kappa1,kappa2\n", 0), 0u);
    EXPECT_TRUE(fs::exists(d / "f1.csv.run.json"));

    const CliRun ev = run({"eval", "--features", f1.string(), "--k", "3"});
    EXPECT_EQ(ev.code, 0) << ev.err;
    EXPECT_TRUE(std::regex_match(ev.out, std::regex("Acc \\(%\\) \\d+\\.\\d\\d  Std \\(±%\\) \\d+\\.\\d\\d\n"))) << ev.out;

    const fs::path model = d / "m.svm";
    ASSERT_EQ(run({"train", "--features", f1.string(), "--model", model.string()}).code, 0);
    const CliRun sc = run({"eval", "--features", f1.string(), "--model", model.string()});
    EXPECT_EQ(sc.code, 0);
    EXPECT_TRUE(std::regex_match(sc.out, std::regex("Acc \\(%\\) \\d+\\.\\d\\d  \\(\\d+/24\\)\n"))) << sc.out;
}

TEST(Cli, DataErrors) {
    const fs::path d = test::scratch_dir("cli_data");
    EXPECT_EQ(run({"eval", "--features", (d / "missing.csv").string()}).code, 2);
    EXPECT_EQ(run({"extract", "--manifest", (d / "missing.jsonl").string()}).code, 2);

    std::ofstream(d / "empty.jsonl").close();
    EXPECT_EQ(run({"extract", "--manifest", (d / "empty.jsonl").string(), "--out", (d / "e.csv").string()}).code, 2);

    // One unreadable image: the rest are extracted, the exit code reports the skip.
    std::ofstream(d / "bad.png") << "not a png";
    std::ofstream m(d / "m.jsonl");
    m << "{\"path\":\"" << (corpus() / "covers/cover_00000.png").string() << "\",\"label\":\"cover\"}\n";
    m << "{\"path\":\"bad.png\",\"label\":\"stego\"}\n";
    m.close();
    const CliRun r = run({"extract", "--manifest", (d / "m.jsonl").string(), "--out", (d / "m.csv").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("bad.png"), std::string::npos);
    EXPECT_EQ(count_lines(slurp(d / "m.csv")), 2);
}

TEST(Cli, GridsearchWritesAllPairs) {
    const fs::path d = test::scratch_dir("cli_grid");
    const CliRun r = run({"gridsearch", "--manifest", (corpus() / "manifest.jsonl").string(), "--out",
                       (d / "scores.csv").string(), "--k", "3"});
    EXPECT_EQ(r.code, 0) << r.err;
    const std::string s = slurp(d / "scores.csv");
    EXPECT_EQ(count_lines(s), 67);
    EXPECT_EQ(s.rfind("i,j,mean_acc,std_acc\n1,2,", 0), 0u);
    EXPECT_NE(r.out.find("best pair"), std::string::npos);
}

TEST(Cli, AnalyzeWritesMatrix) {
    const fs::path d = test::scratch_dir("cli_analyze");
    const CliRun r = run({"analyze", "--triplets", (corpus() / "triplets.jsonl").string(), "--out",
                       (d / "corr.csv").string(), "--heatmap", (d / "corr.pgm").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(count_lines(slurp(d / "corr.csv")), 13);
    EXPECT_EQ(slurp(d / "corr.pgm").rfind("P5\n", 0), 0u);
}
