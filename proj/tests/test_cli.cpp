#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

using nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args, const std::string& stdin_file = "") {
    std::string cmd = std::string(ENTL_CLI_PATH) + " " + args + " 2>/dev/null";
    if (!stdin_file.empty()) cmd += " < " + stdin_file;
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string doc(const std::string& name) { return std::string(ENTL_DOCS_DIR) + "/" + name; }

std::string temp_file(const std::string& name, const std::string& text) {
    std::string path = ::testing::TempDir() + name;
    std::ofstream(path) << text;
    return path;
}

} // namespace

TEST(Cli, ExactEntropy) {
    auto r = run("entropy " + doc("bernoulli_z6.json"));
    ASSERT_EQ(r.code, 0);
    auto j = json::parse(r.out);
    EXPECT_EQ(j["exact"], "log(2)+log(3)");
    EXPECT_EQ(j["certificate"], "ClosedForm");
    EXPECT_NEAR(j["lower_float"].get<double>(), 1.791759469228055, 1e-12);
}

TEST(Cli, TorsionCounterexampleExitCodes) {
    auto r = run("at-check " + doc("torsion_counterexample.json"));
    EXPECT_EQ(r.code, 3);
    auto forced = run("--force at-check " + doc("torsion_counterexample.json"));
    ASSERT_EQ(forced.code, 0);
    auto j = json::parse(forced.out);
    EXPECT_EQ(j["ent_N"]["exact"], "0");
    EXPECT_EQ(j["ent_M"]["exact"], "0");
    EXPECT_EQ(j["ent_Q"]["exact"], "log(2)");
    EXPECT_EQ(j["verdict"], "Violated");
    EXPECT_TRUE(j["forced"].get<bool>());
}

TEST(Cli, AdditionCheck) {
    auto r = run("at-check " + doc("at_z4.json"));
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out)["verdict"], "Additive");
}

TEST(Cli, BoundsOnlyExitCode) {
    auto r = run("--budget 16 entropy " + doc("sigma_element_seed.json"));
    EXPECT_EQ(r.code, 4);
    auto j = json::parse(r.out);
    EXPECT_TRUE(j["exact"].is_null());
    EXPECT_EQ(j["certificate"], "BoundsOnly");
    EXPECT_EQ(j["upper"], "19/34");
}

TEST(Cli, InvalidInputExitCode) {
    EXPECT_EQ(run("entropy /nonexistent/doc.json").code, 2);
    EXPECT_EQ(run("entropy " + temp_file("broken.json", "{ not json")).code, 2);
    EXPECT_EQ(run("entropy " + temp_file("noring.json", R"({"module": {"generators": 1}})")).code, 2);
    auto bad_cut = R"({"ring": {"engine": "valuation"}, "module": {"family": "bernoulli_sigma", "cuts": {"tail": "n"}}})";
    EXPECT_EQ(run("entropy " + temp_file("ascending.json", bad_cut)).code, 2);
    EXPECT_NE(run("no-such-command").code, 0);
}

TEST(Cli, JsonRoundTrip) {
    // Re-serialising a document does not change the report, and -o writes the same bytes.
    std::ifstream in(doc("hyperkernel_shift_plus_nilpotent.json"));
    json d = json::parse(in);
    auto again = temp_file("hk.json", d.dump());
    auto a = run("hyperkernel " + doc("hyperkernel_shift_plus_nilpotent.json"));
    auto b = run("hyperkernel " + again);
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    auto j = json::parse(a.out);
    EXPECT_EQ(j["kernel_length"], "2*log(2)");
    EXPECT_EQ(j["entropy_before"]["exact"], "log(2)");
    EXPECT_EQ(j["entropy_after"]["exact"], "log(2)");

    std::string out = ::testing::TempDir() + "report.json";
    auto c = run("-o " + out + " hyperkernel " + again);
    ASSERT_EQ(c.code, 0);
    std::ifstream f(out);
    std::string written((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    EXPECT_EQ(written, a.out);
    EXPECT_EQ(json::parse(written), j);
}

TEST(Cli, StdinAndCsv) {
    auto r = run("--format csv alpha - --n 4", doc("sigma_one_plus_inv_n.json"));
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("n,alpha_exact,alpha_float,Ln_over_n_float\n", 0), 0u);
    EXPECT_NE(r.out.find("\n1,3/2,"), std::string::npos);
    EXPECT_NE(r.out.find("\n4,6/5,"), std::string::npos);

    auto c = run("colon-chain " + doc("sigma_one_plus_inv_n.json") + " --n 4");
    ASSERT_EQ(c.code, 0);
    auto j = json::parse(c.out);
    EXPECT_TRUE(j["consistent"].get<bool>());
    EXPECT_EQ(j["chain"].size(), 5u);
}

TEST(Cli, OtherCommands) {
    auto ts = run("auto-entropy " + doc("two_sided_z3.json"));
    ASSERT_EQ(ts.code, 0);
    EXPECT_EQ(json::parse(ts.out)["exact"], "log(3)");
    auto m = run("mult " + doc("two_sided_z3.json"));
    ASSERT_EQ(m.code, 0);
    EXPECT_EQ(json::parse(m.out)["exact"], "log(3)");
    auto g = run("multivar " + doc("grid_z2.json"));
    ASSERT_EQ(g.code, 0);
    EXPECT_EQ(json::parse(g.out)["exact"], "log(2)");
    auto si = run("multivar " + doc("grid_z2_shift_identity.json"));
    ASSERT_EQ(si.code, 0);
    EXPECT_EQ(json::parse(si.out)["exact"], "0");
    auto len = run("length " + doc("fp_coker.json"));
    ASSERT_EQ(len.code, 0);
    EXPECT_EQ(json::parse(len.out)["length"], "log(2)+log(3)");
    auto z4 = run("entropy " + doc("fp_z4_double.json"));
    ASSERT_EQ(z4.code, 0);
    EXPECT_EQ(json::parse(z4.out)["exact"], "0");
    auto inv = run("entropy " + doc("sigma_inv_n.json"));
    ASSERT_EQ(inv.code, 0);
    EXPECT_EQ(json::parse(inv.out)["exact"], "0");
}

TEST(Cli, Deterministic) {
    auto a = run("--seed 5 suite --count 12");
    auto b = run("--seed 5 suite --count 12");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    auto j = json::parse(a.out);
    EXPECT_TRUE(j["length_vs_enumeration"]["ok"].get<bool>());
    EXPECT_TRUE(j["trajectory_vs_closure"]["ok"].get<bool>());
    auto u1 = run("uniqueness-demo --n 8"), u2 = run("uniqueness-demo --n 8");
    ASSERT_EQ(u1.code, 0);
    EXPECT_EQ(u1.out, u2.out);
    auto ju = json::parse(u1.out);
    EXPECT_EQ(ju["1 + 1/n"]["closed_form"], "1");
    EXPECT_EQ(ju["1/n"]["closed_form"], "0");
}
