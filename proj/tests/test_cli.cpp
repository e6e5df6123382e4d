#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

namespace fs = std::filesystem;
using cklab::Json;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / (std::string("cklab_cli_") + info->name() + "_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    // runs the binary with CKLAB_OUT pointing into the test directory, or unset when `out_env` is empty
    CliRun run(const std::string& args, const std::string& out_env = "out") const {
        const fs::path log = dir / "stdout.txt";
        const std::string env = out_env.empty() ? "env -u CKLAB_OUT" : "CKLAB_OUT='" + (dir / out_env).string() + "'";
        const std::string cmd = env + " '" CKLAB_BIN "' " + args + " > '" + log.string() + "' 2>&1";
        const int status = std::system(cmd.c_str());
        CliRun r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(log);
        return r;
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream is(p, std::ios::binary);
        std::ostringstream ss;
        ss << is.rdbuf();
        return ss.str();
    }

    fs::path write(const std::string& name, const std::string& text) const {
        const fs::path p = dir / name;
        std::ofstream(p) << text;
        return p;
    }

    fs::path dir;
};

}  // namespace

TEST_F(Cli, EquilibriaSu2) {
    const auto r = run("equilibria --group su2 --q 1 --exp-neg-a 1");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = Json::parse(slurp(dir / "out" / "equilibria.json"));
    bool found = false;
    for (const auto& e : j["equilibria"]) {
        if (e["family"] != "su2_qq0") continue;
        std::vector<double> re;
        for (const auto& z : e["eigenvalues"]) re.push_back(z["re"].get<double>());
        std::sort(re.begin(), re.end());
        ASSERT_EQ(re.size(), 3u);
        EXPECT_NEAR(re[0], -2, 1e-10);
        EXPECT_NEAR(re[1], 0, 1e-10);
        EXPECT_NEAR(re[2], 2, 1e-10);
        found = true;
    }
    EXPECT_TRUE(found);
}

TEST_F(Cli, EquilibriaE2) {
    const auto r = run("equilibria --group e2 --q 1");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = Json::parse(slurp(dir / "out" / "equilibria.json"));
    std::vector<double> re;
    for (const auto& e : j["equilibria"])
        if (e["family"] == "e2_q0q0")
            for (const auto& z : e["eigenvalues"]) re.push_back(z["re"].get<double>());
    std::sort(re.begin(), re.end());
    ASSERT_EQ(re.size(), 4u);
    EXPECT_NEAR(re[0], -2, 1e-10);
    EXPECT_NEAR(re[1], 0, 1e-10);
    EXPECT_NEAR(re[2], 1, 1e-10);
    EXPECT_NEAR(re[3], 1, 1e-10);
}

TEST_F(Cli, ConfigErrorsExitTwo) {
    const auto missing = run("equilibria --q 1");
    EXPECT_EQ(missing.code, 2);
    EXPECT_NE(missing.out.find("--group"), std::string::npos);
    EXPECT_NE(missing.out.find("Usage"), std::string::npos) << missing.out;
    EXPECT_EQ(run("equilibria --group su2 --bogus 1").code, 2);
    EXPECT_EQ(run("equilibria --group nope").code, 2);
    EXPECT_EQ(run("integrate --group e2 --initial 1,-1,1,1").code, 2);
    const auto cfg = write("bad.cfg", "[run]\ngroup = su2\ncolour = red\n");
    EXPECT_EQ(run("equilibria --config '" + cfg.string() + "'").code, 2);
    EXPECT_EQ(run("equilibria --config '" + (dir / "absent.cfg").string() + "'").code, 2);
    EXPECT_EQ(run("").code, 2);
}

TEST_F(Cli, IntegrateSu2BoltCsv) {
    const auto r = run("integrate --group su2 --q 1 --exp-neg-a 1");
    ASSERT_EQ(r.code, 0) << r.out;
    std::istringstream is(slurp(dir / "out" / "trajectory.csv"));
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "chart,coord,a,b,c,alpha");
    double k0 = 0, worst = 0;
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        std::vector<double> v;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
        ASSERT_EQ(v.size(), 5u);
        const double k = v[1] * v[2] / v[4];
        if (rows++ == 0) k0 = k;
        worst = std::max(worst, std::abs(k - k0) / k0);
    }
    EXPECT_GT(rows, 10u);
    EXPECT_LT(worst, 1e-8);
    const auto j = Json::parse(slurp(dir / "out" / "trajectory.json"));
    EXPECT_EQ(j["left"]["kind"], "EquilibriumCapture");
    EXPECT_EQ(j["right"]["kind"], "FiniteBlowup");
}

TEST_F(Cli, IntegrateE2CaseOne) {
    const auto r = run("integrate --group e2 --initial 2,1,1,1 --direction forward");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = Json::parse(slurp(dir / "out" / "trajectory.json"));
    EXPECT_EQ(j["right"]["kind"], "FiniteBlowup");
}

TEST_F(Cli, IntegrateChartAndFormats) {
    ASSERT_EQ(run("integrate --group heisenberg --c1 1 --chart q").code, 0);
    const auto csv = slurp(dir / "out" / "trajectory.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n') + 3), "chart,coord,a,b,c,alpha\nq,");
    fs::remove_all(dir / "out");
    ASSERT_EQ(run("integrate --group su2 --formats json").code, 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "trajectory.json"));
    EXPECT_FALSE(fs::exists(dir / "out" / "trajectory.csv"));
}

TEST_F(Cli, ClassifyVerdicts) {
    const auto heis = run("classify --group heisenberg --c1 1");
    ASSERT_EQ(heis.code, 0) << heis.out;
    EXPECT_EQ(Json::parse(slurp(dir / "out" / "classification.json"))["overall"], "CompleteWithBolt");
    EXPECT_NE(heis.out.find("CompleteWithBolt"), std::string::npos);

    ASSERT_EQ(run("classify --group su2 --q 1 --exp-neg-a 0.3").code, 0);
    const auto frac = Json::parse(slurp(dir / "out" / "classification.json"));
    EXPECT_EQ(frac["overall"], "Incomplete");
    EXPECT_EQ(frac["reason"], "SmoothExtensionFails");

    ASSERT_EQ(run("classify --group su2 --family q0q --q 1").code, 0);
    EXPECT_EQ(Json::parse(slurp(dir / "out" / "classification.json"))["overall"], "Incomplete");
}

TEST_F(Cli, ClassifyIsByteIdentical) {
    ASSERT_EQ(run("classify --group e2 --q 1").code, 0);
    const auto first = slurp(dir / "out" / "classification.json");
    ASSERT_EQ(run("classify --group e2 --q 1").code, 0);
    EXPECT_EQ(first, slurp(dir / "out" / "classification.json"));
    EXPECT_FALSE(first.empty());
}

TEST_F(Cli, VerifyExitCodes) {
    const auto ok = run("verify --order 8");
    EXPECT_EQ(ok.code, 0) << ok.out;
    EXPECT_EQ(ok.out.find("FAIL"), std::string::npos);
    const auto j = Json::parse(slurp(dir / "out" / "verify.json"));
    EXPECT_EQ(j["order"], 8);
    EXPECT_TRUE(j["passed"].get<bool>());
    const auto bad = run("verify --inject-error");
    EXPECT_EQ(bad.code, 3);
    EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
}

TEST_F(Cli, FlagsOverrideConfigAndOutputPrecedence) {
    const auto cfg = write("run.cfg", "[run]\ngroup = su2\nexp_neg_a = 0.3\n[output]\ndir = " + (dir / "from_cfg").string() + "\n");
    ASSERT_EQ(run("classify --config '" + cfg.string() + "' --exp-neg-a 1", "").code, 0);
    EXPECT_EQ(Json::parse(slurp(dir / "from_cfg" / "classification.json"))["overall"], "CompleteWithBolt");
    // CKLAB_OUT beats output.dir, --out beats both
    ASSERT_EQ(run("classify --config '" + cfg.string() + "'", "env").code, 0);
    EXPECT_TRUE(fs::exists(dir / "env" / "classification.json"));
    ASSERT_EQ(run("classify --config '" + cfg.string() + "' --out '" + (dir / "flag").string() + "'", "env2").code, 0);
    EXPECT_TRUE(fs::exists(dir / "flag" / "classification.json"));
    EXPECT_FALSE(fs::exists(dir / "env2"));
}

TEST_F(Cli, Batch) {
    const auto a = write("a.cfg", "[run]\ncommand = classify\ngroup = heisenberg\nc1 = 1\n");
    const auto b = write("b.cfg", "[run]\ncommand = equilibria\ngroup = e2\nq = 1\n");
    const auto r = run("batch --jobs 2 '" + a.string() + "' '" + b.string() + "'");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(fs::exists(dir / "out" / "a" / "classification.json"));
    EXPECT_TRUE(fs::exists(dir / "out" / "b" / "equilibria.json"));
    EXPECT_LT(r.out.find("CompleteWithBolt"), r.out.find("e2_q0q0"));

    const auto bad = write("c.cfg", "[run]\ncommand = equilibria\n");
    EXPECT_EQ(run("batch '" + a.string() + "' '" + bad.string() + "'").code, 2);
}
