#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(DYNBC_BIN_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

json load(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    json j;
    in >> j;
    return j;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("dynbc_test_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("riccati subcommand writes the solution record") {
    TempDir dir("riccati");
    REQUIRE(run("riccati --mu 0 --sigma 2 --out " + dir.path.string()) == 0);

    const json doc = load(dir.path / "riccati.json");
    CHECK(doc.contains("runspec"));
    CHECK(doc.contains("content_hash"));
    const json& r = doc["result"];
    CHECK(r["regime"] == "Supercritical");
    CHECK(std::abs(r["omega0"].get<double>() - 3.830) < 2e-3);
    CHECK(std::abs(r["omega1"].get<double>() - 4.131) < 2e-3);

    const std::string csv = slurp(dir.path / "J_profile.csv");
    CHECK(csv.find("x,J0,J1") != std::string::npos);
    // 1001 data rows + 2 comment lines + header
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1004);
}

TEST_CASE("riccati critical classification") {
    TempDir dir("critical");
    REQUIRE(run("riccati --mu 0 --sigma 1 --out " + dir.path.string()) == 0);
    const json r = load(dir.path / "riccati.json")["result"];
    CHECK(r["regime"] == "Critical");
    CHECK(std::abs(r["lambda0"].get<double>()) < 1e-12);
}

TEST_CASE("validation failures exit with code 1") {
    TempDir dir("badsigma");
    CHECK(run("riccati --mu 1 --sigma -1 --out " + dir.path.string()) == 1);
    CHECK(run("bogus-subcommand") == 1);
    CHECK(run("solve --mu 0 --sigma 1 --f nosuchprofile --out " + dir.path.string()) == 1);
}

TEST_CASE("solve with zero data leaves an identically zero field") {
    TempDir dir("zero");
    REQUIRE(run("solve --mu 1 --sigma 2 --f zero --T 0.1 --dt 0.002 --nspace 32 --out " +
                dir.path.string()) == 0);
    const json s = load(dir.path / "summary.json")["result"];
    for (const auto& v : s["sup_norms"]) CHECK(v.get<double>() < 1e-12);
    CHECK(std::abs(s["defect"]["a0"].get<double>()) < 1e-12);
}

TEST_CASE("solve recovers the spectral growth rate") {
    TempDir dir("h1");
    REQUIRE(run("solve --mu 0 --sigma 2 --f h1 --T 1 --dt 0.002 --nspace 96 --out " +
                dir.path.string()) == 0);
    const json s = load(dir.path / "summary.json")["result"];
    const double slope = s["rate_fit"]["slope"].get<double>();
    // lambda1 = -omega1^2/2 with omega1 from the companion record
    TempDir dir2("h1r");
    REQUIRE(run("riccati --mu 0 --sigma 2 --out " + dir2.path.string()) == 0);
    const double w1 = load(dir2.path / "riccati.json")["result"]["omega1"].get<double>();
    CHECK(std::abs(slope - w1 * w1 / 2.0) < 0.02 * (w1 * w1 / 2.0));
}

TEST_CASE("solve against the oracle") {
    TempDir dir("oracle");
    REQUIRE(run("solve --mu 1 --sigma 2 --f sinpi --f0 0.3 --f1 0.3 --T 0.5 --dt 0.001 "
                "--nspace 512 --oracle --out " +
                dir.path.string()) == 0);
    const json s = load(dir.path / "summary.json")["result"];
    CHECK(s["fd_sup_diff"].get<double>() <= 1e-3);
}

TEST_CASE("simulate is bitwise reproducible under a fixed seed") {
    TempDir dir("sim1");
    const std::string flags =
        " --mu 1 --sigma 0.5 --paths 2000 --dt 0.0005 --tmax 30 --floor -8 --seed 4242 --out ";
    REQUIRE(run("simulate" + flags + dir.path.string()) == 0);
    const std::string first = slurp(dir.path / "exit_stats.json");

    TempDir dir2("sim2");
    REQUIRE(run("simulate" + flags + dir2.path.string()) == 0);
    std::string second = slurp(dir2.path / "exit_stats.json");
    // the embedded runspec carries the output directory; normalize it away
    const std::string a = dir.path.string(), b = dir2.path.string();
    for (std::size_t pos = 0; (pos = second.find(b, pos)) != std::string::npos;)
        second.replace(pos, b.size(), a);
    CHECK(first == second);
}

TEST_CASE("simulate agrees with the boundary-mass prediction") {
    TempDir dir("simexit");
    REQUIRE(run("simulate --mu 1 --sigma 0.5 --paths 5000 --dt 0.0001 --tmax 40 --floor -8 "
                "--seed 7 --out " +
                dir.path.string()) == 0);
    const json r = load(dir.path / "exit_stats.json")["result"];
    for (int k = 0; k <= 1; ++k) {
        const json& jk = r["start_" + std::to_string(k)];
        const double p = jk["p_finite"].get<double>();
        const double se = jk["p_finite_se"].get<double>();
        const double mass = jk["model_mass"].get<double>();
        CHECK(p < 1.0);
        CHECK(std::abs(p - mass) <= 3.0 * se + 0.015);
        const double slope = jk["phi_slope"].get<double>();
        const double slope_se = jk["phi_slope_se"].get<double>();
        const double model = jk["phi_slope_model"].get<double>();
        CHECK(std::abs(slope - model) <= 3.0 * slope_se + 0.01);
    }
    CHECK(fs::exists(dir.path / "exit_hist_0.csv"));
    CHECK(fs::exists(dir.path / "exit_hist_1.csv"));
}

TEST_CASE("field csv format") {
    TempDir dir("csv");
    REQUIRE(run("solve --mu 0 --sigma 1 --f one --T 0.1 --dt 0.002 --nspace 32 --out " +
                dir.path.string()) == 0);
    const std::string csv = slurp(dir.path / "field.csv");
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("# runspec:", 0) == 0);
    std::getline(in, line);
    CHECK(line.rfind("# content_hash:", 0) == 0);
    std::getline(in, line);
    CHECK(line.rfind("t,0,", 0) == 0);  // header row of x coordinates
    CHECK(line.find(",1") != std::string::npos);
    std::getline(in, line);
    CHECK(line.rfind("0,", 0) == 0);  // first data row at t = 0
}
