// End-to-end checks of the placecrb binary: exit codes, report content and
// the CSV/manifest contracts.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output; // stdout + stderr
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(PLACECRB_BIN) + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    RunResult result;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (std::fgets(buf.data(), buf.size(), pipe)) result.output += buf.data();
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string scenario(const std::string& name) {
    return std::string(PLACECRB_SCENARIO_DIR) + "/" + name;
}

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / ("placecrb_cli_" + name);
}

std::string write_temp(const std::string& name, const std::string& content) {
    const fs::path path = temp_file(name);
    std::ofstream out(path);
    out << content;
    return path.string();
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("crb reports the bound and a tiny gap at the optimum") {
    const RunResult r = run("crb --scenario " + scenario("case1_optimal.scn"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("tr(CRB) = 0.230637") != std::string::npos);
    CHECK(r.output.find("optimal bound (O7) = 0.230637") != std::string::npos);
}

TEST_CASE("crb and verify csv headers are stable") {
    const RunResult crb = run("crb --scenario " + scenario("case1_optimal.scn") +
                              " --format csv");
    CHECK(crb.exit_code == 0);
    CHECK(crb.output.rfind("combo,phi11,phi12,phi22,eig_min,eig_max,tr_crb_m2,bound_m2,gap_rel",
                           0) == 0);
    const RunResult ver = run("verify --scenario " + scenario("case1_optimal.scn") +
                              " --format csv");
    CHECK(ver.exit_code == 0);
    CHECK(ver.output.rfind("constraint,group,value,scaled,pass", 0) == 0);
}

TEST_CASE("crb exit codes: parse, validation, singular") {
    CHECK(run("crb --scenario /nonexistent.scn").exit_code == 2);

    const std::string bad_key = write_temp("badkey.scn", R"(
source { x = 0 y = 0 }
sensors {
  sensor { angle_deg = 0 distance = 100 }
  sensor { angle_deg = 10 distance = 100 }
  sensor { angle_deg = 20 distance = 100 }
}
sgima = 1
combo = [TOA]
noise { gamma = 1 }
)");
    const RunResult parse = run("crb --scenario " + bad_key);
    CHECK(parse.exit_code == 2);
    CHECK(parse.output.find("sgima") != std::string::npos);

    const std::string zero_sigma = write_temp("zerosigma.scn", R"(
source { x = 0 y = 0 }
sensors {
  sensor { angle_deg = 0 distance = 100 }
  sensor { angle_deg = 120 distance = 100 }
  sensor { angle_deg = -120 distance = 100 }
}
noise { sigma = 0 rho_deg = 1 delta = 1 gamma = 1 p0 = 1000 xi = 1 }
combo = [TDOA, AOA, RSS, TOA]
)");
    const RunResult invalid = run("crb --scenario " + zero_sigma);
    CHECK(invalid.exit_code == 3);
    CHECK(invalid.output.find("nonpositive std: sigma") != std::string::npos);

    const std::string collinear = write_temp("collinear.scn", R"(
source { x = 0 y = 0 }
sensors {
  sensor { angle_deg = 0 distance = 100 }
  sensor { angle_deg = 0 distance = 200 }
  sensor { angle_deg = 0 distance = 300 }
}
noise { gamma = 2 }
combo = [TOA]
)");
    const RunResult singular = run("crb --scenario " + collinear);
    CHECK(singular.exit_code == 4);
    CHECK(singular.output.find("eigenvalues") != std::string::npos);
}

TEST_CASE("optimize writes the trajectory CSV plus manifest and converges") {
    const fs::path csv = temp_file("traj.csv");
    fs::remove(csv);
    fs::remove(fs::path(csv.string() + ".manifest.json"));

    const RunResult r = run("optimize --scenario " + scenario("case1_ex1.scn") + " --out " +
                            csv.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("UAA: yes") != std::string::npos);
    CHECK(r.output.find("final tr(CRB): 0.230637") != std::string::npos);

    std::ifstream in(csv);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "step,alpha_1_deg,alpha_2_deg,alpha_3_deg,tr_crb_m2,residual_inf_norm");
    std::string first;
    std::getline(in, first);
    CHECK(first.rfind("0,75,", 0) == 0);

    const std::string manifest = read_file(csv.string() + ".manifest.json");
    CHECK(manifest.find("\"command\": \"optimize\"") != std::string::npos);
    CHECK(manifest.find(csv.filename().string()) != std::string::npos);
}

TEST_CASE("optimize --steps 0 echoes the initial geometry") {
    const RunResult r =
        run("optimize --scenario " + scenario("case1_ex1.scn") + " --steps 0");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("steps: 0") != std::string::npos);
    CHECK(r.output.find("final angles (deg): 75.00 90.00 105.00") != std::string::npos);
}

TEST_CASE("optimize stall path exits 5 and still writes the trajectory") {
    const fs::path csv = temp_file("stall.csv");
    fs::remove(csv);
    const RunResult r = run("optimize --scenario " + scenario("case1_ex1.scn") +
                            " --gradient fd --fd-epsilon 2.0 --out " + csv.string());
    CHECK(r.exit_code == 5);
    CHECK(fs::exists(csv));
    CHECK(fs::exists(csv.string() + ".manifest.json"));
}

TEST_CASE("optimize converges on the mixed-range four-sensor scenario") {
    const RunResult r = run("optimize --scenario " + scenario("fig4_b.scn"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("final tr(CRB): 0.172671") != std::string::npos);
    // G1 and G2 settle inside the tolerance; the range-weighted G3 sums
    // cannot vanish simultaneously under these mixed ranges and stay flagged.
    std::istringstream lines(r.output);
    for (std::string line; std::getline(lines, line);) {
        if (line.rfind("sum_", 0) != 0) continue;
        if (line.find("over_d2") != std::string::npos) continue;
        CHECK(line.find("yes") != std::string::npos);
    }
}

TEST_CASE("sweep output is identical for any PLACECRB_THREADS value") {
    const fs::path a = temp_file("sweep_t1.csv");
    const fs::path b = temp_file("sweep_t4.csv");
    const std::string common = "sweep --scenario " + scenario("fig3_sweep.scn") +
                               " --geometries " + scenario("fig3_geometries.geo") +
                               " --sigmas 0.5 --trials 200 --seed 17 --out ";
    setenv("PLACECRB_THREADS", "1", 1);
    CHECK(run(common + a.string()).exit_code == 0);
    setenv("PLACECRB_THREADS", "4", 1);
    CHECK(run(common + b.string()).exit_code == 0);
    unsetenv("PLACECRB_THREADS");
    CHECK(read_file(a) == read_file(b));
    CHECK(!read_file(a).empty());
}

TEST_CASE("verify passes the optimum and flags the clustered start") {
    const RunResult good = run("verify --scenario " + scenario("case1_optimal.scn"));
    CHECK(good.exit_code == 0);
    CHECK(good.output.find("-> PASS") != std::string::npos);
    CHECK(good.output.find("UAA: yes") != std::string::npos);

    const RunResult bad = run("verify --scenario " + scenario("case1_ex1.scn"));
    CHECK(bad.exit_code == 0);
    CHECK(bad.output.find("-> FAIL") != std::string::npos);
    CHECK(bad.output.find("UAA: no") != std::string::npos);
}

TEST_CASE("verify lists only G1+G2 rows for TDOA-TOA") {
    const std::string tdoa_toa = write_temp("tdoatoa.scn", R"(
source { x = 0 y = 0 }
sensors {
  sensor { angle_deg = 150 distance = 1000 }
  sensor { angle_deg = -90 distance = 1000 }
  sensor { angle_deg = 30 distance = 1000 }
}
noise { sigma = 0.5 gamma = 1.5 }
combo = [TDOA, TOA]
)");
    const RunResult r = run("verify --scenario " + tdoa_toa);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("sum_sin_alpha") != std::string::npos);
    CHECK(r.output.find("sum_cos_2alpha") != std::string::npos);
    CHECK(r.output.find("over_d2") == std::string::npos);
    CHECK(r.output.find("TDOA->G1+G2") != std::string::npos);
    CHECK(r.output.find("G3") == std::string::npos);
}

TEST_CASE("bounds table is ascending with O7 first") {
    const RunResult r = run("bounds --scenario " + scenario("case1_ex1.scn"));
    CHECK(r.exit_code == 0);
    const std::size_t o7 = r.output.find("O7");
    const std::size_t o2 = r.output.find("O2");
    REQUIRE(o7 != std::string::npos);
    REQUIRE(o2 != std::string::npos);
    CHECK(o7 < o2);
    CHECK(r.output.find("0.230637") != std::string::npos);

    const RunResult csv = run("bounds --scenario " + scenario("case1_ex1.scn") +
                              " --format csv");
    CHECK(csv.output.rfind("label,combo,h,l,sum_inv_d2,bound_m2", 0) == 0);
}

TEST_CASE("sweep smoke run produces the CSV contract") {
    const fs::path csv = temp_file("sweep.csv");
    fs::remove(csv);
    const RunResult r = run("sweep --scenario " + scenario("fig3_sweep.scn") +
                            " --geometries " + scenario("fig3_geometries.geo") +
                            " --sigmas 0.5 --trials 100 --out " + csv.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("best geometry = optimal") != std::string::npos);

    std::ifstream in(csv);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "sigma_m,geometry_id,mse_m2,tr_crb_m2,excluded_trials");
    int rows = 0;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 3);
    CHECK(fs::exists(csv.string() + ".manifest.json"));
}

TEST_CASE("sweep exits 6 when too many trials diverge") {
    // Nearly collinear TOA-only cell: the transverse direction is barely
    // observable and most estimates run away past the divergence guard.
    const std::string scn = write_temp("divergent.scn", R"(
source { x = 0 y = 0 }
sensors {
  sensor { angle_deg = 0 distance = 100 }
  sensor { angle_deg = 0.0001 distance = 100 }
  sensor { angle_deg = 0.0002 distance = 100 }
}
noise { gamma = 50 }
combo = [TOA]
)");
    const std::string geos = write_temp("divergent.geo", R"(
geometry { id = bad
  sensor { angle_deg = 0 distance = 100 }
  sensor { angle_deg = 0.0001 distance = 100 }
  sensor { angle_deg = 0.0002 distance = 100 }
}
geometry { id = good
  sensor { angle_deg = 0 distance = 100 }
  sensor { angle_deg = 120 distance = 100 }
  sensor { angle_deg = -120 distance = 100 }
}
)");
    const RunResult r = run("sweep --scenario " + scn + " --geometries " + geos +
                            " --sigmas 1.0 --trials 200");
    CHECK(r.exit_code == 6);
    CHECK(r.output.find("excluded trials exceed 0.1%") != std::string::npos);
}

TEST_CASE("sweep needs at least two geometries") {
    const std::string single = write_temp("single.geo", R"(
geometry { id = only
  sensor { angle_deg = 0 distance = 1000 }
  sensor { angle_deg = 120 distance = 1000 }
  sensor { angle_deg = -120 distance = 1000 }
}
)");
    const RunResult r = run("sweep --scenario " + scenario("fig3_sweep.scn") +
                            " --geometries " + single + " --trials 10");
    CHECK(r.exit_code == 3);
}
