#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "hypercd/grid.hpp"

using json = nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

std::string bin_path() {
    const char* p = std::getenv("HYPERCD_BIN");
    REQUIRE_MESSAGE(p != nullptr, "HYPERCD_BIN must point at the built binary");
    return p;
}

std::string data_path() {
    const char* p = std::getenv("HYPERCD_DATA");
    REQUIRE_MESSAGE(p != nullptr, "HYPERCD_DATA must point at the data directory");
    return p;
}

RunResult run(const std::string& args) {
    const std::string out_file = "/tmp/hypercd_cli_out.txt";
    const std::string cmd = bin_path() + " " + args + " > " + out_file + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream is(out_file);
    std::stringstream ss;
    ss << is.rdbuf();
    r.out = ss.str();
    return r;
}

}  // namespace

TEST_CASE("table: quaternion table, determinism, capacity") {
    const RunResult q = run("table --level 2");
    CHECK(q.code == 0);
    CHECK(q.out == "+0,+1,+2,+3\n+1,-0,+3,-2\n+2,-3,-0,+1\n+3,+2,-1,-0\n");

    const RunResult q2 = run("table --level 2");
    CHECK(q2.out == q.out);  // byte-identical

    const RunResult z = run("table --level 0");
    CHECK(z.code == 0);
    CHECK(z.out == "+0\n");

    // off-diagonal sign antisymmetry at level 4
    const RunResult s = run("table --level 4");
    CHECK(s.code == 0);
    std::vector<std::vector<std::string>> cells;
    std::stringstream lines(s.out);
    std::string line;
    while (std::getline(lines, line)) {
        cells.emplace_back();
        std::stringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) cells.back().push_back(cell);
    }
    REQUIRE(cells.size() == 16);
    for (size_t a = 1; a < 16; ++a)
        for (size_t b = 1; b < 16; ++b) {
            if (a == b) continue;
            CHECK(cells[a][b].substr(1) == cells[b][a].substr(1));
            CHECK(cells[a][b][0] != cells[b][a][0]);
        }

    CHECK(run("table --level 99").code == 3);
}

TEST_CASE("factor: shipped specs and parse failures") {
    const RunResult d = run("factor --spec " + data_path() + "/dalembert.json");
    CHECK(d.code == 0);
    const json dj = json::parse(d.out);
    CHECK(dj.at("pass").get<bool>());
    CHECK(dj.at("remainder_is_zero").get<bool>());
    CHECK(dj.at("residual").at("max_residual").get<double>() < 1e-12);
    CHECK(dj.at("residual").at("seed").get<unsigned>() == 42);

    // determinism of the full report
    const RunResult d2 = run("factor --spec " + data_path() + "/dalembert.json");
    CHECK(d2.out == d.out);

    const RunResult v =
        run("factor --spec " + data_path() + "/elliptic_variable.json --nodes 5");
    CHECK(v.code == 0);
    const json vj = json::parse(v.out);
    CHECK_FALSE(vj.at("remainder_is_zero").get<bool>());  // Q block present
    CHECK(vj.at("residual").at("max_residual").get<double>() < 1e-8);

    std::ofstream("/tmp/hypercd_bad.json") << "not json {";
    CHECK(run("factor --spec /tmp/hypercd_bad.json").code == 2);
    CHECK(run("factor --spec /tmp/hypercd_missing.json").code == 3);
}

TEST_CASE("integrate: polynomial phrase along a CSV path") {
    std::ofstream("/tmp/hypercd_path.csv") << "0,0\n1,1\n";
    // integral of z dz from 0 to 1+i1 equals (1+i1)^2/2 = i1
    const RunResult r = run("integrate --coeffs \"0;1\" --path /tmp/hypercd_path.csv");
    CHECK(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("value")[0].get<double>() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(j.at("value")[1].get<double>() == doctest::Approx(1.0).epsilon(1e-9));

    CHECK(run("integrate --coeffs \"0;1\" --path /tmp/hypercd_no_path.csv").code == 3);
    std::ofstream("/tmp/hypercd_ragged.csv") << "0,0\n1\n";
    CHECK(run("integrate --coeffs \"0;1\" --path /tmp/hypercd_ragged.csv").code == 3);
}

TEST_CASE("antiderive: left-inverse residual reported and within tolerance") {
    const RunResult r = run("antiderive --f \"z1^2\" --slots 1 --point \"i1\"");
    CHECK(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("pass").get<bool>());
    CHECK(j.at("left_inverse_residual").get<double>() < 1e-6);
    // F(i1) = (1/3) i1 for f = z1^2 with unit weight
    CHECK(j.at("value")[1].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("fundamental: landmark evaluations") {
    const RunResult l = run("fundamental --operator laplace -n 3 --point \"1,0,0\"");
    CHECK(l.code == 0);
    CHECK(json::parse(l.out).at("value").get<double>() ==
          doctest::Approx(-1.0 / (4.0 * 3.14159265358979324)).epsilon(1e-12));

    const RunResult h = run("fundamental --operator helmholtz -n 3 -c 2 --point \"0.5,0,0\"");
    CHECK(h.code == 0);
    const json hj = json::parse(h.out);
    // -exp(i c r)/(4 pi r) at r = 1/2, c = 2
    CHECK(hj.at("re")[0].get<double>() ==
          doctest::Approx(-std::cos(1.0) / (2.0 * 3.14159265358979324)).epsilon(1e-10));

    CHECK(run("fundamental --operator nosuch --point \"1\"").code == 3);
}

TEST_CASE("solve: Poisson grid artifact round-trips") {
    const RunResult r = run(
        "solve --nodes 9 --extent 4 --source \"exp(-(z0^2+z1^2+z2^2))\" "
        "--grid-out /tmp/hypercd_u.dat");
    CHECK(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("nodes").get<int>() == 9);
    const hypercd::GridField u = hypercd::GridField::load_file("/tmp/hypercd_u.dat");
    CHECK(u.ndim == 3);
    CHECK(u.shape == std::vector<int>{9, 9, 9});
    // potential of a positive source through the negative kernel is negative
    CHECK(u.at({4, 4, 4})[0] < 0.0);
}

TEST_CASE("check: suites pass, unknown suite rejected") {
    const RunResult all = run("check all");
    CHECK(all.code == 0);
    const json j = json::parse(all.out);
    CHECK(j.at("pass").get<bool>());
    CHECK(j.at("suites").size() == 6);
    for (const json& s : j.at("suites")) CHECK(s.at("pass").get<bool>());

    const RunResult one = run("check fundamental.laplace");
    CHECK(one.code == 0);
    const json oj = json::parse(one.out);
    CHECK(oj.at("suites").size() == 1);
    CHECK(oj.at("suites")[0].at("suite").get<std::string>() == "fundamental.laplace");

    CHECK(run("check nosuch").code == 2);

    // usage error
    CHECK(run("frobnicate").code == 2);
}
