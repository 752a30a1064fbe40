#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    std::string cmd = std::string(NDELIE_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::array<char, 4096> buf;
    size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string write_spec(const std::string& name, const std::string& body) {
    auto path = std::filesystem::temp_directory_path() / ("ndelie_cli_" + name + ".json");
    std::ofstream(path) << body;
    return path.string();
}

}  // namespace

TEST_CASE("classify exit codes") {
    auto c1 = run("classify --instance C1 --json");
    CHECK(c1.code == 0);
    auto j = nlohmann::json::parse(c1.out);
    CHECK(j["case"] == "C1");
    CHECK(j["generators"].size() == 2);

    auto ode = write_spec("ode", R"js({"r": "1", "c": {"kind": "const", "value": 1}})js");
    auto r = run("classify --spec " + ode);
    CHECK(r.code == 2);
    CHECK(r.out.find("ordinary") != std::string::npos);

    CHECK(run("classify --spec " + write_spec("nodelay", R"js({"c": 1})js")).code == 1);
    CHECK(run("classify --spec " + write_spec("badjson", "{\"r\": ")).code == 1);
    CHECK(run("classify --spec " + write_spec("badexpr", R"js({"r": "1", "k": {"kind": "closed", "expr": "t+*2"}})js")).code == 1);
    CHECK(run("classify --spec /nonexistent/spec.json").code == 1);
    CHECK(run("classify").code == 1);
    CHECK(run("frobnicate").code == 1);

    // demoted candidates are reported as warnings
    auto ex1 = run("classify --instance Ex1");
    CHECK(ex1.code == 3);
    CHECK(ex1.out.find("case: C9") != std::string::npos);
    CHECK(ex1.out.find("(rho(t))*d/dx") != std::string::npos);
}

TEST_CASE("determine reports tagged rows") {
    auto spec = write_spec("generic", R"js({"r": "1", "b": {"kind": "closed", "expr": "2+sin(t)"},
        "c": {"kind": "closed", "expr": "1+t^2"}, "d": {"kind": "closed", "expr": "exp(t)"},
        "k": {"kind": "closed", "expr": "3+cos(t)"}})js");
    auto r = run("determine --spec " + spec);
    CHECK(r.code == 0);
    for (const char* tag : {"(4.14)", "(4.16)", "(4.17)"}) CHECK(r.out.find(tag) != std::string::npos);
    CHECK(r.out.find("omega = 0 forced") != std::string::npos);

    auto zero = run("determine --instance C2 --omega 0 --upsilon 0 --json");
    CHECK(zero.code == 0);
    CHECK(nlohmann::json::parse(zero.out)["ansatz"]["equations"].empty());
}

TEST_CASE("integrate writes a trajectory") {
    auto dir = std::filesystem::temp_directory_path() / "ndelie_cli_integrate";
    std::filesystem::remove_all(dir);
    auto r = run("integrate --instance Ex1 --theta 'sin(t)' --T '3*pi' --steps 64 --json --out " + dir.string());
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["residual"].get<double>() < 1e-5);
    std::ifstream csv(dir / "trajectory.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "t,x,xprime,xsecond");
    CHECK(std::filesystem::exists(dir / "integrate.json"));
    CHECK(run("integrate --instance Ex1 --T '2.5*pi'").code == 1);
    CHECK(run("integrate --instance Ex1 --steps 8").code == 1);
}

TEST_CASE("verify end to end") {
    auto ex1 = run("verify --instance Ex1 --json");
    CHECK(ex1.code == 0);
    auto j = nlohmann::json::parse(ex1.out);
    int admitted = 0;
    for (const auto& rep : j["reports"])
        if (rep["status"] == "admitted") {
            ++admitted;
            CHECK(rep["passed"] == true);
        }
    CHECK(admitted == 3);

    auto ex2 = run("verify --instance Ex2 --gen '1;0' --gen '0;x' --gen '0;rho(t)'");
    CHECK(ex2.code == 0);
    auto bogus = run("verify --instance Ex2 --gen '0;t*x'");
    CHECK(bogus.code == 3);
    CHECK(bogus.out.find("FAIL") != std::string::npos);
    CHECK(run("verify --instance Ex2 --gen 'x'").code == 1);
    CHECK(run("verify --instance Ex2 --tol-fin -1").code == 1);
}

TEST_CASE("paper-suite matrix") {
    auto one = run("paper-suite --only C12 --json");
    CHECK(one.code == 0);
    auto j = nlohmann::json::parse(one.out);
    CHECK(j["total"] == 1);
    CHECK(j["scenarios"][0]["id"] == "C12");
    CHECK(run("paper-suite --only C12 --json").out == one.out);

    auto all = run("paper-suite --json");
    CHECK(all.code == 0);
    auto m = nlohmann::json::parse(all.out);
    REQUIRE(m["scenarios"].size() == 14);
    const char* order[] = {"C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9", "C10", "C11", "C12", "Ex1", "Ex2"};
    for (size_t i = 0; i < 14; ++i) {
        CHECK(m["scenarios"][i]["id"] == order[i]);
        CHECK(m["scenarios"][i]["passed"] == true);
    }
    CHECK(run("paper-suite --only C13").code == 1);
}
