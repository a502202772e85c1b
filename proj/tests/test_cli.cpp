#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cml/cli.hpp"
#include "cml/config.hpp"

namespace fs = std::filesystem;

namespace {

fs::path configs_dir() {
    const char* env = std::getenv("CMLAB_CONFIGS");
    return env ? fs::path(env) : fs::path("configs");
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "cmlab_test_cli" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

struct Result {
    int code;
    std::string out, err;
};

Result cmlab(std::vector<std::string> args) {
    args.insert(args.begin(), "cmlab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cml::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

const char* kChain = R"({
  "box": {"kind": "chain", "n": 4},
  "map": {"kind": "doubling"},
  "coupling": {"kind": "unidirectional_k", "weights": [0.2, 0.4, 0.4]},
  "bc": {"mode": "frozen", "value": 0.15},
  "experiment": {"params": {"t_max": 0}}
})";

}  // namespace

TEST_CASE("malformed and unknown configs exit 1 naming the problem") {
    const fs::path dir = scratch("bad");
    spit(dir / "broken.json", "{ \"box\": ");
    Result r = cmlab({"simulate", "--config", (dir / "broken.json").string(), "--out", (dir / "o").string()});
    CHECK(r.code == cml::cli::kConfigError);

    std::string cfg = kChain;
    cfg.replace(cfg.find("\"n\": 4"), 6, "\"n\": 4, \"colour\": 1");
    spit(dir / "unknown.json", cfg);
    r = cmlab({"simulate", "--config", (dir / "unknown.json").string(), "--out", (dir / "o").string()});
    CHECK(r.code == cml::cli::kConfigError);
    CHECK(r.err.find("box.colour") != std::string::npos);

    r = cmlab({"simulate", "--config", (dir / "missing.json").string()});
    CHECK(r.code == cml::cli::kConfigError);

    r = cmlab({"lra", "--config", (configs_dir() / "sensitivity.json").string(), "--out", (dir / "o").string()});
    CHECK(r.code == cml::cli::kConfigError);
    CHECK(r.err.find("probe") != std::string::npos);

    r = cmlab({"simulate"});
    CHECK(r.code == cml::cli::kConfigError);
    r = cmlab({"simulate", "--config", (dir / "unknown.json").string(), "--threads", "0"});
    CHECK(r.code == cml::cli::kConfigError);
}

TEST_CASE("check-topology exit codes") {
    const fs::path dir = scratch("topo");
    Result r = cmlab({"check-topology", "--config", (configs_dir() / "diffusive_chain.json").string(), "--out",
                      (dir / "diff").string()});
    CHECK(r.code == cml::cli::kCycleFound);
    CHECK(r.out.find("cycle: ") != std::string::npos);

    r = cmlab({"check-topology", "--config", (configs_dir() / "lra_chain16.json").string(), "--out",
               (dir / "chain").string()});
    CHECK(r.code == cml::cli::kOk);
    const std::string csv = slurp(dir / "chain" / "enumeration.csv");
    CHECK(csv.rfind("site,label,L\n1,1,1\n", 0) == 0);
    CHECK(fs::exists(dir / "chain" / "adjacency.txt"));
    CHECK(fs::exists(dir / "chain" / "report.json"));

    r = cmlab({"check-topology", "--config", (configs_dir() / "toom_ne.json").string(), "--out",
               (dir / "toom").string()});
    CHECK(r.code == cml::cli::kOk);
}

TEST_CASE("simulate with t_max = 0 writes the initial row only") {
    const fs::path dir = scratch("sim0");
    spit(dir / "c.json", kChain);
    const Result r = cmlab({"simulate", "--config", (dir / "c.json").string(), "--out", (dir / "o").string()});
    REQUIRE(r.code == cml::cli::kOk);
    std::istringstream in(slurp(dir / "o" / "trajectory.csv"));
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0].rfind("t,", 0) == 0);
    CHECK(lines[1].rfind("0,", 0) == 0);
}

TEST_CASE("seed override and resolved config are echoed") {
    const fs::path dir = scratch("seed");
    spit(dir / "c.json", kChain);
    const Result r =
        cmlab({"simulate", "--config", (dir / "c.json").string(), "--out", (dir / "o").string(), "--seed", "99"});
    REQUIRE(r.code == cml::cli::kOk);
    const auto rep = cml::cli::Json::parse(slurp(dir / "o" / "report.json"));
    CHECK(rep["seed"] == 99);
    CHECK(rep["config"]["seed"] == 99);
    CHECK(rep["config"]["experiment"]["params"]["run"] == 0);
    CHECK(rep["command"] == "simulate");
}

TEST_CASE("reruns are byte-identical, whatever the thread count") {
    const fs::path dir = scratch("rerun");
    const std::string cfg = (configs_dir() / "lra_chain16.json").string();
    REQUIRE(cmlab({"lra", "--config", cfg, "--out", (dir / "a").string()}).code == cml::cli::kOk);
    REQUIRE(cmlab({"lra", "--config", cfg, "--out", (dir / "b").string(), "--threads", "4"}).code == cml::cli::kOk);
    for (const char* f : {"report.json", "distances.csv", "limit.csv"})
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
}

TEST_CASE("periodic and sensitivity configs pass") {
    const fs::path dir = scratch("shipped");
    CHECK(cmlab({"periodic", "--config", (configs_dir() / "periodic_two_orbits.json").string(), "--out",
                 (dir / "p").string()})
              .code == cml::cli::kOk);
    CHECK(cmlab({"sensitivity", "--config", (configs_dir() / "sensitivity.json").string(), "--out",
                 (dir / "s").string()})
              .code == cml::cli::kOk);
}
