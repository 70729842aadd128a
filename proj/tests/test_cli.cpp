#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "curvlab/cli.hpp"

using namespace curvlab;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("catalog list names every pinned entry") {
    CliResult r = run_cli({"catalog", "list"});
    CHECK(r.code == 0);
    for (const char* id : {"euclidean4", "sphere2", "sphere3", "sphere4", "hyperbolic4",
                           "schwarzschild", "desitter_like5", "aniso4", "flrw4",
                           "weyl_nonclosed4"})
        CHECK(r.out.find(id) != std::string::npos);
}

TEST_CASE("catalog show emits the spec and rejects unknown ids") {
    CliResult r = run_cli({"catalog", "show", "sphere4"});
    CHECK(r.code == 0);
    CHECK(r.out.find("4/(1+x1^2+x2^2+x3^2+x4^2)^2") != std::string::npos);

    CliResult bad = run_cli({"catalog", "show", "nosuch"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("nosuch") != std::string::npos);
}

TEST_CASE("catalog entries round trip through a spec file into compute") {
    for (const auto& entry : catalog()) {
        CliResult shown = run_cli({"catalog", "show", entry.id});
        REQUIRE(shown.code == 0);
        auto path = temp_file("curvlab_roundtrip.json");
        {
            std::ofstream f(path);
            f << shown.out;
        }
        std::vector<double> mid;
        for (const auto& b : entry.spec.sample_box) mid.push_back(0.5 * (b[0] + b[1]));
        std::string point;
        for (std::size_t i = 0; i < mid.size(); ++i)
            point += (i ? "," : "") + std::to_string(mid[i]);
        CliResult computed = run_cli({"compute", "--spec", path.string(), "--point", point});
        INFO(entry.id << " @ " << point);
        CHECK(computed.code == 0);
        std::filesystem::remove(path);
    }
}

TEST_CASE("compute on flat space emits all-zero tensors") {
    CliResult r = run_cli({"compute", "--catalog", "euclidean4", "--point", "0,0,0,0"});
    REQUIRE(r.code == 0);
    nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(j["scalar_curvature"].get<double>() == 0.0);
    for (const auto& row : j["tensors"]["riemann"]["components"])
        for (const auto& col : row)
            for (const auto& up : col)
                for (const auto& v : up) CHECK(v.get<double>() == 0.0);
    CHECK(j["diagnostics"]["coincidence_residual"].get<double>() == 0.0);
}

TEST_CASE("compute on Schwarzschild matches the closed forms") {
    CliResult r = run_cli({"compute", "--catalog", "schwarzschild", "--params", "M=1", "--point",
                           "0,5,1.2,0.3"});
    REQUIRE(r.code == 0);
    nlohmann::json j = nlohmann::json::parse(r.out);
    double worst = 0.0;
    for (const auto& row : j["tensors"]["ricci"]["components"])
        for (const auto& v : row) worst = std::max(worst, std::abs(v.get<double>()));
    CHECK(worst <= 1e-9);
    double resid = j["diagnostics"]["coincidence_residual"].get<double>();
    double scale = j["diagnostics"]["coincidence_scale"].get<double>();
    CHECK(resid <= 1e-8 * scale);
    CHECK(j["tensors"]["metric"]["components"][0][0].get<double>() == Catch::Approx(-0.6));
}

TEST_CASE("compute on sphere4 reports scalar curvature 12") {
    CliResult r = run_cli({"compute", "--catalog", "sphere4", "--point", "0.1,0.2,0.1,0.05"});
    REQUIRE(r.code == 0);
    nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(j["scalar_curvature"].get<double>() == Catch::Approx(12.0).margin(1e-8));
}

TEST_CASE("compute input errors exit with code 2") {
    CHECK(run_cli({"compute", "--catalog", "nosuch", "--point", "0,0,0,0"}).code == 2);
    CHECK(run_cli({"compute", "--catalog", "sphere4", "--point", "0,0"}).code == 2);
    CHECK(run_cli({"compute", "--catalog", "sphere4", "--point", "0,0,x,0"}).code == 2);
    CHECK(run_cli({"compute", "--point", "0,0,0,0"}).code == 2); // no source
    CHECK(run_cli({"compute", "--catalog", "sphere4", "--spec", "x.json", "--point",
                   "0,0,0,0"})
              .code == 2);
    // singular point: Schwarzschild horizon r = 2M
    CHECK(run_cli({"compute", "--catalog", "schwarzschild", "--point", "0,2,1.2,0.3"}).code == 2);
}

TEST_CASE("malformed spec files are rejected with code 2") {
    auto path = temp_file("curvlab_bad_spec.json");
    {
        std::ofstream f(path);
        f << "{\"dimension\": 2, \"coordinates\": [\"x\", \"y\"]}";
    }
    CliResult r = run_cli({"compute", "--spec", path.string(), "--point", "0,0"});
    CHECK(r.code == 2);
    CHECK(!r.err.empty());
    std::filesystem::remove(path);

    CliResult missing = run_cli({"compute", "--spec", "/nonexistent/spec.json", "--point", "0"});
    CHECK(missing.code == 2);
}

TEST_CASE("verify exit codes: pass 0, verification failure 1, usage 2") {
    CHECK(run_cli({"verify", "coincidence", "--catalog", "sphere4", "--samples", "3"}).code == 0);
    CHECK(run_cli({"verify", "coincidence", "--catalog", "aniso4", "--samples", "3", "--seed",
                   "1"})
              .code == 1);
    CHECK(run_cli({"verify", "nosuite"}).code == 2);
    CHECK(run_cli({"verify", "coincidence", "--catalog", "nosuch"}).code == 2);
    CHECK(run_cli({"verify", "coincidence", "--catalog", "sphere4", "--samples", "0"}).code == 2);
    CHECK(run_cli({"verify", "lowdim", "--catalog", "sphere4"}).code == 2);
}

TEST_CASE("verify lowdim on sphere3 reports agreement") {
    CliResult r = run_cli({"verify", "lowdim", "--catalog", "sphere3", "--samples", "4"});
    CHECK(r.code == 0);
    CHECK(r.out.find("tensors agree") != std::string::npos);
}

TEST_CASE("verify writes a JSON report with sorted records and a verdict") {
    auto path = temp_file("curvlab_report.json");
    CliResult r = run_cli({"verify", "traces", "--json", path.string()});
    CHECK(r.code == 0);
    std::ifstream f(path);
    nlohmann::json j = nlohmann::json::parse(f);
    CHECK(j["verdict"] == "pass");
    CHECK(j["seed"].get<std::uint64_t>() == 42);
    CHECK(j["resolved_convention"] == "nabla=changed,sign=+1");
    CHECK(j["checks"].size() == 3);
    CHECK(j.contains("tool_version"));
    CHECK(!j.dump().empty());
    std::filesystem::remove(path);
}

TEST_CASE("identical command lines give byte-identical reports") {
    auto pa = temp_file("curvlab_rep_a.json");
    auto pb = temp_file("curvlab_rep_b.json");
    std::vector<std::string> args = {"verify",    "bianchi",    "--catalog", "sphere3",
                                     "--samples", "4",          "--seed",    "7",
                                     "--json",    pa.string()};
    CHECK(run_cli(args).code == 0);
    args.back() = pb.string();
    CHECK(run_cli(args).code == 0);
    std::ifstream fa(pa), fb(pb);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    CHECK(sa.str() == sb.str());
    CHECK(!sa.str().empty());
    std::filesystem::remove(pa);
    std::filesystem::remove(pb);
}

TEST_CASE("user spec files run through verify with informational coincidence") {
    auto path = temp_file("curvlab_user_spec.json");
    {
        std::ofstream f(path);
        f << R"({
            "label": "polar 2-sphere",
            "dimension": 2,
            "coordinates": ["th", "ph"],
            "metric": [["1", "0"], ["", "sin(th)^2"]],
            "sample_box": [[0.5, 2.6], [0.0, 6.28]]
        })";
    }
    CliResult r = run_cli({"verify", "all", "--spec", path.string(), "--samples", "4"});
    CHECK(r.code == 0);
    std::filesystem::remove(path);
}

TEST_CASE("--tol scales the pinned tolerances") {
    // With an absurdly tight tolerance even Einstein entries fail.
    CliResult tight = run_cli({"verify", "coincidence", "--catalog", "sphere4", "--samples", "3",
                               "--tol", "1e-9"});
    CHECK(tight.code == 1);
}

TEST_CASE("CURVLAB_SEED provides the default seed and --seed wins") {
    setenv("CURVLAB_SEED", "123", 1);
    CliResult env_seed = run_cli({"verify", "traces"});
    CHECK(env_seed.out.find("seed: 123") != std::string::npos);
    CliResult flag_seed = run_cli({"verify", "traces", "--seed", "9"});
    CHECK(flag_seed.out.find("seed: 9") != std::string::npos);
    unsetenv("CURVLAB_SEED");
}

TEST_CASE("compute --json writes the document to a file") {
    auto path = temp_file("curvlab_compute.json");
    CliResult r = run_cli({"compute", "--catalog", "sphere2", "--point", "0.1,0.3", "--json",
                           path.string()});
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream f(path);
    nlohmann::json j = nlohmann::json::parse(f);
    CHECK(j["dimension"] == 2);
    CHECK(j["scalar_curvature"].get<double>() == Catch::Approx(2.0).margin(1e-9));
    std::filesystem::remove(path);
}
