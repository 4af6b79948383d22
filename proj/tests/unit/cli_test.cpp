#include <doctest.h>

#include "fixtures.hpp"
#include "ghfm/cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "ghfm");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = ghfm::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

nlohmann::json error_line(const Outcome& o) { return nlohmann::json::parse(o.err.substr(0, o.err.find('\n'))); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate is reproducible") {
    fixtures::TempDir dir("cli_sim");
    const auto a = dir.file("a.csv"), b = dir.file("b.csv");
    REQUIRE(run({"simulate", "--setting", "2", "--n", "100", "--seed", "7", "--out", a}).code == 0);
    REQUIRE(run({"simulate", "--setting", "2", "--n", "100", "--seed", "7", "--out", b, "--threads", "0"}).code == 0);
    CHECK(fixtures::slurp(a) == fixtures::slurp(b));
    CHECK(!fixtures::slurp(a).empty());
    const auto manifest = nlohmann::json::parse(fixtures::slurp(a + ".manifest.json"));
    CHECK(manifest["seed"] == 7);
    CHECK(manifest["command"] == "simulate");
    CHECK(manifest.contains("config_hash"));
    CHECK(manifest["config_hash"] == nlohmann::json::parse(fixtures::slurp(b + ".manifest.json"))["config_hash"]);
    REQUIRE(run({"simulate", "--setting", "2", "--n", "100", "--seed", "8", "--out", b}).code == 0);
    CHECK(fixtures::slurp(a) != fixtures::slurp(b));
}

TEST_CASE("family conflict is a usage error") {
    fixtures::TempDir dir("cli_family");
    const auto data = dir.file("bin.csv");
    REQUIRE(run({"simulate", "--setting", "3", "--n", "40", "--seed", "1", "--out", data}).code == 0);
    const auto o = run({"fit", "--data", data, "--family", "gaussian", "--method", "sflm", "--phi", "1", "--out",
                        dir.file("m.json")});
    CHECK(o.code == 2);
    const auto e = error_line(o);
    CHECK(e["error"] == "argument");
    const std::string msg = e["message"];
    CHECK(msg.find("gaussian") != std::string::npos);
    CHECK(msg.find("0/1") != std::string::npos);
    CHECK(run({"fit", "--data", data, "--family", "gaussian", "--force-family", "--method", "sflm", "--phi", "1", "--out",
               dir.file("m.json")})
              .code == 0);

    const auto gauss = dir.file("g.csv");
    REQUIRE(run({"simulate", "--setting", "1", "--n", "40", "--out", gauss}).code == 0);
    CHECK(run({"fit", "--data", gauss, "--family", "bernoulli", "--method", "sflm", "--out", dir.file("m.json")}).code == 2);
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == 2);
    CHECK(run({"simulate", "--setting", "1", "--n", "8", "--bogus", "--out", "x"}).code == 2);
    CHECK(run({"simulate", "--setting", "4", "--n", "8", "--out", "x"}).code == 2);
    const auto missing = run({"fit", "--data", "/nonexistent/file.csv", "--out", "/tmp/x.json"});
    CHECK(missing.code == 2);
    CHECK(error_line(missing)["error"] == "ingest");
    const auto version = run({"--version"});
    CHECK(version.code == 0);
    CHECK(version.out.find(ghfm::kVersion) != std::string::npos);
}

TEST_CASE("every command is reproducible and thread independent") {
    fixtures::TempDir dir("cli_pipe");
    const auto f = [&](const std::string& name) { return dir.file(name); };
    REQUIRE(run({"simulate", "--setting", "1", "--n", "60", "--seed", "3", "--out", f("train.csv"), "--test-out",
                 f("test.csv"), "--truth-out", f("truth.json")})
                .code == 0);
    for (const std::string threads : {"1", "3"}) {
        const std::string t = threads;
        REQUIRE(run({"fit", "--data", f("train.csv"), "--method", "ghfm", "--preclusters", "6", "--lambda", "0.05",
                     "--phi", "1", "--seed", "3", "--threads", t, "--out", f("fit" + t + ".json"), "--precluster-out",
                     f("pre" + t + ".json")})
                    .code == 0);
        REQUIRE(run({"predict", "--model", f("fit" + t + ".json"), "--data", f("test.csv"), "--threads", t, "--out",
                     f("pred" + t + ".csv")})
                    .code == 0);
        REQUIRE(run({"evaluate", "--pred", f("pred" + t + ".csv"), "--truth", f("truth.json"), "--model",
                     f("fit" + t + ".json"), "--threads", t, "--out", f("eval" + t + ".json")})
                    .code == 0);
        REQUIRE(run({"tune", "--data", f("train.csv"), "--preclusters", "6", "--grid", "scaled", "--seed", "3",
                     "--threads", t, "--out", f("tune" + t + ".json"), "--cells-out", f("cells" + t + ".csv")})
                    .code == 0);
        REQUIRE(run({"export-curves", "--model", f("tune" + t + ".json"), "--threads", t, "--out", f("curves" + t + ".csv")})
                    .code == 0);
        REQUIRE(run({"reproduce", "--table", "1", "--n", "20", "--seeds", "1", "--lambda-grid", "1,10", "--phi-grid", "1",
                     "--threads", t, "--out", f("table" + t + ".csv"), "--replicates-out", f("reps" + t + ".csv")})
                    .code == 0);
    }
    for (const std::string name : {"fit", "pre", "eval", "tune"})
        CHECK(fixtures::slurp(f(name + "1.json")) == fixtures::slurp(f(name + "3.json")));
    for (const std::string name : {"pred", "cells", "curves", "table", "reps"})
        CHECK(fixtures::slurp(f(name + "1.csv")) == fixtures::slurp(f(name + "3.csv")));

    const auto eval = nlohmann::json::parse(fixtures::slurp(f("eval1.json")));
    CHECK(eval.contains("rpmse"));
    CHECK(eval.contains("smr"));
    const auto table = fixtures::slurp(f("table1.csv"));
    CHECK(std::count(table.begin(), table.end(), '\n') == 6);
    CHECK(table.find("rpmse_ghfm") != std::string::npos);
    CHECK(table.find("rpmse_lm_ref") != std::string::npos);
    const auto curves = fixtures::slurp(f("curves1.csv"));
    CHECK(curves.rfind("covariate,subgroup,t,value", 0) == 0);

    const auto pred_manifest = nlohmann::json::parse(fixtures::slurp(f("pred1.csv.manifest.json")));
    CHECK(pred_manifest.contains("inputs"));
    const auto m1 = nlohmann::json::parse(fixtures::slurp(f("fit1.json.manifest.json")));
    const auto m3 = nlohmann::json::parse(fixtures::slurp(f("fit3.json.manifest.json")));
    CHECK(m1["config_hash"] == m3["config_hash"]);
}

TEST_CASE("prediction for unknown subjects is a mapping error") {
    fixtures::TempDir dir("cli_map");
    const auto a = dir.file("a.csv"), b = dir.file("b.csv");
    REQUIRE(run({"simulate", "--setting", "1", "--n", "40", "--seed", "1", "--out", a}).code == 0);
    REQUIRE(run({"simulate", "--setting", "1", "--n", "80", "--seed", "1", "--out", b}).code == 0);
    REQUIRE(run({"fit", "--data", a, "--method", "sflm", "--phi", "1", "--out", dir.file("m.json")}).code == 0);
    const auto o = run({"predict", "--model", dir.file("m.json"), "--data", b, "--out", dir.file("p.csv")});
    CHECK(o.code == 2);
    CHECK(error_line(o)["error"] == "mapping");
}

}
