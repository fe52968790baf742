#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcalc/cli.hpp"

using nlohmann::json;

namespace {

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

RunResult run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = qcalc::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

json report_of(const RunResult& r) {
    REQUIRE(r.code == 0);
    return json::parse(r.out);
}

// Writes content to a fresh temp file and removes it on scope exit.
struct TempFile {
    std::string path;
    explicit TempFile(const std::string& content) {
        static int counter = 0;
        path = "/tmp/qcalc_cli_job_" + std::to_string(::getpid()) + "_" +
               std::to_string(counter++) + ".json";
        std::ofstream f(path);
        f << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("deriv evaluates operators and echoes its inputs") {
    json r = report_of(run({"deriv", "--op", "hahn", "--q", "0.5", "--omega", "1",
                            "--f", "t^2", "--t", "4"}));
    CHECK(r["command"] == "deriv");
    CHECK(r["value"].get<double>() == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(r["inputs"]["q"].get<double>() == 0.5);
    CHECK(r["inputs"]["f"] == "t^2");

    json s = report_of(run({"deriv", "--op", "sym-diamond", "--scale", "hz(1,0,6)",
                            "--f", "t^2", "--t", "3"}));
    CHECK(s["value"].get<double>() == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("integ reproduces the fixed reference values") {
    json ab = report_of(run({"integ", "--op", "ab-sym", "--alpha", "2", "--beta", "2",
                             "--f", "1/t^2", "--a", "1", "--b", "3"}));
    CHECK(ab["value"].get<double>() == doctest::Approx(10.0 / 9.0).epsilon(1e-12));
    CHECK(ab["converged"].get<bool>());
    CHECK(ab["inputs"]["policy"].contains("max_terms"));

    json dia = report_of(run({"integ", "--op", "diamond", "--scale",
                              "union(interval(0,1),points(2,4))", "--f", "1",
                              "--a", "0", "--b", "4"}));
    CHECK(dia["value"].get<double>() == doctest::Approx(17.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("fractions are accepted anywhere a number is") {
    json r = report_of(run({"integ", "--op", "q-sym", "--q", "1/2", "--f", "0",
                            "--override", "t=1/2:1", "--override", "t=1/6:6",
                            "--a", "1/3", "--b", "1"}));
    CHECK(r["value"].get<double>() == doctest::Approx(-0.75).epsilon(1e-12));
    CHECK(r["inputs"]["overrides"].size() == 2);
}

TEST_CASE("usage problems exit 1 with a diagnostic on stderr") {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"no-such-command"},
             {"integ", "--f", "t", "--a", "0", "--b", "1"},        // missing --op
             {"deriv", "--op", "hahn", "--f", "t", "--t", "1"},    // missing --q
             {"deriv", "--op", "blob", "--f", "t", "--t", "1"},
             {"integ", "--op", "q-sym", "--q", "0.5", "--f", "t@2", "--a", "0", "--b", "1"},
             {"integ", "--op", "q-sym", "--q", "0.5", "--f", "0", "--override", "oops",
              "--a", "0", "--b", "1"},
         }) {
        RunResult r = run(args);
        CHECK(r.code == 1);
        CHECK(!r.err.empty());
    }
}

TEST_CASE("domain violations exit 2") {
    RunResult off_scale = run({"deriv", "--op", "delta", "--scale", "hz(1,0,5)",
                               "--f", "t", "--t", "2.5"});
    CHECK(off_scale.code == 2);
    CHECK(!off_scale.err.empty());

    RunResult rolle = run({"mvt", "--kind", "rolle", "--f", "t", "--a", "0", "--b", "1"});
    CHECK(rolle.code == 2);
}

TEST_CASE("a starved series budget exits 3 and reports converged false") {
    RunResult r = run({"--max-terms", "4", "integ", "--op", "hahn", "--q", "0.5",
                       "--f", "t", "--a", "0", "--b", "1"});
    CHECK(r.code == 3);
    json rep = json::parse(r.out);  // partial result is still reported
    CHECK(!rep["converged"].get<bool>());
    CHECK(rep["terms_used"].get<int>() == 4);
}

TEST_CASE("csv output is a header line plus rows") {
    RunResult r = run({"--output", "csv", "deriv", "--op", "q-sym", "--q", "0.5",
                       "--f", "t^2", "--t", "2"});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string header, row, extra;
    REQUIRE(std::getline(lines, header));
    REQUIRE(std::getline(lines, row));
    CHECK(!std::getline(lines, extra));
    CHECK(header.find("value") != std::string::npos);
    CHECK(header.find("inputs.q") != std::string::npos);

    // Residual listings become plot-ready point,residual rows.
    RunResult el = run({"--output", "csv", "el-check", "--flavor", "q_symmetric",
                        "--q", "0.5", "--L", "1+u1^2", "--y", "t", "--a", "0", "--b", "1",
                        "--boundary-a", "0", "--boundary-b", "1", "--depth", "4"});
    REQUIRE(el.code == 0);
    std::istringstream el_lines(el.out);
    std::string el_header;
    REQUIRE(std::getline(el_lines, el_header));
    CHECK(el_header == "point,residual");
    int rows = 0;
    for (std::string line; std::getline(el_lines, line);) ++rows;
    CHECK(rows == 9);  // 2 endpoints x depth 4 + the fixed point
}

TEST_CASE("el-check accepts a job file and reports residuals") {
    TempFile job(R"({
        "flavor": "q_symmetric", "q": 0.5, "r": 1,
        "L": "1+u1^2", "a": 0.0, "b": 1.0,
        "boundary": [[0.0], [1.0]],
        "y": "t"
    })");
    json r = report_of(run({"el-check", "--job", job.path}));
    CHECK(r["max_abs"].get<double>() <= 1e-10);
    CHECK(r["functional_value"].get<double>() == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r["points"].size() == r["residuals"].size());
    CHECK(r["inputs"]["L"] == "1+u1^2");

    // A candidate missing its boundary values is a domain failure, not a crash.
    TempFile bad(R"({
        "flavor": "q_symmetric", "q": 0.5, "r": 1,
        "L": "1+u1^2", "a": 0.0, "b": 1.0,
        "boundary": [[0.0], [1.0]],
        "y": "t+0.5"
    })");
    RunResult rb = run({"el-check", "--job", bad.path});
    CHECK(rb.code == 2);
    CHECK(rb.err.find("boundary") != std::string::npos);
}

TEST_CASE("var-check reports the functional, first variation and convexity") {
    json r = report_of(run({"var-check", "--flavor", "q_symmetric", "--q", "0.5",
                            "--L", "u0^2+u1^2", "--y", "t", "--eta", "t*(1-t)",
                            "--a", "0", "--b", "1",
                            "--boundary-a", "0", "--boundary-b", "1",
                            "--convexity-n", "8"}));
    CHECK(r.contains("functional_value"));
    CHECK(r.contains("first_variation"));
    CHECK(r["convexity"]["jointly_convex_evidence"].get<bool>());
    CHECK(r["convexity"]["samples"].get<int>() == 16 * 8);
}

TEST_CASE("leitmann runs are deterministic") {
    std::vector<std::string> args{
        "leitmann", "--flavor", "hahn_symmetric", "--q", "0.5", "--omega", "1",
        "--L", "u1^2+0.5*u0+t*u1", "--Lbar", "u1^2",
        "--z-forward", "u0+t-1", "--z-inverse", "u0-t+1",
        "--G", "2*u0+0.5*t+(0.5*t+1)*u0+(0.5*t+1)*t",
        "--a", "2", "--b", "6", "--boundary-a", "1", "--boundary-b", "5",
        "--samples", "4"};
    RunResult first = run(args);
    RunResult second = run(args);
    REQUIRE(first.code == 0);
    CHECK(first.out == second.out);
    json r = json::parse(first.out);
    CHECK(r["holds"].get<bool>());
    CHECK(r.contains("seed"));  // echoed so a run can be reproduced exactly
    CHECK(r["max_pointwise_defect"].get<double>() <= 1e-8);
}

TEST_CASE("ts-query reports jump structure and weights") {
    json r = report_of(run({"ts-query", "--scale", "union(interval(0,1),points(2,4))",
                            "--t", "1"}));
    CHECK(r["classification"] == "right-scattered-left-dense");
    CHECK(r["sigma"].get<double>() == 2.0);
    CHECK(r["mu"].get<double>() == 1.0);
    CHECK(r["gamma1"].get<double>() == 1.0);
    CHECK(r["gamma2"].get<double>() == 0.0);
    CHECK(r["min"].get<double>() == 0.0);
    CHECK(r["max"].get<double>() == 4.0);
}

TEST_CASE("ineq and mvt commands answer through the same reports") {
    json h = report_of(run({"ineq", "--kind", "cauchy-schwarz", "--alpha", "1", "--beta", "1",
                            "--f", "t", "--g", "1", "--a", "0", "--b", "4"}));
    CHECK(h["holds"].get<bool>());
    CHECK(h["lhs"].get<double>() <= h["rhs"].get<double>());

    json d = report_of(run({"ineq", "--kind", "mvt", "--scale", "interval(0,2)",
                            "--f", "t", "--g", "1", "--a", "0", "--b", "2"}));
    CHECK(d["K"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));

    json m = report_of(run({"mvt", "--kind", "lagrange", "--f", "t^2", "--a", "0", "--b", "1"}));
    CHECK(m["residual"].get<double>() <= 1e-8);
    double c = m["c"].get<double>();
    CHECK(c > 0.0);
    CHECK(c < 1.0);
}

TEST_CASE("help is reachable from the top level and subcommands") {
    RunResult top = run({"--help"});
    CHECK(top.code == 0);
    CHECK(top.out.find("deriv") != std::string::npos);

    RunResult sub = run({"integ", "--help"});
    CHECK(sub.code == 0);
    CHECK(sub.out.find("--op") != std::string::npos);
}
