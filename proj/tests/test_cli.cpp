// End-to-end checks of the command-line tool: spawns the built binary on the
// sample documents and inspects exit codes and outputs.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

using Json = nlohmann::ordered_json;

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

RunResult run(const std::string& args) {
    const std::string out = "cli_stdout.txt", err = "cli_stderr.txt";
    std::string cmd = std::string(FRESCO_CLI_PATH) + " " + args + " > " + out + " 2> " + err;
    int status = std::system(cmd.c_str());
    int code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    return RunResult{code, slurp(out), slurp(err)};
}

std::string data(const std::string& name) { return std::string(TEST_DATA_DIR) + "/" + name; }

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

} // namespace

TEST_CASE("cli report") {
    SECTION("rank-1 document") {
        RunResult r = run("report " + data("rank1_lambda2.fresco"));
        REQUIRE(r.exit_code == 0);
        Json j = Json::parse(r.out);
        REQUIRE(j["invariants"]["bernstein_roots"] == Json::array({"-2"}));
        REQUIRE(j["stratum"]["level"] == 1);
        REQUIRE(j["stratum"]["semisimple"] == true);
    }
    SECTION("the rank-4 example document sits at level 2") {
        RunResult r = run("report " + data("rank4_example.fresco"));
        REQUIRE(r.exit_code == 0);
        Json j = Json::parse(r.out);
        REQUIRE(j["stratum"]["level"] == 2);
        REQUIRE(j["stratum"]["semisimple"] == false);
    }
    SECTION("rank-3 document reports beta 1") {
        RunResult r = run("report " + data("rank3_beta.fresco"));
        REQUIRE(r.exit_code == 0);
        Json j = Json::parse(r.out);
        REQUIRE(j["beta"] == "-2");
        REQUIRE(j["stratum"]["semisimple"] == false);
    }
    SECTION("byte-identical across runs") {
        RunResult a = run("report " + data("rank4_example.fresco"));
        RunResult b = run("report " + data("rank4_example.fresco"));
        REQUIRE(a.out == b.out);
    }
}

TEST_CASE("cli exit codes") {
    SECTION("validation failure exits 2 and cites the geometric condition") {
        RunResult r = run("report " + data("bad_geometric.fresco"));
        REQUIRE(r.exit_code == 2);
        REQUIRE(r.err.find("lambda_j + j > k") != std::string::npos);
    }
    SECTION("unreadable files exit 2") {
        REQUIRE(run("report no_such_file.fresco").exit_code == 2);
    }
    SECTION("insufficient precision exits 3 with a suggestion") {
        RunResult r = run("report --truncation 2 " + data("rank2_split.fresco"));
        REQUIRE(r.exit_code == 3);
        REQUIRE(r.err.find("--truncation") != std::string::npos);
    }
    SECTION("beta outside its stratum exits 4") {
        RunResult r = run("beta " + data("rank4_example.fresco"));
        REQUIRE(r.exit_code == 4);
    }
    SECTION("beta inside the stratum succeeds") {
        RunResult r = run("beta " + data("rank3_beta.fresco"));
        REQUIRE(r.exit_code == 0);
        REQUIRE(Json::parse(r.out)["beta"] == "-2");
    }
}

TEST_CASE("cli transforms emit documents for pipelining") {
    SECTION("window 1 2 of the example carries its S unit") {
        RunResult r = run("window 1 2 " + data("rank4_example.fresco"));
        REQUIRE(r.exit_code == 0);
        REQUIRE(r.out.find("rank 2") != std::string::npos);
        REQUIRE(r.out.find("lambda 7/2 9/2") != std::string::npos);
        REQUIRE(r.out.find("S1 0:1 4:1 6:1") != std::string::npos);
    }
    SECTION("dual emits the reflected invariants") {
        RunResult r = run("dual --delta 20 " + data("rank2_theme.fresco"));
        REQUIRE(r.exit_code == 0);
        REQUIRE(r.out.find("lambda 15 16") != std::string::npos);
    }
    SECTION("dual twice round-trips the report invariants") {
        RunResult once = run("dual --delta 20 " + data("rank2_theme.fresco"));
        REQUIRE(once.exit_code == 0);
        write_file("cli_dual_once.fresco", once.out);
        RunResult twice = run("dual --delta 20 cli_dual_once.fresco");
        REQUIRE(twice.exit_code == 0);
        write_file("cli_dual_twice.fresco", twice.out);

        Json direct = Json::parse(run("report " + data("rank2_theme.fresco")).out);
        Json looped = Json::parse(run("report cli_dual_twice.fresco").out);
        REQUIRE(direct["invariants"]["lambda"] == looped["invariants"]["lambda"]);
        REQUIRE(direct["invariants"]["bernstein_roots"] == looped["invariants"]["bernstein_roots"]);
        REQUIRE(direct["alpha"] == looped["alpha"]);
        REQUIRE(direct["beta"] == looped["beta"]);
        REQUIRE(direct["stratum"] == looped["stratum"]);
    }
    SECTION("changevar with theta = a + a^2 keeps beta") {
        RunResult cv = run("changevar --theta 1,1 " + data("rank3_beta.fresco"));
        REQUIRE(cv.exit_code == 0);
        write_file("cli_changevar.fresco", cv.out);
        Json before = Json::parse(run("report " + data("rank3_beta.fresco")).out);
        Json after = Json::parse(run("report cli_changevar.fresco").out);
        REQUIRE(before["beta"] == after["beta"]);
        REQUIRE(before["invariants"]["lambda"] == after["invariants"]["lambda"]);
    }
    SECTION("rank1 subcommand lists the families") {
        RunResult r = run("rank1 " + data("rank2_theme.fresco"));
        REQUIRE(r.exit_code == 0);
        Json j = Json::parse(r.out);
        REQUIRE(j["rank1_families"].size() == 1);
        REQUIRE(j["rank1_families"][0]["mu"] == "4");
    }
    SECTION("--output writes the file instead of stdout") {
        RunResult r = run("report --output cli_report_out.json " + data("rank1_lambda2.fresco"));
        REQUIRE(r.exit_code == 0);
        REQUIRE(r.out.empty());
        REQUIRE(Json::parse(slurp("cli_report_out.json"))["stratum"]["semisimple"] == true);
    }
}
