#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "nkit/io.hpp"
#include "nkit/run.hpp"

using namespace nkit;
using nlohmann::json;

namespace {

const char* kTateDoc = R"({
  "p": 3,
  "commands": ["nygaard", "graded", "ht", "check-theorem"],
  "bk": {"name": "tate", "height": 1, "frob": [[["-3", "1"]]]}
})";

const char* kPollutionDoc = R"({
  "p": 3,
  "bk": {
    "name": "pollution-e2u",
    "height": 3,
    "frob": [[["9", "-6", "1"], ["0", "1"]], [["0"], ["-3", "1"]]]
  }
})";

const char* kThetaDoc = R"({
  "p": 3,
  "N": 8,
  "theta_module": {
    "layers": [
      {"index": 0, "theta": [["0"]]},
      {"index": 1, "inclusion": [["1"], ["0"]],
       "theta": [["0", "0"], ["0", "-1"]]}
    ]
  }
})";

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(NKIT_BIN_DIR) + "/nkit " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "nkit_cli_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_doc(const std::string& name, const std::string& body) {
  auto path = scratch_dir() / name;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << body;
  f.close();
  return path.string();
}

}  // namespace

TEST_CASE("document parsing reports pointer-pathed violations") {
  SUBCASE("valid document") {
    auto doc = parse_doc(kTateDoc);
    CHECK(doc.p == 3);
    CHECK(doc.N == 12);
    CHECK(doc.M == 64);
    CHECK(doc.payload_name() == "bk");
    REQUIRE(doc.bk.has_value());
    CHECK(doc.bk->height == 1);
    CHECK(doc.bk->rank == 1);
    CHECK(doc.bk->assume_crystalline);
    CHECK(doc.commands == std::vector<std::string>{"nygaard", "graded", "ht",
                                                   "check-theorem"});
  }
  SUBCASE("even characteristic is rejected") {
    try {
      parse_doc(R"({"p": 2, "bk": {"height": 0, "frob": [[["1"]]]}})");
      FAIL("expected a schema error");
    } catch (const Error& e) {
      CHECK(e.kind == ErrorKind::schema);
      CHECK(std::string(e.what()).find("/p") != std::string::npos);
    }
  }
  SUBCASE("missing height") {
    try {
      parse_doc(R"({"p": 3, "bk": {"frob": [[["1"]]]}})");
      FAIL("expected a schema error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("/bk/height") != std::string::npos);
    }
  }
  SUBCASE("unknown fields are flagged with their path") {
    try {
      parse_doc(R"({"p": 3, "bk": {"height": 0, "frob": [[["1"]]], "typ": 1}})");
      FAIL("expected a schema error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("/bk/typ") != std::string::npos);
    }
  }
  SUBCASE("several violations arrive as one error per line") {
    try {
      parse_doc(R"({"p": 2, "bk": {"frob": [[["1"]]], "typ": 1}})");
      FAIL("expected a schema error");
    } catch (const Error& e) {
      std::string what = e.what();
      CHECK(what.find("/p") != std::string::npos);
      CHECK(what.find("/bk/height") != std::string::npos);
      CHECK(what.find("/bk/typ") != std::string::npos);
      CHECK(std::count(what.begin(), what.end(), '\n') >= 2);
    }
  }
  SUBCASE("exactly one payload") {
    CHECK_THROWS_AS(
        parse_doc(R"({"p": 3, "bk": {"height": 0, "frob": [[["1"]]]},
                      "weyl": {"weights": [0]}})"),
        Error);
    CHECK_THROWS_AS(parse_doc(R"({"p": 3, "commands": ["graded"]})"), Error);
  }
  SUBCASE("unknown command name") {
    CHECK_THROWS_AS(
        parse_doc(
            R"({"p": 3, "commands": ["gr"], "bk": {"height": 0, "frob": [[["1"]]]}})"),
        Error);
  }
  SUBCASE("ragged matrix") {
    CHECK_THROWS_AS(
        parse_doc(
            R"({"p": 3, "theta_module": {"layers": [
                 {"index": 0, "theta": [["0", "1"]]}]}})"),
        Error);
  }
  SUBCASE("plain integers and decimal strings parse alike") {
    auto a = parse_doc(R"({"p": 3, "bk": {"height": 1, "frob": [[[-3, 1]]]}})");
    auto b = parse_doc(R"({"p": 3, "bk": {"height": 1, "frob": [[["-3", "1"]]]}})");
    CHECK(doc_equal(a, b));
  }
}

TEST_CASE("document echo is canonical and round trips") {
  auto doc = parse_doc(kTateDoc);
  json echo = doc_echo(doc);
  CHECK(echo["p"] == 3);
  CHECK(echo["bk"]["frob"][0][0] == json::array({"-3", "1"}));
  auto again = parse_doc(echo.dump());
  CHECK(doc_equal(doc, again));
  CHECK(doc_echo(again).dump(2) == echo.dump(2));

  SUBCASE("input hashing") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  }
}

TEST_CASE("run_doc wires commands to verdicts and exit codes") {
  SUBCASE("tate pipeline passes") {
    auto doc = parse_doc(kTateDoc);
    auto out = run_doc(doc, fnv1a_hex(kTateDoc), RunOptions{});
    CHECK(out.exit_code == 0);
    CHECK(out.report["verdict"] == "PASS");
    CHECK(out.report["results"]["ht"]["weights"] ==
          json::array({json::array({1, 1})}));
    CHECK(out.report["results"]["check-theorem"]["verdict"] == "PASS");
    CHECK(out.report["results"]["graded"]["i_max"] == 10);
    CHECK(out.report["errors"].empty());
    CHECK(out.report["input_hash"] == fnv1a_hex(kTateDoc));

    auto second = run_doc(doc, fnv1a_hex(kTateDoc), RunOptions{});
    CHECK(second.report.dump(2) == out.report.dump(2));
  }
  SUBCASE("inadmissible torsion fails the theorem check") {
    auto doc = parse_doc(kPollutionDoc);
    RunOptions opt;
    opt.commands = {"graded", "check-theorem"};
    auto out = run_doc(doc, "x", opt);
    CHECK(out.exit_code == 1);
    CHECK(out.report["verdict"] == "FAIL");
    CHECK(!out.report["results"]["check-theorem"]["offending"].empty());
  }
  SUBCASE("unstable escalation exits with the precision code") {
    auto doc = parse_doc(kPollutionDoc);
    RunOptions opt;
    opt.commands = {"graded"};
    opt.escalate = 14;
    auto out = run_doc(doc, "x", opt);
    CHECK(out.exit_code == 3);
    CHECK(out.report["errors"]["escalation"]["kind"] == "UncertifiedPrecision");
  }
  SUBCASE("too little precision exits with the precision code") {
    auto doc = parse_doc(kTateDoc);
    RunOptions opt;
    opt.precision = {6, 32};
    auto out = run_doc(doc, "x", opt);
    CHECK(out.exit_code == 3);
    CHECK(out.report["errors"]["graded"]["kind"] == "PrecisionError");
    CHECK(out.report["instance"]["N"] == 6);
  }
  SUBCASE("invalid theta module surfaces as a containment error") {
    auto doc = parse_doc(R"({
      "p": 3, "N": 8,
      "theta_module": {"layers": [
        {"index": 0, "theta": [["0"]]},
        {"index": 1, "inclusion": [["1"]], "theta": [["-1"]]}]}})");
    RunOptions opt;
    opt.commands = {"check-prop"};
    auto out = run_doc(doc, "x", opt);
    CHECK(out.exit_code == 1);
    CHECK(out.report["errors"]["check-prop"]["kind"] == "ContainmentError");
  }
  SUBCASE("valid theta module") {
    auto doc = parse_doc(kThetaDoc);
    RunOptions opt;
    opt.commands = {"check-prop", "split"};
    auto out = run_doc(doc, "x", opt);
    CHECK(out.exit_code == 0);
    CHECK(out.report["results"]["check-prop"]["verdict"] == "PASS");
    CHECK(out.report["results"]["split"]["summands"].size() == 2);
  }
  SUBCASE("no commands requested") {
    auto doc = parse_doc(R"({"p": 3, "bk": {"height": 1, "frob": [[["-3", "1"]]]}})");
    CHECK_THROWS_AS(run_doc(doc, "x", RunOptions{}), Error);
  }
  SUBCASE("unknown command override") {
    auto doc = parse_doc(kTateDoc);
    RunOptions opt;
    opt.commands = {"gr"};
    CHECK_THROWS_AS(run_doc(doc, "x", opt), Error);
  }
}

TEST_CASE("report emission") {
  auto doc = parse_doc(kTateDoc);
  auto out = run_doc(doc, fnv1a_hex(kTateDoc), RunOptions{});

  SUBCASE("canonical json is parse stable") {
    auto text = emit_report(out.report, "json");
    CHECK(text.back() == '\n');
    auto reparsed = json::parse(text);
    CHECK(emit_report(reparsed, "json") == text);
  }
  SUBCASE("text tables") {
    auto text = emit_report(out.report, "text");
    CHECK(text.find("verdict PASS") != std::string::npos);
    CHECK(text.find("| divisors | free_rank") != std::string::npos);
    CHECK(text.find("[check-theorem]") != std::string::npos);
  }
  SUBCASE("unknown format") {
    CHECK_THROWS_AS(emit_report(out.report, "yaml"), Error);
  }
}

TEST_CASE("command line binary end to end") {
  auto tate = write_doc("tate.json", kTateDoc);

  SUBCASE("pipeline run is deterministic and passes") {
    auto r1 = run_cli("nygaard graded ht check-theorem " + tate);
    CHECK(r1.exit_code == 0);
    auto rep = json::parse(r1.out);
    CHECK(rep["verdict"] == "PASS");
    CHECK(rep["results"]["ht"]["weights"] == json::array({json::array({1, 1})}));
    CHECK(rep["input_hash"] == fnv1a_hex(kTateDoc));

    auto r2 = run_cli("nygaard graded ht check-theorem " + tate);
    CHECK(r2.out == r1.out);

    auto inst = write_doc("tate_echo.json", rep["instance"].dump(2) + "\n");
    auto r3 = run_cli(inst);
    CHECK(r3.exit_code == 0);
    CHECK(json::parse(r3.out)["instance"] == rep["instance"]);
  }
  SUBCASE("schema violations exit 2 with no report") {
    auto bad = write_doc("bad.json", R"({"p": 2, "bk": {"frob": [[["1"]]]}})");
    auto r = run_cli("graded " + bad);
    CHECK(r.exit_code == 2);
    CHECK(r.out.empty());
  }
  SUBCASE("unreadable file exits 2") {
    auto r = run_cli("graded " + (scratch_dir() / "absent.json").string());
    CHECK(r.exit_code == 2);
  }
  SUBCASE("unknown command exits 2") {
    auto r = run_cli("gr " + tate);
    CHECK(r.exit_code == 2);
  }
  SUBCASE("unknown format exits 2") {
    auto r = run_cli("graded " + tate + " --format yaml");
    CHECK(r.exit_code == 2);
  }
  SUBCASE("verdict failures exit 1") {
    auto poll = write_doc("pollution.json", kPollutionDoc);
    auto r = run_cli("check-theorem " + poll);
    CHECK(r.exit_code == 1);
    CHECK(json::parse(r.out)["verdict"] == "FAIL");
  }
  SUBCASE("precision flag overrides the document") {
    auto r = run_cli("graded ht " + tate + " --precision 8,32");
    CHECK(r.exit_code == 0);
    auto rep = json::parse(r.out);
    CHECK(rep["instance"]["N"] == 8);
    CHECK(rep["instance"]["M"] == 32);
    CHECK(rep["results"]["ht"]["weights"] == json::array({json::array({1, 1})}));
  }
  SUBCASE("window flag") {
    auto r = run_cli("graded " + tate + " --imax 6");
    CHECK(r.exit_code == 0);
    CHECK(json::parse(r.out)["results"]["graded"]["i_max"] == 6);
  }
  SUBCASE("escalation flag") {
    auto r = run_cli("graded " + tate + " --escalate 14");
    CHECK(r.exit_code == 0);
    auto esc = json::parse(r.out)["results"]["escalation"];
    CHECK(esc["stable"] == true);
    CHECK(esc["n_high"] == 14);
  }
  SUBCASE("text format") {
    auto r = run_cli("graded " + tate + " --format text");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("verdict PASS") != std::string::npos);
    CHECK(r.out.find("divisors") != std::string::npos);
  }
  SUBCASE("selftest needs no document") {
    auto r = run_cli("selftest");
    CHECK(r.exit_code == 0);
    auto rep = json::parse(r.out);
    CHECK(rep["results"]["selftest"]["verdict"] == "PASS");
    CHECK(rep["results"]["selftest"]["checks"].size() >= 10);
  }
  SUBCASE("golden comparison") {
    auto base = run_cli("graded " + tate);
    REQUIRE(base.exit_code == 0);
    auto golden = write_doc("tate_golden.json", base.out);
    CHECK(run_cli("graded " + tate + " --golden " + golden).exit_code == 0);

    auto tampered = base.out;
    tampered.replace(tampered.find("\"PASS\""), 6, "\"FAIL\"");
    auto bad = write_doc("tate_tampered.json", tampered);
    CHECK(run_cli("graded " + tate + " --golden " + bad).exit_code == 1);
  }
}

TEST_CASE("corpus documents reproduce their golden reports") {
  auto corpus = std::filesystem::path(NKIT_SOURCE_DIR) / "corpus";
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(corpus)) {
    if (!entry.is_regular_file()) continue;
    auto doc = entry.path();
    auto golden = corpus / "golden" / doc.filename();
    REQUIRE(std::filesystem::exists(golden));
    CAPTURE(doc.filename().string());
    auto r = run_cli(doc.string() + " --golden " + golden.string());
    CHECK(r.exit_code == 0);
    ++seen;
  }
  CHECK(seen >= 6);
}
