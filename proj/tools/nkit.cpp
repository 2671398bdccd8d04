#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nkit/io.hpp"
#include "nkit/run.hpp"

namespace {

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "nygaard", "graded", "ht",   "check-theorem", "conj-theta", "split",
      "check-prop", "rees", "sen", "connection",    "selftest"};
  return names;
}

bool is_command(const std::string& s) {
  for (const auto& c : command_names())
    if (c == s) return true;
  return false;
}

int exit_class(nkit::ErrorKind k) {
  switch (k) {
    case nkit::ErrorKind::schema:
    case nkit::ErrorKind::usage:
      return 2;
    case nkit::ErrorKind::precision:
    case nkit::ErrorKind::uncertified_precision:
      return 3;
    default:
      return 1;
  }
}

int usage_error(const std::string& what) {
  std::cerr << "nkit: " << what << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-adic filtered module toolkit"};
  app.footer("commands: nygaard graded ht check-theorem connection conj-theta\n"
             "          check-prop split rees sen selftest\n"
             "usage: nkit <command...> <file> [flags]   (selftest needs no file)");

  std::vector<std::string> args;
  std::string precision;
  std::string format = "json";
  std::string golden;
  int imax = 0;
  std::uint64_t seed = 0;
  int escalate = 0;
  app.add_option("args", args, "commands followed by an instance document");
  auto* opt_precision =
      app.add_option("--precision", precision, "override the document precision as N,M");
  auto* opt_imax = app.add_option("--imax", imax, "override the filtration window");
  auto* opt_seed = app.add_option("--seed", seed, "override the document seed");
  app.add_option("--format", format, "report format: json or text");
  auto* opt_escalate =
      app.add_option("--escalate", escalate, "rerun the graded pipeline at a second precision N2");
  app.add_option("--golden", golden,
                 "compare the emitted report against a golden file (exit 0 iff identical)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    return usage_error(e.what());
  }

  std::vector<std::string> commands;
  std::string path;
  if (args.empty()) return usage_error("expected <command...> <file>");
  if (is_command(args.back())) {
    commands = args;
    if (!(commands.size() == 1 && commands[0] == "selftest"))
      return usage_error("missing instance file (only 'selftest' runs without one)");
  } else {
    path = args.back();
    commands.assign(args.begin(), args.end() - 1);
  }
  for (const auto& c : commands)
    if (!is_command(c)) return usage_error("unknown command '" + c + "'");

  std::string bytes;
  nkit::InstanceDoc doc;
  if (!path.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return usage_error("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    bytes = buf.str();
    try {
      doc = nkit::parse_doc(bytes);
    } catch (const nkit::Error& e) {
      std::istringstream lines(e.what());
      std::string line;
      while (std::getline(lines, line)) std::cerr << "schema error " << line << "\n";
      return 2;
    }
  }

  nkit::RunOptions opts;
  opts.commands = commands;
  if (*opt_precision) {
    int n = 0, m = 0;
    char comma = 0;
    std::istringstream ps(precision);
    if (!(ps >> n >> comma >> m) || comma != ',' || !ps.eof() || n < 1 || m < 1)
      return usage_error("--precision expects N,M with positive integers");
    opts.precision = std::make_pair(n, m);
  }
  if (*opt_imax) {
    if (imax < 1) return usage_error("--imax expects a positive integer");
    opts.i_max = imax;
  }
  if (*opt_seed) opts.seed = seed;
  if (*opt_escalate) {
    if (escalate < 1) return usage_error("--escalate expects a positive integer N2");
    opts.escalate = escalate;
  }

  nkit::RunOutcome outcome;
  std::string rendered;
  try {
    outcome = nkit::run_doc(doc, nkit::fnv1a_hex(bytes), opts);
    rendered = nkit::emit_report(outcome.report, format);
  } catch (const nkit::Error& e) {
    std::cerr << "nkit: " << nkit::error_kind_name(e.kind) << ": " << e.what() << "\n";
    return exit_class(e.kind);
  }
  std::cout << rendered;

  if (!golden.empty()) {
    std::ifstream gf(golden, std::ios::binary);
    if (!gf) return usage_error("cannot read golden file '" + golden + "'");
    std::ostringstream gbuf;
    gbuf << gf.rdbuf();
    if (gbuf.str() != rendered) {
      std::istringstream got(rendered), want(gbuf.str());
      std::string gl, wl;
      int line = 1;
      while (true) {
        bool g_ok = static_cast<bool>(std::getline(got, gl));
        bool w_ok = static_cast<bool>(std::getline(want, wl));
        if (!g_ok && !w_ok) break;
        if (gl != wl || g_ok != w_ok) {
          std::cerr << "golden mismatch at line " << line << "\n";
          std::cerr << "  expected: " << (w_ok ? wl : "<eof>") << "\n";
          std::cerr << "  got:      " << (g_ok ? gl : "<eof>") << "\n";
          break;
        }
        ++line;
        gl.clear();
        wl.clear();
      }
      return 1;
    }
    return 0;
  }
  return outcome.exit_code;
}
