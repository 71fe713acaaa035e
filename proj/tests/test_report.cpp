#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mcf/format.hpp"
#include "mcf/report.hpp"

using namespace mcf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("mcf_report_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("numbers are printed with twelve significant digits") {
  CHECK(num(1.0) == "1");
  CHECK(num(1.0 / 3.0) == "0.333333333333");
  CHECK(num(std::sqrt(2.0 * M_PI / std::exp(1.0))) == "1.52034690107");
  CHECK(num(-2.5e-17) == "-2.5e-17");
}

TEST_CASE("config files set keys and skip comments and blank lines") {
  std::istringstream in("# sample\n\ncommand = classify\nbuiltin=sphere  # trailing comment\n n = 3\nR = 9.5\nseed = 42\n");
  RunConfig c;
  parse_config(in, "cfg", c);
  CHECK(c.command == Command::classify);
  CHECK(c.builtin == "sphere");
  CHECK(c.n == 3);
  CHECK(c.R == 9.5);
  CHECK(c.seed == 42);
  CHECK(c.k == 1);
}

TEST_CASE("config errors point at the offending line and column") {
  struct Case {
    const char* text;
    int line;
    int column;
  };
  for (Case cs : {Case{"R = 1\nk = two\n", 2, 5}, Case{"R = 1\n\n  bogus = 3\n", 3, 3}, Case{"k 3\n", 1, 1},
                  Case{"k =\n", 1, 4}, Case{"builtin = torus\n", 1, 11}, Case{"R = 1.5x\n", 1, 8}}) {
    CAPTURE(cs.text);
    std::istringstream in(cs.text);
    RunConfig c;
    try {
      parse_config(in, "cfg", c);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == cs.line);
      CHECK(e.column() == cs.column);
    }
  }
}

TEST_CASE("validation rejects nonpositive or out-of-range parameters") {
  RunConfig c;
  CHECK_NOTHROW(validate_config(c));
  for (auto mutate : std::vector<void (*)(RunConfig&)>{
           [](RunConfig& r) { r.R = 0; }, [](RunConfig& r) { r.delta0 = -1; }, [](RunConfig& r) { r.k = 3; },
           [](RunConfig& r) { r.resolution = 8; }, [](RunConfig& r) { r.s_max = 0; },
           [](RunConfig& r) { r.threads = 0; }}) {
    RunConfig bad;
    mutate(bad);
    CHECK_THROWS_AS(validate_config(bad), Rejection);
  }
}

TEST_CASE("verify writes the identity table with the seed column") {
  RunConfig c;
  c.command = Command::verify;
  c.out = scratch("verify").string();
  c.seed = 9;
  std::ostringstream log;
  RunResult r = run(c, log);
  CHECK(r.status == 0);
  std::string csv = slurp(fs::path(c.out) / "verify.csv");
  CHECK(csv.rfind("check,norm,h,observed_order,pass,seed\n", 0) == 0);
  CHECK(csv.find("shrinker_residual,") != std::string::npos);
  CHECK(csv.find(",false,") == std::string::npos);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) CHECK(line.substr(line.rfind(',') + 1) == "9");
}

TEST_CASE("flow writes numbered snapshots and the trajectory table") {
  RunConfig c;
  c.command = Command::flow;
  c.builtin = "circle";
  c.amplitude = 0.01;
  c.wavenumber = 2;
  c.resolution = 64;
  c.s_max = 0.3;
  c.out = scratch("flow").string();
  std::ostringstream log;
  RunResult r = run(c, log);
  CHECK(r.status == 0);
  CHECK(fs::exists(fs::path(c.out) / "trajectory" / "snapshot_0000.txt"));
  CHECK(fs::exists(fs::path(c.out) / "trajectory" / "snapshot_0003.txt"));
  CHECK_FALSE(fs::exists(fs::path(c.out) / "trajectory" / "snapshot_0004.txt"));
  std::string csv = slurp(fs::path(c.out) / "flow.csv");
  CHECK(csv.rfind("s,F,minH,maxA,dV,seed\n", 0) == 0);
  CHECK(slurp(fs::path(c.out) / "flow.txt").find("seed: 1") != std::string::npos);
}

TEST_CASE("classify reports an inconclusive verdict as a failed check") {
  RunConfig c;
  c.command = Command::classify;
  c.delta0 = 0.9;
  c.out = scratch("classify").string();
  std::ostringstream log;
  RunResult r = run(c, log);
  CHECK(r.status == 1);
  CHECK(r.failing_check == "curvature-bounds");
  CHECK(slurp(fs::path(c.out) / "certificate.txt").find("verdict: inconclusive") != std::string::npos);
  CHECK(log.str().find("failing check: curvature-bounds") != std::string::npos);
}

TEST_CASE("an unreadable profile file is a parse error") {
  RunConfig c;
  c.command = Command::classify;
  c.input = "/nonexistent/surface.profile";
  c.out = scratch("missing").string();
  std::ostringstream log;
  CHECK(run(c, log).status == 2);
}

TEST_CASE("an output path that cannot be a directory gives status 3") {
  fs::path file = scratch("blocker");
  std::ofstream(file) << "x";
  RunConfig c;
  c.out = (file / "sub").string();
  std::ostringstream log;
  CHECK(run(c, log).status == 3);
  fs::remove(file);
}

TEST_CASE("identical runs produce identical artifacts") {
  for (Command cmd : {Command::entropy, Command::bounds, Command::gap}) {
    CAPTURE(command_name(cmd));
    RunConfig c;
    c.command = cmd;
    c.builtin = "circle";
    c.amplitude = 0.02;
    c.wavenumber = cmd == Command::gap ? 0 : 3;
    c.resolution = 64;
    c.s_max = 1.0;
    c.seed = 5;
    std::string a = scratch("det_a").string(), b = scratch("det_b").string();
    std::ostringstream log;
    c.out = a;
    RunResult ra = run(c, log);
    c.out = b;
    RunResult rb = run(c, log);
    CHECK(ra.status == rb.status);
    REQUIRE(ra.artifacts == rb.artifacts);
    CHECK_FALSE(ra.artifacts.empty());
    for (const std::string& name : ra.artifacts) CHECK(slurp(fs::path(a) / name) == slurp(fs::path(b) / name));
  }
}

TEST_CASE("entropy of a truncated discretized profile carries the tail error bar") {
  RunConfig c;
  c.command = Command::entropy;
  c.resolution = 128;
  c.amplitude = 0.01;
  c.wavenumber = 2;
  c.out = scratch("entropy_tail").string();
  std::ostringstream log;
  CHECK(run(c, log).status == 0);
  std::string text = slurp(fs::path(c.out) / "entropy.txt");
  CHECK(text.find("truncation_error_bar: ") != std::string::npos);

  c.builtin = "sphere";
  c.amplitude = 0.0;
  c.out = scratch("entropy_closed").string();
  CHECK(run(c, log).status == 0);
  CHECK(slurp(fs::path(c.out) / "entropy.txt").find("truncation_error_bar") == std::string::npos);
}
