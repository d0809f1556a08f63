#include <doctest.h>

#include <cstdlib>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "phasetop/cli.hpp"
#include "phasetop/config.hpp"
#include "phasetop/output.hpp"

using namespace phasetop;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("phasetop_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void writeText(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

int runCli(std::vector<std::string> args, std::string* out_text = nullptr,
           std::string* err_text = nullptr) {
  args.insert(args.begin(), "phasetop");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cliMain(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST_CASE("config: minimal file fills defaults") {
  const RunConfig c = parseConfig("[solver]\ngamma = 100\n");
  CHECK(c.gamma == 100.0);
  CHECK(c.nx == 32);
  CHECK(c.optimizer.delta == 0.05);
  CHECK(c.laws.mu1 == 1.0);
  CHECK(parseConfig("").gamma == 10.0);
}

TEST_CASE("config: validation errors name the key and line") {
  try {
    parseConfig("[optimizer]\n\ndelta = -0.1\n");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(e.key == "delta");
    CHECK(e.line == 3);
    CHECK(std::string(e.what()).find("delta") != std::string::npos);
  }
  try {
    parseConfig("[solver]\ngamm = 10\n");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(e.key == "gamm");
    CHECK(std::string(e.what()).find("did you mean 'gamma'") != std::string::npos);
  }
  CHECK_THROWS_WITH(parseConfig("[material]\nmu0 = 0\n"), doctest::Contains("mu0"));
  CHECK_THROWS_WITH(parseConfig("[solver]\ndelta = 0.1\n"), doctest::Contains("[optimizer]"));
  CHECK_THROWS_WITH(parseConfig("gamma = 1\n"), doctest::Contains("outside a section"));
  CHECK_THROWS_WITH(parseConfig("[meshes]\n"), doctest::Contains("unknown section"));
  CHECK_THROWS_WITH(parseConfig("[solver]\ngamma = abc\n"), doctest::Contains("number"));
  CHECK_THROWS_WITH(parseConfig("[solver]\ngamma = 1\ngamma = 2\n"), doctest::Contains("duplicate"));
  CHECK_THROWS_WITH(parseConfig("[optimizer]\ngamma_schedule = 100, 10\n"),
                    doctest::Contains("gamma_schedule"));
  CHECK_THROWS_WITH(parseConfig("[mesh]\nnx = 0\n"), doctest::Contains("nx"));
}

TEST_CASE("config: effective echo parses back to the same config") {
  RunConfig c = parseConfig(
      "# comment\n[mesh]\nnx = 12\nsplit = crossed\n[loads]\ngy = -0.25 # trailing\n"
      "[optimizer]\ngamma_schedule = 10, 1000\nvolume_penalty = 0.3\n");
  const std::string echo = formatConfig(c);
  const RunConfig back = parseConfig(echo);
  CHECK(formatConfig(back) == echo);
  CHECK(back.nx == 12);
  CHECK(back.split == Split::Crossed);
  CHECK(back.traction.y() == -0.25);
  CHECK(back.optimizer.gamma_schedule == std::vector<double>{10.0, 1000.0});
}

TEST_CASE("config: referenced mesh file must exist") {
  const fs::path dir = scratch("meshref");
  writeText(dir / "run.ini", "[mesh]\nfile = missing.mesh\n");
  CHECK_THROWS_WITH(loadConfig((dir / "run.ini").string()), doctest::Contains("does not exist"));
}

TEST_CASE("history csv round trip at full precision") {
  std::vector<HistoryEntry> h = {{0, 10.0, 1.0 / 3.0, 2.0 / 7.0, 5, 0.0},
                                 {1, 10.0, 0.1 + 0.2, 1e-300, 3, 0.05 * 1.2}};
  const auto back = parseHistoryCsv(formatHistoryCsv(h));
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < h.size(); ++i) {
    CHECK(back[i].iteration == h[i].iteration);
    CHECK(back[i].objective == h[i].objective);
    CHECK(back[i].grad_norm == h[i].grad_norm);
    CHECK(back[i].newton_iterations == h[i].newton_iterations);
    CHECK(back[i].tau == h[i].tau);
  }
  const std::string empty = formatHistoryCsv({});
  CHECK(std::count(empty.begin(), empty.end(), '\n') == 1);
  CHECK(parseHistoryCsv(empty).empty());
}

TEST_CASE("vtk output structure") {
  RectTagSpec tags;
  const Mesh m = generateRectMesh(2, 1, 1.0, 1.0, tags);
  VtkFields f;
  f.z = Vector::Constant(m.numNodes(), 0.25);
  f.u = Vector::Zero(2 * m.numNodes());
  f.p.assign(m.numTriangles(), DevTensor2{0.5, -0.25});
  const std::string text = formatVtk(m, f);
  CHECK(text.rfind("# vtk DataFile Version 3.0\n", 0) == 0);
  CHECK(text.find("CELLS 4 16") != std::string::npos);
  CHECK(text.find("CELL_TYPES 4\n5\n5\n5\n5\n") != std::string::npos);
  CHECK(text.find("0.5 -0.5 -0.25") != std::string::npos);
  f.p.pop_back();
  CHECK_THROWS(formatVtk(m, f));
}

TEST_CASE("cli: usage and validation exit codes") {
  std::string out, err;
  CHECK(runCli({"forward"}, &out, &err) == kExitValidation);
  CHECK(err.find("--config") != std::string::npos);
  CHECK(runCli({"forward", "--config", "/nonexistent/x.ini", "--out", "/tmp/x"}, &out, &err) ==
        kExitValidation);
  CHECK(err.find("Usage") != std::string::npos);
  CHECK(runCli({}, &out, &err) == kExitValidation);

  const fs::path dir = scratch("cli_bad");
  writeText(dir / "bad.ini", "[optimizer]\ndelta = -0.1\n");
  CHECK(runCli({"optimize", "--config", (dir / "bad.ini").string(), "--out", (dir / "o").string()},
               &out, &err) == kExitValidation);
  CHECK(err.find("delta") != std::string::npos);
}

TEST_CASE("cli: solver failure exit code") {
  const fs::path dir = scratch("cli_fail");
  writeText(dir / "run.ini",
            "[mesh]\nnx = 4\nny = 4\n[loads]\ngy = -3\n[solver]\ngamma = 10000\nnewton_max_iterations = 1\n");
  std::string out, err;
  CHECK(runCli({"forward", "--config", (dir / "run.ini").string(), "--out", (dir / "o").string()},
               &out, &err) == kExitSolver);
  CHECK(err.find("solver failure") != std::string::npos);
}

TEST_CASE("cli: material-verify and mm-profile") {
  const fs::path dir = scratch("cli_checks");
  writeText(dir / "run.ini", "[solver]\nsamples = 3000\n");
  std::string out;
  CHECK(runCli({"material-verify", "--config", (dir / "run.ini").string(), "--out",
                (dir / "mv").string()},
               &out) == kExitOk);
  CHECK(out.find("pass  6003/6003  h1") != std::string::npos);
  CHECK(out.find("FAIL") == std::string::npos);
  CHECK(fs::exists(dir / "mv" / "material_verify.json"));
  CHECK(fs::exists(dir / "mv" / "effective_config.ini"));
  CHECK(runCli({"mm-profile", "--config", (dir / "run.ini").string(), "--out",
                (dir / "mm").string()},
               &out) == kExitOk);
  CHECK(out.find("interfacial energy 0.1666") != std::string::npos);
}

TEST_CASE("cli: single-threaded runs are byte-identical, threads do not matter") {
  const fs::path dir = scratch("cli_det");
  writeText(dir / "run.ini",
            "[mesh]\nnx = 8\nny = 4\n[optimizer]\ngamma_schedule = 10, 100\n");
  const std::string cfg = (dir / "run.ini").string();
  REQUIRE(runCli({"gamma-sweep", "--config", cfg, "--out", (dir / "a").string()}) == kExitOk);
  REQUIRE(runCli({"gamma-sweep", "--config", cfg, "--out", (dir / "b").string()}) == kExitOk);
  setenv("THREADS", "3", 1);
  const int threaded = runCli({"gamma-sweep", "--config", cfg, "--out", (dir / "c").string()});
  unsetenv("THREADS");
  REQUIRE(threaded == kExitOk);
  for (const char* f : {"history.csv", "gamma_report.csv", "design.vtk"}) {
    INFO(f);
    const std::string a = readTextFile((dir / "a" / f).string());
    CHECK(a == readTextFile((dir / "b" / f).string()));
    CHECK(a == readTextFile((dir / "c" / f).string()));
  }
}

TEST_CASE("cli: THREADS must be a positive integer") {
  const fs::path dir = scratch("cli_threads");
  writeText(dir / "run.ini", "[mesh]\nnx = 4\nny = 4\n");
  setenv("THREADS", "zero", 1);
  std::string out, err;
  const int code = runCli({"forward", "--config", (dir / "run.ini").string(), "--out",
                           (dir / "o").string()},
                          &out, &err);
  unsetenv("THREADS");
  CHECK(code == kExitValidation);
  CHECK(err.find("THREADS") != std::string::npos);
}
