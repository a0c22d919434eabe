#include "pfto/config.hpp"
#include "pfto/driver.hpp"

#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pfto;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = PFTO_SOURCE_DIR "/configs/";

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  std::string l;
  while (std::getline(in, l)) ++n;
  return n;
}

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("pfto_test_" + name);
  fs::remove_all(d);
  return d;
}

const char* kTiny = R"([domain]
xmin = -1
xmax = 1
ymin = 0
ymax = 1
h = 0.25
dirichlet = x == -1
neumann = x >= 0.75 & y == 0
[materials]
lambda1 = 5000
mu1 = 5000
lambda2 = 10
mu2 = 10
[loads]
traction = 0, -250
[objective]
gamma = 0.5
eps = 0.3
[optimizer]
k_max = 0
output_every = 1
)";

}  // namespace

TEST_CASE("shipped cantilever config") {
  RunConfig c = parse_config(read_file(kConfigs + "cantilever.cfg"));
  CHECK(c.xmin == -1);
  CHECK(c.xmax == 1);
  CHECK(c.ymin == 0);
  CHECK(c.ymax == 1);
  CHECK(c.lambda1 == 5000);
  CHECK(c.mu1 == 5000);
  CHECK(c.lambda2 == 10);
  CHECK(c.mu2 == 10);
  CHECK(c.traction == Vec2{0, -250});
  CHECK(c.gamma == 0.5);
  CHECK(c.beta == 0.0);
  REQUIRE(c.eps);
  CHECK(*c.eps == 0.06);
  CHECK(c.dirichlet(Vec2{-1, 0.3}));
  CHECK_FALSE(c.dirichlet(Vec2{1, 0.3}));
  CHECK(c.neumann(Vec2{0.8, 0}));
  CHECK_FALSE(c.neumann(Vec2{0.7, 0}));
  CHECK_FALSE(c.neumann(Vec2{0.8, 1}));
  CHECK(c.interpolation == Interpolation::Mirrored);
  CHECK(parse_config(read_file(kConfigs + "eigenstrain_diagonal.cfg")).interpolation == Interpolation::Printed);
  for (const char* f : {"cantilever_sweep.cfg", "eigenstrain_isotropic.cfg", "eigenstrain_diagonal.cfg"})
    CHECK_NOTHROW(parse_config(read_file(kConfigs + f)));
}

TEST_CASE("config errors carry locations") {
  try {
    parse_config("");
    FAIL("empty config accepted");
  } catch (const ConfigError& e) {
    std::string w = e.what();
    for (const char* k : {"xmin", "h", "dirichlet", "lambda2", "mu1", "gamma", "eps"}) CHECK(w.find(k) != std::string::npos);
  }
  std::string bad = std::string(kTiny) + "[sweep]\neps = 0.06, 0.06\n";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  try {
    parse_config(std::string(kTiny) + "bogus = 1\n");
    FAIL("unknown key accepted");
  } catch (const ConfigError& e) {
    CHECK(e.section() == "optimizer");
    CHECK(e.key() == "bogus");
    CHECK(e.line() == 22);
  }
  std::string neg = kTiny;
  neg.replace(neg.find("gamma = 0.5"), 11, "gamma = -1");
  CHECK_THROWS_AS(parse_config(neg), ConfigError);
  std::string word = kTiny;
  word.replace(word.find("h = 0.25"), 8, "h = abc");
  try {
    parse_config(word);
    FAIL("non-number accepted");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "h");
    CHECK(e.line() == 6);
  }
}

TEST_CASE("box predicates") {
  BoxPredicate p = BoxPredicate::parse("x >= 0.75 & y == 0");
  CHECK(p(Vec2{0.75, 0}));
  CHECK(p(Vec2{1, 1e-12}));
  CHECK_FALSE(p(Vec2{0.74, 0}));
  CHECK(BoxPredicate::parse("all")(Vec2{3, 4}));
  CHECK_FALSE(BoxPredicate::parse("none")(Vec2{3, 4}));
  CHECK(BoxPredicate::parse("none").empty());
  CHECK_THROWS_AS(BoxPredicate::parse("z > 1"), InvalidInput);
  CHECK_THROWS_AS(BoxPredicate::parse("x >> 1"), InvalidInput);
}

TEST_CASE("echo round trip") {
  for (const char* f : {"cantilever.cfg", "cantilever_sweep.cfg", "eigenstrain_isotropic.cfg", "eigenstrain_diagonal.cfg"}) {
    CAPTURE(f);
    RunConfig a = parse_config(read_file(kConfigs + f));
    std::string e1 = echo_config(a);
    RunConfig b = parse_config(e1);
    CHECK(echo_config(b) == e1);
    CHECK(b.lambda1 == a.lambda1);
    CHECK(b.eps_list == a.eps_list);
    CHECK(b.vmpg.k_max == a.vmpg.k_max);
    CHECK(b.interpolation == a.interpolation);
  }
}

TEST_CASE("command line verbs") {
  std::ostringstream log;
  fs::path dir = fresh_dir("cfg");
  fs::create_directories(dir);
  std::ofstream(dir / "tiny.cfg") << kTiny;

  SUBCASE("validate") {
    CHECK(validate_command({kConfigs + "cantilever.cfg", {}, 1}, log) == kExitOk);
    CHECK(validate_command({(dir / "missing.cfg").string(), {}, 1}, log) == kExitConfig);
  }
  SUBCASE("run with k_max = 0 writes only the initial fields") {
    fs::path out = fresh_dir("run0");
    CHECK(run_command({(dir / "tiny.cfg").string(), out, 1}, log) == kExitOk);
    CHECK(fs::exists(out / "phi_0000.vtk"));
    CHECK(fs::exists(out / "u_0000.vtk"));
    CHECK_FALSE(fs::exists(out / "phi_0001.vtk"));
    CHECK(slurp(out / "iterations.csv") == "k,j_eps,criterion,alpha,lambda,pdas_iters,zeta\n");
    CHECK(fs::exists(out / "config.echo.cfg"));
    CHECK_NOTHROW(parse_config(slurp(out / "config.echo.cfg")));
    CHECK_FALSE(fs::exists(out / ".pfto.lock"));
    auto s = nlohmann::json::parse(slurp(out / "summary.json"));
    CHECK(s["status"] == "ok");
  }
  SUBCASE("run writes snapshots and a parseable log") {
    std::string cfg = kTiny;
    cfg.replace(cfg.find("k_max = 0"), 9, "k_max = 3");
    std::ofstream(dir / "three.cfg") << cfg;
    fs::path out = fresh_dir("run3");
    CHECK(run_command({(dir / "three.cfg").string(), out, 1}, log) == kExitOk);
    CHECK(count_lines(out / "iterations.csv") == 4);
    CHECK(fs::exists(out / "phi_0003.vtk"));
    CHECK(fs::exists(out / "phi_final.vtk"));
    CHECK(fs::exists(out / "u_final.vtk"));
  }
  SUBCASE("sweep writes one row per eps") {
    std::string cfg = kTiny;
    cfg.replace(cfg.find("k_max = 0"), 9, "k_max = 50");
    cfg += "[sweep]\neps = 0.4, 0.35, 0.3\n";
    std::ofstream(dir / "sweep.cfg") << cfg;
    fs::path out = fresh_dir("sweep");
    CHECK(sweep_command({(dir / "sweep.cfg").string(), out, 1}, log) == kExitOk);
    CHECK(count_lines(out / "sweep.csv") == 4);
    CHECK(slurp(out / "sweep.csv").rfind("eps,j_eps,E_eps,lambda,l1_error,iters\n", 0) == 0);
    for (const char* f : {"l1_error.dat", "cost.dat", "lambda.dat", "iterations_2.csv", "phi_eps2.vtk"})
      CHECK(fs::exists(out / f));
  }
  SUBCASE("locked directory and error record") {
    fs::path out = fresh_dir("locked");
    fs::create_directories(out);
    std::ofstream(out / ".pfto.lock") << "";
    CHECK(run_command({(dir / "tiny.cfg").string(), out, 1}, log) == kExitOutput);
    auto e = nlohmann::json::parse(slurp(out / "error.json"));
    CHECK(e["kind"] == "output_error");

    std::ofstream(dir / "bad.cfg") << std::string(kTiny) + "bogus = 1\n";
    fs::path out2 = fresh_dir("bad");
    CHECK(run_command({(dir / "bad.cfg").string(), out2, 1}, log) == kExitConfig);
    auto e2 = nlohmann::json::parse(slurp(out2 / "error.json"));
    CHECK(e2["kind"] == "config_error");
    CHECK(e2["line"] == 22);
    CHECK(e2["key"] == "bogus");
  }
  SUBCASE("thread count must be positive") {
    CHECK(validate_command({(dir / "tiny.cfg").string(), {}, 0}, log) == kExitConfig);
  }
}
