#include "gradcon/archive.hpp"
#include "gradcon/contours.hpp"
#include "gradcon/runner.hpp"
#include "gradcon/scenario.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace gradcon;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(name = "t"
[domain]
kind = "disc"
radius = 1.0
[body]
kind = "ball"
[operator]
kind = "poisson"
f = 1.0
[grid]
h = 0.03125
)";

std::vector<ParseIssue> issues_of(const std::string& text) {
  try {
    parse_scenario_text(text);
  } catch (const ScenarioError& e) {
    return e.issues();
  }
  return {};
}

bool mentions(const std::vector<ParseIssue>& v, const std::string& what, int line = -1) {
  for (const auto& i : v)
    if (i.message.find(what) != std::string::npos && (line < 0 || i.line == line)) return true;
  return false;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gradcon_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("presets parse and their canonical text is a fixed point") {
  for (const auto& [name, text] : preset_texts()) {
    const Scenario sc = parse_scenario_text(text);
    CHECK(sc.name == name);
    const std::string canon = sc.to_text();
    CHECK(parse_scenario_text(canon).to_text() == canon);
  }
}

TEST_CASE("preset files on disk match the bundled presets") {
  for (const auto& [name, text] : preset_texts()) {
    const fs::path p = fs::path(GRADCON_SOURCE_DIR) / "presets" / (name + ".toml");
    REQUIRE(fs::exists(p));
    CHECK(read_text_file(p.string()) == text);
  }
}

TEST_CASE("scenario errors carry line numbers") {
  CHECK(mentions(issues_of(std::string(kMinimal) + "bogus = 1\n"), "unknown key 'bogus'", 12));
  CHECK(mentions(issues_of("[domain]\nkind = \"disc\"\n"), "missing key 'name'"));
  CHECK(mentions(issues_of(std::string(kMinimal) + "[extra]\n"), "unknown table"));
  CHECK(mentions(issues_of("name = \"x\nkind = 1\n"), "unterminated string", 1));
  const std::string coarse = std::string(kMinimal).replace(std::string(kMinimal).find("0.03125"), 7, "0.25");
  CHECK(mentions(issues_of(coarse), "grid too coarse", 11));
  std::string poly = kMinimal;
  poly.replace(poly.find("kind = \"ball\""), 13, "kind = \"polygon\"\nvertices = [[1, 0], [0.1, 0.1], [0, 1], [-1, 0], [0, -1]]");
  CHECK(mentions(issues_of(poly), "non-convex polygon", 7));
  std::string outside = kMinimal;
  outside.replace(outside.find("kind = \"ball\""), 13, "kind = \"polygon\"\nvertices = [[1, 1], [2, 1], [1, 2]]");
  CHECK(mentions(issues_of(outside), "origin not interior"));
  try {
    parse_scenario_text(std::string(kMinimal) + "bogus = 1\n");
  } catch (const ScenarioError& e) {
    CHECK(e.kind() == ErrorKind::validation);
  }
}

TEST_CASE("clockwise polygons are reversed with a warning") {
  std::string cw = kMinimal;
  cw.replace(cw.find("kind = \"ball\""), 13,
             "kind = \"polygon\"\nvertices = [\n  [1, 0],\n  [0, -1],\n  [-1, 0],\n  [0, 1],\n]");
  const Scenario sc = parse_scenario_text(cw);
  REQUIRE(sc.warnings.size() == 1);
  CHECK(sc.warnings[0].find("reversed") != std::string::npos);
  CHECK(sc.body.vertices[0].y() == doctest::Approx(1.0));  // reversed order starts at (0, 1)
}

TEST_CASE("field CSV round trip is exact") {
  Grid2D g;
  g.nx = 5;
  g.ny = 4;
  g.x0 = -0.5;
  g.y0 = -0.25;
  g.h = 0.1;
  std::vector<double> v(g.size());
  for (int k = 0; k < g.size(); ++k) v[k] = std::sin(k * 0.7) / 3;
  v[3] = std::nan("");
  const std::string text = field_csv(g, v);
  CHECK(text.rfind("# grid nx=5 ny=4", 0) == 0);
  const FieldFile f = parse_field_csv(text);
  CHECK(f.grid.same(g));
  for (int k = 0; k < g.size(); ++k) {
    if (k == 3) CHECK(std::isnan(f.values[k]));
    else CHECK(f.values[k] == v[k]);
  }
  CHECK_THROWS_AS(parse_field_csv("i,j,x,y,value\n"), Error);
}

TEST_CASE("contours of a cone are circles") {
  const Grid2D g = make_grid(Domain2D::disc(1), 1.0 / 32, 2);
  std::vector<double> v(g.size());
  for (int k = 0; k < g.size(); ++k) v[k] = g.node(k).norm();
  const ContourSet cs = contour_lines(g, v, {0.5, 100.0});
  REQUIRE(cs.lines.size() == 1);
  CHECK(cs.lines[0].closed);
  for (const Vec2& p : cs.lines[0].points) CHECK(std::abs(p.norm() - 0.5) < 1e-3);
  REQUIRE(cs.warnings.size() == 1);  // 100 is out of range
  CHECK(contours_csv(cs).rfind("level,polyline,vertex,x,y\n", 0) == 0);
}

TEST_CASE("run, archive and check a small preset") {
  const fs::path dir = scratch("run");
  RunOptions ro;
  ro.out_dir = dir.string();
  std::ostringstream log;
  const RunOutcome out = run_scenario(load_preset("torsion-disc-R1"), ro, log);
  CHECK(out.exit_code == kExitPass);
  for (const char* f : {"scenario.echo", "log.csv", "fields/u.csv", "masks/classes.csv", "reports/theorem2.txt"})
    CHECK(fs::exists(dir / f));

  std::ostringstream clog;
  CHECK(check_archive(dir.string(), ro, clog).exit_code == kExitPass);
  CHECK(clog.str().find("0 differ") != std::string::npos);

  // a second run writes identical files
  const fs::path dir2 = scratch("run2");
  ro.out_dir = dir2.string();
  run_scenario(load_preset("torsion-disc-R1"), ro, log);
  CHECK(read_text_file((dir / "fields/u.csv").string()) == read_text_file((dir2 / "fields/u.csv").string()));

  // tampering with u changes the recomputed reports
  FieldFile u = read_field_csv((dir / "fields/u.csv").string());
  for (double& x : u.values)
    if (std::isfinite(x)) x += 0.05 * std::sin(37 * x);
  write_text_file((dir / "fields/u.csv").string(), field_csv(u.grid, u.values));
  std::ostringstream tlog;
  CHECK(check_archive(dir.string(), ro, tlog).exit_code == kExitCheckFail);
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("runner exit codes") {
  std::ostringstream log;
  RunOptions ro;
  ro.out_dir = scratch("codes").string();
  CHECK(run_scenario(load_preset("broken-operator"), ro, log).exit_code == kExitCheckFail);
  ro.schedule = "a,b/c";
  CHECK(run_scenario(load_preset("torsion-disc-R1"), ro, log).exit_code == kExitInputError);
  ro.schedule = "3,2/0.125";
  ro.dry_run = true;
  CHECK(run_scenario(load_preset("torsion-disc-R1"), ro, log).exit_code == kExitPass);
  ro.schedule = "1,2";  // below 1.5 cells and increasing
  CHECK(run_scenario(load_preset("torsion-disc-R1"), ro, log).exit_code == kExitInputError);
  fs::remove_all(ro.out_dir);
}
