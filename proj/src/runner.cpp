#include "gradcon/runner.hpp"

#include "gradcon/archive.hpp"
#include "gradcon/equivalence.hpp"
#include "gradcon/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

namespace gradcon {

namespace fs = std::filesystem;

namespace {

bool wants(const Scenario& sc, const std::string& check) {
  return std::find(sc.checks.begin(), sc.checks.end(), check) != sc.checks.end();
}

struct Setup {
  Scenario sc;
  Domain2D dom = Domain2D::disc(1);
  ConvexBody given = ConvexBody::ball(1);  // body as written in the scenario
  ConvexBody K = ConvexBody::ball(1);      // body of the obstacles
  BoundaryDatum phi;
  EllipticOperator op;
  double h = 0;
  Grid2D grid;
  PenaltyConfig cfg;
  std::optional<ObstacleField> up, lo;
  std::optional<ObstaclePair> obs;
};

// Finest smoothing level of a polygonal K° whose characteristics from the
// boundary stay apart for at least three cells; finer levels put the ridge
// closer to the boundary than the grid resolves.
int resolved_level(const Scenario& sc, const ConvexBody& Kpolar) {
  const Domain2D dom = sc.domain.build();
  const BoundaryDatum phi = sc.phi.build();
  const double h = sc.grid.resolve(dom);
  const auto samples = dom.sample(dom.recommended_samples(h));
  const auto& levels = sc.body.smoothing;
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    const ConvexBody Kk = Kpolar.smooth_approximation(*it);
    double depth = std::numeric_limits<double>::infinity();
    for (const auto& y : samples) {
      const BoundaryJet jt = boundary_jet(Kk, phi, y);
      if (jt.valid) depth = std::min(depth, jt.caustic_depth * jt.a.norm());
    }
    if (depth >= 3 * h) return *it;
  }
  return levels.front();
}

Setup prepare(const Scenario& sc) {
  Setup s;
  s.sc = sc;
  s.dom = sc.domain.build();
  s.given = sc.body.build();
  if (!sc.body.given_polar)
    s.K = s.given;
  else if (!sc.body.smoothing.empty())
    s.K = s.given.smooth_approximation(resolved_level(sc, s.given)).polar();
  else
    s.K = s.given.polar();
  s.phi = sc.phi.build();
  s.op = sc.op.build();
  s.h = sc.grid.resolve(s.dom);
  const double eps_max = *std::max_element(sc.solver.eps_cells.begin(), sc.solver.eps_cells.end());
  s.grid = make_grid(s.dom, s.h, static_cast<int>(std::ceil(eps_max)) + 3);
  for (double e : sc.solver.eps_cells) s.cfg.epsilons.push_back(e * s.h);
  s.cfg.delta0 = sc.solver.delta0;
  s.cfg.delta = sc.solver.delta;
  s.cfg.newton.residual_tol = sc.solver.newton_tol;
  s.cfg.newton.max_iters = sc.solver.max_iters;
  return s;
}

void build_obstacles(Setup& s) {
  if (s.sc.obstacles.kind == "gauge") {
    s.up = build_obstacle(s.dom, s.K, s.phi, s.grid, ObstacleSide::upper);
    s.lo = build_obstacle(s.dom, s.K, s.phi, s.grid, ObstacleSide::lower);
    s.obs = make_obstacle_pair(*s.up, *s.lo, s.dom, s.K.lipschitz());
    return;
  }
  // +-scale (R^2 - |x|^2) / (2R) on a disc of radius R
  const double R = s.sc.domain.radius, a = s.sc.obstacles.scale;
  double rmax = 0;
  for (int k = 0; k < s.grid.size(); ++k) rmax = std::max(rmax, s.grid.node(k).norm());
  auto plus = [=](const Vec2& x) { return a * (R * R - x.squaredNorm()) / (2 * R); };
  auto minus = [=](const Vec2& x) { return -a * (R * R - x.squaredNorm()) / (2 * R); };
  s.obs = make_obstacle_pair(s.grid, s.dom, plus, minus, a * rmax / R);
}

Report assumptions_report(const Setup& s) {
  Report r = verify_assumptions(s.op, 2000, s.sc.seed).report;
  r.title = "structural assumptions";
  return r;
}

Report datum_report(const Setup& s) {
  const int n = s.dom.recommended_samples(s.h);
  Report r = check_datum(s.dom, s.phi, s.K, n, 2000, s.sc.seed, false);
  const ConditionStarReport cs = check_condition_star(s.dom.sample(n), s.phi, s.K);
  for (const auto& l : cs.report.lines) r.lines.push_back(l);
  r.title = "boundary datum";
  return r;
}

bool is_plain_torsion(const Setup& s) {
  const auto& o = s.sc.op;
  return o.kind == "poisson" && o.f > 0 && s.sc.domain.kind == "disc" && s.sc.phi.kind == "zero" &&
         !s.sc.body.given_polar && s.sc.body.kind == "ball";
}

// Checks that only need the certified solution; pipeline is handled apart.
std::vector<std::pair<std::string, Report>> run_checks(const Setup& s, const DoubleObstacleResult& res,
                                                       double tol_scale) {
  std::vector<std::pair<std::string, Report>> out;
  std::optional<CoincidenceDecomposition> dec;
  if (s.up) dec = decompose(res, *s.up, *s.lo, tol_scale * coincidence_tolerance(*s.up, *s.lo));
  for (const auto& c : s.sc.checks) {
    if (c == "theorem2") out.emplace_back(c, check_theorem2(res, *dec, s.K));
    else if (c == "prop_3_5") out.emplace_back(c, check_prop_3_5(res, *dec, s.K, tol_scale * 0.5 * s.h));
    else if (c == "prop_3_3") out.emplace_back(c, check_prop_3_3(*dec, *s.up, *s.lo));
    else if (c == "lemma_3_2") out.emplace_back(c, check_lemma_3_2(res, *dec, *s.up, *s.lo));
    else if (c == "comparison") out.emplace_back(c, comparison_check(res, s.obs->minus, s.op, *s.obs));
    else if (c == "monotonicity") out.emplace_back(c, monotonicity_check(*s.up, 1000, s.sc.seed).report);
    else if (c == "free_boundary") {
      const RadiusFit fit = fit_free_boundary_radius(res, Vec2::Zero());
      Report r;
      r.title = "free boundary radius";
      if (is_plain_torsion(s)) {
        // |Du| = r f / 2 reaches 1 / radius(K) at r* = 2 / (f radius(K))
        const double rstar = 2.0 / (s.sc.op.f * s.sc.body.radius);
        const bool binding = rstar < s.sc.domain.radius;
        r.add("radius", !binding || std::abs(fit.mean - rstar) <= 2 * s.h, binding ? fit.mean : 0.0, 2 * s.h,
              binding ? "expected " + std::to_string(rstar) : "constraint never binds");
      } else {
        r.add("radius", fit.edges > 0, fit.mean, 0.0, "fitted mean radius about the origin");
      }
      r.add("spread", fit.edges == 0 || fit.stddev <= s.h, fit.stddev, s.h, std::to_string(fit.edges) + " edges");
      out.emplace_back(c, r);
    }
  }
  return out;
}

PipelineResult run_pipeline(const Setup& s) {
  PipelineOptions po;
  po.levels = s.sc.body.smoothing;
  po.h = s.h;
  po.solver = s.cfg;
  return run_approximation_pipeline(s.op, s.dom, s.phi, s.given, po);
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_report(std::ostream& log, const std::string& name, const Report& r) {
  log << "[" << (r.passed() ? "PASS" : "FAIL") << "] " << name << "\n";
  for (const auto& l : r.lines)
    if (!l.passed) log << "       " << l.name << ": measured " << l.measured << ", tol " << l.tolerance << "\n";
}

}  // namespace

void apply_overrides(Scenario& sc, const RunOptions& opt) {
  if (opt.grid_h > 0) {
    sc.grid.h = opt.grid_h;
    sc.grid.n = 0;
  }
  if (!opt.schedule.empty()) {
    const auto slash = opt.schedule.find('/');
    const std::string eps = opt.schedule.substr(0, slash);
    std::vector<double> cells;
    std::stringstream ss(eps);
    std::string tok;
    try {
      while (std::getline(ss, tok, ',')) cells.push_back(std::stod(tok));
      if (slash != std::string::npos) sc.solver.delta = std::stod(opt.schedule.substr(slash + 1));
    } catch (const std::exception&) {
      throw ScenarioError(ErrorKind::invalid_input, {{0, "cannot read schedule '" + opt.schedule + "'"}});
    }
    if (!cells.empty()) sc.solver.eps_cells = cells;
  }
  if (!(opt.tol_scale > 0)) throw ScenarioError(ErrorKind::invalid_input, {{0, "tol-scale must be positive"}});
  // re-validate the combined scenario
  const std::vector<std::string> warnings = sc.warnings;
  sc = parse_scenario_text(sc.to_text());
  sc.warnings = warnings;
}

RunOutcome run_scenario(Scenario sc, const RunOptions& opt, std::ostream& log) {
  RunOutcome out;
  try {
    apply_overrides(sc, opt);
  } catch (const Error& e) {
    out.exit_code = kExitInputError;
    out.message = e.what();
    log << e.what() << "\n";
    return out;
  }
  for (const auto& w : sc.warnings) log << "warning: " << w << "\n";
  Setup s = prepare(sc);
  log << "scenario " << sc.name << ": " << s.dom.describe() << ", h = " << s.h << ", grid " << s.grid.nx << "x"
      << s.grid.ny << ", operator " << s.op.describe() << "\n";
  if (sc.body.given_polar && !sc.body.smoothing.empty())
    log << "main solve uses smoothing level " << resolved_level(sc, s.given) << "\n";
  if (opt.dry_run) {
    log << sc.to_text();
    out.message = "dry run";
    return out;
  }

  const std::string dir = opt.out_dir.empty() ? (fs::path("out") / sc.name).string() : opt.out_dir;
  const Archive ar(dir);
  ar.echo(sc.to_text());
  ar.text("run.txt", "tol_scale=" + g17(opt.tol_scale) + "\nversion=" + version_string() + "\n");

  auto finish_report = [&](const std::string& name, const Report& r) {
    ar.report(name, r);
    print_report(log, name, r);
    out.reports.emplace_back(name, r);
    if (!r.passed() && out.exit_code == kExitPass) out.exit_code = kExitCheckFail;
  };

  finish_report("assumptions", assumptions_report(s));
  if (out.exit_code != kExitPass) {
    out.message = "operator fails the structural assumptions; solve skipped";
    log << out.message << "\n";
    return out;
  }
  if (sc.obstacles.kind == "gauge") {
    finish_report("datum", datum_report(s));
    if (out.exit_code != kExitPass) {
      out.message = "boundary datum is not admissible; solve skipped";
      log << out.message << "\n";
      return out;
    }
  }

  DoubleObstacleResult res;
  try {
    build_obstacles(s);
    res = solve_double_obstacle(s.op, *s.obs, s.dom, s.phi, s.cfg);
  } catch (const NonconvergenceError& e) {
    ar.field("u_last", s.grid, e.last_iterate());
    std::string hist;
    for (double v : e.history()) hist += g17(v) + "\n";
    ar.text("reports/nonconvergence.txt", std::string(e.what()) + "\nresidual history:\n" + hist);
    out.exit_code = kExitSolverFail;
    out.message = e.what();
    log << e.what() << "\n";
    return out;
  } catch (const Error& e) {
    out.exit_code = kExitSolverFail;
    out.message = e.what();
    ar.text("reports/solver_error.txt", std::string(e.what()) + "\n");
    log << e.what() << "\n";
    return out;
  }
  ar.log(res.log);
  finish_report("solve", res.report);

  // Every check below runs on the certified solution, exactly as `check` does.
  DoubleObstacleResult cert = certify_solution(s.op, *s.obs, s.dom, s.phi, res.u);
  cert.tol_c *= opt.tol_scale;
  finish_report("certificate", cert.report);

  ar.field("u", s.grid, res.u);
  ar.field("psi_plus", s.grid, s.obs->plus);
  ar.field("psi_minus", s.grid, s.obs->minus);
  ar.field("F_h", s.grid, res.Fh);
  ar.mask("classes", s.grid, res.cls);
  ar.mask("extended", s.grid, res.extended);
  if (s.up) {
    const GradientConstraintReport gc = gradient_constraint(cert, s.K.polar(), cert.tol_c);
    ar.field("H", s.grid, gc.H);
    ar.mask("ridge", s.grid, s.up->ridge);
    const CoincidenceDecomposition dec =
        decompose(cert, *s.up, *s.lo, opt.tol_scale * coincidence_tolerance(*s.up, *s.lo));
    ar.mask("E", s.grid, dec.E);
    ar.mask("P_plus", s.grid, dec.P_plus);
    ar.mask("P_minus", s.grid, dec.P_minus);
  }

  for (const auto& [name, r] : run_checks(s, cert, opt.tol_scale)) finish_report(name, r);
  if (wants(sc, "pipeline")) {
    try {
      finish_report("pipeline", run_pipeline(s).report);
    } catch (const Error& e) {
      out.exit_code = kExitSolverFail;
      out.message = e.what();
      log << e.what() << "\n";
      return out;
    }
  }
  out.message = out.exit_code == kExitPass ? "all checks passed" : "some checks failed";
  log << out.message << " (" << dir << ")\n";
  return out;
}

RunOutcome check_archive(const std::string& dir, const RunOptions& opt, std::ostream& log) {
  RunOutcome out;
  Scenario sc;
  double tol_scale = opt.tol_scale;
  try {
    sc = parse_scenario_text(read_text_file((fs::path(dir) / "scenario.echo").string()));
    const std::string run = read_text_file((fs::path(dir) / "run.txt").string());
    const auto p = run.find("tol_scale=");
    if (p != std::string::npos) tol_scale = std::stod(run.substr(p + 10));
  } catch (const Error& e) {
    out.exit_code = kExitInputError;
    out.message = e.what();
    log << e.what() << "\n";
    return out;
  }
  Setup s = prepare(sc);
  FieldFile u;
  try {
    u = read_field_csv((fs::path(dir) / "fields" / "u.csv").string());
    require(u.grid.same(s.grid), ErrorKind::invalid_input, "stored grid does not match the scenario");
  } catch (const Error& e) {
    out.exit_code = kExitInputError;
    out.message = e.what();
    log << e.what() << "\n";
    return out;
  }
  build_obstacles(s);
  DoubleObstacleResult cert = certify_solution(s.op, *s.obs, s.dom, s.phi, u.values);
  cert.tol_c *= tol_scale;

  std::vector<std::pair<std::string, Report>> reports;
  reports.emplace_back("certificate", cert.report);
  for (auto& r : run_checks(s, cert, tol_scale)) reports.push_back(std::move(r));

  int mismatches = 0;
  for (const auto& [name, r] : reports) {
    print_report(log, name, r);
    const fs::path stored = fs::path(dir) / "reports" / (name + ".txt");
    std::string old;
    if (fs::exists(stored)) old = read_text_file(stored.string());
    if (old != r.to_text()) {
      ++mismatches;
      log << "       report differs from " << stored.string() << "\n";
    }
    if (!r.passed() && out.exit_code == kExitPass) out.exit_code = kExitCheckFail;
    out.reports.emplace_back(name, r);
  }
  if (mismatches && out.exit_code == kExitPass) out.exit_code = kExitCheckFail;
  out.message = std::to_string(reports.size()) + " reports recomputed, " + std::to_string(mismatches) + " differ";
  log << out.message << "\n";
  return out;
}

}  // namespace gradcon
