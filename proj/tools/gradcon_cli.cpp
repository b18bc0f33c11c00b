#include "gradcon/archive.hpp"
#include "gradcon/contours.hpp"
#include "gradcon/runner.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace gradcon;

namespace {

Scenario load(const std::string& what) {
  if (is_preset(what) && !std::filesystem::exists(what)) return load_preset(what);
  return parse_scenario(what);
}

int report_error(const Error& e) {
  std::cerr << e.what() << "\n";
  return kExitInputError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double-obstacle solver for gradient-constrained elliptic problems"};
  app.require_subcommand(1);

  RunOptions ro;
  std::string scenario;
  auto* run = app.add_subcommand("run", "solve a scenario file or preset and run its checks");
  run->add_option("scenario", scenario, "scenario file or preset name")->required();
  run->add_option("-o,--out", ro.out_dir, "output directory (default out/<name>)");
  run->add_option("--tol-scale", ro.tol_scale, "multiply the check tolerances");
  run->add_option("--grid", ro.grid_h, "grid spacing h, overrides the scenario");
  run->add_option("--schedule", ro.schedule, "mollification radii in cells and final delta, e.g. 3,2/0.0625");
  run->add_flag("--dry-run", ro.dry_run, "validate and print the plan without solving");

  std::string archive_dir;
  auto* check = app.add_subcommand("check", "recompute the checks of an output directory");
  check->add_option("dir", archive_dir, "output directory of a previous run")->required()->check(CLI::ExistingDirectory);

  std::string field_path, contour_out;
  std::vector<double> levels;
  auto* cont = app.add_subcommand("contours", "extract level lines from a field CSV");
  cont->add_option("field", field_path, "field CSV")->required()->check(CLI::ExistingFile);
  cont->add_option("-l,--levels", levels, "levels")->required();
  cont->add_option("-o,--out", contour_out, "output CSV (default stdout)");

  std::string write_dir;
  auto* presets = app.add_subcommand("presets", "list bundled presets or write them as files");
  presets->add_option("--write", write_dir, "directory to write <name>.toml files into");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInputError;
  }

  try {
    if (*run) {
      Scenario sc;
      try {
        sc = load(scenario);
      } catch (const Error& e) {
        return report_error(e);
      }
      return run_scenario(sc, ro, std::cout).exit_code;
    }
    if (*check) return check_archive(archive_dir, ro, std::cout).exit_code;
    if (*cont) {
      FieldFile f;
      try {
        f = read_field_csv(field_path);
      } catch (const Error& e) {
        return report_error(e);
      }
      const ContourSet cs = contour_lines(f.grid, f.values, levels);
      for (const auto& w : cs.warnings) std::cerr << "warning: " << w << "\n";
      const std::string csv = contours_csv(cs);
      if (contour_out.empty())
        std::cout << csv;
      else
        write_text_file(contour_out, csv);
      return kExitPass;
    }
    if (*presets) {
      for (const auto& [name, text] : preset_texts()) {
        if (write_dir.empty()) {
          const Scenario sc = parse_scenario_text(text);
          std::cout << name << "  " << sc.description << "\n";
        } else {
          write_text_file((std::filesystem::path(write_dir) / (name + ".toml")).string(), text);
        }
      }
      return kExitPass;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.kind() == ErrorKind::invalid_input || e.kind() == ErrorKind::validation ? kExitInputError
                                                                                     : kExitSolverFail;
  }
  return kExitPass;
}
