#include "gradcon/archive.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifndef GRADCON_VERSION
#define GRADCON_VERSION "unknown"
#endif

namespace gradcon {

namespace fs = std::filesystem;

namespace {

std::string g17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string grid_line(const Grid2D& g) {
  return "# grid nx=" + std::to_string(g.nx) + " ny=" + std::to_string(g.ny) + " x0=" + g17(g.x0) +
         " y0=" + g17(g.y0) + " h=" + g17(g.h) + " version=" + version_string() + "\n";
}

template <class F>
std::string node_table(const Grid2D& g, F value) {
  std::string out = grid_line(g) + "i,j,x,y,value\n";
  out.reserve(out.size() + static_cast<std::size_t>(g.size()) * 48);
  for (int k = 0; k < g.size(); ++k) {
    const Vec2 x = g.node(k);
    out += std::to_string(g.ix(k)) + "," + std::to_string(g.jy(k)) + "," + g17(x.x()) + "," + g17(x.y()) + "," +
           value(k) + "\n";
  }
  return out;
}

}  // namespace

const char* version_string() { return GRADCON_VERSION; }

std::string field_csv(const Grid2D& g, const std::vector<double>& values) {
  require(static_cast<int>(values.size()) == g.size(), ErrorKind::invalid_argument, "field_csv: size mismatch");
  return node_table(g, [&](int k) { return g17(values[k]); });
}

std::string mask_csv(const Grid2D& g, const std::vector<std::uint8_t>& mask) {
  require(static_cast<int>(mask.size()) == g.size(), ErrorKind::invalid_argument, "mask_csv: size mismatch");
  return node_table(g, [&](int k) { return std::to_string(static_cast<int>(mask[k])); });
}

std::string log_csv(const std::vector<LogRow>& log) {
  std::string out = "stage,iter,residual,violation_plus,violation_minus\n";
  for (const auto& r : log)
    out += r.stage + "," + std::to_string(r.iter) + "," + g17(r.residual) + "," + g17(r.violation_plus) + "," +
           g17(r.violation_minus) + "\n";
  return out;
}

FieldFile parse_field_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  FieldFile f;
  require(std::getline(is, line) && line.rfind("# grid", 0) == 0, ErrorKind::invalid_input,
          "field CSV: missing '# grid' line");
  {
    std::istringstream ls(line.substr(6));
    std::string tok;
    bool have[5] = {};
    while (ls >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
      if (k == "nx") f.grid.nx = std::stoi(v), have[0] = true;
      else if (k == "ny") f.grid.ny = std::stoi(v), have[1] = true;
      else if (k == "x0") f.grid.x0 = std::stod(v), have[2] = true;
      else if (k == "y0") f.grid.y0 = std::stod(v), have[3] = true;
      else if (k == "h") f.grid.h = std::stod(v), have[4] = true;
      else if (k == "version") f.version = v;
    }
    for (bool b : have) require(b, ErrorKind::invalid_input, "field CSV: incomplete grid line");
  }
  require(std::getline(is, line) && line == "i,j,x,y,value", ErrorKind::invalid_input, "field CSV: bad header");
  f.values.assign(f.grid.size(), std::nan(""));
  int rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    int i = 0, j = 0;
    const auto last = line.rfind(',');
    require(std::sscanf(line.c_str(), "%d,%d", &i, &j) == 2 && last != std::string::npos && f.grid.in_range(i, j),
            ErrorKind::invalid_input, "field CSV: bad row '" + line + "'");
    f.values[f.grid.index(i, j)] = std::strtod(line.c_str() + last + 1, nullptr);
    ++rows;
  }
  require(rows == f.grid.size(), ErrorKind::invalid_input, "field CSV: row count does not match the grid");
  return f;
}

FieldFile read_field_csv(const std::string& path) { return parse_field_csv(read_text_file(path)); }

void write_text_file(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::invalid_input, "cannot write '" + path + "'");
  out << text;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::invalid_input, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Archive::Archive(std::string dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

void Archive::echo(const std::string& t) const { text("scenario.echo", t); }
void Archive::field(const std::string& name, const Grid2D& g, const std::vector<double>& v) const {
  text("fields/" + name + ".csv", field_csv(g, v));
}
void Archive::mask(const std::string& name, const Grid2D& g, const std::vector<std::uint8_t>& m) const {
  text("masks/" + name + ".csv", mask_csv(g, m));
}
void Archive::report(const std::string& name, const Report& r) const { text("reports/" + name + ".txt", r.to_text()); }
void Archive::log(const std::vector<LogRow>& rows) const { text("log.csv", log_csv(rows)); }
void Archive::text(const std::string& relpath, const std::string& body) const {
  write_text_file((fs::path(dir_) / relpath).string(), body);
}

}  // namespace gradcon
