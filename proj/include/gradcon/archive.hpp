#pragma once

#include "gradcon/grid.hpp"
#include "gradcon/penalty.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gradcon {

// Build version recorded in every CSV header.
const char* version_string();

// Node-field CSV: a "# grid ..." comment line, the header i,j,x,y,value, then
// one row per node in grid order. Values use %.17g so they read back exactly;
// NaN is written as "nan".
std::string field_csv(const Grid2D& g, const std::vector<double>& values);
std::string mask_csv(const Grid2D& g, const std::vector<std::uint8_t>& mask);
std::string log_csv(const std::vector<LogRow>& log);

struct FieldFile {
  Grid2D grid;
  std::vector<double> values;
  std::string version;
};
FieldFile parse_field_csv(const std::string& text);
FieldFile read_field_csv(const std::string& path);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// Output directory layout:
//   scenario.echo  fields/*.csv  masks/*.csv  reports/*.txt  log.csv
class Archive {
 public:
  explicit Archive(std::string dir);
  const std::string& dir() const { return dir_; }

  void echo(const std::string& text) const;
  void field(const std::string& name, const Grid2D& g, const std::vector<double>& v) const;
  void mask(const std::string& name, const Grid2D& g, const std::vector<std::uint8_t>& m) const;
  void report(const std::string& name, const Report& r) const;
  void log(const std::vector<LogRow>& rows) const;
  void text(const std::string& relpath, const std::string& body) const;

 private:
  std::string dir_;
};

}  // namespace gradcon
