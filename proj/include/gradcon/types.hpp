#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace gradcon {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

enum class ErrorKind {
  invalid_argument,
  domain,
  infeasible_datum,
  degenerate_transversality,
  ridge_proximity,
  nondifferentiable,
  nonconvergence,
  invalid_state,
  invalid_input,
  invalid_obstacles,
  validation,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

// One line of a pass/fail report.
struct CheckLine {
  std::string name;
  bool passed = true;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct Report {
  std::string title;
  std::vector<CheckLine> lines;

  bool passed() const {
    for (const auto& l : lines)
      if (!l.passed) return false;
    return true;
  }
  void add(std::string name, bool ok, double measured, double tol, std::string detail = {}) {
    lines.push_back({std::move(name), ok, measured, tol, std::move(detail)});
  }
  std::string to_text() const;
};

inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

}  // namespace gradcon
