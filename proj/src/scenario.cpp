#include "gradcon/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace gradcon {

namespace {

// ---- a small TOML subset: [table], [[array.of.tables]], key = value ----

struct Value {
  enum class T { str, num, boolean, arr } t = T::num;
  std::string s;
  double d = 0;
  bool b = false;
  std::vector<Value> a;
};

struct Entry {
  Value v;
  int line = 0;
};

struct Table {
  std::string name;
  int line = 0;
  std::map<std::string, Entry> kv;
};

class Lexer {
 public:
  Lexer(const std::string& s, int line, std::vector<ParseIssue>& issues) : s_(s), line_(line), issues_(issues) {}

  bool value(Value& out) {
    skip();
    if (pos_ >= s_.size()) return fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return string(out);
    if (c == '[') return array(out);
    if (s_.compare(pos_, 4, "true") == 0) {
      out.t = Value::T::boolean;
      out.b = true;
      pos_ += 4;
      return true;
    }
    if (s_.compare(pos_, 5, "false") == 0) {
      out.t = Value::T::boolean;
      out.b = false;
      pos_ += 5;
      return true;
    }
    return number(out);
  }

  bool at_end() {
    skip();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }

 private:
  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) ++pos_;
    // comments inside multi-line arrays
    if (pos_ < s_.size() && s_[pos_] == '#' && depth_ > 0) {
      while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      skip();
    }
  }
  bool fail(const std::string& m) {
    issues_.push_back({line_, m});
    return false;
  }
  bool string(Value& out) {
    out.t = Value::T::str;
    ++pos_;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
      out.s += s_[pos_++];
    }
    if (pos_ >= s_.size()) return fail("unterminated string");
    ++pos_;
    return true;
  }
  bool number(Value& out) {
    std::size_t end = pos_;
    while (end < s_.size() && std::string(",] \t#\r\n").find(s_[end]) == std::string::npos) ++end;
    const std::string tok = s_.substr(pos_, end - pos_);
    char* stop = nullptr;
    const double v = std::strtod(tok.c_str(), &stop);
    if (tok.empty() || *stop != '\0') return fail("cannot read value '" + tok + "'");
    out.t = Value::T::num;
    out.d = v;
    pos_ = end;
    return true;
  }
  bool array(Value& out) {
    out.t = Value::T::arr;
    ++pos_;
    ++depth_;
    for (;;) {
      skip();
      if (pos_ >= s_.size()) return fail("unterminated array");
      if (s_[pos_] == ']') {
        ++pos_;
        --depth_;
        return true;
      }
      Value v;
      if (!value(v)) return false;
      out.a.push_back(std::move(v));
      skip();
      if (pos_ < s_.size() && s_[pos_] == ',') ++pos_;
    }
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_;
  int depth_ = 0;
  std::vector<ParseIssue>& issues_;
};

// bracket depth of a line, ignoring strings and comments
int bracket_balance(const std::string& line) {
  int depth = 0;
  bool str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (str) {
      if (c == '\\') ++i;
      else if (c == '"') str = false;
      continue;
    }
    if (c == '"') str = true;
    else if (c == '#') break;
    else if (c == '[') ++depth;
    else if (c == ']') --depth;
  }
  return depth;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<Table> parse_tables(const std::string& text, std::vector<ParseIssue>& issues) {
  std::vector<Table> tables(1);
  tables[0].line = 1;
  std::vector<std::string> lines;
  {
    std::istringstream is(text);
    std::string l;
    while (std::getline(is, l)) lines.push_back(l);
  }
  std::set<std::string> seen_tables;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const int lineno = static_cast<int>(n) + 1;
    std::string line = trim(lines[n]);
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == '[') {
      const bool arr = line.size() > 1 && line[1] == '[';
      const auto close = line.find(arr ? "]]" : "]");
      if (close == std::string::npos) {
        issues.push_back({lineno, "malformed table header"});
        continue;
      }
      Table t;
      t.name = trim(line.substr(arr ? 2 : 1, close - (arr ? 2 : 1)));
      t.line = lineno;
      if (!arr && !seen_tables.insert(t.name).second) issues.push_back({lineno, "duplicate table [" + t.name + "]"});
      if (arr) t.name += "[]";
      tables.push_back(std::move(t));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      issues.push_back({lineno, "expected key = value"});
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    std::string rhs = line.substr(eq + 1);
    int bal = bracket_balance(rhs);
    while (bal > 0 && n + 1 < lines.size()) {
      rhs += "\n" + lines[++n];
      bal = bracket_balance(rhs);
    }
    Lexer lex(rhs, lineno, issues);
    Entry e;
    e.line = lineno;
    if (!lex.value(e.v)) continue;
    if (!lex.at_end()) {
      issues.push_back({lineno, "trailing characters after value of '" + key + "'"});
      continue;
    }
    auto& kv = tables.back().kv;
    if (kv.count(key)) issues.push_back({lineno, "duplicate key '" + key + "'"});
    kv[key] = std::move(e);
  }
  return tables;
}

// ---- typed access with issue collection ----

class Reader {
 public:
  Reader(std::vector<Table>& t, std::vector<ParseIssue>& syntax, std::vector<ParseIssue>& valid)
      : tables_(t), syntax_(syntax), valid_(valid) {}

  Table* table(const std::string& name) {
    for (auto& t : tables_)
      if (t.name == name) return &t;
    return nullptr;
  }
  std::vector<Table*> tables(const std::string& name) {
    std::vector<Table*> out;
    for (auto& t : tables_)
      if (t.name == name) out.push_back(&t);
    return out;
  }

  void allow(Table* t, std::initializer_list<const char*> keys) {
    if (!t) return;
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, e] : t->kv)
      if (!ok.count(k)) valid_.push_back({e.line, "unknown key '" + k + "' in [" + t->name + "]"});
  }

  const Entry* find(Table* t, const std::string& key, bool required) {
    if (t && t->kv.count(key)) return &t->kv.at(key);
    if (required) valid_.push_back({t ? t->line : 0, "missing key '" + key + "'" + (t ? " in [" + t->name + "]" : "")});
    return nullptr;
  }

  double num(Table* t, const std::string& key, double def, bool required = false) {
    const Entry* e = find(t, key, required);
    if (!e) return def;
    if (e->v.t != Value::T::num) {
      valid_.push_back({e->line, "'" + key + "' must be a number"});
      return def;
    }
    return e->v.d;
  }
  std::string str(Table* t, const std::string& key, const std::string& def, bool required = false) {
    const Entry* e = find(t, key, required);
    if (!e) return def;
    if (e->v.t != Value::T::str) {
      valid_.push_back({e->line, "'" + key + "' must be a string"});
      return def;
    }
    return e->v.s;
  }
  std::vector<double> nums(Table* t, const std::string& key, std::vector<double> def, bool required = false) {
    const Entry* e = find(t, key, required);
    if (!e) return def;
    std::vector<double> out;
    if (e->v.t == Value::T::arr) {
      for (const auto& v : e->v.a) {
        if (v.t != Value::T::num) {
          valid_.push_back({e->line, "'" + key + "' must be an array of numbers"});
          return def;
        }
        out.push_back(v.d);
      }
      return out;
    }
    valid_.push_back({e->line, "'" + key + "' must be an array"});
    return def;
  }
  std::vector<std::vector<double>> matrix(Table* t, const std::string& key, bool required = false) {
    const Entry* e = find(t, key, required);
    std::vector<std::vector<double>> out;
    if (!e) return out;
    bool ok = e->v.t == Value::T::arr;
    if (ok)
      for (const auto& row : e->v.a) {
        if (row.t != Value::T::arr) {
          ok = false;
          break;
        }
        std::vector<double> r;
        for (const auto& v : row.a) {
          if (v.t != Value::T::num) ok = false;
          r.push_back(v.d);
        }
        out.push_back(r);
      }
    if (!ok) {
      valid_.push_back({e->line, "'" + key + "' must be an array of number arrays"});
      out.clear();
    }
    return out;
  }
  std::vector<std::string> strs(Table* t, const std::string& key) {
    const Entry* e = find(t, key, false);
    std::vector<std::string> out;
    if (!e) return out;
    if (e->v.t != Value::T::arr) {
      valid_.push_back({e->line, "'" + key + "' must be an array of strings"});
      return out;
    }
    for (const auto& v : e->v.a) {
      if (v.t != Value::T::str) {
        valid_.push_back({e->line, "'" + key + "' must be an array of strings"});
        return {};
      }
      out.push_back(v.s);
    }
    return out;
  }
  int line(Table* t, const std::string& key) {
    if (t && t->kv.count(key)) return t->kv.at(key).line;
    return t ? t->line : 0;
  }
  void invalid(int line, const std::string& m) { valid_.push_back({line, m}); }

 private:
  std::vector<Table>& tables_;
  std::vector<ParseIssue>& syntax_;
  std::vector<ParseIssue>& valid_;
};

Mat2 to_mat2(const std::vector<std::vector<double>>& m, Reader& rd, int line, const Mat2& def) {
  if (m.empty()) return def;
  if (m.size() != 2 || m[0].size() != 2 || m[1].size() != 2) {
    rd.invalid(line, "expected a 2x2 matrix");
    return def;
  }
  Mat2 A;
  A << m[0][0], m[0][1], m[1][0], m[1][1];
  return A;
}

Vec2 to_vec2(const std::vector<double>& v, Reader& rd, int line, const Vec2& def) {
  if (v.empty()) return def;
  if (v.size() != 2) {
    rd.invalid(line, "expected 2 components");
    return def;
  }
  return {v[0], v[1]};
}

std::string num_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string vec_text(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num_text(v[i]);
  return s + "]";
}

std::string mat_text(const Mat2& A) {
  return "[" + vec_text({A(0, 0), A(0, 1)}) + ", " + vec_text({A(1, 0), A(1, 1)}) + "]";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ScenarioError::ScenarioError(ErrorKind kind, std::vector<ParseIssue> issues)
    : Error(kind,
            [&] {
              std::ostringstream os;
              os << issues.size() << " problem(s) in scenario";
              for (const auto& i : issues) os << "\n  line " << i.line << ": " << i.message;
              return os.str();
            }()),
      issues_(std::move(issues)) {}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> c = {"assumptions", "datum",      "theorem2",     "prop_3_5",
                                             "prop_3_3",    "lemma_3_2",  "comparison",   "monotonicity",
                                             "pipeline",    "free_boundary"};
  return c;
}

Domain2D DomainSpec::build() const {
  if (kind == "disc") return Domain2D::disc(radius);
  if (kind == "ellipse") return Domain2D::ellipse(a, b);
  if (kind == "rounded_rectangle") return Domain2D::rounded_rectangle(width, height, corner);
  if (kind == "star") return Domain2D::star(r0, amp, m);
  throw Error(ErrorKind::invalid_input, "unknown domain kind '" + kind + "'");
}

ConvexBody BodySpec::build() const {
  if (kind == "ball") return ConvexBody::ball(radius);
  if (kind == "ellipse") return ConvexBody::ellipse(axes);
  if (kind == "polygon") return ConvexBody::polygon(vertices);
  if (kind == "p_ball") return ConvexBody::p_ball(p, scale);
  throw Error(ErrorKind::invalid_input, "unknown body kind '" + kind + "'");
}

BoundaryDatum PhiSpec::build() const {
  if (kind == "zero") return BoundaryDatum::zero();
  if (kind == "affine") return BoundaryDatum::affine(c, c0);
  if (kind == "quadratic") return BoundaryDatum::quadratic(Q, c, c0);
  throw Error(ErrorKind::invalid_input, "unknown phi kind '" + kind + "'");
}

EllipticOperator OperatorSpec::build() const {
  if (kind == "poisson") return EllipticOperator::poisson(f);
  if (kind == "linear") return EllipticOperator::linear(lin.A, lin.b, lin.c, lin.f);
  if (kind == "linear_x") return EllipticOperator::linear_x();
  if (kind == "pucci_minus") return EllipticOperator::pucci_minus(lambda, Lambda, f);
  if (kind == "pucci_plus") return EllipticOperator::pucci_plus(lambda, Lambda, f);
  if (kind == "bellman") return EllipticOperator::bellman(family);
  if (kind == "broken_trace") return EllipticOperator::broken_trace(f);
  throw Error(ErrorKind::invalid_input, "unknown operator kind '" + kind + "'");
}

double GridSpec::resolve(const Domain2D& dom) const {
  if (h > 0) return h;
  const Vec2 ext = dom.bbox_max() - dom.bbox_min();
  return std::min(ext.x(), ext.y()) / n;
}

Scenario parse_scenario_text(const std::string& text) {
  std::vector<ParseIssue> syntax, valid;
  std::vector<Table> tables = parse_tables(text, syntax);
  Reader rd(tables, syntax, valid);
  Scenario sc;

  Table* root = &tables[0];
  rd.allow(root, {"name", "description"});
  sc.name = rd.str(root, "name", "", true);
  sc.description = rd.str(root, "description", "");

  static const std::set<std::string> known_tables = {"", "domain", "body", "phi", "operator", "operator.family[]",
                                                     "obstacles", "grid", "solver", "checks"};
  for (auto& t : tables)
    if (!known_tables.count(t.name)) rd.invalid(t.line, "unknown table [" + t.name + "]");

  // domain
  Table* td = rd.table("domain");
  if (!td) rd.invalid(0, "missing table [domain]");
  rd.allow(td, {"kind", "radius", "a", "b", "width", "height", "corner", "r0", "amp", "m"});
  auto& D = sc.domain;
  D.kind = rd.str(td, "kind", "disc", td != nullptr);
  const int dline = rd.line(td, "kind");
  if (D.kind == "disc") {
    D.radius = rd.num(td, "radius", 1, true);
    if (D.radius <= 0) rd.invalid(rd.line(td, "radius"), "radius must be positive");
  } else if (D.kind == "ellipse") {
    D.a = rd.num(td, "a", 1, true);
    D.b = rd.num(td, "b", 1, true);
    if (D.a <= 0 || D.b <= 0) rd.invalid(dline, "semi-axes must be positive");
  } else if (D.kind == "rounded_rectangle") {
    D.width = rd.num(td, "width", 2, true);
    D.height = rd.num(td, "height", 2, true);
    D.corner = rd.num(td, "corner", 0.25, true);
    if (D.corner <= 0 || 2 * D.corner > std::min(D.width, D.height))
      rd.invalid(dline, "corner radius must lie in (0, min(width, height)/2]");
  } else if (D.kind == "star") {
    D.r0 = rd.num(td, "r0", 1, true);
    D.amp = rd.num(td, "amp", 0.1, true);
    D.m = static_cast<int>(rd.num(td, "m", 5, true));
    if (D.r0 <= 0 || D.amp < 0 || D.amp >= 1) rd.invalid(dline, "star needs r0 > 0 and 0 <= amp < 1");
  } else {
    rd.invalid(dline, "unknown domain kind '" + D.kind + "'");
  }

  // body
  Table* tb = rd.table("body");
  if (!tb) rd.invalid(0, "missing table [body]");
  rd.allow(tb, {"given", "kind", "radius", "axes", "vertices", "p", "scale", "smoothing"});
  auto& B = sc.body;
  const std::string given = rd.str(tb, "given", "K");
  if (given != "K" && given != "K_polar") rd.invalid(rd.line(tb, "given"), "'given' must be \"K\" or \"K_polar\"");
  B.given_polar = given == "K_polar";
  B.kind = rd.str(tb, "kind", "ball", tb != nullptr);
  const int bline = rd.line(tb, "kind");
  if (B.kind == "ball") {
    B.radius = rd.num(tb, "radius", 1);
    if (B.radius <= 0) rd.invalid(bline, "radius must be positive");
  } else if (B.kind == "ellipse") {
    B.axes = rd.nums(tb, "axes", {1, 1}, true);
    if (B.axes.size() != 2 || B.axes[0] <= 0 || B.axes[1] <= 0)
      rd.invalid(rd.line(tb, "axes"), "axes must be two positive numbers");
  } else if (B.kind == "p_ball") {
    B.p = rd.num(tb, "p", 2, true);
    B.scale = rd.num(tb, "scale", 1);
    if (B.p <= 1 || B.scale <= 0) rd.invalid(bline, "p_ball needs p > 1 and scale > 0");
  } else if (B.kind == "polygon") {
    const auto m = rd.matrix(tb, "vertices", true);
    const int vline = rd.line(tb, "vertices");
    for (const auto& r : m) {
      if (r.size() != 2) {
        rd.invalid(vline, "vertices must be pairs");
        break;
      }
      B.vertices.emplace_back(r[0], r[1]);
    }
    const int n = static_cast<int>(B.vertices.size());
    if (n >= 3) {
      double area = 0;
      for (int i = 0; i < n; ++i) {
        const Vec2& p = B.vertices[i];
        const Vec2& q = B.vertices[(i + 1) % n];
        area += p.x() * q.y() - p.y() * q.x();
      }
      if (area < 0) {
        std::reverse(B.vertices.begin(), B.vertices.end());
        sc.warnings.push_back("line " + std::to_string(vline) + ": polygon vertices were clockwise; order reversed");
      }
      bool convex = true, origin_in = true;
      for (int i = 0; i < n; ++i) {
        const Vec2& p = B.vertices[i];
        const Vec2& q = B.vertices[(i + 1) % n];
        const Vec2& r = B.vertices[(i + 2) % n];
        const Vec2 e1 = q - p, e2 = r - q;
        if (e1.x() * e2.y() - e1.y() * e2.x() <= 0) convex = false;
        // origin strictly left of every edge
        if (e1.x() * (-p.y()) - e1.y() * (-p.x()) <= 0) origin_in = false;
      }
      if (!convex) rd.invalid(vline, "non-convex polygon");
      else if (!origin_in) rd.invalid(vline, "origin not interior");
    } else if (!m.empty()) {
      rd.invalid(vline, "polygon needs at least 3 vertices");
    }
  } else {
    rd.invalid(bline, "unknown body kind '" + B.kind + "'");
  }
  for (double k : rd.nums(tb, "smoothing", {})) {
    if (k < 1 || k != std::floor(k)) rd.invalid(rd.line(tb, "smoothing"), "smoothing levels must be positive integers");
    B.smoothing.push_back(static_cast<int>(k));
  }
  if (!B.smoothing.empty() && !(B.given_polar && B.kind == "polygon"))
    rd.invalid(rd.line(tb, "smoothing"), "smoothing levels apply to a polygonal K_polar only");
  for (std::size_t i = 1; i < B.smoothing.size(); ++i)
    if (B.smoothing[i] <= B.smoothing[i - 1]) rd.invalid(rd.line(tb, "smoothing"), "smoothing levels must increase");

  // phi
  Table* tp = rd.table("phi");
  rd.allow(tp, {"kind", "c", "c0", "Q"});
  auto& P = sc.phi;
  P.kind = rd.str(tp, "kind", "zero");
  if (P.kind != "zero" && P.kind != "affine" && P.kind != "quadratic")
    rd.invalid(rd.line(tp, "kind"), "unknown phi kind '" + P.kind + "'");
  P.c = to_vec2(rd.nums(tp, "c", {}), rd, rd.line(tp, "c"), Vec2::Zero());
  P.c0 = rd.num(tp, "c0", 0);
  P.Q = to_mat2(rd.matrix(tp, "Q"), rd, rd.line(tp, "Q"), Mat2::Zero());
  if (P.kind == "quadratic") P.Q = 0.5 * (P.Q + P.Q.transpose());
  if (P.kind == "zero") {
    P.c.setZero();
    P.c0 = 0;
    P.Q.setZero();
  } else if (P.kind == "affine") {
    P.Q.setZero();
  }

  // operator
  Table* to = rd.table("operator");
  if (!to) rd.invalid(0, "missing table [operator]");
  rd.allow(to, {"kind", "f", "lambda", "Lambda", "A", "b", "c"});
  auto& O = sc.op;
  O.kind = rd.str(to, "kind", "poisson", to != nullptr);
  const int oline = rd.line(to, "kind");
  O.f = rd.num(to, "f", 0);
  if (O.kind == "pucci_minus" || O.kind == "pucci_plus") {
    O.lambda = rd.num(to, "lambda", 1, true);
    O.Lambda = rd.num(to, "Lambda", 1, true);
    if (!(O.lambda > 0 && O.Lambda >= O.lambda)) rd.invalid(oline, "need 0 < lambda <= Lambda");
  } else if (O.kind == "linear") {
    O.lin.A = to_mat2(rd.matrix(to, "A", true), rd, rd.line(to, "A"), Mat2::Identity());
    O.lin.b = to_vec2(rd.nums(to, "b", {}), rd, rd.line(to, "b"), Vec2::Zero());
    O.lin.c = rd.num(to, "c", 0);
    O.lin.f = O.f;
  } else if (O.kind == "bellman") {
    for (Table* t : rd.tables("operator.family[]")) {
      rd.allow(t, {"A", "b", "c", "f"});
      LinearCoeffs lc;
      lc.A = to_mat2(rd.matrix(t, "A", true), rd, rd.line(t, "A"), Mat2::Identity());
      lc.b = to_vec2(rd.nums(t, "b", {}), rd, rd.line(t, "b"), Vec2::Zero());
      lc.c = rd.num(t, "c", 0);
      lc.f = rd.num(t, "f", 0);
      O.family.push_back(lc);
    }
    if (O.family.empty()) rd.invalid(oline, "bellman operator needs [[operator.family]] tables");
  } else if (O.kind != "poisson" && O.kind != "linear_x" && O.kind != "broken_trace") {
    rd.invalid(oline, "unknown operator kind '" + O.kind + "'");
  }

  // obstacles
  Table* tob = rd.table("obstacles");
  rd.allow(tob, {"kind", "scale"});
  sc.obstacles.kind = rd.str(tob, "kind", "gauge");
  sc.obstacles.scale = rd.num(tob, "scale", 1);
  if (sc.obstacles.kind != "gauge" && sc.obstacles.kind != "quadratic")
    rd.invalid(rd.line(tob, "kind"), "unknown obstacles kind '" + sc.obstacles.kind + "'");
  if (sc.obstacles.kind == "quadratic" && (D.kind != "disc" || P.kind != "zero" || sc.obstacles.scale <= 0))
    rd.invalid(rd.line(tob, "kind"), "quadratic obstacles need a disc domain, phi = zero and scale > 0");

  // grid
  Table* tg = rd.table("grid");
  if (!tg) rd.invalid(0, "missing table [grid]");
  rd.allow(tg, {"h", "n"});
  sc.grid.h = rd.num(tg, "h", 0);
  sc.grid.n = static_cast<int>(rd.num(tg, "n", 0));
  if (tg && sc.grid.h <= 0 && sc.grid.n <= 0) rd.invalid(tg->line, "grid needs h > 0 or n > 0");

  // solver
  Table* ts = rd.table("solver");
  rd.allow(ts, {"eps_cells", "delta0", "delta", "newton_tol", "max_iters"});
  auto& S = sc.solver;
  S.eps_cells = rd.nums(ts, "eps_cells", S.eps_cells);
  S.delta0 = rd.num(ts, "delta0", S.delta0);
  S.delta = rd.num(ts, "delta", S.delta);
  S.newton_tol = rd.num(ts, "newton_tol", S.newton_tol);
  S.max_iters = static_cast<int>(rd.num(ts, "max_iters", S.max_iters));
  for (std::size_t i = 0; i < S.eps_cells.size(); ++i) {
    if (S.eps_cells[i] < 1.5) rd.invalid(rd.line(ts, "eps_cells"), "eps_cells entries must be >= 1.5");
    if (i && S.eps_cells[i] >= S.eps_cells[i - 1]) rd.invalid(rd.line(ts, "eps_cells"), "eps_cells must be strictly decreasing");
  }
  if (S.eps_cells.empty()) rd.invalid(rd.line(ts, "eps_cells"), "eps_cells must not be empty");
  if (!(S.delta > 0 && S.delta <= S.delta0)) rd.invalid(rd.line(ts, "delta"), "need 0 < delta <= delta0");
  if (S.newton_tol <= 0 || S.max_iters <= 0) rd.invalid(rd.line(ts, "newton_tol"), "bad Newton settings");

  // checks
  Table* tc = rd.table("checks");
  rd.allow(tc, {"run", "seed"});
  sc.checks = rd.strs(tc, "run");
  sc.seed = static_cast<unsigned>(rd.num(tc, "seed", 7));
  for (const auto& c : sc.checks)
    if (std::find(known_checks().begin(), known_checks().end(), c) == known_checks().end())
      rd.invalid(rd.line(tc, "run"), "unknown check '" + c + "'");
  if (sc.obstacles.kind == "quadratic")
    for (const char* c : {"theorem2", "prop_3_5", "prop_3_3", "lemma_3_2", "free_boundary", "monotonicity", "pipeline"})
      if (std::count(sc.checks.begin(), sc.checks.end(), c))
        rd.invalid(rd.line(tc, "run"), std::string("check '") + c + "' needs gauge obstacles");
  if (std::count(sc.checks.begin(), sc.checks.end(), "pipeline") && sc.body.smoothing.empty())
    rd.invalid(rd.line(tc, "run"), "pipeline check needs [body] smoothing levels");

  // grid resolution against the domain
  if (syntax.empty() && valid.empty()) {
    const Domain2D dom = D.build();
    const double h = sc.grid.resolve(dom);
    const Vec2 ext = dom.bbox_max() - dom.bbox_min();
    const double cells = std::min(ext.x(), ext.y()) / h;
    if (cells < 32 - 1e-9)
      rd.invalid(rd.line(tg, sc.grid.h > 0 ? "h" : "n"),
                 "grid too coarse: " + std::to_string(cells) + " cells across the domain (need at least 32)");
  }

  if (!syntax.empty()) {
    syntax.insert(syntax.end(), valid.begin(), valid.end());
    throw ScenarioError(ErrorKind::invalid_input, syntax);
  }
  if (!valid.empty()) {
    std::stable_sort(valid.begin(), valid.end(), [](const ParseIssue& a, const ParseIssue& b) { return a.line < b.line; });
    throw ScenarioError(ErrorKind::validation, valid);
  }
  return sc;
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(ErrorKind::invalid_input, {{0, "cannot open '" + path + "'"}});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str());
}

std::string Scenario::to_text() const {
  std::ostringstream os;
  os << "name = " << quoted(name) << "\n";
  if (!description.empty()) os << "description = " << quoted(description) << "\n";

  os << "\n[domain]\nkind = " << quoted(domain.kind) << "\n";
  if (domain.kind == "disc") os << "radius = " << num_text(domain.radius) << "\n";
  if (domain.kind == "ellipse") os << "a = " << num_text(domain.a) << "\nb = " << num_text(domain.b) << "\n";
  if (domain.kind == "rounded_rectangle")
    os << "width = " << num_text(domain.width) << "\nheight = " << num_text(domain.height)
       << "\ncorner = " << num_text(domain.corner) << "\n";
  if (domain.kind == "star")
    os << "r0 = " << num_text(domain.r0) << "\namp = " << num_text(domain.amp) << "\nm = " << domain.m << "\n";

  os << "\n[body]\ngiven = " << quoted(body.given_polar ? "K_polar" : "K") << "\nkind = " << quoted(body.kind) << "\n";
  if (body.kind == "ball") os << "radius = " << num_text(body.radius) << "\n";
  if (body.kind == "ellipse") os << "axes = " << vec_text(body.axes) << "\n";
  if (body.kind == "p_ball") os << "p = " << num_text(body.p) << "\nscale = " << num_text(body.scale) << "\n";
  if (body.kind == "polygon") {
    os << "vertices = [";
    for (std::size_t i = 0; i < body.vertices.size(); ++i)
      os << (i ? ", " : "") << vec_text({body.vertices[i].x(), body.vertices[i].y()});
    os << "]\n";
  }
  if (!body.smoothing.empty()) {
    os << "smoothing = [";
    for (std::size_t i = 0; i < body.smoothing.size(); ++i) os << (i ? ", " : "") << body.smoothing[i];
    os << "]\n";
  }

  os << "\n[phi]\nkind = " << quoted(phi.kind) << "\n";
  if (phi.kind != "zero") os << "c = " << vec_text({phi.c.x(), phi.c.y()}) << "\nc0 = " << num_text(phi.c0) << "\n";
  if (phi.kind == "quadratic") os << "Q = " << mat_text(phi.Q) << "\n";

  os << "\n[operator]\nkind = " << quoted(op.kind) << "\n";
  if (op.kind == "poisson" || op.kind == "linear" || op.kind == "pucci_minus" || op.kind == "pucci_plus" ||
      op.kind == "broken_trace")
    os << "f = " << num_text(op.f) << "\n";
  if (op.kind == "pucci_minus" || op.kind == "pucci_plus")
    os << "lambda = " << num_text(op.lambda) << "\nLambda = " << num_text(op.Lambda) << "\n";
  if (op.kind == "linear")
    os << "A = " << mat_text(op.lin.A) << "\nb = " << vec_text({op.lin.b.x(), op.lin.b.y()})
       << "\nc = " << num_text(op.lin.c) << "\n";
  for (const auto& lc : op.family)
    os << "\n[[operator.family]]\nA = " << mat_text(lc.A) << "\nb = " << vec_text({lc.b.x(), lc.b.y()})
       << "\nc = " << num_text(lc.c) << "\nf = " << num_text(lc.f) << "\n";

  os << "\n[obstacles]\nkind = " << quoted(obstacles.kind) << "\n";
  if (obstacles.kind == "quadratic") os << "scale = " << num_text(obstacles.scale) << "\n";

  os << "\n[grid]\n";
  if (grid.h > 0)
    os << "h = " << num_text(grid.h) << "\n";
  else
    os << "n = " << grid.n << "\n";

  os << "\n[solver]\neps_cells = " << vec_text(solver.eps_cells) << "\ndelta0 = " << num_text(solver.delta0)
     << "\ndelta = " << num_text(solver.delta) << "\nnewton_tol = " << num_text(solver.newton_tol)
     << "\nmax_iters = " << solver.max_iters << "\n";

  os << "\n[checks]\nrun = [";
  for (std::size_t i = 0; i < checks.size(); ++i) os << (i ? ", " : "") << quoted(checks[i]);
  os << "]\nseed = " << seed << "\n";
  return os.str();
}

bool is_preset(const std::string& name) {
  for (const auto& [n, t] : preset_texts())
    if (n == name) return true;
  return false;
}

Scenario load_preset(const std::string& name) {
  for (const auto& [n, t] : preset_texts())
    if (n == name) return parse_scenario_text(t);
  throw ScenarioError(ErrorKind::invalid_input, {{0, "no preset named '" + name + "'"}});
}

}  // namespace gradcon
