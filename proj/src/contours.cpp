#include "gradcon/contours.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace gradcon {

namespace {

struct Segment {
  long long a, b;  // edge keys
  Vec2 pa, pb;
};

}  // namespace

ContourSet contour_lines(const Grid2D& g, const std::vector<double>& v, const std::vector<double>& levels) {
  require(static_cast<int>(v.size()) == g.size(), ErrorKind::invalid_argument, "contour_lines: size mismatch");
  ContourSet out;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double x : v)
    if (std::isfinite(x)) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  // edge keys: horizontal edge from node k is 2k, vertical 2k + 1
  auto hkey = [&](int i, int j) { return 2LL * g.index(i, j); };
  auto vkey = [&](int i, int j) { return 2LL * g.index(i, j) + 1; };

  for (double level : levels) {
    if (!(level >= lo && level <= hi)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "level %.6g outside the field range [%.6g, %.6g]; no contour", level, lo, hi);
      out.warnings.push_back(buf);
      continue;
    }
    std::vector<Segment> segs;
    for (int j = 0; j + 1 < g.ny; ++j)
      for (int i = 0; i + 1 < g.nx; ++i) {
        const std::array<int, 4> ci = {g.index(i, j), g.index(i + 1, j), g.index(i + 1, j + 1), g.index(i, j + 1)};
        std::array<double, 4> c;
        bool ok = true;
        for (int q = 0; q < 4; ++q) {
          c[q] = v[ci[q]];
          ok &= std::isfinite(c[q]);
        }
        if (!ok) continue;
        int code = 0;
        for (int q = 0; q < 4; ++q) code |= (c[q] >= level) << q;
        if (code == 0 || code == 15) continue;
        // edges: 0 bottom (c0,c1), 1 right (c1,c2), 2 top (c3,c2), 3 left (c0,c3)
        const std::array<std::array<int, 2>, 4> ends = {{{0, 1}, {1, 2}, {3, 2}, {0, 3}}};
        const std::array<long long, 4> keys = {hkey(i, j), vkey(i + 1, j), hkey(i, j + 1), vkey(i, j)};
        auto point = [&](int e) {
          const int p = ends[e][0], q = ends[e][1];
          const double t = (level - c[p]) / (c[q] - c[p]);
          return Vec2(g.node(ci[p]) + t * (g.node(ci[q]) - g.node(ci[p])));
        };
        auto add = [&](int e, int f) { segs.push_back({keys[e], keys[f], point(e), point(f)}); };
        if (code == 5 || code == 10) {
          const bool centre = 0.25 * (c[0] + c[1] + c[2] + c[3]) >= level;
          if ((code == 5) == centre) {
            add(0, 1);
            add(2, 3);
          } else {
            add(0, 3);
            add(1, 2);
          }
          continue;
        }
        std::array<int, 2> cross{};
        int nc = 0;
        for (int e = 0; e < 4; ++e)
          if (((code >> ends[e][0]) & 1) != ((code >> ends[e][1]) & 1)) cross[nc++] = e;
        add(cross[0], cross[1]);
      }

    std::map<long long, std::vector<int>> at;
    for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
      at[segs[s].a].push_back(s);
      at[segs[s].b].push_back(s);
    }
    std::vector<char> used(segs.size(), 0);
    auto walk = [&](int s, long long from, Polyline& pl) {
      for (;;) {
        used[s] = 1;
        const bool fwd = segs[s].a == from;
        const long long to = fwd ? segs[s].b : segs[s].a;
        const Vec2& q = fwd ? segs[s].pb : segs[s].pa;
        if (q != pl.points.back()) pl.points.push_back(q);  // crossings exactly at a node repeat
        int next = -1;
        for (int t : at[to])
          if (!used[t]) next = t;
        if (next < 0) return to;
        s = next;
        from = to;
      }
    };
    // open chains first, starting from their lower-keyed free end
    for (int pass = 0; pass < 2; ++pass)
      for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
        if (used[s]) continue;
        long long start;
        if (pass == 0) {
          const bool fa = at[segs[s].a].size() == 1, fb = at[segs[s].b].size() == 1;
          if (!fa && !fb) continue;
          start = fa ? segs[s].a : segs[s].b;
        } else {
          start = segs[s].a;
        }
        Polyline pl;
        pl.level = level;
        pl.points.push_back(segs[s].a == start ? segs[s].pa : segs[s].pb);
        const long long end = walk(s, start, pl);
        pl.closed = pass == 1 && end == start;
        if (pl.closed && pl.points.size() > 1 && pl.points.back() == pl.points.front()) pl.points.pop_back();
        out.lines.push_back(std::move(pl));
      }
  }
  return out;
}

std::string contours_csv(const ContourSet& c) {
  std::string out = "level,polyline,vertex,x,y\n";
  char buf[128];
  for (std::size_t p = 0; p < c.lines.size(); ++p) {
    const Polyline& pl = c.lines[p];
    const std::size_t n = pl.points.size() + (pl.closed ? 1 : 0);
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2& x = pl.points[k % pl.points.size()];
      std::snprintf(buf, sizeof buf, "%.17g,%zu,%zu,%.17g,%.17g\n", pl.level, p, k, x.x(), x.y());
      out += buf;
    }
  }
  return out;
}

}  // namespace gradcon
