#ifndef OPEN3D_GEOMETRY_HPP
#define OPEN3D_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace open3d {

// Canonical database unit: 1000 DBU per micron. All stored coordinates are
// integer DBU; floating point appears only inside optimizers.
using DbUnit = std::int64_t;
constexpr DbUnit kDbuPerMicron = 1000;

inline double to_um(DbUnit v) { return static_cast<double>(v) / kDbuPerMicron; }
inline DbUnit from_um(double um) {
  return static_cast<DbUnit>(std::llround(um * kDbuPerMicron));
}

// Exact decimal rendering of a DBU value in microns ("190" -> "0.19").
std::string um_text(DbUnit v);

// Exact decimal-to-DBU conversion; throws std::invalid_argument when the
// token carries more precision than one DBU or is not a decimal number.
DbUnit um_from_text(const std::string& token);

struct Point {
  DbUnit x = 0;
  DbUnit y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Rect {
  DbUnit lx = 0, ly = 0, ux = 0, uy = 0;

  DbUnit width() const { return ux - lx; }
  DbUnit height() const { return uy - ly; }
  double area_um2() const { return to_um(width()) * to_um(height()); }

  bool contains(const Rect& r) const {
    return r.lx >= lx && r.ly >= ly && r.ux <= ux && r.uy <= uy;
  }
  bool overlaps(const Rect& r) const {
    return r.lx < ux && lx < r.ux && r.ly < uy && ly < r.uy;
  }
  Rect intersect(const Rect& r) const {
    Rect out{std::max(lx, r.lx), std::max(ly, r.ly), std::min(ux, r.ux),
             std::min(uy, r.uy)};
    if (out.lx > out.ux || out.ly > out.uy) return Rect{0, 0, 0, 0};
    return out;
  }
  Rect translated(DbUnit dx, DbUnit dy) const {
    return Rect{lx + dx, ly + dy, ux + dx, uy + dy};
  }
  bool valid() const { return lx <= ux && ly <= uy; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

enum class Orient { N, S, FN, FS };

// Transforms a point given in master-local coordinates (origin at the
// master's lower-left, size w x h) into the component-local frame under the
// given orientation.
Point orient_point(Orient o, Point p, DbUnit w, DbUnit h);
Rect orient_rect(Orient o, const Rect& r, DbUnit w, DbUnit h);

const char* orient_name(Orient o);
Orient orient_from_name(const std::string& s);

}  // namespace open3d

#endif
