#include "open3d/geometry.hpp"

#include <cctype>

namespace open3d {

std::string um_text(DbUnit v) {
  bool neg = v < 0;
  DbUnit a = neg ? -v : v;
  DbUnit whole = a / kDbuPerMicron;
  DbUnit frac = a % kDbuPerMicron;
  std::string out = neg ? "-" : "";
  out += std::to_string(whole);
  if (frac != 0) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%03lld", static_cast<long long>(frac));
    std::string f(buf);
    while (!f.empty() && f.back() == '0') f.pop_back();
    out += '.';
    out += f;
  }
  return out;
}

DbUnit um_from_text(const std::string& token) {
  if (token.empty()) throw std::invalid_argument("empty number");
  std::size_t i = 0;
  bool neg = false;
  if (token[i] == '-' || token[i] == '+') {
    neg = token[i] == '-';
    ++i;
  }
  DbUnit whole = 0;
  bool any = false;
  for (; i < token.size() && std::isdigit(static_cast<unsigned char>(token[i])); ++i) {
    whole = whole * 10 + (token[i] - '0');
    any = true;
  }
  DbUnit frac = 0;
  if (i < token.size() && token[i] == '.') {
    ++i;
    DbUnit scale = kDbuPerMicron;
    for (; i < token.size() && std::isdigit(static_cast<unsigned char>(token[i])); ++i) {
      int d = token[i] - '0';
      if (scale == 1) {
        if (d != 0)
          throw std::invalid_argument("value finer than one database unit: " + token);
        continue;
      }
      scale /= 10;
      frac += d * scale;
      any = true;
    }
  }
  if (!any || i != token.size())
    throw std::invalid_argument("not a decimal number: " + token);
  DbUnit v = whole * kDbuPerMicron + frac;
  return neg ? -v : v;
}

Point orient_point(Orient o, Point p, DbUnit w, DbUnit h) {
  switch (o) {
    case Orient::N: return p;
    case Orient::S: return {w - p.x, h - p.y};
    case Orient::FN: return {w - p.x, p.y};
    case Orient::FS: return {p.x, h - p.y};
  }
  return p;
}

Rect orient_rect(Orient o, const Rect& r, DbUnit w, DbUnit h) {
  Point a = orient_point(o, {r.lx, r.ly}, w, h);
  Point b = orient_point(o, {r.ux, r.uy}, w, h);
  return Rect{std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x),
              std::max(a.y, b.y)};
}

const char* orient_name(Orient o) {
  switch (o) {
    case Orient::N: return "N";
    case Orient::S: return "S";
    case Orient::FN: return "FN";
    case Orient::FS: return "FS";
  }
  return "N";
}

Orient orient_from_name(const std::string& s) {
  if (s == "N") return Orient::N;
  if (s == "S") return Orient::S;
  if (s == "FN") return Orient::FN;
  if (s == "FS") return Orient::FS;
  throw std::invalid_argument("unsupported orientation: " + s);
}

}  // namespace open3d
