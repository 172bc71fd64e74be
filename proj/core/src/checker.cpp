#include "open3d/checker.hpp"

#include <algorithm>

namespace open3d {

namespace {

constexpr std::size_t kMaxMessages = 50;

void note(LegalityReport& rep, std::string msg) {
  if (rep.messages.size() < kMaxMessages) rep.messages.push_back(std::move(msg));
}

}  // namespace

LegalityReport check_legal(const Design& d, const Library& lib,
                           const Site& site) {
  LegalityReport rep;

  struct Entry {
    Rect r;
    const Component* c;
  };
  std::vector<Entry> per_die[2];

  for (const Component& c : d.components) {
    if (c.status == PlaceStatus::UNPLACED) {
      ++rep.unplaced;
      note(rep, "unplaced: " + c.name);
      continue;
    }
    const CellMaster& m = lib.at(c.master);
    const Rect die_rect = (c.die == Die::TOP && d.die_top) ? *d.die_top
                                                           : d.die_bottom;
    Rect r = component_rect(c, m);
    if (!die_rect.contains(r)) {
      ++rep.outside_die;
      note(rep, "outside die: " + c.name);
    }
    if (!m.is_macro() && site.width > 0 && site.height > 0) {
      if ((c.x - die_rect.lx) % site.width != 0 ||
          (c.y - die_rect.ly) % site.height != 0) {
        ++rep.off_site;
        note(rep, "off site grid: " + c.name);
      }
    }
    per_die[c.die == Die::TOP ? 1 : 0].push_back({r, &c});
  }

  for (auto& entries : per_die) {
    // Sweep over lx; only rects whose x spans intersect get compared.
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.r.lx < b.r.lx; });
    for (std::size_t i = 0; i < entries.size(); ++i) {
      for (std::size_t j = i + 1; j < entries.size(); ++j) {
        if (entries[j].r.lx >= entries[i].r.ux) break;
        if (entries[i].r.overlaps(entries[j].r)) {
          ++rep.overlaps;
          note(rep, "overlap: " + entries[i].c->name + " / " +
                        entries[j].c->name);
        }
      }
    }
  }
  return rep;
}

}  // namespace open3d
