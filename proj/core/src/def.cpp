#include <set>
#include <sstream>

#include "lexer.hpp"
#include "open3d/lefdef.hpp"

namespace open3d {

namespace {

using detail::Lexer;
using detail::Token;

DbUnit parse_dbu(Lexer& lex) {
  Token t = lex.next();
  try {
    std::size_t used = 0;
    DbUnit v = std::stoll(t.text, &used);
    if (used != t.text.size()) throw std::invalid_argument(t.text);
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected integer coordinate, got '" + t.text + "'",
                     t.line, t.col);
  }
}

Point parse_point(Lexer& lex) {
  lex.expect("(");
  Point p;
  p.x = parse_dbu(lex);
  p.y = parse_dbu(lex);
  lex.expect(")");
  return p;
}

Die die_from_master(const std::string& master) {
  switch (variant_from_name(master)) {
    case MasterVariant::TOP:
    case MasterVariant::SHRUNK_TOP:
      return Die::TOP;
    default:
      return Die::BOTTOM;  // unsuffixed masters default to the bottom die
  }
}

void parse_components(Lexer& lex, const Library& masters, Design& d,
                      std::vector<std::string>& warnings) {
  lex.skip_statement();  // count
  std::set<std::string> seen;
  while (true) {
    Token t = lex.next();
    if (t.text == "END") {
      lex.expect("COMPONENTS");
      break;
    }
    if (t.text != "-")
      throw ParseError("expected '-' in COMPONENTS, got '" + t.text + "'",
                       t.line, t.col);
    Component c;
    Token name = lex.next();
    c.name = name.text;
    if (!seen.insert(c.name).second)
      throw ParseError("duplicate component '" + c.name + "'", name.line,
                       name.col);
    Token master = lex.next();
    c.master = master.text;
    if (!masters.find(c.master))
      throw ParseError("unresolved master '" + c.master + "'", master.line,
                       master.col);
    c.die = die_from_master(c.master);
    while (lex.peek().text == "+") {
      lex.next();
      Token attr = lex.next();
      if (attr.text == "PLACED" || attr.text == "FIXED") {
        c.status = attr.text == "FIXED" ? PlaceStatus::FIXED : PlaceStatus::PLACED;
        Point p = parse_point(lex);
        c.x = p.x;
        c.y = p.y;
        c.orient = orient_from_name(lex.next().text);
      } else if (attr.text == "UNPLACED") {
        c.status = PlaceStatus::UNPLACED;
      } else {
        warnings.push_back("skipped COMPONENT attribute '+" + attr.text + "'");
        while (lex.peek().text != "+" && lex.peek().text != ";") lex.next();
      }
    }
    lex.expect(";");
    d.components.push_back(std::move(c));
  }
}

void parse_pins(Lexer& lex, Design& d, std::vector<std::string>& warnings) {
  lex.skip_statement();  // count
  while (true) {
    Token t = lex.next();
    if (t.text == "END") {
      lex.expect("PINS");
      break;
    }
    if (t.text != "-")
      throw ParseError("expected '-' in PINS, got '" + t.text + "'", t.line,
                       t.col);
    Port p;
    p.name = lex.next().text;
    while (lex.peek().text == "+") {
      lex.next();
      Token attr = lex.next();
      if (attr.text == "DIRECTION") {
        Token dir = lex.next();
        if (dir.text == "INPUT")
          p.direction = PinDir::INPUT;
        else if (dir.text == "OUTPUT")
          p.direction = PinDir::OUTPUT;
        else if (dir.text == "INOUT")
          p.direction = PinDir::INOUT;
        else
          throw ParseError("unknown pin DIRECTION '" + dir.text + "'",
                           dir.line, dir.col);
      } else if (attr.text == "LAYER") {
        p.layer = lex.next().text;
      } else if (attr.text == "DIE") {
        Token side = lex.next();
        if (side.text == "TOP")
          p.die = Die::TOP;
        else if (side.text == "BOTTOM")
          p.die = Die::BOTTOM;
        else
          throw ParseError("unknown DIE '" + side.text + "'", side.line,
                           side.col);
      } else if (attr.text == "PLACED" || attr.text == "FIXED") {
        Point pt = parse_point(lex);
        p.x = pt.x;
        p.y = pt.y;
        lex.next();  // orientation, ignored for point ports
      } else {
        warnings.push_back("skipped PIN attribute '+" + attr.text + "'");
        while (lex.peek().text != "+" && lex.peek().text != ";") lex.next();
      }
    }
    lex.expect(";");
    d.io_ports.push_back(std::move(p));
  }
}

void parse_nets(Lexer& lex, const Library& masters, Design& d) {
  lex.skip_statement();  // count
  DesignIndex index(d);
  while (true) {
    Token t = lex.next();
    if (t.text == "END") {
      lex.expect("NETS");
      break;
    }
    if (t.text != "-")
      throw ParseError("expected '-' in NETS, got '" + t.text + "'", t.line,
                       t.col);
    Net net;
    net.name = lex.next().text;
    while (lex.peek().text == "(") {
      lex.next();
      Token a = lex.next();
      Token b = lex.next();
      lex.expect(")");
      NetPinRef ref;
      if (a.text == "PIN") {
        ref.is_port = true;
        ref.pin = b.text;
        if (index.port(ref.pin) < 0)
          throw ParseError("net '" + net.name + "' references unknown port '" +
                               ref.pin + "'",
                           b.line, b.col);
      } else {
        ref.comp = a.text;
        ref.pin = b.text;
        int ci = index.component(ref.comp);
        if (ci < 0)
          throw ParseError("net '" + net.name +
                               "' references unknown component '" + ref.comp +
                               "'",
                           a.line, a.col);
        const CellMaster& m = masters.at(d.components[ci].master);
        if (!m.find_pin(ref.pin))
          throw ParseError("net '" + net.name + "' references unknown pin '" +
                               ref.comp + "/" + ref.pin + "'",
                           b.line, b.col);
      }
      net.pins.push_back(std::move(ref));
    }
    lex.expect(";");
    d.nets.push_back(std::move(net));
  }
}

}  // namespace

DefFile parse_def(const std::string& text, const Library& masters) {
  Lexer lex(text);
  DefFile out;
  Design& d = out.design;
  bool two_dies = false;
  for (const auto& c : lex.comments())
    if (c.find("open3d dies 2") != std::string::npos) two_dies = true;
  while (!lex.eof()) {
    Token t = lex.next();
    if (t.text == "VERSION") {
      lex.skip_statement();
    } else if (t.text == "DESIGN") {
      d.name = lex.next().text;
      lex.expect(";");
    } else if (t.text == "UNITS") {
      lex.expect("DISTANCE");
      lex.expect("MICRONS");
      Token n = lex.next();
      if (n.text != std::to_string(kDbuPerMicron))
        throw ParseError("unsupported DISTANCE MICRONS '" + n.text +
                             "' (expected 1000)",
                         n.line, n.col);
      lex.expect(";");
    } else if (t.text == "DIEAREA") {
      Point a = parse_point(lex);
      Point b = parse_point(lex);
      lex.expect(";");
      d.die_bottom = Rect{a.x, a.y, b.x, b.y};
    } else if (t.text == "COMPONENTS") {
      parse_components(lex, masters, d, out.warnings);
    } else if (t.text == "PINS") {
      parse_pins(lex, d, out.warnings);
    } else if (t.text == "NETS") {
      parse_nets(lex, masters, d);
    } else if (t.text == "END") {
      if (!lex.eof() && lex.peek().text == "DESIGN") lex.next();
      break;
    } else {
      out.warnings.push_back("skipped DEF statement '" + t.text + "'");
      lex.skip_statement();
    }
  }
  if (two_dies) d.die_top = d.die_bottom;
  return out;
}

namespace {

std::string restore_full_master(const std::string& name) {
  const std::string suf = "_shrunk";
  if (name.size() > suf.size() &&
      name.compare(name.size() - suf.size(), suf.size(), suf) == 0)
    return name.substr(0, name.size() - suf.size());
  return name;
}

const char* pin_dir_name(PinDir d) {
  switch (d) {
    case PinDir::INPUT: return "INPUT";
    case PinDir::OUTPUT: return "OUTPUT";
    case PinDir::INOUT: return "INOUT";
  }
  return "INPUT";
}

}  // namespace

std::string write_def(const Design& d, DefMode mode) {
  const bool filter = mode != DefMode::COMBINED;
  const Die keep = mode == DefMode::TOP_ONLY ? Die::TOP : Die::BOTTOM;
  auto kept = [&](Die die) { return !filter || die == keep; };

  Rect die_area = d.die_bottom;
  if (mode == DefMode::TOP_ONLY && d.die_top) die_area = *d.die_top;

  std::vector<const Component*> comps;
  std::set<std::string> comp_names;
  for (const auto& c : d.components)
    if (kept(c.die)) {
      comps.push_back(&c);
      comp_names.insert(c.name);
    }
  std::vector<const Port*> ports;
  std::set<std::string> port_names;
  for (const auto& p : d.io_ports)
    if (kept(p.die)) {
      ports.push_back(&p);
      port_names.insert(p.name);
    }

  std::ostringstream os;
  os << "VERSION 5.8 ;\n";
  os << "DESIGN " << d.name << " ;\n";
  if (!filter && d.is_3d()) os << "# open3d dies 2\n";
  os << "UNITS DISTANCE MICRONS " << kDbuPerMicron << " ;\n";
  os << "DIEAREA ( " << die_area.lx << ' ' << die_area.ly << " ) ( "
     << die_area.ux << ' ' << die_area.uy << " ) ;\n";

  os << "COMPONENTS " << comps.size() << " ;\n";
  for (const Component* c : comps) {
    os << "- " << c->name << ' '
       << (filter ? restore_full_master(c->master) : c->master);
    if (c->status == PlaceStatus::UNPLACED) {
      os << " + UNPLACED";
    } else {
      os << (c->status == PlaceStatus::FIXED ? " + FIXED ( " : " + PLACED ( ")
         << c->x << ' ' << c->y << " ) " << orient_name(c->orient);
    }
    os << " ;\n";
  }
  os << "END COMPONENTS\n";

  os << "PINS " << ports.size() << " ;\n";
  for (const Port* p : ports) {
    os << "- " << p->name << " + DIRECTION " << pin_dir_name(p->direction);
    if (!p->layer.empty()) os << " + LAYER " << p->layer;
    if (p->die == Die::TOP && !filter) os << " + DIE TOP";
    os << " + PLACED ( " << p->x << ' ' << p->y << " ) N ;\n";
  }
  os << "END PINS\n";

  std::vector<std::pair<const Net*, std::vector<const NetPinRef*>>> nets;
  for (const auto& n : d.nets) {
    std::vector<const NetPinRef*> refs;
    for (const auto& r : n.pins) {
      if (r.is_port ? port_names.count(r.pin) > 0
                    : comp_names.count(r.comp) > 0)
        refs.push_back(&r);
    }
    if (!refs.empty()) nets.emplace_back(&n, std::move(refs));
  }
  os << "NETS " << nets.size() << " ;\n";
  for (const auto& [n, refs] : nets) {
    os << "- " << n->name;
    for (const NetPinRef* r : refs) {
      if (r->is_port)
        os << " ( PIN " << r->pin << " )";
      else
        os << " ( " << r->comp << ' ' << r->pin << " )";
    }
    os << " ;\n";
  }
  os << "END NETS\n";
  os << "END DESIGN\n";
  return os.str();
}

}  // namespace open3d
