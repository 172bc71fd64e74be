#include <sstream>

#include "lexer.hpp"
#include "open3d/lefdef.hpp"

namespace open3d {

namespace {

using detail::Lexer;
using detail::Token;

DbUnit parse_um_token(Lexer& lex) {
  Token t = lex.next();
  try {
    return um_from_text(t.text);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), t.line, t.col);
  }
}

DbUnit parse_positive_um(Lexer& lex, const std::string& what) {
  Token t = lex.peek();
  DbUnit v = parse_um_token(lex);
  if (v <= 0)
    throw ParseError("non-positive " + what + ": " + um_text(v), t.line, t.col);
  return v;
}

Rect parse_rect(Lexer& lex) {
  Rect r;
  r.lx = parse_um_token(lex);
  r.ly = parse_um_token(lex);
  r.ux = parse_um_token(lex);
  r.uy = parse_um_token(lex);
  if (!r.valid()) lex.fail("degenerate RECT (lx > ux or ly > uy)");
  return r;
}

DieSide die_side_from_text(const Token& t) {
  if (t.text == "BOTTOM") return DieSide::BOTTOM;
  if (t.text == "TOP") return DieSide::TOP;
  if (t.text == "BOND") return DieSide::BOND;
  throw ParseError("unknown die side '" + t.text + "'", t.line, t.col);
}

Layer parse_layer(Lexer& lex, std::vector<std::string>& warnings) {
  Layer layer;
  layer.name = lex.next().text;
  while (true) {
    Token t = lex.next();
    if (t.text == "END") {
      lex.expect(layer.name);
      break;
    }
    if (t.text == "TYPE") {
      Token k = lex.next();
      if (k.text == "ROUTING")
        layer.kind = LayerKind::ROUTING;
      else if (k.text == "CUT")
        layer.kind = LayerKind::CUT;
      else
        throw ParseError("unknown layer TYPE '" + k.text + "'", k.line, k.col);
      lex.expect(";");
    } else if (t.text == "DIRECTION") {
      Token d = lex.next();
      if (d.text == "HORIZONTAL")
        layer.direction = LayerDir::HORIZONTAL;
      else if (d.text == "VERTICAL")
        layer.direction = LayerDir::VERTICAL;
      else
        throw ParseError("unknown DIRECTION '" + d.text + "'", d.line, d.col);
      lex.expect(";");
    } else if (t.text == "PITCH") {
      layer.pitch = parse_positive_um(lex, "PITCH");
      lex.expect(";");
    } else if (t.text == "WIDTH") {
      layer.width = parse_positive_um(lex, "WIDTH");
      lex.expect(";");
    } else if (t.text == "PROPERTY") {
      Token p = lex.next();
      if (p.text == "dieSide") {
        layer.die_side = die_side_from_text(lex.next());
      } else {
        warnings.push_back("skipped LAYER property '" + p.text + "' in " +
                           layer.name);
        while (lex.peek().text != ";") lex.next();
      }
      lex.expect(";");
    } else {
      warnings.push_back("skipped LAYER statement '" + t.text + "' in " +
                         layer.name);
      lex.skip_statement();
    }
  }
  if (layer.kind == LayerKind::ROUTING && (layer.pitch <= 0 || layer.width <= 0))
    throw ParseError("ROUTING layer " + layer.name +
                         " requires positive PITCH and WIDTH",
                     0, 0);
  return layer;
}

ViaDef parse_via(Lexer& lex) {
  ViaDef via;
  via.name = lex.next().text;
  if (lex.peek().text == "DEFAULT") lex.next();
  std::string current_layer;
  while (true) {
    Token t = lex.next();
    if (t.text == "END") {
      lex.expect(via.name);
      break;
    }
    if (t.text == "LAYER") {
      current_layer = lex.next().text;
      lex.expect(";");
    } else if (t.text == "RECT") {
      if (current_layer.empty())
        throw ParseError("RECT before LAYER in VIA " + via.name, t.line, t.col);
      via.geometry.push_back({current_layer, parse_rect(lex)});
      lex.expect(";");
    } else {
      lex.skip_statement();
    }
  }
  return via;
}

Site parse_site(Lexer& lex) {
  Site site;
  site.name = lex.next().text;
  while (true) {
    Token t = lex.next();
    if (t.text == "END") {
      lex.expect(site.name);
      break;
    }
    if (t.text == "SIZE") {
      site.width = parse_positive_um(lex, "site width");
      lex.expect("BY");
      site.height = parse_positive_um(lex, "site height");
      lex.expect(";");
    } else {
      lex.skip_statement();
    }
  }
  return site;
}

MasterPin parse_macro_pin(Lexer& lex, std::vector<std::string>& warnings) {
  MasterPin pin;
  pin.name = lex.next().text;
  while (true) {
    Token t = lex.next();
    if (t.text == "END") {
      lex.expect(pin.name);
      break;
    }
    if (t.text == "DIRECTION") {
      Token d = lex.next();
      if (d.text == "INPUT")
        pin.direction = PinDir::INPUT;
      else if (d.text == "OUTPUT")
        pin.direction = PinDir::OUTPUT;
      else if (d.text == "INOUT")
        pin.direction = PinDir::INOUT;
      else
        throw ParseError("unknown pin DIRECTION '" + d.text + "'", d.line, d.col);
      lex.expect(";");
    } else if (t.text == "PORT") {
      std::string current_layer;
      while (true) {
        Token u = lex.next();
        if (u.text == "END") break;
        if (u.text == "LAYER") {
          current_layer = lex.next().text;
          lex.expect(";");
        } else if (u.text == "RECT") {
          if (current_layer.empty())
            throw ParseError("RECT before LAYER in PIN " + pin.name, u.line,
                             u.col);
          pin.rects.push_back({current_layer, parse_rect(lex)});
          lex.expect(";");
        } else {
          warnings.push_back("skipped PORT statement '" + u.text + "'");
          lex.skip_statement();
        }
      }
    } else {
      warnings.push_back("skipped PIN statement '" + t.text + "' in " +
                         pin.name);
      lex.skip_statement();
    }
  }
  return pin;
}

CellMaster parse_macro(Lexer& lex, std::vector<std::string>& warnings) {
  CellMaster m;
  m.name = lex.next().text;
  m.variant = variant_from_name(m.name);
  while (true) {
    Token t = lex.next();
    if (t.text == "END") {
      lex.expect(m.name);
      break;
    }
    if (t.text == "CLASS") {
      Token c = lex.next();
      if (c.text == "CORE")
        m.cls = MasterClass::CORE;
      else if (c.text == "BLOCK")
        m.cls = MasterClass::BLOCK;
      else {
        warnings.push_back("unknown CLASS '" + c.text + "' in " + m.name +
                           ", treating as CORE");
        m.cls = MasterClass::CORE;
      }
      lex.expect(";");
    } else if (t.text == "SIZE") {
      m.width = parse_positive_um(lex, "macro width");
      lex.expect("BY");
      m.height = parse_positive_um(lex, "macro height");
      lex.expect(";");
    } else if (t.text == "PIN") {
      m.pins.push_back(parse_macro_pin(lex, warnings));
    } else if (t.text == "OBS") {
      std::string current_layer;
      while (true) {
        Token u = lex.next();
        if (u.text == "END") break;
        if (u.text == "LAYER") {
          current_layer = lex.next().text;
          lex.expect(";");
        } else if (u.text == "RECT") {
          if (current_layer.empty())
            throw ParseError("RECT before LAYER in OBS of " + m.name, u.line,
                             u.col);
          m.obstructions.push_back({current_layer, parse_rect(lex)});
          lex.expect(";");
        } else {
          warnings.push_back("skipped OBS statement '" + u.text + "'");
          lex.skip_statement();
        }
      }
    } else {
      warnings.push_back("skipped MACRO statement '" + t.text + "' in " +
                         m.name);
      lex.skip_statement();
    }
  }
  return m;
}

void check_layer_refs(const Technology& tech,
                      const std::vector<CellMaster>& masters) {
  auto require = [&](const std::string& layer, const std::string& where) {
    if (!tech.find_layer(layer))
      throw ParseError("reference to undeclared layer '" + layer + "' in " +
                           where,
                       0, 0);
  };
  for (const auto& via : tech.vias)
    for (const auto& g : via.geometry) require(g.layer, "VIA " + via.name);
  for (const auto& m : masters) {
    for (const auto& p : m.pins)
      for (const auto& r : p.rects) require(r.layer, "MACRO " + m.name);
    for (const auto& o : m.obstructions) require(o.layer, "MACRO " + m.name);
  }
}

}  // namespace

LefFile parse_lef(const std::string& text) {
  Lexer lex(text);
  LefFile out;
  Technology tech;
  bool saw_layers = false;
  while (!lex.eof()) {
    Token t = lex.next();
    if (t.text == "VERSION") {
      lex.skip_statement();
    } else if (t.text == "UNITS") {
      while (true) {
        Token u = lex.next();
        if (u.text == "END") {
          lex.expect("UNITS");
          break;
        }
        if (u.text == "DATABASE") {
          lex.expect("MICRONS");
          Token n = lex.next();
          if (n.text != std::to_string(kDbuPerMicron))
            throw ParseError("unsupported DATABASE MICRONS '" + n.text +
                                 "' (expected 1000)",
                             n.line, n.col);
          lex.expect(";");
        } else {
          lex.skip_statement();
        }
      }
    } else if (t.text == "LAYER") {
      tech.layers.push_back(parse_layer(lex, out.warnings));
      saw_layers = true;
    } else if (t.text == "VIA") {
      tech.vias.push_back(parse_via(lex));
      saw_layers = true;
    } else if (t.text == "SITE") {
      tech.sites.push_back(parse_site(lex));
      saw_layers = true;
    } else if (t.text == "MACRO") {
      out.masters.push_back(parse_macro(lex, out.warnings));
    } else if (t.text == "END") {
      if (!lex.eof() && lex.peek().text == "LIBRARY") lex.next();
      break;
    } else {
      out.warnings.push_back("skipped top-level statement '" + t.text + "'");
      lex.skip_statement();
    }
  }
  if (saw_layers) {
    check_layer_refs(tech, out.masters);
    out.tech = std::move(tech);
  }
  return out;
}

namespace {

const char* die_side_name(DieSide s) {
  switch (s) {
    case DieSide::BOTTOM: return "BOTTOM";
    case DieSide::TOP: return "TOP";
    case DieSide::BOND: return "BOND";
  }
  return "BOTTOM";
}

const char* pin_dir_name(PinDir d) {
  switch (d) {
    case PinDir::INPUT: return "INPUT";
    case PinDir::OUTPUT: return "OUTPUT";
    case PinDir::INOUT: return "INOUT";
  }
  return "INPUT";
}

void write_rect(std::ostream& os, const Rect& r) {
  os << um_text(r.lx) << ' ' << um_text(r.ly) << ' ' << um_text(r.ux) << ' '
     << um_text(r.uy);
}

}  // namespace

std::string write_lef(const std::optional<Technology>& tech,
                      const std::vector<CellMaster>& masters) {
  std::ostringstream os;
  os << "VERSION 5.8 ;\n";
  os << "UNITS\n  DATABASE MICRONS " << kDbuPerMicron << " ;\nEND UNITS\n";
  if (tech) {
    bool is_3d = tech->has_bond_layer();
    for (const auto& l : tech->layers) {
      os << "LAYER " << l.name << "\n";
      os << "  TYPE " << (l.kind == LayerKind::ROUTING ? "ROUTING" : "CUT")
         << " ;\n";
      if (l.kind == LayerKind::ROUTING) {
        os << "  DIRECTION "
           << (l.direction == LayerDir::HORIZONTAL ? "HORIZONTAL" : "VERTICAL")
           << " ;\n";
        os << "  PITCH " << um_text(l.pitch) << " ;\n";
        os << "  WIDTH " << um_text(l.width) << " ;\n";
      } else if (l.pitch > 0 || l.width > 0) {
        if (l.pitch > 0) os << "  PITCH " << um_text(l.pitch) << " ;\n";
        if (l.width > 0) os << "  WIDTH " << um_text(l.width) << " ;\n";
      }
      if (is_3d) os << "  PROPERTY dieSide " << die_side_name(l.die_side) << " ;\n";
      os << "END " << l.name << "\n";
    }
    for (const auto& v : tech->vias) {
      os << "VIA " << v.name << " DEFAULT\n";
      std::string current;
      for (const auto& g : v.geometry) {
        if (g.layer != current) {
          os << "  LAYER " << g.layer << " ;\n";
          current = g.layer;
        }
        os << "    RECT ";
        write_rect(os, g.rect);
        os << " ;\n";
      }
      os << "END " << v.name << "\n";
    }
    for (const auto& s : tech->sites) {
      os << "SITE " << s.name << "\n  SIZE " << um_text(s.width) << " BY "
         << um_text(s.height) << " ;\nEND " << s.name << "\n";
    }
  }
  for (const auto& m : masters) {
    os << "MACRO " << m.name << "\n";
    os << "  CLASS " << (m.cls == MasterClass::BLOCK ? "BLOCK" : "CORE")
       << " ;\n";
    os << "  SIZE " << um_text(m.width) << " BY " << um_text(m.height)
       << " ;\n";
    for (const auto& p : m.pins) {
      os << "  PIN " << p.name << "\n";
      os << "    DIRECTION " << pin_dir_name(p.direction) << " ;\n";
      if (!p.rects.empty()) {
        os << "    PORT\n";
        std::string current;
        for (const auto& r : p.rects) {
          if (r.layer != current) {
            os << "      LAYER " << r.layer << " ;\n";
            current = r.layer;
          }
          os << "        RECT ";
          write_rect(os, r.rect);
          os << " ;\n";
        }
        os << "    END\n";
      }
      os << "  END " << p.name << "\n";
    }
    if (!m.obstructions.empty()) {
      os << "  OBS\n";
      std::string current;
      for (const auto& o : m.obstructions) {
        if (o.layer != current) {
          os << "    LAYER " << o.layer << " ;\n";
          current = o.layer;
        }
        os << "      RECT ";
        write_rect(os, o.rect);
        os << " ;\n";
      }
      os << "  END\n";
    }
    os << "END " << m.name << "\n";
  }
  os << "END LIBRARY\n";
  return os.str();
}

}  // namespace open3d
