#include "solscale/map_format.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace solscale {

namespace {

double parse_number(const std::string& tok, const std::string& line) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size() || !std::isfinite(v))
    throw ConfigError("map: bad number '" + tok + "' in '" + line + "'");
  return v;
}

int parse_index(const std::string& tok, int limit, const std::string& line) {
  const double v = parse_number(tok, line);
  if (v != std::floor(v) || v < 1 || v > limit)
    throw ConfigError("map: index '" + tok + "' out of range 1.." + std::to_string(limit) + " in '" + line + "'");
  return static_cast<int>(v);
}

std::vector<double> parse_list(const std::string& tok, const std::string& line) {
  std::vector<double> out;
  if (tok == "-") return out;
  std::stringstream ss(tok);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item, line));
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

QiMap parse_map(GroupSpec spec, const std::vector<std::string>& lines) {
  std::vector<Stage> stages;
  CoordinateWise pending;
  bool have_pending = false;
  auto flush = [&] {
    if (have_pending) stages.emplace_back(pending);
    have_pending = false;
  };
  for (const std::string& raw : lines) {
    std::string line = raw.substr(0, raw.find('#'));
    std::istringstream is(line);
    std::vector<std::string> tok;
    for (std::string w; is >> w;) tok.push_back(w);
    if (tok.empty()) continue;
    const std::string& op = tok[0];
    try {
      if (op == "affine" || op == "pwl") {
        if (tok.size() != 4) throw ConfigError("map: '" + op + "' takes 3 arguments: '" + line + "'");
        const int i = parse_index(tok[1], spec.x_dim(), line) - 1;
        CoordinateMap f = op == "affine"
                              ? CoordinateMap::affine(parse_number(tok[2], line), parse_number(tok[3], line))
                              : CoordinateMap::piecewise(parse_list(tok[2], line), parse_list(tok[3], line));
        if (!have_pending) pending.maps.assign(static_cast<std::size_t>(spec.x_dim()), CoordinateMap::identity());
        have_pending = true;
        auto& slot = pending.maps[static_cast<std::size_t>(i)];
        slot = slot.then(f);
      } else if (op == "ltrans") {
        flush();
        const int want = spec.x_dim() + spec.t_dim();
        if (static_cast<int>(tok.size()) != want + 1)
          throw ConfigError("map: 'ltrans' takes " + std::to_string(want) + " coordinates: '" + line + "'");
        XVec x;
        TVec t;
        for (int i = 0; i < spec.x_dim(); ++i) x.push_back(parse_number(tok[static_cast<std::size_t>(i + 1)], line));
        for (int j = 0; j < spec.t_dim(); ++j)
          t.push_back(parse_number(tok[static_cast<std::size_t>(spec.x_dim() + j + 1)], line));
        stages.emplace_back(LeftTranslation{GroupPoint(spec, x, t)});
      } else if (op == "perm") {
        flush();
        const int xd = spec.x_dim();
        if (static_cast<int>(tok.size()) != xd + 1 && static_cast<int>(tok.size()) != xd + 2)
          throw ConfigError("map: 'perm' takes " + std::to_string(xd) + " indices and an optional t-sign");
        Permutation p;
        for (int i = 0; i < xd; ++i) p.sigma.push_back(parse_index(tok[static_cast<std::size_t>(i + 1)], xd, line) - 1);
        if (static_cast<int>(tok.size()) == xd + 2) {
          if (spec.rank() != 1) throw ConfigError("map: t-sign is only meaningful for n = 1");
          const double sign = parse_number(tok.back(), line);
          const double induced = p.sigma[0] == 0 ? 1.0 : -1.0;
          if (sign != induced)
            throw UnsupportedError("map: t-sign " + tok.back() + " does not match the permutation's induced action");
        }
        stages.emplace_back(std::move(p));
      } else if (op == "round") {
        flush();
        if (tok.size() != 1) throw ConfigError("map: 'round' takes no arguments");
        stages.emplace_back(RoundToNet{});
      } else {
        throw ConfigError("map: unknown stage '" + op + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const UnsupportedError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("map: ") + e.what() + " in '" + line + "'");
    }
  }
  flush();
  try {
    return QiMap(spec, std::move(stages));
  } catch (const Error& e) {
    throw ConfigError(std::string("map: ") + e.what());
  }
}

QiMap parse_map(GroupSpec spec, const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n' || c == ';') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  lines.push_back(cur);
  return parse_map(spec, lines);
}

std::vector<std::string> format_map(const QiMap& map) {
  std::vector<std::string> out;
  for (const Stage& s : map.stages()) {
    if (const auto* c = std::get_if<CoordinateWise>(&s)) {
      for (std::size_t i = 0; i < c->maps.size(); ++i) {
        const CoordinateMap& f = c->maps[i];
        if (f.is_identity()) continue;
        if (f.is_affine()) {
          out.push_back("affine " + std::to_string(i + 1) + " " + num(f.slopes().front()) + " " + num(f(0.0)));
        } else {
          // Knot form: breaks and slopes, with the value at zero restored by an offset stage.
          std::string b, sl;
          for (double v : f.knots_x()) b += (b.empty() ? "" : ",") + num(v);
          for (double v : f.slopes()) sl += (sl.empty() ? "" : ",") + num(v);
          out.push_back("pwl " + std::to_string(i + 1) + " " + b + " " + sl);
          if (f(0.0) != 0.0) out.push_back("affine " + std::to_string(i + 1) + " 1 " + num(f(0.0)));
        }
      }
    } else if (const auto* l = std::get_if<LeftTranslation>(&s)) {
      std::string line = "ltrans";
      for (double v : l->g.x()) line += " " + num(v);
      for (double v : l->g.t()) line += " " + num(v);
      out.push_back(line);
    } else if (const auto* p = std::get_if<Permutation>(&s)) {
      std::string line = "perm";
      for (int v : p->sigma) line += " " + std::to_string(v + 1);
      out.push_back(line);
    } else {
      out.push_back("round");
    }
  }
  return out;
}

}  // namespace solscale
