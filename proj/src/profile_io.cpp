#include "mcf/profile_io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <vector>

#include "mcf/format.hpp"

namespace mcf {

std::string num(double x) {
  char buf[40];
  if (x == 0.0) x = 0.0;  // fold -0 into 0 so output does not depend on its sign
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

namespace {

struct Token {
  std::string text;
  int column;  // 1-based
};

std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '#') break;
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) && line[j] != '#') ++j;
    out.push_back({line.substr(i, j - i), static_cast<int>(i) + 1});
    i = j;
  }
  return out;
}

double parse_double(const Token& t, const std::string& source, int line) {
  double v = 0.0;
  const char* b = t.text.data();
  const char* e = b + t.text.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e)
    throw ParseError(source, line, t.column + static_cast<int>(ptr - b), "expected a decimal number, got '" + t.text + "'");
  return v;
}

int parse_int(const Token& t, const std::string& source, int line) {
  int v = 0;
  const char* b = t.text.data();
  const char* e = b + t.text.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || v < 0)
    throw ParseError(source, line, t.column + static_cast<int>(ptr - b),
                     "expected a nonnegative integer, got '" + t.text + "'");
  return v;
}

}  // namespace

ProfileFile parse_profile(std::istream& in, const std::string& source) {
  ProfileFile pf;
  bool have_header = false;
  bool explicit_topology = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    if (!have_header) {
      if (toks[0].text != "signature")
        throw ParseError(source, lineno, toks[0].column, "expected header 'signature <p> <q>'");
      if (toks.size() < 3 || toks.size() > 4)
        throw ParseError(source, lineno, toks.back().column, "header needs p, q and an optional topology");
      pf.signature.p = parse_int(toks[1], source, lineno);
      pf.signature.q = parse_int(toks[2], source, lineno);
      if (toks.size() == 4) {
        if (toks[3].text == "open") {
          pf.profile.topology = Topology::open;
        } else if (toks[3].text == "closed") {
          pf.profile.topology = Topology::closed;
        } else {
          throw ParseError(source, lineno, toks[3].column, "topology must be 'open' or 'closed'");
        }
        explicit_topology = true;
      }
      have_header = true;
      continue;
    }
    if (toks.size() != 2)
      throw ParseError(source, lineno, toks.size() < 2 ? static_cast<int>(line.size()) + 1 : toks[2].column,
                       "expected exactly two numbers 'u v'");
    pf.profile.samples.emplace_back(parse_double(toks[0], source, lineno), parse_double(toks[1], source, lineno));
  }
  if (!have_header) throw ParseError(source, lineno + 1, 1, "missing 'signature' header");
  if (pf.profile.samples.size() < 3) throw ParseError(source, lineno + 1, 1, "profile needs at least 3 samples");
  if (!explicit_topology) {
    const auto& s = pf.profile.samples;
    double h = 0.0;
    for (size_t i = 0; i + 1 < s.size(); ++i) h += (s[i + 1] - s[i]).norm();
    h /= static_cast<double>(s.size() - 1);
    pf.profile.topology = (s.back() - s.front()).norm() <= 1.1 * h ? Topology::closed : Topology::open;
  }
  return pf;
}

ProfileFile read_profile_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, 0, "cannot open file");
  return parse_profile(in, path);
}

void write_profile(std::ostream& out, const DiscreteHypersurface& s) {
  out << "signature " << s.signature.p << ' ' << s.signature.q << ' '
      << (s.topology == Topology::closed ? "closed" : "open") << '\n';
  for (const Cell& c : s.cells) out << num(c.position.x()) << ' ' << num(c.position.y()) << '\n';
}

void write_surface_document(std::ostream& out, const DiscreteHypersurface& s) {
  static const char* prov[] = {"analytic", "discretized", "perturbed"};
  out << "surface:\n";
  out << "  signature: [" << s.signature.p << ", " << s.signature.q << "]\n";
  out << "  dimension: " << s.n() << '\n';
  out << "  provenance: " << prov[static_cast<int>(s.provenance)] << '\n';
  out << "  topology: " << (s.topology == Topology::closed ? "closed" : "open") << '\n';
  out << "  cell_count: " << s.size() << '\n';
  out << "cells:\n";
  for (int i = 0; i < s.size(); ++i) {
    const Cell& c = s.cells[i];
    VecN x = s.ambient_position(i), nn = s.ambient_normal(i);
    out << "  - index: " << i << '\n';
    out << "    position: [";
    for (int j = 0; j < x.size(); ++j) out << (j ? ", " : "") << num(x[j]);
    out << "]\n    normal: [";
    for (int j = 0; j < nn.size(); ++j) out << (j ? ", " : "") << num(nn[j]);
    out << "]\n    curvatures: [";
    auto k = s.principal_curvatures(i);
    for (size_t j = 0; j < k.size(); ++j) out << (j ? ", " : "") << num(k[j]);
    out << "]\n    mean_curvature: " << num(s.mean_curvature(i)) << '\n';
    out << "    weight: " << num(c.weight) << '\n';
    out << "    boundary: " << (c.boundary ? "true" : "false") << '\n';
  }
}

}  // namespace mcf
