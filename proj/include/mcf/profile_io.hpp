#pragma once

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "mcf/surface.hpp"

namespace mcf {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, int line, int column, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct ProfileFile {
  RotationSignature signature;
  ProfileCurve profile;
};

// Text format: optional '#' comments, a header `signature <p> <q> [open|closed]`,
// then one `u v` pair per line. Without the topology token a profile whose last
// sample lies within one spacing of its first is read as closed.
ProfileFile parse_profile(std::istream& in, const std::string& source = "<input>");
ProfileFile read_profile_file(const std::string& path);

void write_profile(std::ostream& out, const DiscreteHypersurface& s);

// Per-cell records (position, normal, curvatures, weight) as indented text.
void write_surface_document(std::ostream& out, const DiscreteHypersurface& s);

}  // namespace mcf
