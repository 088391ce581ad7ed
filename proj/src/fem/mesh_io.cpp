#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "msl/fem.hpp"

// Text format, one record per line:
//
//   # comment
//   nodes <count>
//   <x> <y> <z>                 (count lines, node ids are 0-based line order)
//   elements <count>
//   <n0> <n1> ... <n7>          (count lines)

namespace msl::fem {
namespace {

bool next_record(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw Error(Errc::MeshFormat, "line " + std::to_string(line_no) + ": " + what, line_no);
}

Index read_header(std::istream& in, const std::string& keyword, std::size_t& line_no) {
  std::string line;
  if (!next_record(in, line, line_no)) fail(line_no, "missing '" + keyword + "' header");
  std::istringstream ss(line);
  std::string word;
  Index count = -1;
  if (!(ss >> word >> count) || word != keyword || count < 0) {
    fail(line_no, "expected '" + keyword + " <count>'");
  }
  return count;
}

}  // namespace

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "# msl hex8 mesh\n";
  out << "nodes " << mesh.node_count() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& p : mesh.nodes) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  out << "elements " << mesh.element_count() << '\n';
  for (const auto& el : mesh.elements) {
    for (std::size_t a = 0; a < 8; ++a) out << el[a] << (a + 1 < 8 ? ' ' : '\n');
  }
}

Mesh read_mesh(std::istream& in) {
  Mesh mesh;
  std::size_t line_no = 0;
  std::string line;

  const Index node_count = read_header(in, "nodes", line_no);
  mesh.nodes.reserve(static_cast<std::size_t>(node_count));
  for (Index i = 0; i < node_count; ++i) {
    if (!next_record(in, line, line_no)) fail(line_no, "unexpected end of node list");
    std::istringstream ss(line);
    double x = 0, y = 0, z = 0;
    if (!(ss >> x >> y >> z)) fail(line_no, "expected three coordinates");
    mesh.nodes.emplace_back(x, y, z);
  }

  const Index element_count = read_header(in, "elements", line_no);
  mesh.elements.reserve(static_cast<std::size_t>(element_count));
  for (Index e = 0; e < element_count; ++e) {
    if (!next_record(in, line, line_no)) fail(line_no, "unexpected end of element list");
    std::istringstream ss(line);
    std::array<Index, 8> el{};
    for (auto& node : el) {
      if (!(ss >> node)) fail(line_no, "expected eight node indices");
    }
    mesh.elements.push_back(el);
  }
  mesh.validate();
  return mesh;
}

}  // namespace msl::fem
