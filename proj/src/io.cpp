#include "thinhomog/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace thinhomog {

std::string format_float(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string CsvTable::to_string() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
  return out.str();
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

void write_csv_atomic(const std::string& path, const CsvTable& table) {
  write_text_atomic(path, table.to_string());
}

CsvTable convergence_csv(const ConvergenceTable& table) {
  CsvTable csv;
  csv.header = {"eps", "N", "metric", "value", "ratio"};
  std::map<std::string, double> previous;
  for (const auto& row : table.rows) {
    std::string ratio;
    auto it = previous.find(row.metric);
    if (it != previous.end() && row.value != 0.0)
      ratio = format_float(it->second / row.value);
    previous[row.metric] = row.value;
    csv.rows.push_back({format_float(row.eps), std::to_string(row.mesh_columns),
                        row.metric, format_float(row.value), ratio});
  }
  return csv;
}

namespace {

template <class Mesh>
std::string vtk_common(const Mesh& m, const std::vector<int>* strip,
                       const std::map<std::string, Vector>& point_fields) {
  std::ostringstream out;
  out << "# vtk DataFile Version 2.0\n";
  out << "thinhomog mesh\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << m.vertices.size() << " double\n";
  for (const auto& v : m.vertices)
    out << format_float(v[0]) << ' ' << format_float(v[1]) << " 0\n";
  out << "CELLS " << m.triangles.size() << ' ' << 4 * m.triangles.size() << '\n';
  for (const auto& t : m.triangles)
    out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << m.triangles.size() << '\n';
  for (std::size_t i = 0; i < m.triangles.size(); ++i) out << "5\n";
  if (strip) {
    std::vector<int> flag(m.triangles.size(), 0);
    for (int k : *strip) flag[static_cast<std::size_t>(k)] = 1;
    out << "CELL_DATA " << m.triangles.size() << '\n';
    out << "SCALARS strip int 1\nLOOKUP_TABLE default\n";
    for (int f : flag) out << f << '\n';
  }
  if (!point_fields.empty()) {
    out << "POINT_DATA " << m.vertices.size() << '\n';
    for (const auto& [name, values] : point_fields) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (Index i = 0; i < values.size(); ++i) out << format_float(values[i]) << '\n';
    }
  }
  return out.str();
}

}  // namespace

std::string vtk_string(const ThinMesh& m,
                       const std::map<std::string, Vector>& point_fields) {
  return vtk_common(m, &m.strip_elements, point_fields);
}

std::string vtk_string(const CellMesh& m,
                       const std::map<std::string, Vector>& point_fields) {
  return vtk_common(m, nullptr, point_fields);
}

}  // namespace thinhomog
