// CSV/VTK/manifest output: 17-significant-digit locale-independent floats,
// atomic file writes (temp + rename).
#pragma once

#include <map>
#include <string>
#include <vector>

#include "thinhomog/converge.hpp"
#include "thinhomog/mesh.hpp"

namespace thinhomog {

/// Shortest-exact-ish decimal with 17 significant digits via std::to_chars.
std::string format_float(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const;
};

void write_text_atomic(const std::string& path, const std::string& content);
void write_csv_atomic(const std::string& path, const CsvTable& table);

/// ConvergenceTable as CSV with columns eps,N,metric,value,ratio, where ratio
/// is previous value / value within one metric (blank on the first level).
CsvTable convergence_csv(const ConvergenceTable& table);

/// VTK legacy 2.0 ASCII unstructured grid; cell data flags strip elements,
/// point_fields become POINT_DATA scalars.
std::string vtk_string(const ThinMesh& m,
                       const std::map<std::string, Vector>& point_fields = {});
std::string vtk_string(const CellMesh& m,
                       const std::map<std::string, Vector>& point_fields = {});

}  // namespace thinhomog
