#pragma once

#include <map>
#include <string>
#include <vector>

#include "phasetop/optimizer.hpp"

namespace phasetop {

/// Nodal and per-triangle fields written to a VTK file. Empty vectors are
/// skipped.
struct VtkFields {
  Vector z;  // nodal
  Vector u;  // full displacement vector, 2 per node
  std::vector<DevTensor2> p, p_bar, rho, pi;
};

/// Legacy ASCII unstructured grid: POINTS, CELLS (type 5), POINT_DATA z and
/// u, CELL_DATA tensors as 3 components xx, yy, xy.
std::string formatVtk(const Mesh& mesh, const VtkFields& fields);
void writeVtk(const Mesh& mesh, const VtkFields& fields, const std::string& path);

/// Named data arrays of a legacy VTK file produced by writeVtk.
struct VtkData {
  int num_points = 0;
  int num_cells = 0;
  std::map<std::string, std::vector<double>> point_data;
  std::map<std::string, std::vector<double>> cell_data;
};
VtkData readVtk(const std::string& path);
/// Dev tensors from a flattened (xx, yy, xy) array.
std::vector<DevTensor2> unflattenDev(const std::vector<double>& flat);

std::string formatHistoryCsv(const std::vector<HistoryEntry>& history);
void writeHistoryCsv(const std::vector<HistoryEntry>& history, const std::string& path);
std::vector<HistoryEntry> parseHistoryCsv(const std::string& text);
std::vector<HistoryEntry> readHistoryCsv(const std::string& path);

std::string formatStageCsv(const std::vector<StageReport>& stages);

/// Shortest decimal that reads back to the same double (17 significant digits).
std::string fmt17(double v);

std::string readTextFile(const std::string& path);

}  // namespace phasetop
