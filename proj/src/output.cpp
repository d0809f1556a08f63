#include "phasetop/output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "phasetop/atomic_file.hpp"
#include "phasetop/errors.hpp"

namespace phasetop {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string readTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void appendTensorField(std::ostringstream& out, const char* name,
                       const std::vector<DevTensor2>& field) {
  out << "SCALARS " << name << " double 3\nLOOKUP_TABLE default\n";
  for (const auto& q : field) out << fmt17(q.xx) << ' ' << fmt17(-q.xx) << ' ' << fmt17(q.xy) << '\n';
}

}  // namespace

std::string formatVtk(const Mesh& mesh, const VtkFields& f) {
  const int nn = mesh.numNodes(), nt = mesh.numTriangles();
  if (f.z.size() != 0 && f.z.size() != nn) throw ValidationError("vtk: z has wrong size");
  if (f.u.size() != 0 && f.u.size() != 2 * nn) throw ValidationError("vtk: u has wrong size");
  for (const auto* cell : {&f.p, &f.p_bar, &f.rho, &f.pi})
    if (!cell->empty() && static_cast<int>(cell->size()) != nt)
      throw ValidationError("vtk: cell field has wrong size");

  std::ostringstream out;
  out << "# vtk DataFile Version 3.0\nphasetop\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nn << " double\n";
  for (const auto& x : mesh.nodes) out << fmt17(x.x()) << ' ' << fmt17(x.y()) << " 0\n";
  out << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << nt << '\n';
  for (int t = 0; t < nt; ++t) out << "5\n";

  if (f.z.size() || f.u.size()) {
    out << "POINT_DATA " << nn << '\n';
    if (f.z.size()) {
      out << "SCALARS z double 1\nLOOKUP_TABLE default\n";
      for (int i = 0; i < nn; ++i) out << fmt17(f.z[i]) << '\n';
    }
    if (f.u.size()) {
      out << "VECTORS u double\n";
      for (int i = 0; i < nn; ++i) out << fmt17(f.u[2 * i]) << ' ' << fmt17(f.u[2 * i + 1]) << " 0\n";
    }
  }
  if (!f.p.empty() || !f.p_bar.empty() || !f.rho.empty() || !f.pi.empty()) {
    out << "CELL_DATA " << nt << '\n';
    if (!f.p.empty()) appendTensorField(out, "p", f.p);
    if (!f.p_bar.empty()) appendTensorField(out, "p_bar", f.p_bar);
    if (!f.rho.empty()) appendTensorField(out, "rho", f.rho);
    if (!f.pi.empty()) appendTensorField(out, "pi", f.pi);
  }
  return out.str();
}

void writeVtk(const Mesh& mesh, const VtkFields& fields, const std::string& path) {
  writeFileAtomically(path, formatVtk(mesh, fields));
}

VtkData readVtk(const std::string& path) {
  std::istringstream in(readTextFile(path));
  VtkData d;
  std::string word;
  std::map<std::string, std::vector<double>>* target = nullptr;
  auto fail = [&](const std::string& why) { throw ValidationError(path + ": " + why); };
  auto readValues = [&](std::size_t count) {
    std::vector<double> v(count);
    for (auto& x : v)
      if (!(in >> x)) fail("truncated data");
    return v;
  };
  while (in >> word) {
    if (word == "POINTS") {
      std::string type;
      in >> d.num_points >> type;
      readValues(3 * static_cast<std::size_t>(d.num_points));
    } else if (word == "CELLS") {
      int n = 0, total = 0;
      in >> n >> total;
      d.num_cells = n;
      readValues(total);
    } else if (word == "CELL_TYPES") {
      int n = 0;
      in >> n;
      readValues(n);
    } else if (word == "POINT_DATA") {
      in >> word;
      target = &d.point_data;
    } else if (word == "CELL_DATA") {
      in >> word;
      target = &d.cell_data;
    } else if (word == "SCALARS") {
      std::string name, type, lookup, table;
      int comps = 1;
      in >> name >> type >> comps >> lookup >> table;
      if (!target) fail("data before POINT_DATA/CELL_DATA");
      const int n = target == &d.point_data ? d.num_points : d.num_cells;
      (*target)[name] = readValues(static_cast<std::size_t>(n) * comps);
    } else if (word == "VECTORS") {
      std::string name, type;
      in >> name >> type;
      if (!target) fail("data before POINT_DATA/CELL_DATA");
      const int n = target == &d.point_data ? d.num_points : d.num_cells;
      (*target)[name] = readValues(3 * static_cast<std::size_t>(n));
    }
  }
  return d;
}

std::vector<DevTensor2> unflattenDev(const std::vector<double>& flat) {
  std::vector<DevTensor2> out(flat.size() / 3);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {flat[3 * i], flat[3 * i + 2]};
  return out;
}

static const char* kHistoryHeader = "iteration,gamma,objective,grad_norm,newton_iterations,tau";

std::string formatHistoryCsv(const std::vector<HistoryEntry>& history) {
  std::string out = std::string(kHistoryHeader) + "\n";
  for (const auto& h : history)
    out += std::to_string(h.iteration) + "," + fmt17(h.gamma) + "," + fmt17(h.objective) + "," +
           fmt17(h.grad_norm) + "," + std::to_string(h.newton_iterations) + "," + fmt17(h.tau) +
           "\n";
  return out;
}

void writeHistoryCsv(const std::vector<HistoryEntry>& history, const std::string& path) {
  writeFileAtomically(path, formatHistoryCsv(history));
}

std::vector<HistoryEntry> parseHistoryCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHistoryHeader)
    throw ValidationError("history csv: unexpected header");
  std::vector<HistoryEntry> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    HistoryEntry h;
    char c[5];
    std::istringstream ls(line);
    if (!(ls >> h.iteration >> c[0] >> h.gamma >> c[1] >> h.objective >> c[2] >> h.grad_norm >>
          c[3] >> h.newton_iterations >> c[4] >> h.tau))
      throw ValidationError("history csv: malformed row " + std::to_string(row));
    out.push_back(h);
  }
  return out;
}

std::vector<HistoryEntry> readHistoryCsv(const std::string& path) {
  return parseHistoryCsv(readTextFile(path));
}

std::string formatStageCsv(const std::vector<StageReport>& stages) {
  std::string out =
      "gamma,iterations,stop,objective,grad_norm,r1,r2,r3,max_rho_excess,state_residual,"
      "adjoint_residual,energy_gap,gap_bound,z_change_l2\n";
  for (const auto& s : stages) {
    const auto& o = s.optimality;
    out += fmt17(s.gamma) + "," + std::to_string(s.iterations) + "," + stopReasonName(s.stop) +
           "," + fmt17(s.objective) + "," + fmt17(s.grad_norm) + "," + fmt17(o.r1) + "," +
           fmt17(o.r2) + "," + fmt17(o.r3) + "," + fmt17(o.max_rho_excess) + "," +
           fmt17(o.state_residual) + "," + fmt17(o.adjoint_residual) + "," + fmt17(s.energy_gap) +
           "," + fmt17(s.gap_bound) + "," + fmt17(s.z_change_l2) + "\n";
  }
  return out;
}

}  // namespace phasetop
