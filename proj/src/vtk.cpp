#include "pfto/vtk.hpp"

#include <fstream>
#include <iomanip>

namespace pfto {

void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const std::vector<NamedField>& scalars,
               const std::vector<NamedField>& vectors) {
  const int nv = mesh.num_vertices();
  const int nt = mesh.num_triangles();
  for (const auto& f : scalars)
    if (f.values.size() != nv) throw InvalidInput("scalar field '" + f.name + "' has wrong length");
  for (const auto& f : vectors)
    if (f.values.size() != 2 * nv) throw InvalidInput("vector field '" + f.name + "' has wrong length");

  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << std::setprecision(17);
  os << "# vtk DataFile Version 3.0\n";
  os << "phase field topology optimization\n";
  os << "ASCII\n";
  os << "DATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << nv << " double\n";
  for (const auto& v : mesh.vertices()) os << v.x << ' ' << v.y << " 0\n";
  os << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (const auto& t : mesh.triangles()) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "CELL_TYPES " << nt << '\n';
  for (int t = 0; t < nt; ++t) os << "5\n";
  if (scalars.empty() && vectors.empty()) return;
  os << "POINT_DATA " << nv << '\n';
  for (const auto& f : scalars) {
    os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < nv; ++i) os << f.values[i] << '\n';
  }
  for (const auto& f : vectors) {
    os << "VECTORS " << f.name << " double\n";
    for (int i = 0; i < nv; ++i) os << f.values[2 * i] << ' ' << f.values[2 * i + 1] << " 0\n";
  }
  if (!os) throw Error("write failed for " + path.string());
}

}  // namespace pfto
