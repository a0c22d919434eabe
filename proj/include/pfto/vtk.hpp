#pragma once

#include "pfto/mesh.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace pfto {

struct NamedField {
  std::string name;
  Vector values;  ///< one entry per vertex, or two (x, y interleaved) for vectors
};

/// Writes a legacy-VTK ASCII unstructured grid (cell type 5) with nodal data.
void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const std::vector<NamedField>& scalars,
               const std::vector<NamedField>& vectors = {});

}  // namespace pfto
